// DOM controller: binds the static page skeleton to the pure view state.
// All user text goes through textContent, never innerHTML.

import { ApiError, ArenaApi } from "./api";
import {
  BattleView,
  Side,
  Sentiment,
  VoteOutcome,
  canEnd,
  canSend,
  canSubmitFeedback,
  canVote,
  initialView,
  reduce,
  turnsMissing,
  ViewEvent,
  anyMessageInFlight,
} from "./state";

const OUTCOME_TEXT: Record<VoteOutcome, string> = {
  crs1: "CRS 1 wins",
  crs2: "CRS 2 wins",
  draw: "Draw",
};

export class ArenaApp {
  view: BattleView = initialView();
  private ticker: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: ArenaApi,
    private readonly doc: Document = document,
    private readonly now: () => number = () => Date.now(),
  ) {
    for (const side of [1, 2] as Side[]) {
      this.el(`pane-${side}-send`).addEventListener("click", () => {
        void this.send(side);
      });
      this.input(side).addEventListener("keydown", (event) => {
        if ((event as KeyboardEvent).key === "Enter") void this.send(side);
      });
      this.el(`pane-${side}-satisfaction`).addEventListener("click", () => {
        void this.end(side, "satisfaction");
      });
      this.el(`pane-${side}-frustration`).addEventListener("click", () => {
        void this.end(side, "frustration");
      });
    }
    for (const outcome of ["crs1", "crs2", "draw"] as VoteOutcome[]) {
      this.el(`vote-${outcome}`).addEventListener("click", () => {
        void this.vote(outcome);
      });
    }
    this.el("feedback-send").addEventListener("click", () => {
      void this.feedback();
    });
    this.el("new-battle").addEventListener("click", () => {
      void this.boot();
    });
  }

  async boot(): Promise<void> {
    this.view = initialView();
    this.render();
    try {
      const session = await this.api.createSession();
      this.dispatch({ type: "session_created", userId: session.user_id });
      const battle = await this.api.startBattle(session.user_id);
      this.dispatch({
        type: "battle_started",
        battleId: battle.battle_id,
        labels: battle.labels,
        minUserTurns: battle.min_user_turns ?? 0,
      });
    } catch (error) {
      this.dispatch({ type: "banner", message: describe(error) });
    }
  }

  async send(side: Side): Promise<void> {
    const input = this.input(side);
    const text = input.value.trim();
    if (!text || !canSend(this.view, side)) return;
    input.value = "";
    this.dispatch({ type: "send_started", side, text, at: this.now() });
    try {
      const reply = await this.api.sendMessage(this.view.battleId!, side, text);
      this.dispatch({ type: "reply_received", side, text: reply.reply });
    } catch (error) {
      if (error instanceof ApiError) {
        // Server refused the turn: surface it, nothing to retry.
        this.dispatch({ type: "send_failed", side, message: describe(error) });
        this.dispatch({ type: "pane_error", side, message: describe(error) });
      } else {
        this.dispatch({
          type: "send_failed",
          side,
          message: "Could not reach the arena. Your message was kept — try sending again.",
        });
        const restore = this.view.panes[side].restoreDraft;
        if (restore) input.value = restore;
      }
    }
  }

  async end(side: Side, sentiment: Sentiment): Promise<void> {
    if (!canEnd(this.view, side)) return;
    const missing = turnsMissing(this.view, side);
    if (missing > 0) {
      this.dispatch({
        type: "pane_error",
        side,
        message:
          `Interact at least ${this.view.minUserTurns} times before ending ` +
          `this conversation (${missing} more to go).`,
      });
      return;
    }
    try {
      const ack = await this.api.endConversation(this.view.battleId!, side, sentiment);
      this.dispatch({ type: "pane_ended", side, sentiment, phase: ack.phase });
    } catch (error) {
      this.dispatch({ type: "pane_error", side, message: describe(error) });
    }
  }

  async vote(outcome: VoteOutcome): Promise<void> {
    if (!canVote(this.view)) return;
    this.dispatch({ type: "vote_started", outcome });
    try {
      await this.api.vote(this.view.battleId!, outcome);
      this.dispatch({ type: "vote_recorded", outcome });
    } catch (error) {
      this.dispatch({ type: "vote_failed", message: describe(error) });
    }
  }

  async feedback(): Promise<void> {
    const area = this.el("feedback-text") as HTMLTextAreaElement;
    const text = area.value.trim();
    if (!text || !canSubmitFeedback(this.view)) return;
    try {
      await this.api.submitFeedback(this.view.battleId!, text);
      this.dispatch({ type: "feedback_recorded" });
    } catch (error) {
      this.dispatch({ type: "banner", message: describe(error) });
    }
  }

  dispatch(event: ViewEvent): void {
    this.view = reduce(this.view, event);
    this.render();
  }

  render(): void {
    const view = this.view;
    for (const side of [1, 2] as Side[]) {
      this.renderPane(side);
    }
    for (const outcome of ["crs1", "crs2", "draw"] as VoteOutcome[]) {
      (this.el(`vote-${outcome}`) as HTMLButtonElement).disabled = !canVote(view);
    }
    const status = this.el("vote-status");
    if (view.outcome) {
      status.textContent = `Thanks for voting! Recorded: ${OUTCOME_TEXT[view.outcome]}.`;
    } else if (view.phase === "voting") {
      status.textContent = "Both conversations have ended — pick a winner or declare a draw.";
    } else {
      status.textContent = "Vote unlocks once you end both conversations.";
    }
    this.el("feedback-area").hidden = view.phase !== "done";
    (this.el("feedback-send") as HTMLButtonElement).disabled = !canSubmitFeedback(view);
    this.el("feedback-thanks").hidden = !view.feedbackSubmitted;
    this.el("new-battle").hidden = view.phase !== "done";
    const banner = this.el("global-banner");
    banner.textContent = view.banner ?? "";
    banner.hidden = !view.banner;
    this.updateTicker();
  }

  private renderPane(side: Side): void {
    const pane = this.view.panes[side];
    this.el(`pane-${side}-label`).textContent = pane.label;
    const transcript = this.el(`pane-${side}-transcript`);
    transcript.replaceChildren();
    for (const entry of pane.transcript) {
      transcript.appendChild(bubble(this.doc, entry.role, entry.text));
    }
    if (pane.inFlightText !== null) {
      const echo = bubble(this.doc, "user", pane.inFlightText);
      echo.classList.add("pending");
      transcript.appendChild(echo);
      const typing = bubble(this.doc, "system", this.typingText(side));
      typing.classList.add("typing");
      typing.id = `pane-${side}-typing`;
      transcript.appendChild(typing);
    }
    (this.el(`pane-${side}-input`) as HTMLInputElement).disabled = !canSend(this.view, side);
    (this.el(`pane-${side}-send`) as HTMLButtonElement).disabled = !canSend(this.view, side);
    const endDisabled = !canEnd(this.view, side);
    (this.el(`pane-${side}-satisfaction`) as HTMLButtonElement).disabled = endDisabled;
    (this.el(`pane-${side}-frustration`) as HTMLButtonElement).disabled = endDisabled;
    const verdict = this.el(`pane-${side}-verdict`);
    verdict.textContent = pane.ended
      ? `Conversation ended with ${pane.sentiment}. You cannot go back to it.`
      : "";
    const bannerEl = this.el(`pane-${side}-banner`);
    bannerEl.textContent = pane.banner ?? "";
    bannerEl.hidden = !pane.banner;
  }

  private typingText(side: Side): string {
    const since = this.view.panes[side].inFlightSince;
    const elapsed = since === null ? 0 : Math.max(0, this.now() - since) / 1000;
    return `${this.view.panes[side].label} is typing… ${elapsed.toFixed(1)}s`;
  }

  private updateTicker(): void {
    const busy = anyMessageInFlight(this.view);
    if (busy && this.ticker === null) {
      this.ticker = setInterval(() => {
        for (const side of [1, 2] as Side[]) {
          const typing = this.doc.getElementById(`pane-${side}-typing`);
          if (typing && this.view.panes[side].inFlightText !== null) {
            typing.textContent = this.typingText(side);
          }
        }
      }, 250);
    } else if (!busy && this.ticker !== null) {
      clearInterval(this.ticker);
      this.ticker = null;
    }
  }

  private input(side: Side): HTMLInputElement {
    return this.el(`pane-${side}-input`) as HTMLInputElement;
  }

  private el(id: string): HTMLElement {
    const element = this.doc.getElementById(id);
    if (!element) throw new Error(`missing element #${id}`);
    return element;
  }
}

function bubble(doc: Document, role: "user" | "system", text: string): HTMLElement {
  const node = doc.createElement("div");
  node.className = `bubble ${role}`;
  node.textContent = text;
  return node;
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    if (error.payload.error === "min_turns" && error.payload.required_turns) {
      const missing =
        error.payload.required_turns - (error.payload.actual_turns ?? 0);
      return (
        `Interact at least ${error.payload.required_turns} times before ` +
        `ending this conversation (${missing} more to go).`
      );
    }
    return error.payload.detail || error.payload.error;
  }
  return error instanceof Error ? error.message : String(error);
}
