// Pure view state for one battle page.
//
// The server is the source of truth: every field here is either the last
// server-acknowledged value or an explicitly marked in-flight action
// (optimistic user echo, vote in flight). `reduce` never mutates its input,
// so the UI after any event sequence is a pure function of that sequence —
// the property the snapshot tests pin down.

export type Side = 1 | 2;
export type Sentiment = "satisfaction" | "frustration";
export type VoteOutcome = "crs1" | "crs2" | "draw";

export interface ChatEntry {
  role: "user" | "system";
  text: string;
}

export interface PaneState {
  label: string;
  transcript: ChatEntry[];
  /** optimistic echo of the message awaiting its reply, if any */
  inFlightText: string | null;
  inFlightSince: number | null;
  /** text to put back into the input after a network failure */
  restoreDraft: string | null;
  userTurns: number;
  ended: boolean;
  sentiment: Sentiment | null;
  banner: string | null;
}

export type Phase = "boot" | "battling" | "voting" | "done";

export interface BattleView {
  phase: Phase;
  userId: string | null;
  battleId: string | null;
  minUserTurns: number;
  panes: Record<Side, PaneState>;
  voteInFlight: boolean;
  outcome: VoteOutcome | null;
  feedbackSubmitted: boolean;
  banner: string | null;
}

export type ViewEvent =
  | { type: "session_created"; userId: string }
  | {
      type: "battle_started";
      battleId: string;
      labels: Record<string, string>;
      minUserTurns: number;
    }
  | { type: "send_started"; side: Side; text: string; at: number }
  | { type: "reply_received"; side: Side; text: string }
  | { type: "send_failed"; side: Side; message: string }
  | { type: "pane_ended"; side: Side; sentiment: Sentiment; phase: string }
  | { type: "pane_error"; side: Side; message: string }
  | { type: "vote_started"; outcome: VoteOutcome }
  | { type: "vote_recorded"; outcome: VoteOutcome }
  | { type: "vote_failed"; message: string }
  | { type: "feedback_recorded" }
  | { type: "banner"; message: string | null };

function freshPane(label: string): PaneState {
  return {
    label,
    transcript: [],
    inFlightText: null,
    inFlightSince: null,
    restoreDraft: null,
    userTurns: 0,
    ended: false,
    sentiment: null,
    banner: null,
  };
}

export function initialView(): BattleView {
  return {
    phase: "boot",
    userId: null,
    battleId: null,
    minUserTurns: 0,
    panes: { 1: freshPane("CRS 1"), 2: freshPane("CRS 2") },
    voteInFlight: false,
    outcome: null,
    feedbackSubmitted: false,
    banner: null,
  };
}

function withPane(view: BattleView, side: Side, patch: Partial<PaneState>): BattleView {
  return {
    ...view,
    panes: { ...view.panes, [side]: { ...view.panes[side], ...patch } },
  };
}

export function reduce(view: BattleView, event: ViewEvent): BattleView {
  switch (event.type) {
    case "session_created":
      return { ...view, userId: event.userId };
    case "battle_started":
      return {
        ...view,
        phase: "battling",
        battleId: event.battleId,
        minUserTurns: event.minUserTurns,
        panes: {
          1: freshPane(event.labels["1"] ?? "CRS 1"),
          2: freshPane(event.labels["2"] ?? "CRS 2"),
        },
        voteInFlight: false,
        outcome: null,
        feedbackSubmitted: false,
        banner: null,
      };
    case "send_started":
      return withPane(view, event.side, {
        inFlightText: event.text,
        inFlightSince: event.at,
        restoreDraft: null,
        banner: null,
      });
    case "reply_received": {
      const pane = view.panes[event.side];
      return withPane(view, event.side, {
        transcript: [
          ...pane.transcript,
          { role: "user", text: pane.inFlightText ?? "" },
          { role: "system", text: event.text },
        ],
        inFlightText: null,
        inFlightSince: null,
        userTurns: pane.userTurns + 1,
      });
    }
    case "send_failed": {
      // Network failure: drop the optimistic echo, hand the text back to
      // the input so a retry cannot duplicate it in the transcript.
      const pane = view.panes[event.side];
      return withPane(view, event.side, {
        inFlightText: null,
        inFlightSince: null,
        restoreDraft: pane.inFlightText,
        banner: event.message,
      });
    }
    case "pane_ended": {
      const next = withPane(view, event.side, {
        ended: true,
        sentiment: event.sentiment,
        banner: null,
      });
      return { ...next, phase: event.phase === "voting" ? "voting" : next.phase };
    }
    case "pane_error":
      return withPane(view, event.side, { banner: event.message });
    case "vote_started":
      return { ...view, voteInFlight: true, banner: null };
    case "vote_recorded":
      return { ...view, voteInFlight: false, outcome: event.outcome, phase: "done" };
    case "vote_failed":
      return { ...view, voteInFlight: false, banner: event.message };
    case "feedback_recorded":
      return { ...view, feedbackSubmitted: true };
    case "banner":
      return { ...view, banner: event.message };
  }
}

// ── guards ──────────────────────────────────────────────────────────
// These encode the documented service preconditions; the app never emits
// a request whose guard is false.

export function canSend(view: BattleView, side: Side): boolean {
  const pane = view.panes[side];
  return view.phase === "battling" && !pane.ended && pane.inFlightText === null;
}

export function canEnd(view: BattleView, side: Side): boolean {
  const pane = view.panes[side];
  return view.phase === "battling" && !pane.ended && pane.inFlightText === null;
}

/** End allowed only after the configured minimum of user turns. */
export function turnsMissing(view: BattleView, side: Side): number {
  return Math.max(0, view.minUserTurns - view.panes[side].userTurns);
}

export function anyMessageInFlight(view: BattleView): boolean {
  return view.panes[1].inFlightText !== null || view.panes[2].inFlightText !== null;
}

export function canVote(view: BattleView): boolean {
  return (
    view.phase === "voting" &&
    view.outcome === null &&
    !view.voteInFlight &&
    !anyMessageInFlight(view)
  );
}

export function canSubmitFeedback(view: BattleView): boolean {
  return view.phase === "done" && !view.feedbackSubmitted;
}
