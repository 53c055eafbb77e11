// Typed client for the arena HTTP/JSON API. One method per endpoint; no
// state is kept here — the app layer owns state and error presentation.

export interface SessionPayload {
  user_id: string;
  phase: string;
}

export interface BattlePayload {
  battle_id: string;
  labels: Record<string, string>;
  phase: string;
  min_user_turns?: number;
}

export interface ReplyPayload {
  reply: string;
}

export interface EndPayload {
  side: number;
  ended: boolean;
  phase: string;
}

export interface VotePayload {
  outcome: string;
  phase: string;
}

export type Sentiment = "satisfaction" | "frustration";
export type VoteOutcome = "crs1" | "crs2" | "draw";

export interface ErrorPayload {
  error: string;
  detail: string;
  required_turns?: number;
  actual_turns?: number;
}

/** Non-2xx responses become errors carrying the service's error payload. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: ErrorPayload,
  ) {
    super(payload.detail || payload.error || `HTTP ${status}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ArenaApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  createSession(): Promise<SessionPayload> {
    return this.post("/session");
  }

  startBattle(userId: string): Promise<BattlePayload> {
    return this.post(`/session/${encodeURIComponent(userId)}/battle`);
  }

  sendMessage(battleId: string, side: 1 | 2, text: string): Promise<ReplyPayload> {
    return this.post(`/battle/${encodeURIComponent(battleId)}/message`, { side, text });
  }

  endConversation(
    battleId: string,
    side: 1 | 2,
    sentiment: Sentiment,
  ): Promise<EndPayload> {
    return this.post(`/battle/${encodeURIComponent(battleId)}/end`, { side, sentiment });
  }

  vote(battleId: string, outcome: VoteOutcome): Promise<VotePayload> {
    return this.post(`/battle/${encodeURIComponent(battleId)}/vote`, { outcome });
  }

  submitFeedback(battleId: string, text: string): Promise<{ stored: boolean }> {
    return this.post(`/battle/${encodeURIComponent(battleId)}/feedback`, { text });
  }

  private async post<T>(path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let payload: unknown = null;
    try {
      payload = await response.json();
    } catch {
      payload = null;
    }
    if (!response.ok) {
      const details = (payload ?? { error: "http_error", detail: "" }) as ErrorPayload;
      throw new ApiError(response.status, details);
    }
    return payload as T;
  }
}
