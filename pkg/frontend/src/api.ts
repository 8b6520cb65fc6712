/** Thin typed client for the fixwit session API.  The client performs no game
 * logic: every rule decision comes back from the server verbatim. */

export interface TranscriptEntry {
  round: number;
  player: "exists" | "forall";
  move: unknown;
  verdict: "accepted" | "rejected";
  detail: string;
}

export interface CandidateMove {
  element: Record<string, unknown>;
  description: string;
}

export interface LegalMoves {
  turn: "exists" | "forall";
  moveType: "relation" | "valuation" | "distance" | "basis" | "none";
  states: string[];
  candidates?: CandidateMove[];
  couplingHelper?: {
    rows: { state: string; marginal: string }[];
    cols: { state: string; marginal: string }[];
  };
}

export interface WitnessJson {
  instance: string;
  degree: number;
  payload: Record<string, unknown>;
}

export interface SessionState {
  sessionId: string;
  variant: "primal" | "dual";
  humanRole: "exists" | "forall";
  status: "active" | "finished";
  winner: "exists" | "forall" | null;
  reason: string;
  model: { kind: string; names: string[] };
  position: Record<string, unknown> & { turn: string; round: number };
  legalMoves: LegalMoves;
  history: TranscriptEntry[];
  witnessSoFar: { initial: WitnessJson | null; current: WitnessJson | null } | null;
  engineReply?: { player: string; move: unknown; detail: string }[];
  verdict?: string;
}

export interface CreateSessionBody {
  model?: unknown;
  variant: "primal" | "dual";
  humanRole: "exists" | "forall";
  claim: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function decode(response: Response): Promise<unknown> {
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail =
      typeof body === "object" && body !== null && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body;
}

export class SessionClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    return decode(response);
  }

  createSession(body: CreateSessionBody): Promise<SessionState> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify(body),
    }) as Promise<SessionState>;
  }

  getSession(id: string): Promise<SessionState> {
    return this.request(`/sessions/${id}`) as Promise<SessionState>;
  }

  move(id: string, move: unknown): Promise<SessionState> {
    return this.request(`/sessions/${id}/move`, {
      method: "POST",
      body: JSON.stringify({ move }),
    }) as Promise<SessionState>;
  }

  deleteSession(id: string): Promise<unknown> {
    return this.request(`/sessions/${id}`, { method: "DELETE" });
  }
}
