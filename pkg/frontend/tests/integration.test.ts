/** Scripted client driving a real fixwit server: full primal and dual games
 * on the geometric chain and on the three-state system, expected winners and
 * final witnesses, and 422 responses carrying inequality evidence. */

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ApiError, SessionClient, SessionState } from "../src/api.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = new URL("../..", import.meta.url).pathname;

const GEOMETRIC = {
  states: 2,
  names: ["x", "t"],
  terminal: [1],
  delta: { "0": [["1/2", 1], ["1/2", 0]] },
};
const TS3 = { states: 3, names: ["u", "v", "w"], edges: [[0, 2]] };

let server: ChildProcess;
const client = new SessionClient(BASE);

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "fixwit.cli", "play", "models/geometric.json", "--port", String(PORT)],
    { cwd: REPO_ROOT, stdio: "ignore" },
  );
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const response = await fetch(BASE + "/");
      if (response.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error("fixwit server did not come up");
}, 30_000);

afterAll(() => {
  server?.kill();
});

async function playForallUntilDone(state: SessionState): Promise<SessionState> {
  let current = state;
  let guard = 0;
  while (current.status === "active") {
    expect(current.legalMoves.moveType).toBe("basis");
    const candidates = current.legalMoves.candidates ?? [];
    expect(candidates.length).toBeGreaterThan(0);
    current = await client.move(current.sessionId, candidates[0].element);
    if (++guard > 20) throw new Error("game did not terminate");
  }
  return current;
}

describe("primal game on the geometric chain", () => {
  it("engine exists wins and presents the witness tree", async () => {
    const state = await client.createSession({
      model: GEOMETRIC,
      variant: "primal",
      humanRole: "forall",
      claim: "x > 3/5",
    });
    expect(state.witnessSoFar?.initial?.instance).toBe("termination");
    expect(state.witnessSoFar?.initial?.payload).toEqual({
      state: 0,
      children: [
        { state: 0, children: [{ state: 1, children: [] }] },
        { state: 1, children: [] },
      ],
    });
    const final = await playForallUntilDone(state);
    expect(final.winner).toBe("exists");
    expect(final.history.length).toBeGreaterThan(0);
  });

  it("a scripted human exists also wins with valid moves", async () => {
    const state = await client.createSession({
      model: GEOMETRIC,
      variant: "primal",
      humanRole: "exists",
      claim: "x > 3/10",
    });
    expect(state.position.turn).toBe("exists");
    let current = await client.move(state.sessionId, {
      kind: "valuation",
      values: ["0", "4/5"],
    });
    let guard = 0;
    while (current.status === "active" && current.position.turn === "exists") {
      current = await client.move(current.sessionId, { kind: "valuation", values: ["0", "0"] });
      if (++guard > 10) throw new Error("game did not terminate");
    }
    expect(current.status).toBe("finished");
    expect(current.winner).toBe("exists");
  });
});

describe("dual game on the geometric chain", () => {
  it("engine forall defeats the scripted exists within the claimed degree", async () => {
    const state = await client.createSession({
      model: GEOMETRIC,
      variant: "dual",
      humanRole: "exists",
      claim: "x > 3/10",
    });
    expect(state.witnessSoFar?.initial?.payload).toEqual({
      state: 0,
      children: [{ state: 1, children: [] }],
    });
    let current = state;
    let rounds = 0;
    while (current.status === "active") {
      current = await client.move(current.sessionId, { kind: "valuation", values: ["0", "0"] });
      rounds++;
      if (rounds > 10) break;
    }
    expect(current.status).toBe("finished");
    expect(current.winner).toBe("forall");
    expect(rounds).toBeLessThanOrEqual(state.witnessSoFar!.initial!.degree);
  });
});

describe("games on the three-state system", () => {
  it("primal: the engine separates u from v immediately", async () => {
    const state = await client.createSession({
      model: TS3,
      variant: "primal",
      humanRole: "forall",
      claim: "u,v",
    });
    expect(state.status).toBe("finished");
    expect(state.winner).toBe("exists");
    expect(state.witnessSoFar?.initial?.payload).toEqual({
      op: "dia",
      child: { op: "true" },
    });
    expect(state.reason).toMatch(/stuck/);
  });

  it("dual: exists has no coupling for u,v and loses at once", async () => {
    const state = await client.createSession({
      model: TS3,
      variant: "dual",
      humanRole: "exists",
      claim: "u,v",
    });
    expect(state.status).toBe("finished");
    expect(state.winner).toBe("forall");
    expect(state.witnessSoFar?.initial?.payload).toEqual({
      op: "dia",
      child: { op: "true" },
    });
  });

  it("dual: a coupling for the bisimilar pair v,w survives (exists wins)", async () => {
    const state = await client.createSession({
      model: TS3,
      variant: "dual",
      humanRole: "forall",
      claim: "v,w",
    });
    expect(state.status).toBe("finished");
    expect(state.winner).toBe("exists");
  });
});

describe("invalid moves", () => {
  it("returns 422 with the violated inequality and keeps the turn", async () => {
    const state = await client.createSession({
      model: GEOMETRIC,
      variant: "primal",
      humanRole: "exists",
      claim: "x > 3/5",
    });
    let caught: ApiError | null = null;
    try {
      await client.move(state.sessionId, { kind: "valuation", values: ["0", "0"] });
    } catch (err) {
      caught = err as ApiError;
    }
    expect(caught).not.toBeNull();
    expect(caught!.status).toBe(422);
    expect(caught!.detail).toContain("3/5");
    const after = await client.getSession(state.sessionId);
    expect(after.status).toBe("active");
    expect(after.position.turn).toBe("exists");
  });

  it("rejects a coupling missing a successor in the bisim dual game", async () => {
    const wide = {
      states: 4,
      names: ["p", "q", "r", "s"],
      edges: [
        [0, 2],
        [0, 3],
        [1, 2],
      ],
    };
    const state = await client.createSession({
      model: wide,
      variant: "dual",
      humanRole: "exists",
      claim: "p,q",
    });
    let caught: ApiError | null = null;
    try {
      // pairs (r,r) only: the successor s of p is left unmatched
      await client.move(state.sessionId, { kind: "relation", pairs: [[2, 2]] });
    } catch (err) {
      caught = err as ApiError;
    }
    expect(caught?.status).toBe(422);
    expect(caught!.detail).toMatch(/pair \(3,2\)|unmatched|required/);
  });

  it("rejects malformed rationals with a 422", async () => {
    const state = await client.createSession({
      model: GEOMETRIC,
      variant: "primal",
      humanRole: "exists",
      claim: "x > 3/5",
    });
    let caught: ApiError | null = null;
    try {
      await client.move(state.sessionId, { kind: "valuation", values: ["0.5", "1"] });
    } catch (err) {
      caught = err as ApiError;
    }
    expect(caught?.status).toBe(422);
    expect(caught!.detail).toMatch(/decimal/);
  });
});

describe("default server model", () => {
  it("uses the model given on the command line when none is posted", async () => {
    const state = await client.createSession({
      variant: "primal",
      humanRole: "forall",
      claim: "x > 1/4",
    });
    expect(state.model.kind).toBe("termination");
    expect(state.model.names).toEqual(["x", "t"]);
    await client.deleteSession(state.sessionId);
  });
});

describe("rule statelessness", () => {
  it("replaying the recorded move log reproduces the same verdicts", async () => {
    const body = {
      model: GEOMETRIC,
      variant: "primal" as const,
      humanRole: "forall" as const,
      claim: "x > 3/5",
    };
    const log: unknown[] = [];
    const outcomes: string[] = [];
    let state = await client.createSession(body);
    while (state.status === "active") {
      const move = state.legalMoves.candidates![0].element;
      log.push(move);
      state = await client.move(state.sessionId, move);
      outcomes.push(`${state.status}:${state.position.turn ?? ""}:${state.winner ?? ""}`);
    }
    // fresh session, same request log
    let replay = await client.createSession(body);
    const replayOutcomes: string[] = [];
    for (const move of log) {
      replay = await client.move(replay.sessionId, move);
      replayOutcomes.push(`${replay.status}:${replay.position.turn ?? ""}:${replay.winner ?? ""}`);
    }
    expect(replayOutcomes).toEqual(outcomes);
    expect(replay.winner).toBe(state.winner);
  });
});
