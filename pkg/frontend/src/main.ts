/** Browser wiring: create a session, render the position and legal-move
 * forms, submit moves, show server verdicts verbatim.  All rule decisions
 * come from the server; this file only builds forms and renders responses. */

import { ApiError, SessionClient, SessionState } from "./api.js";
import {
  distanceMove,
  emptyRelationGrid,
  relationMove,
  validateCoupling,
  valuationMove,
} from "./moveComposer.js";
import { renderTranscript, renderWitness } from "./transcript.js";

const $ = (id: string) => document.getElementById(id) as HTMLElement;

const PRESETS: Record<string, { model: unknown; claim: string }> = {
  "geometric chain": {
    model: {
      states: 2,
      names: ["x", "t"],
      terminal: [1],
      delta: { "0": [["1/2", 1], ["1/2", 0]] },
    },
    claim: "x > 3/5",
  },
  "three-state system": {
    model: { states: 3, names: ["u", "v", "w"], edges: [[0, 2]] },
    claim: "u,v",
  },
  "labelled chain": {
    model: {
      states: 4,
      names: ["s", "t", "x1", "x2"],
      labels: ["a", "b", "c", "c"],
      delta: [
        [["1", 0]],
        [["1", 1]],
        [["1/2", 0], ["1/2", 1]],
        [["1/3", 0], ["2/3", 1]],
      ],
    },
    claim: "x1,x2 > 1/8",
  },
};

let client: SessionClient;
let sessionId: string | null = null;

function setupForm(): void {
  const presetSel = $("preset") as HTMLSelectElement;
  for (const name of Object.keys(PRESETS)) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    presetSel.appendChild(opt);
  }
  presetSel.addEventListener("change", () => {
    const preset = PRESETS[presetSel.value];
    ($("model") as HTMLTextAreaElement).value = JSON.stringify(preset.model, null, 2);
    ($("claim") as HTMLInputElement).value = preset.claim;
  });
  presetSel.dispatchEvent(new Event("change"));

  $("start").addEventListener("click", async () => {
    client = new SessionClient(($("server") as HTMLInputElement).value);
    try {
      const state = await client.createSession({
        model: JSON.parse(($("model") as HTMLTextAreaElement).value),
        variant: ($("variant") as HTMLSelectElement).value as "primal" | "dual",
        humanRole: ($("role") as HTMLSelectElement).value as "exists" | "forall",
        claim: ($("claim") as HTMLInputElement).value,
      });
      sessionId = state.sessionId;
      render(state);
    } catch (err) {
      showError(err);
    }
  });
}

function showError(err: unknown): void {
  $("error").textContent = err instanceof ApiError ? err.detail : String(err);
}

async function submit(move: unknown): Promise<void> {
  if (!sessionId) return;
  $("error").textContent = "";
  try {
    render(await client.move(sessionId, move));
  } catch (err) {
    showError(err); // 422 verdicts land here, inline, turn not consumed
  }
}

function render(state: SessionState): void {
  $("status").textContent =
    state.status === "active"
      ? `round ${state.position.round}, ${state.position.turn} to move (you are ${state.humanRole})`
      : `finished: ${state.winner} wins -- ${state.reason}`;
  $("transcript").textContent = renderTranscript(state.history);
  $("witness").textContent = renderWitness(
    state.witnessSoFar?.initial ?? null,
    state.model.names,
  );
  buildMoveForm(state);
}

function buildMoveForm(state: SessionState): void {
  const host = $("moveform");
  host.innerHTML = "";
  if (state.status !== "active" || state.position.turn !== state.humanRole) return;
  const legal = state.legalMoves;
  const names = legal.states;

  if (legal.moveType === "basis") {
    for (const cand of legal.candidates ?? []) {
      const btn = document.createElement("button");
      btn.textContent = cand.description;
      btn.addEventListener("click", () => void submit(cand.element));
      host.appendChild(btn);
    }
    return;
  }

  if (legal.moveType === "relation") {
    const grid = emptyRelationGrid(names);
    const table = document.createElement("table");
    names.forEach((_, i) => {
      const row = table.insertRow();
      names.forEach((_, j) => {
        const cell = row.insertCell();
        const box = document.createElement("input");
        box.type = "checkbox";
        box.title = `(${names[i]},${names[j]})`;
        box.addEventListener("change", () => (grid.selected[i][j] = box.checked));
        cell.appendChild(box);
      });
    });
    const btn = document.createElement("button");
    btn.textContent = "play relation";
    btn.addEventListener("click", () => void submit(relationMove(grid)));
    host.append(table, btn);
    return;
  }

  if (legal.moveType === "valuation") {
    const fields: HTMLInputElement[] = names.map((name) => {
      const label = document.createElement("label");
      label.textContent = `${name}: `;
      const input = document.createElement("input");
      input.value = "0";
      label.appendChild(input);
      host.appendChild(label);
      return input;
    });
    const btn = document.createElement("button");
    btn.textContent = "play valuation";
    btn.addEventListener("click", () => {
      const built = valuationMove(fields.map((f) => f.value));
      if (built.move) void submit(built.move);
      else $("error").textContent = built.problems.map((p) => `${p.field}: ${p.message}`).join("; ");
    });
    host.appendChild(btn);
    return;
  }

  // distance matrix, with the optional coupling helper for live sum checks
  const inputs: HTMLInputElement[][] = names.map((_, i) =>
    names.map((_, j) => {
      const input = document.createElement("input");
      input.value = "0";
      input.size = 5;
      input.title = `(${names[i]},${names[j]})`;
      return input;
    }),
  );
  const table = document.createElement("table");
  names.forEach((_, i) => {
    const row = table.insertRow();
    names.forEach((_, j) => row.insertCell().appendChild(inputs[i][j]));
  });
  host.appendChild(table);
  const helper = legal.couplingHelper;
  if (helper) {
    // scratch coupling table with live row/column-sum validation; it guides
    // the human toward a sensible distance move, the server stays in charge
    const caption = document.createElement("p");
    caption.textContent = "coupling scratchpad (marginals must match exactly):";
    const couplingInputs: HTMLInputElement[][] = helper.rows.map(() =>
      helper.cols.map(() => {
        const input = document.createElement("input");
        input.value = "0";
        input.size = 5;
        return input;
      }),
    );
    const ctable = document.createElement("table");
    const head = ctable.insertRow();
    head.insertCell();
    helper.cols.forEach((c) => (head.insertCell().textContent = `${c.state} (${c.marginal})`));
    helper.rows.forEach((r, i) => {
      const row = ctable.insertRow();
      row.insertCell().textContent = `${r.state} (${r.marginal})`;
      helper.cols.forEach((_, j) => row.insertCell().appendChild(couplingInputs[i][j]));
    });
    const status = document.createElement("p");
    const refresh = () => {
      const check = validateCoupling(
        couplingInputs.map((row) => row.map((f) => f.value)),
        helper.rows.map((r) => r.marginal),
        helper.cols.map((c) => c.marginal),
      );
      status.textContent = check.ok
        ? `marginals match (rows ${check.rowSums.join(", ")}; cols ${check.colSums.join(", ")})`
        : check.problems.map((p) => `${p.field}: ${p.message}`).join("; ");
      status.style.color = check.ok ? "#1b5e20" : "#b00020";
    };
    couplingInputs.flat().forEach((f) => f.addEventListener("input", refresh));
    refresh();
    host.append(caption, ctable, status);
  }
  const btn = document.createElement("button");
  btn.textContent = "play distance";
  btn.addEventListener("click", () => {
    const built = distanceMove(inputs.map((row) => row.map((f) => f.value)));
    if (built.move) void submit(built.move);
    else $("error").textContent = built.problems.map((p) => `${p.field}: ${p.message}`).join("; ");
  });
  host.appendChild(btn);
}

setupForm();
