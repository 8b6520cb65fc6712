/** Plain-text renderers for the play trace and the assembled witness.  Pure
 * functions over the server's JSON, so the same output is testable in node
 * and insertable into the page. */

import type { TranscriptEntry, WitnessJson } from "./api.js";

export function renderTranscript(history: TranscriptEntry[]): string {
  if (!history.length) return "(no moves yet)";
  return history
    .map((entry) => {
      const mark = entry.verdict === "accepted" ? "+" : "x";
      const move = entry.move === null ? "(stuck)" : JSON.stringify(entry.move);
      return `${mark} round ${entry.round} ${entry.player}: ${move}\n    ${entry.detail}`;
    })
    .join("\n");
}

function renderTree(payload: Record<string, unknown>, names: string[], indent: string): string {
  const state = Number(payload.state);
  const label = names[state] ?? String(state);
  const children = (payload.children ?? []) as Record<string, unknown>[];
  if (!children.length) return `${indent}${label}`;
  const sub = children.map((c) => renderTree(c, names, indent + "  ")).join("\n");
  return `${indent}${label}\n${sub}`;
}

function renderFormula(payload: Record<string, unknown>): string {
  const op = String(payload.op);
  switch (op) {
    case "true":
      return "true";
    case "dia":
      return `<>(${renderFormula(payload.child as Record<string, unknown>)})`;
    case "and": {
      const kids = (payload.children as Record<string, unknown>[]).map(renderFormula);
      return `(${kids.join(" & ")})`;
    }
    case "not":
      return `!(${renderFormula(payload.child as Record<string, unknown>)})`;
    case "label":
      return `[${payload.label}]`;
    case "next":
      return `O(${renderFormula(payload.child as Record<string, unknown>)})`;
    case "oneminus":
      return `(1 - ${renderFormula(payload.child as Record<string, unknown>)})`;
    case "subq":
      return `(${renderFormula(payload.child as Record<string, unknown>)} (-) ${payload.q})`;
    case "max":
      return `max(${renderFormula(payload.left as Record<string, unknown>)}, ${renderFormula(
        payload.right as Record<string, unknown>,
      )})`;
    default:
      return JSON.stringify(payload);
  }
}

export function renderWitness(witness: WitnessJson | null, names: string[]): string {
  if (!witness) return "(no witness)";
  const head = `${witness.instance} witness, degree ${witness.degree}`;
  if (witness.instance === "termination") {
    return `${head}\n${renderTree(witness.payload, names, "  ")}`;
  }
  return `${head}\n  ${renderFormula(witness.payload)}`;
}
