/** Builders turning form state into the structured move payloads the server
 * expects.  Validation here is a usability aid only (fast feedback on
 * marginal sums and malformed rationals); the server remains the authority on
 * the game rules and re-checks everything. */

import { compare, formatRational, inUnitInterval, parseRational, Rat, sum, ZERO } from "./rational.js";

export interface MoveProblem {
  field: string;
  message: string;
}

// -- relations (pair-checkbox grid) -----------------------------------------

export interface RelationGrid {
  states: string[];
  /** selected[i][j] set when the pair (i, j) is in the relation */
  selected: boolean[][];
}

export function emptyRelationGrid(states: string[]): RelationGrid {
  return {
    states,
    selected: states.map(() => states.map(() => false)),
  };
}

export function relationMove(grid: RelationGrid): Record<string, unknown> {
  const pairs: [number, number][] = [];
  grid.selected.forEach((row, i) =>
    row.forEach((on, j) => {
      if (on) pairs.push([i, j]);
    }),
  );
  return { kind: "relation", pairs };
}

// -- valuations (one rational field per state) ------------------------------

export function valuationMove(
  entries: string[],
): { move?: Record<string, unknown>; problems: MoveProblem[] } {
  const problems: MoveProblem[] = [];
  const values: string[] = [];
  entries.forEach((raw, i) => {
    const text = raw.trim() === "" ? "0" : raw;
    try {
      const q = parseRational(text);
      if (!inUnitInterval(q)) {
        problems.push({ field: `state ${i}`, message: `${text} is outside [0,1]` });
      }
      values.push(formatRational(q));
    } catch (err) {
      problems.push({ field: `state ${i}`, message: String((err as Error).message) });
    }
  });
  if (problems.length) return { problems };
  return { move: { kind: "valuation", values }, problems };
}

// -- distances (symmetric matrix of rational fields) ------------------------

export function distanceMove(
  matrix: string[][],
): { move?: Record<string, unknown>; problems: MoveProblem[] } {
  const problems: MoveProblem[] = [];
  const n = matrix.length;
  const out: string[][] = [];
  for (let i = 0; i < n; i++) {
    out.push([]);
    for (let j = 0; j < n; j++) {
      const text = (matrix[i][j] ?? "").trim() === "" ? "0" : matrix[i][j];
      try {
        const q = parseRational(text);
        if (!inUnitInterval(q)) {
          problems.push({ field: `(${i},${j})`, message: `${text} is outside [0,1]` });
        }
        out[i].push(formatRational(q));
      } catch (err) {
        problems.push({ field: `(${i},${j})`, message: String((err as Error).message) });
        out[i].push("0");
      }
    }
  }
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) {
      if (out[i][j] !== out[j][i]) {
        problems.push({
          field: `(${i},${j})`,
          message: `asymmetric entries ${out[i][j]} vs ${out[j][i]}`,
        });
      }
    }
  }
  if (problems.length) return { problems };
  return { move: { kind: "distance", matrix: out }, problems };
}

// -- couplings (marginal-constrained table) ----------------------------------

export interface CouplingCheck {
  rowSums: string[];
  colSums: string[];
  problems: MoveProblem[];
  ok: boolean;
}

/** Live row/column-sum validation for the coupling helper table.  Entries and
 * marginals are "p/q" strings; sums are computed exactly. */
export function validateCoupling(
  entries: string[][],
  rowMarginals: string[],
  colMarginals: string[],
): CouplingCheck {
  const problems: MoveProblem[] = [];
  const parsed: Rat[][] = entries.map((row, i) =>
    row.map((cell, j) => {
      const text = cell.trim() === "" ? "0" : cell;
      try {
        const q = parseRational(text);
        if (compare(q, ZERO) < 0) {
          problems.push({ field: `(${i},${j})`, message: "coupling mass must be nonnegative" });
        }
        return q;
      } catch (err) {
        problems.push({ field: `(${i},${j})`, message: String((err as Error).message) });
        return ZERO;
      }
    }),
  );
  const rowSums = parsed.map((row) => sum(row));
  const colSums = (entries[0] ?? []).map((_, j) => sum(parsed.map((row) => row[j])));
  rowMarginals.forEach((m, i) => {
    if (compare(rowSums[i] ?? ZERO, parseRational(m)) !== 0) {
      problems.push({
        field: `row ${i}`,
        message: `row sums to ${formatRational(rowSums[i] ?? ZERO)}, marginal is ${m}`,
      });
    }
  });
  colMarginals.forEach((m, j) => {
    if (compare(colSums[j] ?? ZERO, parseRational(m)) !== 0) {
      problems.push({
        field: `column ${j}`,
        message: `column sums to ${formatRational(colSums[j] ?? ZERO)}, marginal is ${m}`,
      });
    }
  });
  return {
    rowSums: rowSums.map(formatRational),
    colSums: colSums.map(formatRational),
    problems,
    ok: problems.length === 0,
  };
}

// -- forall moves -------------------------------------------------------------

export function candidateMove(element: Record<string, unknown>): Record<string, unknown> {
  return element; // the server hands out ready-to-send basis elements
}
