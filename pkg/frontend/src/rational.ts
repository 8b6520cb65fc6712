/** Exact rationals as "p/q" strings, mirroring the server's wire format.
 * Decimal notation is rejected on purpose: the engine never sees floats. */

export interface Rat {
  num: bigint;
  den: bigint; // always positive
}

function gcd(a: bigint, b: bigint): bigint {
  a = a < 0n ? -a : a;
  b = b < 0n ? -b : b;
  while (b) {
    [a, b] = [b, a % b];
  }
  return a;
}

export function rat(num: bigint, den: bigint): Rat {
  if (den === 0n) throw new Error("zero denominator");
  if (den < 0n) {
    num = -num;
    den = -den;
  }
  const g = gcd(num, den) || 1n;
  return { num: num / g, den: den / g };
}

export function parseRational(text: string): Rat {
  const s = text.trim();
  if (s.includes(".") || s.toLowerCase().includes("e")) {
    throw new Error(`rational '${text}' must be exact p/q, not a decimal`);
  }
  const m = /^(-?\d+)(?:\/(\d+))?$/.exec(s);
  if (!m) throw new Error(`malformed rational '${text}'`);
  return rat(BigInt(m[1]), m[2] === undefined ? 1n : BigInt(m[2]));
}

export function formatRational(r: Rat): string {
  return r.den === 1n ? `${r.num}` : `${r.num}/${r.den}`;
}

export function add(a: Rat, b: Rat): Rat {
  return rat(a.num * b.den + b.num * a.den, a.den * b.den);
}

export function compare(a: Rat, b: Rat): number {
  const lhs = a.num * b.den;
  const rhs = b.num * a.den;
  return lhs < rhs ? -1 : lhs > rhs ? 1 : 0;
}

export const ZERO: Rat = { num: 0n, den: 1n };
export const ONE: Rat = { num: 1n, den: 1n };

export function inUnitInterval(r: Rat): boolean {
  return compare(r, ZERO) >= 0 && compare(r, ONE) <= 0;
}

export function sum(values: Rat[]): Rat {
  return values.reduce(add, ZERO);
}
