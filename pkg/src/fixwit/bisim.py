"""Unlabelled transition systems: bisimilarity, HML formulas, strategies, witnesses.

The behaviour lattice is the relation lattice ordered by reverse inclusion, so
the *least* fixpoint of the bisimilarity map (iterating from the full
relation) is bisimilarity, and a co-singleton ``co{(x1,x2)}`` is way-below it
exactly when ``x1`` and ``x2`` are not bisimilar.  Witnesses are
diamond-rooted Hennessy-Milner formulas (diamond over finite conjunctions and
complements); a witness for a pair is a formula satisfied by exactly one of
the two states.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import NoWitnessError, StructuralError, SynthesisError
from .instance import Instance
from .lattice import BasisElement, RelJoin, RelLattice, RelMeet


@dataclass(frozen=True)
class TransitionSystem:
    n: int
    successors: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise StructuralError("state count must be positive")
        if len(self.successors) != self.n:
            raise StructuralError("successor table length must equal the state count")
        for x, succ in enumerate(self.successors):
            if len(set(succ)) != len(succ):
                raise StructuralError(f"duplicate successors at state {x}")
            for y in succ:
                if not 0 <= y < self.n:
                    raise StructuralError(f"successor {y} of state {x} out of range")

    def succ(self, x: int) -> tuple[int, ...]:
        return self.successors[x]


# ---------------------------------------------------------------------------
# Hennessy-Milner formulas


@dataclass(frozen=True)
class HmlTrue:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Diamond:
    child: "HmlFormula"

    def __str__(self) -> str:
        return f"<>({self.child})"


@dataclass(frozen=True)
class And:
    children: tuple["HmlFormula", ...]

    def __str__(self) -> str:
        return "(" + " & ".join(str(c) for c in self.children) + ")"


@dataclass(frozen=True)
class Not:
    child: "HmlFormula"

    def __str__(self) -> str:
        return f"!({self.child})"


HmlFormula = HmlTrue | Diamond | And | Not

TRUE = HmlTrue()


def make_and(children: Sequence[HmlFormula]) -> HmlFormula:
    """Conjunction with light normalization: duplicates dropped, And([f]) = f,
    And([]) = true.  Semantics is unchanged (checked by the property tests)."""
    seen: list[HmlFormula] = []
    for c in children:
        if c not in seen:
            seen.append(c)
    if not seen:
        return TRUE
    if len(seen) == 1:
        return seen[0]
    return And(tuple(seen))


@lru_cache(maxsize=None)
def eval_formula(ts: TransitionSystem, phi: HmlFormula) -> frozenset[int]:
    """State set satisfying the formula."""
    if isinstance(phi, HmlTrue):
        return frozenset(range(ts.n))
    if isinstance(phi, Diamond):
        inner = eval_formula(ts, phi.child)
        return frozenset(x for x in range(ts.n) if any(y in inner for y in ts.succ(x)))
    if isinstance(phi, And):
        out = frozenset(range(ts.n))
        for c in phi.children:
            out &= eval_formula(ts, c)
        return out
    if isinstance(phi, Not):
        return frozenset(range(ts.n)) - eval_formula(ts, phi.child)
    raise StructuralError(f"not an HML formula: {phi!r}")


def modal_depth(phi: HmlFormula) -> int:
    if isinstance(phi, HmlTrue):
        return 0
    if isinstance(phi, Diamond):
        return 1 + modal_depth(phi.child)
    if isinstance(phi, And):
        return max((modal_depth(c) for c in phi.children), default=0)
    if isinstance(phi, Not):
        return modal_depth(phi.child)
    raise StructuralError(f"not an HML formula: {phi!r}")


def modal_leaves(phi: HmlFormula) -> tuple[HmlFormula, ...]:
    """Maximal diamond-rooted subformulas of a boolean skeleton."""
    if isinstance(phi, HmlTrue):
        return ()
    if isinstance(phi, Diamond):
        return (phi,)
    if isinstance(phi, And):
        out: list[HmlFormula] = []
        for c in phi.children:
            for leaf in modal_leaves(c):
                if leaf not in out:
                    out.append(leaf)
        return tuple(out)
    if isinstance(phi, Not):
        return modal_leaves(phi.child)
    raise StructuralError(f"not an HML formula: {phi!r}")


# ---------------------------------------------------------------------------
# Behaviour side


def bisim_functional(ts: TransitionSystem, lat: RelLattice, rel: int) -> int:
    """One step of the bisimilarity map: ``(x1,x2)`` survives iff both
    simulation clauses hold with respect to ``rel``."""
    out = 0
    for x1 in range(ts.n):
        for x2 in range(ts.n):
            ok = all(
                any(lat.contains(rel, y1, y2) for y2 in ts.succ(x2)) for y1 in ts.succ(x1)
            ) and all(
                any(lat.contains(rel, y1, y2) for y1 in ts.succ(x1)) for y2 in ts.succ(x2)
            )
            if ok:
                out |= lat.bit(x1, x2)
    return out


def alpha_bisim(ts: TransitionSystem, predicates: Iterable[frozenset[int]]) -> frozenset[tuple[int, int]]:
    """Pairs agreeing on membership in every predicate."""
    preds = list(predicates)
    return frozenset(
        (x1, x2)
        for x1 in range(ts.n)
        for x2 in range(ts.n)
        if all((x1 in p) == (x2 in p) for p in preds)
    )


def boolean_closure(n: int, predicates: Iterable[frozenset[int]]) -> set[frozenset[int]]:
    """Closure under complement and finite intersections (the empty
    intersection contributes the full state set)."""
    full = frozenset(range(n))
    closed: set[frozenset[int]] = {full}
    closed.update(predicates)
    changed = True
    while changed:
        changed = False
        for p in list(closed):
            comp = full - p
            if comp not in closed:
                closed.add(comp)
                changed = True
        for p in list(closed):
            for q in list(closed):
                r = p & q
                if r not in closed:
                    closed.add(r)
                    changed = True
    return closed


# ---------------------------------------------------------------------------
# Instance


class BisimInstance(Instance):
    kind = "bisim"

    def __init__(self, ts: TransitionSystem, max_iter: int | None = None):
        n2 = ts.n * ts.n
        super().__init__(RelLattice(ts.n), max_iter if max_iter is not None else n2 + 1)
        self.ts = ts
        self.gamma_alpha_of = self._gamma_alpha_of
        self.alpha_gamma_of = self._alpha_gamma_of

    # -- behaviour ---------------------------------------------------------
    def behaviour_step(self, value: int) -> int:
        return bisim_functional(self.ts, self.behaviour, value)

    def bisimilarity(self) -> int:
        """Greatest bisimulation, as a relation bitset (Kleene iteration from
        the full relation, which is the bottom of the reversed order)."""
        from .fixpoint import kleene_lfp

        value, _, converged = kleene_lfp(self.problem)
        if not converged:
            raise SynthesisError("bisimilarity iteration did not stabilize (bug: finite lattice)")
        return value

    def pair_degree(self, x1: int, x2: int) -> int | None:
        """Least k with (x1,x2) dropped by the k-th iterate; None if bisimilar."""
        chain = self.iterates()
        for k, rel in enumerate(chain):
            if not self.behaviour.contains(rel, x1, x2):
                return k
        if self.problem.converged_at is not None:
            return None
        raise SynthesisError("iteration budget exhausted before stabilization")

    # -- witnesses ----------------------------------------------------------
    def validate_payload(self, payload) -> None:
        if not isinstance(payload, Diamond):
            raise StructuralError(
                "bisimulation witnesses are diamond-rooted HML formulas, "
                f"got {payload!r}"
            )
        eval_formula(self.ts, payload)  # raises on malformed subterms

    def structural_degree(self, payload) -> int:
        return modal_depth(payload)

    def subterms(self, payload) -> tuple[HmlFormula, ...]:
        return modal_leaves(payload.child)

    def alpha_set(self, payloads) -> int:
        preds = [eval_formula(self.ts, p) for p in payloads]
        rel = alpha_bisim(self.ts, preds)
        return self.behaviour.from_pairs(rel)

    def _distinguishing_step(self, x1: int, x2: int, children: Sequence[HmlFormula]) -> HmlFormula:
        """One diamond step over child formulas separating x1 from x2."""
        ts = self.ts
        uniq: list[HmlFormula] = []
        for c in children:
            if c not in uniq:
                uniq.append(c)
        uniq.sort(key=lambda f: (modal_depth(f), str(f)))

        def separates(phi: HmlFormula, a: int, b: int) -> bool:
            sat = eval_formula(ts, phi)
            return (a in sat) != (b in sat)

        for a, b in ((x1, x2), (x2, x1)):
            for y1 in sorted(ts.succ(a)):
                if all(any(separates(phi, y1, y2) for phi in uniq) for y2 in ts.succ(b)):
                    conj = [
                        phi if y1 in eval_formula(ts, phi) else Not(phi) for phi in uniq
                    ]
                    return Diamond(make_and(conj))
        raise NoWitnessError(
            f"no one-step formula over {len(uniq)} children separates states {x1} and {x2}"
        )

    def apc(self, b: BasisElement, children: Sequence[HmlFormula]) -> HmlFormula:
        if not isinstance(b, RelJoin):
            raise StructuralError(f"expected a co-singleton, got {b!r}")
        return self._distinguishing_step(b.x1, b.x2, children)

    def adc(self, bd: BasisElement, children: Sequence[HmlFormula]) -> HmlFormula:
        if not isinstance(bd, RelMeet):
            raise StructuralError(f"expected a singleton, got {bd!r}")
        return self._distinguishing_step(bd.x1, bd.x2, children)

    # -- strategies -----------------------------------------------------------
    def _strategy_choice(self, x1: int, x2: int) -> tuple[int, int, tuple[tuple[int, int], ...]]:
        """Pick the side and successor whose reply pairs all drop degree.

        Returns ``(side, y1, reply_pairs)`` where side 0 means the move is
        made from ``x1``.  Tie-break: maximal degree decrease, then side 0,
        then the smallest state index.
        """
        ts = self.ts
        k = self.pair_degree(x1, x2)
        if k is None:
            raise SynthesisError(
                f"states {x1} and {x2} are bisimilar; no distinguishing strategy exists"
            )
        best: tuple[int, int, int, tuple[tuple[int, int], ...]] | None = None
        for side, (a, b) in enumerate(((x1, x2), (x2, x1))):
            for y1 in ts.succ(a):
                pairs = tuple((y1, y) if side == 0 else (y, y1) for y in ts.succ(b))
                degs = [self.pair_degree(p, q) for p, q in pairs]
                if any(d is None or d >= k for d in degs):
                    continue
                worst = max(degs, default=0)
                key = (worst, side, y1)
                if best is None or key < (best[0], best[1], best[2]):
                    best = (worst, side, y1, pairs)
        if best is None:
            raise SynthesisError(
                f"no successor of {x1} or {x2} decreases the degree (inconsistent iteration)"
            )
        return best[1], best[2], best[3]

    def primal_strategy(self, b: BasisElement) -> tuple[BasisElement, ...]:
        if not isinstance(b, RelJoin):
            raise StructuralError(f"expected a co-singleton, got {b!r}")
        _, _, pairs = self._strategy_choice(b.x1, b.x2)
        return tuple(RelJoin(p, q) for p, q in sorted(pairs))

    def dual_strategy(self, bd: BasisElement) -> tuple[BasisElement, ...]:
        if not isinstance(bd, RelMeet):
            raise StructuralError(f"expected a singleton, got {bd!r}")
        _, _, pairs = self._strategy_choice(bd.x1, bd.x2)
        return tuple(RelMeet(p, q) for p, q in sorted(pairs))

    # -- laws -------------------------------------------------------------------
    def alpha_logic_step(self, payloads: frozenset) -> int:
        preds = [eval_formula(self.ts, p) for p in payloads]
        closed = boolean_closure(self.ts.n, preds)
        stepped = [
            frozenset(x for x in range(self.ts.n) if any(y in s for y in self.ts.succ(x)))
            for s in closed
        ]
        return self.behaviour.from_pairs(alpha_bisim(self.ts, stepped))

    def _gamma_alpha_of(self, payloads: frozenset) -> list[str]:
        rel = self.alpha_set(payloads)
        out = []
        for p in payloads:
            sat = eval_formula(self.ts, p)
            for x1, x2 in self.behaviour.pairs(rel):
                if (x1 in sat) != (x2 in sat):
                    out.append(f"{p} is not closed under alpha of the sample at ({x1},{x2})")
                    break
        return out

    def _alpha_gamma_of(self, d: int) -> int:
        if self.ts.n > 12:
            raise StructuralError("gamma enumeration only supported for small state spaces")
        closed = [
            s
            for s in _all_subsets(self.ts.n)
            if all((x1 in s) == (x2 in s) for x1, x2 in self.behaviour.pairs(d))
        ]
        return self.behaviour.from_pairs(alpha_bisim(self.ts, closed))

    # -- presentation -------------------------------------------------------------
    def witness_evidence(self, element: BasisElement, payload) -> dict[str, str]:
        sat = eval_formula(self.ts, payload)
        x1, x2 = element.x1, element.x2
        return {
            "formula": str(payload),
            f"state {x1} satisfies": str(x1 in sat),
            f"state {x2} satisfies": str(x2 in sat),
        }

    # -- serialization ---------------------------------------------------------------
    def payload_to_json(self, payload) -> dict:
        return hml_to_json(payload)

    def payload_from_json(self, data) -> HmlFormula:
        return hml_from_json(data)


def _all_subsets(n: int) -> list[frozenset[int]]:
    return [frozenset(i for i in range(n) if mask & (1 << i)) for mask in range(1 << n)]


def hml_to_json(phi: HmlFormula) -> dict:
    if isinstance(phi, HmlTrue):
        return {"op": "true"}
    if isinstance(phi, Diamond):
        return {"op": "dia", "child": hml_to_json(phi.child)}
    if isinstance(phi, And):
        return {"op": "and", "children": [hml_to_json(c) for c in phi.children]}
    if isinstance(phi, Not):
        return {"op": "not", "child": hml_to_json(phi.child)}
    raise StructuralError(f"not an HML formula: {phi!r}")


def hml_from_json(data) -> HmlFormula:
    if not isinstance(data, dict) or "op" not in data:
        raise StructuralError(f"malformed HML formula: {data!r}")
    op = data["op"]
    if op == "true":
        return TRUE
    if op == "dia":
        return Diamond(hml_from_json(data["child"]))
    if op == "and":
        return And(tuple(hml_from_json(c) for c in data["children"]))
    if op == "not":
        return Not(hml_from_json(data["child"]))
    raise StructuralError(f"unknown HML operator {op!r}")
