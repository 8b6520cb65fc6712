"""Independent oracles and generators used by the test suite.

Everything here deliberately avoids the code paths it is used to check:
bisimilarity via partition refinement (the engine iterates the functional),
optimal transport via enumeration of basic solutions (the engine runs a
simplex), termination probabilities via the engine's linear solve are checked
against hand results, and game winners via explicit search over the move
graph driving only `validate_move`.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from itertools import product

from fixwit.bisim import BisimInstance, TransitionSystem
from fixwit.game import PRIMAL, DUAL, ExistsMove, ExistsTurn, validate_move
from fixwit.lattice import RelJoin, RelMeet
from fixwit.metric import LabelledMarkovChain
from fixwit.termination import MarkovChain

ZERO = Fraction(0)


# ---------------------------------------------------------------------------
# Bisimilarity oracle: partition refinement


def bisimilar_pairs(ts: TransitionSystem) -> frozenset[tuple[int, int]]:
    block = {x: 0 for x in range(ts.n)}
    while True:
        signatures = {
            x: frozenset(block[y] for y in ts.succ(x)) for x in range(ts.n)
        }
        keys = {}
        new_block = {}
        for x in range(ts.n):
            key = (block[x], signatures[x])
            if key not in keys:
                keys[key] = len(keys)
            new_block[x] = keys[key]
        if new_block == block:
            break
        block = new_block
    return frozenset(
        (x, y) for x in range(ts.n) for y in range(ts.n) if block[x] == block[y]
    )


# ---------------------------------------------------------------------------
# Transport oracle: enumerate basic solutions (vertices of the polytope)


def transport_min_by_enumeration(cost, supply, demand) -> Fraction:
    m, n = len(supply), len(demand)

    @lru_cache(maxsize=None)
    def best(rem_s: tuple, rem_d: tuple) -> Fraction | None:
        rows = [i for i in range(m) if rem_s[i] > 0]
        cols = [j for j in range(n) if rem_d[j] > 0]
        if not rows:
            return ZERO
        out = None
        for i in rows:
            for j in cols:
                t = min(rem_s[i], rem_d[j])
                ns = list(rem_s)
                nd = list(rem_d)
                ns[i] -= t
                nd[j] -= t
                sub = best(tuple(ns), tuple(nd))
                if sub is None:
                    continue
                val = t * cost[i][j] + sub
                if out is None or val < out:
                    out = val
        return out

    result = best(tuple(supply), tuple(demand))
    assert result is not None
    return result


# ---------------------------------------------------------------------------
# Exhaustive game search (bisimilarity instances)


def primal_search_winners(inst: BisimInstance, full_enumeration: bool) -> set[tuple[int, int]]:
    """Pairs from which the exists player wins the primal game, by explicit
    search over the move graph.

    ``full_enumeration`` tries every relation as an exists move (feasible for
    n <= 3); otherwise only the dominant move (the complement of the current
    winning set) is tried, which suffices because the exists player prefers
    relations that are small and whose complement is winning.
    """
    ts = inst.ts
    lat = inst.behaviour
    pairs = [(i, j) for i in range(ts.n) for j in range(ts.n)]
    winning: set[tuple[int, int]] = set()

    def move_ok(pair, d) -> bool:
        pos = ExistsTurn(RelJoin(*pair), 0)
        return validate_move(inst, PRIMAL, pos, ExistsMove(value=d)).ok

    changed = True
    while changed:
        changed = False
        for pair in pairs:
            if pair in winning:
                continue
            if full_enumeration:
                found = False
                for d in range(lat.bottom + 1):
                    replies = [p for p in pairs if not lat.contains(d, *p)]
                    if all(r in winning for r in replies) and move_ok(pair, d):
                        found = True
                        break
            else:
                d = lat.from_pairs(p for p in pairs if p not in winning)
                found = move_ok(pair, d)
            if found:
                winning.add(pair)
                changed = True
    return winning


def _minimal_couplings(ts: TransitionSystem, x1: int, x2: int):
    s1, s2 = ts.succ(x1), ts.succ(x2)
    if not s1 and not s2:
        yield frozenset()
        return
    if not s1 or not s2:
        return  # no valid coupling
    for g in product(s2, repeat=len(s1)):
        for h in product(s1, repeat=len(s2)):
            yield frozenset(
                {(y1, y2) for y1, y2 in zip(s1, g)} | {(y1, y2) for y2, y1 in zip(s2, h)}
            )


def dual_search_winners(inst: BisimInstance, full_enumeration: bool) -> set[tuple[int, int]]:
    """Pairs from which the forall player wins the dual game, by search.

    Exists moves range over all relations (``full_enumeration``, n <= 3) or
    over the minimal couplings, which dominate: shrinking a valid coupling
    only removes forall replies.
    """
    ts = inst.ts
    lat = inst.behaviour
    pairs = [(i, j) for i in range(ts.n) for j in range(ts.n)]
    winning: set[tuple[int, int]] = set()

    def valid_move(pair, d) -> bool:
        pos = ExistsTurn(RelMeet(*pair), 0)
        return validate_move(inst, DUAL, pos, ExistsMove(value=d)).ok

    def exists_moves(pair):
        if full_enumeration:
            for d in range(lat.bottom + 1):
                if valid_move(pair, d):
                    yield d
        else:
            for coupling in _minimal_couplings(ts, *pair):
                d = lat.from_pairs(coupling)
                if valid_move(pair, d):
                    yield d

    changed = True
    while changed:
        changed = False
        for pair in pairs:
            if pair in winning:
                continue
            moves = list(exists_moves(pair))
            if all(
                any((p in winning) for p in lat.pairs(d)) for d in moves
            ):
                winning.add(pair)
                changed = True
    return winning


# ---------------------------------------------------------------------------
# Random model generators (seeded)


def random_ts(rng: random.Random, max_n: int = 8, max_out: int = 3) -> TransitionSystem:
    n = rng.randint(2, max_n)
    succ = []
    for _ in range(n):
        k = rng.randint(0, min(max_out, n))
        succ.append(tuple(sorted(rng.sample(range(n), k))))
    return TransitionSystem(n, tuple(succ))


def random_distribution(
    rng: random.Random, states: list[int], max_support: int = 3, max_denominator: int = 6
) -> tuple[tuple[int, Fraction], ...]:
    support = rng.sample(states, rng.randint(1, min(max_support, len(states))))
    denom = rng.randint(max(2, len(support)), max_denominator)
    # split `denom` units over the support, each getting at least one
    cuts = sorted(rng.sample(range(1, denom), len(support) - 1)) if len(support) > 1 else []
    units = []
    prev = 0
    for c in cuts + [denom]:
        units.append(c - prev)
        prev = c
    return tuple((s, Fraction(u, denom)) for s, u in zip(support, units))


def random_mc(rng: random.Random, max_n: int = 6) -> MarkovChain:
    n = rng.randint(2, max_n)
    terminal = frozenset(rng.sample(range(n), rng.randint(1, max(1, n // 2))))
    delta = []
    for x in range(n):
        if x in terminal:
            delta.append(None)
        else:
            delta.append(random_distribution(rng, list(range(n))))
    return MarkovChain(n, terminal, tuple(delta))


def random_lmc(rng: random.Random, max_n: int = 5, labels: str = "ab") -> LabelledMarkovChain:
    n = rng.randint(2, max_n)
    labs = tuple(rng.choice(labels) for _ in range(n))
    delta = tuple(random_distribution(rng, list(range(n))) for _ in range(n))
    return LabelledMarkovChain(n, labs, delta)


def random_tree(rng: random.Random, mc: MarkovChain, max_height: int):
    """Random well-formed witness tree, or None when the chain offers none."""
    from fixwit.termination import Leaf, Node

    def grow(x: int, budget: int):
        if x in mc.terminal:
            return Leaf(x)
        if budget <= 1:
            return None
        succ = list(mc.succ(x))
        rng.shuffle(succ)
        children = []
        for y in succ[: rng.randint(1, len(succ))]:
            sub = grow(y, budget - 1)
            if sub is not None:
                children.append(sub)
        if not children:
            return None
        return Node(x, tuple(children))

    starts = [x for x in range(mc.n)]
    rng.shuffle(starts)
    for x in starts:
        tree = grow(x, max_height)
        if tree is not None:
            return tree
    return None
