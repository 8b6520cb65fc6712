"""Markov chains with terminal states: termination probabilities and witness trees.

The behaviour lattice is the valuation lattice; the step function sends a
valuation ``f`` to 1 on terminal states and to the expected value of ``f``
under the outgoing distribution elsewhere.  Its least fixpoint assigns each
state its termination probability.  A witness for ``f^c_x`` is a finite tree
of states whose ``pt`` value (the probability mass of the paths it spells
out) strictly exceeds ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import NoWitnessError, StructuralError, SynthesisError
from .fixpoint import DegreeResult
from .instance import Instance
from .lattice import BasisElement, ValJoin, ValLattice, ValMeet
from .rat import format_rational

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class MarkovChain:
    n: int
    terminal: frozenset[int]
    # per state: tuple of (target, probability) with positive entries, or None for terminal states
    delta: tuple[tuple[tuple[int, Fraction], ...] | None, ...]

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise StructuralError("state count must be positive")
        if len(self.delta) != self.n:
            raise StructuralError("delta table length must equal the state count")
        for t in self.terminal:
            if not 0 <= t < self.n:
                raise StructuralError(f"terminal state {t} out of range")
        for x in range(self.n):
            row = self.delta[x]
            if x in self.terminal:
                if row is not None:
                    raise StructuralError(f"terminal state {x} must not have outgoing transitions")
                continue
            if row is None:
                raise StructuralError(f"non-terminal state {x} needs a distribution")
            targets = [y for y, _ in row]
            if len(set(targets)) != len(targets):
                raise StructuralError(f"duplicate transition targets at state {x}")
            total = ZERO
            for y, p in row:
                if not 0 <= y < self.n:
                    raise StructuralError(f"transition target {y} out of range at state {x}")
                if p <= 0:
                    raise StructuralError(f"transition probability {p} at state {x} must be positive")
                total += p
            if total != 1:
                raise StructuralError(f"distribution at state {x} sums to {total}, not 1")

    def prob(self, x: int, y: int) -> Fraction:
        row = self.delta[x]
        if row is None:
            return ZERO
        for target, p in row:
            if target == y:
                return p
        return ZERO

    def succ(self, x: int) -> tuple[int, ...]:
        row = self.delta[x]
        return () if row is None else tuple(y for y, _ in row)


# ---------------------------------------------------------------------------
# Witness trees


@dataclass(frozen=True)
class Leaf:
    state: int

    def __str__(self) -> str:
        return str(self.state)


@dataclass(frozen=True)
class Node:
    state: int
    children: tuple["WitnessTree", ...]

    def __str__(self) -> str:
        return f"{self.state}->({', '.join(str(c) for c in self.children)})"


WitnessTree = Leaf | Node


def tree_root(tree: WitnessTree) -> int:
    return tree.state


def tree_height(tree: WitnessTree) -> int:
    if isinstance(tree, Leaf):
        return 1
    return 1 + max(tree_height(c) for c in tree.children)


def validate_tree(mc: MarkovChain, tree: WitnessTree) -> None:
    if isinstance(tree, Leaf):
        if tree.state not in mc.terminal:
            raise StructuralError(f"leaf state {tree.state} is not terminal")
        return
    if not isinstance(tree, Node):
        raise StructuralError(f"not a witness tree: {tree!r}")
    if tree.state in mc.terminal:
        raise StructuralError(f"terminal state {tree.state} cannot have children")
    if not tree.children:
        raise StructuralError(f"node {tree.state} must have at least one child")
    roots = [tree_root(c) for c in tree.children]
    if len(set(roots)) != len(roots):
        raise StructuralError(f"children of node {tree.state} must have pairwise distinct roots")
    for c in tree.children:
        if mc.prob(tree.state, tree_root(c)) <= 0:
            raise StructuralError(
                f"child root {tree_root(c)} is not a positive-probability successor of {tree.state}"
            )
        validate_tree(mc, c)


def pt(mc: MarkovChain, tree: WitnessTree) -> Fraction:
    """Probability mass of the terminating paths described by the tree."""
    validate_tree(mc, tree)
    return _pt(mc, tree)


def _pt(mc: MarkovChain, tree: WitnessTree) -> Fraction:
    if isinstance(tree, Leaf):
        return ONE
    return sum(
        (mc.prob(tree.state, tree_root(c)) * _pt(mc, c) for c in tree.children), ZERO
    )


# ---------------------------------------------------------------------------
# Behaviour side


def term_functional(mc: MarkovChain, f: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    out = []
    for x in range(mc.n):
        if x in mc.terminal:
            out.append(ONE)
        else:
            row = mc.delta[x]
            out.append(sum((p * f[y] for y, p in row), ZERO))
    return tuple(out)


def termination_oracle(mc: MarkovChain) -> tuple[Fraction, ...]:
    """Exact termination probabilities: eliminate states that cannot reach a
    terminal state, then solve the remaining linear system by Gaussian
    elimination over the rationals."""
    # states with positive probability of reaching T = states with a path to T
    reach = set(mc.terminal)
    changed = True
    while changed:
        changed = False
        for x in range(mc.n):
            if x in reach or mc.delta[x] is None:
                continue
            if any(y in reach for y, _ in mc.delta[x]):
                reach.add(x)
                changed = True
    unknowns = [x for x in range(mc.n) if x in reach and x not in mc.terminal]
    index = {x: i for i, x in enumerate(unknowns)}
    m = len(unknowns)
    # (I - A) v = b  where A is the sub-stochastic matrix among unknowns
    matrix = [[ZERO] * m for _ in range(m)]
    rhs = [ZERO] * m
    for x in unknowns:
        i = index[x]
        matrix[i][i] = ONE
        for y, p in mc.delta[x]:
            if y in mc.terminal:
                rhs[i] += p
            elif y in index:
                matrix[i][index[y]] -= p
            # targets outside `reach` contribute 0
    solution = _solve(matrix, rhs)
    out = []
    for x in range(mc.n):
        if x in mc.terminal:
            out.append(ONE)
        elif x in index:
            out.append(solution[index[x]])
        else:
            out.append(ZERO)
    return tuple(out)


def _solve(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    m = len(matrix)
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(m):
        pivot = next((r for r in range(col, m) if a[r][col] != 0), None)
        # cannot be singular after removing probability-0 states
        assert pivot is not None, "singular system after 0-state elimination"
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col]
        a[col] = [v / inv for v in a[col]]
        for r in range(m):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [a[r][m] for r in range(m)]


# ---------------------------------------------------------------------------
# Instance


class TerminationInstance(Instance):
    kind = "termination"

    def __init__(self, mc: MarkovChain, max_iter: int = 64):
        super().__init__(ValLattice(mc.n), max_iter)
        self.mc = mc
        self.gamma_alpha_of = self._gamma_alpha_of
        self.alpha_gamma_of = self._alpha_gamma_of

    def behaviour_step(self, value):
        return term_functional(self.mc, value)

    def level(self, x: int, c: Fraction) -> DegreeResult:
        """Least k with the k-th iterate exceeding c at x (degree of f^c_x,
        which coincides with the co-degree of the dual element)."""
        chain = self.iterates()
        for k, it in enumerate(chain):
            if it[x] > c:
                return DegreeResult(k, k)
        return DegreeResult(None, len(chain) - 1)

    # -- witnesses -------------------------------------------------------
    def validate_payload(self, payload) -> None:
        validate_tree(self.mc, payload)

    def structural_degree(self, payload) -> int:
        return tree_height(payload)

    def subterms(self, payload) -> tuple[WitnessTree, ...]:
        if isinstance(payload, Leaf):
            return ()
        return payload.children

    def alpha_set(self, payloads) -> tuple[Fraction, ...]:
        best = [ZERO] * self.mc.n
        for tree in payloads:
            v = _pt(self.mc, tree)
            r = tree_root(tree)
            if v > best[r]:
                best[r] = v
        return tuple(best)

    def _assemble(self, x: int, c: Fraction, children: Sequence[WitnessTree]) -> WitnessTree:
        if x in self.mc.terminal:
            return Leaf(x)
        by_root: dict[int, WitnessTree] = {}
        for tree in children:
            r = tree_root(tree)
            if self.mc.prob(x, r) <= 0:
                continue
            cur = by_root.get(r)
            if cur is None:
                by_root[r] = tree
                continue
            # keep the maximal-pt child; ties resolved by the least serialized form
            new_key = (-_pt(self.mc, tree), self.payload_key(tree))
            cur_key = (-_pt(self.mc, cur), self.payload_key(cur))
            if new_key < cur_key:
                by_root[r] = tree
        if not by_root:
            raise NoWitnessError(
                f"state {x} is not terminal and no child witness matches its successors"
            )
        node = Node(x, tuple(by_root[r] for r in sorted(by_root)))
        value = _pt(self.mc, node)
        if value <= c:
            raise NoWitnessError(
                f"assembled tree for state {x} reaches pt = {format_rational(value)} "
                f"<= {format_rational(c)}"
            )
        return node

    def apc(self, b: BasisElement, children: Sequence[WitnessTree]) -> WitnessTree:
        if not isinstance(b, ValJoin):
            raise StructuralError(f"expected f^c_x, got {b!r}")
        return self._assemble(b.state, b.c, children)

    def adc(self, bd: BasisElement, children: Sequence[WitnessTree]) -> WitnessTree:
        if not isinstance(bd, ValMeet):
            raise StructuralError(f"expected a dual valuation element, got {bd!r}")
        return self._assemble(bd.state, bd.c, children)

    # -- strategies ---------------------------------------------------------
    def _constants(self, x: int, c: Fraction) -> list[tuple[int, Fraction]]:
        """Per-successor constants: midpoints between the fair share of c and
        the previous iterate, strict by construction."""
        lvl = self.level(x, c)
        if not lvl.known:
            raise SynthesisError(
                f"level of state {x} above {format_rational(c)} unknown after "
                f"{lvl.iterations} iterations"
            )
        k = lvl.value
        if k == 0 or x in self.mc.terminal:
            return []
        prev = self.iterates()[k - 1]
        total = sum((p * prev[y] for y, p in self.mc.delta[x]), ZERO)
        assert total > c, "iteration inconsistency: d_k(x) <= c"
        rho = c / total
        scale = (1 + rho) / 2
        out = []
        for y, _p in self.mc.delta[x]:
            cy = scale * prev[y]
            if cy > 0:
                out.append((y, cy))
        return out

    def primal_strategy(self, b: BasisElement) -> tuple[BasisElement, ...]:
        if not isinstance(b, ValJoin):
            raise StructuralError(f"expected f^c_x, got {b!r}")
        return tuple(ValJoin(y, cy) for y, cy in self._constants(b.state, b.c))

    def dual_strategy(self, bd: BasisElement) -> tuple[BasisElement, ...]:
        if not isinstance(bd, ValMeet):
            raise StructuralError(f"expected a dual valuation element, got {bd!r}")
        return tuple(ValMeet(y, cy) for y, cy in self._constants(bd.state, bd.c))

    # -- laws ------------------------------------------------------------------
    def alpha_logic_step(self, payloads: frozenset) -> tuple[Fraction, ...]:
        trees = list(payloads)
        by_root: dict[int, list[WitnessTree]] = {}
        for t in trees:
            by_root.setdefault(tree_root(t), []).append(t)
        best = [ZERO] * self.mc.n
        for t in self.mc.terminal:
            best[t] = ONE
        for x in range(self.mc.n):
            if x in self.mc.terminal:
                continue
            # enumerate one-step extensions: nonempty choices of distinct-rooted children
            roots = [y for y in self.mc.succ(x) if by_root.get(y)]
            total = ZERO  # best extension takes the best child per root; verify by enumeration
            candidates = _choice_enumeration(
                [(y, by_root[y]) for y in roots], limit=20000
            )
            for combo in candidates:
                value = sum(
                    (self.mc.prob(x, tree_root(t)) * _pt(self.mc, t) for t in combo), ZERO
                )
                if value > total:
                    total = value
            best[x] = total
        return tuple(best)

    def _gamma_alpha_of(self, payloads: frozenset) -> list[str]:
        alpha = self.alpha_set(payloads)
        out = []
        for t in payloads:
            if _pt(self.mc, t) > alpha[tree_root(t)]:
                out.append(f"tree {t} exceeds alpha of the sample at its root")
        return out

    def _alpha_gamma_of(self, f):
        # sound under-approximation of alpha(gamma(f)): canonical trees of
        # bounded height whose pt stays below f at the root
        self.behaviour.validate(f)
        trees = enumerate_trees(self.mc, max_height=3, limit=3000)
        admitted = [t for t in trees if _pt(self.mc, t) <= f[tree_root(t)]]
        return self.alpha_set(admitted)

    # -- presentation ------------------------------------------------------------
    def witness_evidence(self, element: BasisElement, payload) -> dict[str, str]:
        return {
            "tree": str(payload),
            "pt": format_rational(_pt(self.mc, payload)),
            "root": str(tree_root(payload)),
        }

    # -- serialization -------------------------------------------------------------
    def payload_to_json(self, payload) -> dict:
        return tree_to_json(payload)

    def payload_from_json(self, data) -> WitnessTree:
        return tree_from_json(self.mc, data)


def _choice_enumeration(
    options: list[tuple[int, list[WitnessTree]]], limit: int
) -> list[tuple[WitnessTree, ...]]:
    """All nonempty selections of at most one tree per root."""
    combos: list[tuple[WitnessTree, ...]] = [()]
    for _root, trees in options:
        new = list(combos)
        for combo in combos:
            for t in trees:
                new.append(combo + (t,))
                if len(new) > limit:
                    raise StructuralError("tree-extension enumeration exceeds its size bound")
        combos = new
    return [c for c in combos if c]


def enumerate_trees(mc: MarkovChain, max_height: int, limit: int) -> list[WitnessTree]:
    """Canonical witness trees of bounded height (test/law-check helper)."""
    by_height: list[list[WitnessTree]] = [[]]
    level: list[WitnessTree] = [Leaf(t) for t in sorted(mc.terminal)]
    all_trees: list[WitnessTree] = list(level)
    by_height.append(level)
    for _h in range(2, max_height + 1):
        next_level: list[WitnessTree] = []
        for x in range(mc.n):
            if x in mc.terminal:
                continue
            options = [
                (y, [t for t in all_trees if tree_root(t) == y]) for y in mc.succ(x)
            ]
            options = [(y, ts) for y, ts in options if ts]
            if not options:
                continue
            for combo in _choice_enumeration(options, limit=limit):
                next_level.append(Node(x, tuple(sorted(combo, key=str))))
                if len(all_trees) + len(next_level) > limit:
                    return all_trees + next_level
        all_trees.extend(next_level)
    return all_trees


def tree_to_json(tree: WitnessTree) -> dict:
    if isinstance(tree, Leaf):
        return {"state": tree.state, "children": []}
    return {"state": tree.state, "children": [tree_to_json(c) for c in tree.children]}


def tree_from_json(mc: MarkovChain, data) -> WitnessTree:
    if not isinstance(data, dict) or "state" not in data:
        raise StructuralError(f"malformed tree: {data!r}")
    state = int(data["state"])
    children = data.get("children", [])
    if not children:
        if state in mc.terminal:
            return Leaf(state)
        raise StructuralError(f"childless node at non-terminal state {state}")
    return Node(state, tuple(tree_from_json(mc, c) for c in children))


# Convenience wrappers matching the operation-level API


def term_witness(mc: MarkovChain, x: int, c: Fraction, max_iter: int = 64):
    """Witness tree with pt > c rooted at x, or a DegreeResult marking Unknown."""
    inst = TerminationInstance(mc, max_iter)
    lvl = inst.level(x, c)
    if not lvl.known:
        return lvl

    def build(state: int, bound: Fraction) -> WitnessTree:
        if state in mc.terminal:
            return Leaf(state)
        consts = inst._constants(state, bound)
        children = [build(y, cy) for y, cy in consts]
        return inst._assemble(state, bound, children)

    return build(x, c)
