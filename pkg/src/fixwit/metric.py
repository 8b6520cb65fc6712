"""Labelled Markov chains: Kantorovich behavioural metrics, formulas, strategies.

The behaviour lattice is the distance-matrix lattice; one step of the
behaviour function sets distance 1 for differently labelled states and
otherwise lifts the current distance to the successor distributions through
an exact optimal-coupling computation (transportation simplex).

Metric formulas evaluate to values in ``[0,1]``; a witness for ``d^c_{x1,x2}``
is a formula whose values at the two states differ by strictly more than
``c``.  The inductive constructor assembles, from the child formulas, an
optimal "price function" via the dual potentials of the coupling LP, entirely
with the ``1-f``, ``f (-) q`` and ``max`` operators and constants read off the
child evaluations; its expectation gap equals the lifted distance exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import IntegrityError, NoWitnessError, StructuralError, SynthesisError
from .fixpoint import DegreeResult
from .instance import Instance
from .lattice import BasisElement, DistJoin, DistLattice, DistMeet
from .rat import format_rational
from .transport import transport

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class LabelledMarkovChain:
    n: int
    labels: tuple[str, ...]
    # per state: tuple of (target, probability), positive entries summing to 1
    delta: tuple[tuple[tuple[int, Fraction], ...], ...]

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise StructuralError("state count must be positive")
        if len(self.labels) != self.n or len(self.delta) != self.n:
            raise StructuralError("labels and delta must cover every state")
        for x, row in enumerate(self.delta):
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

    def succ(self, x: int) -> tuple[int, ...]:
        return tuple(y for y, _ in self.delta[x])

    def prob(self, x: int, y: int) -> Fraction:
        for target, p in self.delta[x]:
            if target == y:
                return p
        return ZERO


# ---------------------------------------------------------------------------
# Metric formulas


@dataclass(frozen=True)
class LabelInd:
    label: str

    def __str__(self) -> str:
        return f"[{self.label}]"


@dataclass(frozen=True)
class Next:
    child: "MetricFormula"

    def __str__(self) -> str:
        return f"O({self.child})"


@dataclass(frozen=True)
class OneMinus:
    child: "MetricFormula"

    def __str__(self) -> str:
        return f"(1 - {self.child})"


@dataclass(frozen=True)
class SubQ:
    child: "MetricFormula"
    q: Fraction

    def __post_init__(self) -> None:
        if not 0 <= self.q <= 1:
            raise StructuralError(f"subtraction constant {self.q} out of [0,1]")

    def __str__(self) -> str:
        return f"({self.child} (-) {format_rational(self.q)})"


@dataclass(frozen=True)
class MaxF:
    left: "MetricFormula"
    right: "MetricFormula"

    def __str__(self) -> str:
        return f"max({self.left}, {self.right})"


MetricFormula = LabelInd | Next | OneMinus | SubQ | MaxF


@lru_cache(maxsize=None)
def eval_vec(lmc: LabelledMarkovChain, f: MetricFormula) -> tuple[Fraction, ...]:
    if isinstance(f, LabelInd):
        return tuple(ONE if lmc.labels[x] == f.label else ZERO for x in range(lmc.n))
    if isinstance(f, Next):
        inner = eval_vec(lmc, f.child)
        return tuple(
            sum((p * inner[y] for y, p in lmc.delta[x]), ZERO) for x in range(lmc.n)
        )
    if isinstance(f, OneMinus):
        inner = eval_vec(lmc, f.child)
        return tuple(ONE - v for v in inner)
    if isinstance(f, SubQ):
        inner = eval_vec(lmc, f.child)
        return tuple(max(v - f.q, ZERO) for v in inner)
    if isinstance(f, MaxF):
        lv = eval_vec(lmc, f.left)
        rv = eval_vec(lmc, f.right)
        return tuple(max(a, b) for a, b in zip(lv, rv))
    raise StructuralError(f"not a metric formula: {f!r}")


def eval_metric_formula(lmc: LabelledMarkovChain, f: MetricFormula, x: int) -> Fraction:
    return eval_vec(lmc, f)[x]


def modal_leaves(f: MetricFormula) -> tuple[MetricFormula, ...]:
    """Maximal Next/LabelInd-rooted subformulas of an operator skeleton."""
    if isinstance(f, (LabelInd, Next)):
        return (f,)
    if isinstance(f, (OneMinus, SubQ)):
        return modal_leaves(f.child)
    if isinstance(f, MaxF):
        out = list(modal_leaves(f.left))
        for leaf in modal_leaves(f.right):
            if leaf not in out:
                out.append(leaf)
        return tuple(out)
    raise StructuralError(f"not a metric formula: {f!r}")


def formula_depth(f: MetricFormula) -> int:
    """Kleene stage of the logic function generating the formula."""
    if isinstance(f, LabelInd):
        return 1
    if isinstance(f, Next):
        return 1 + max((formula_depth(leaf) for leaf in modal_leaves(f.child)), default=0)
    raise StructuralError(f"witness formulas are rooted at [a] or O(.), got {f!r}")


# ---------------------------------------------------------------------------
# Kantorovich lifting


def kantorovich(
    d: tuple[tuple[Fraction, ...], ...],
    p: Sequence[tuple[int, Fraction]],
    q: Sequence[tuple[int, Fraction]],
) -> tuple[Fraction, dict[tuple[int, int], Fraction]]:
    """Exact minimum coupling cost of ``p`` and ``q`` under the cost matrix
    ``d``; also returns an optimal coupling as certificate."""
    p = [(s, w) for s, w in p if w != 0]
    q = [(s, w) for s, w in q if w != 0]
    if not p or not q or sum(w for _, w in p) != 1 or sum(w for _, w in q) != 1 or any(
        w < 0 for _, w in list(p) + list(q)
    ):
        raise StructuralError("invalid distributions: need positive mass summing to 1")
    rows = [s for s, _ in p]
    cols = [s for s, _ in q]
    cost = [[d[u][v] for v in cols] for u in rows]
    res = transport(cost, [w for _, w in p], [w for _, w in q])
    coupling = {
        (rows[i], cols[j]): w for (i, j), w in res.coupling.items()
    }
    return res.value, coupling


def _lift(lmc: LabelledMarkovChain, d, x1: int, x2: int) -> Fraction:
    if lmc.labels[x1] != lmc.labels[x2]:
        return ONE
    value, _ = kantorovich(d, lmc.delta[x1], lmc.delta[x2])
    return value


def metric_functional(lmc: LabelledMarkovChain, d) -> tuple[tuple[Fraction, ...], ...]:
    n = lmc.n
    out = [[ZERO] * n for _ in range(n)]
    symmetric = all(d[i][j] == d[j][i] for i in range(n) for j in range(i + 1, n))
    for x1 in range(n):
        for x2 in range(n):
            if symmetric and x2 < x1:
                out[x1][x2] = out[x2][x1]
            else:
                out[x1][x2] = _lift(lmc, d, x1, x2)
    return tuple(tuple(row) for row in out)


# ---------------------------------------------------------------------------
# Optimal price-function assembly


def _shift_down(f: MetricFormula, q: Fraction) -> MetricFormula:
    """Syntax for ``f (-) q`` with arbitrary nonnegative rational ``q``
    (chained truncated subtractions when q exceeds 1)."""
    while q > 1:
        f = SubQ(f, ONE)
        q -= 1
    return SubQ(f, q) if q > 0 else f


def _shift_up(f: MetricFormula, q: Fraction) -> MetricFormula:
    """Syntax for ``min(f + q, 1)``."""
    while q > 1:
        f = OneMinus(_shift_down(OneMinus(f), ONE))
        q -= 1
    if q > 0:
        f = OneMinus(_shift_down(OneMinus(f), q))
    return f


def _fold_max(parts: Sequence[MetricFormula]) -> MetricFormula:
    out = parts[0]
    for p in parts[1:]:
        out = MaxF(out, p)
    return out


def _fold_min(parts: Sequence[MetricFormula]) -> MetricFormula:
    return OneMinus(_fold_max([OneMinus(p) for p in parts]))


def optimal_gap_formula(
    lmc: LabelledMarkovChain,
    children: Sequence[MetricFormula],
    x1: int,
    x2: int,
) -> tuple[MetricFormula, Fraction]:
    """Body formula whose one-step expectation gap at ``(x1, x2)`` equals the
    Kantorovich lifting of the pseudometric generated by ``children``.

    Construction: solve the coupling LP over the successor supports for the
    cost ``d_A(u,v) = max_g |g(u) - g(v)|``, turn the dual potentials into a
    non-expansive function via ``phi(y) = min_j (d_A(y, col_j) - v_j)``, and
    express ``phi`` (normalized into [0,1]) with the lattice operators, using
    only constants from the child evaluations and the dual potentials.
    """
    if not children:
        raise NoWitnessError("cannot assemble a price function from an empty child set")
    vecs = [eval_vec(lmc, g) for g in children]

    def d_a(u: int, v: int) -> Fraction:
        return max(abs(vec[u] - vec[v]) for vec in vecs)

    rows = [y for y, _ in lmc.delta[x1]]
    cols = [y for y, _ in lmc.delta[x2]]
    cost = [[d_a(u, v) for v in cols] for u in rows]
    res = transport(cost, [w for _, w in lmc.delta[x1]], [w for _, w in lmc.delta[x2]])

    def phi(y: int) -> Fraction:
        return min(d_a(y, col) - vj for col, vj in zip(cols, res.col_duals))

    shift = min(phi(y) for y in set(rows) | set(cols))

    def dist_to(z: int) -> MetricFormula:
        parts: list[MetricFormula] = []
        for g, vec in zip(children, vecs):
            gz = vec[z]
            parts.append(SubQ(g, gz) if gz > 0 else g)
            if gz < 1:
                parts.append(SubQ(OneMinus(g), ONE - gz))
            elif gz == 1:
                parts.append(OneMinus(g))
        return _fold_max(parts)

    terms: list[MetricFormula] = []
    for col, vj in zip(cols, res.col_duals):
        offset = vj + shift  # t_j = d_A(., col) - offset
        base = dist_to(col)
        terms.append(_shift_down(base, offset) if offset >= 0 else _shift_up(base, -offset))
    body = _fold_min(terms)

    vec = eval_vec(lmc, body)
    gap = abs(
        sum((p * vec[y] for y, p in lmc.delta[x1]), ZERO)
        - sum((p * vec[y] for y, p in lmc.delta[x2]), ZERO)
    )
    if gap != res.value:
        raise IntegrityError(
            f"price-function assembly is off: expectation gap {gap} vs LP value {res.value}"
        )
    return body, res.value


# ---------------------------------------------------------------------------
# Instance


class MetricInstance(Instance):
    kind = "metric"

    def __init__(self, lmc: LabelledMarkovChain, max_iter: int = 64):
        super().__init__(DistLattice(lmc.n), max_iter)
        self.lmc = lmc
        self.gamma_alpha_of = self._gamma_alpha_of
        self.alpha_gamma_of = self._alpha_gamma_of

    def behaviour_step(self, value):
        return metric_functional(self.lmc, value)

    def level(self, x1: int, x2: int, c: Fraction) -> DegreeResult:
        chain = self.iterates()
        for k, it in enumerate(chain):
            if it[x1][x2] > c:
                return DegreeResult(k, k)
        return DegreeResult(None, len(chain) - 1)

    # -- witnesses -----------------------------------------------------------
    def validate_payload(self, payload) -> None:
        if not isinstance(payload, (LabelInd, Next)):
            raise StructuralError(
                f"metric witnesses are rooted at [a] or O(.), got {payload!r}"
            )
        eval_vec(self.lmc, payload)

    def structural_degree(self, payload) -> int:
        return formula_depth(payload)

    def subterms(self, payload) -> tuple[MetricFormula, ...]:
        if isinstance(payload, LabelInd):
            return ()
        return modal_leaves(payload.child)

    def alpha_set(self, payloads) -> tuple[tuple[Fraction, ...], ...]:
        vecs = [eval_vec(self.lmc, p) for p in payloads]
        n = self.lmc.n
        return tuple(
            tuple(
                max((abs(vec[i] - vec[j]) for vec in vecs), default=ZERO)
                for j in range(n)
            )
            for i in range(n)
        )

    def _formula_for(self, x1: int, x2: int, c: Fraction, children: Sequence[MetricFormula]) -> MetricFormula:
        lmc = self.lmc
        if lmc.labels[x1] != lmc.labels[x2]:
            return LabelInd(lmc.labels[x1])
        uniq: list[MetricFormula] = []
        for g in children:
            if g not in uniq:
                uniq.append(g)
        uniq.sort(key=str)
        # prefer a single child when it already realizes the gap
        for g in uniq:
            vec = eval_vec(lmc, g)
            e1 = sum((p * vec[y] for y, p in lmc.delta[x1]), ZERO)
            e2 = sum((p * vec[y] for y, p in lmc.delta[x2]), ZERO)
            if abs(e1 - e2) > c:
                return Next(g)
        body, value = optimal_gap_formula(lmc, uniq, x1, x2)
        if value <= c:
            raise NoWitnessError(
                f"children only certify a lifted distance of {format_rational(value)} "
                f"<= {format_rational(c)} at ({x1},{x2})"
            )
        return Next(body)

    def apc(self, b: BasisElement, children: Sequence[MetricFormula]) -> MetricFormula:
        if not isinstance(b, DistJoin):
            raise StructuralError(f"expected d^c_{{x1,x2}}, got {b!r}")
        return self._formula_for(b.x1, b.x2, b.c, children)

    def adc(self, bd: BasisElement, children: Sequence[MetricFormula]) -> MetricFormula:
        if not isinstance(bd, DistMeet):
            raise StructuralError(f"expected a dual distance element, got {bd!r}")
        return self._formula_for(bd.x1, bd.x2, bd.c, children)

    # -- strategies --------------------------------------------------------------
    def _constants(self, x1: int, x2: int, c: Fraction) -> list[tuple[int, int, Fraction]]:
        lvl = self.level(x1, x2, c)
        if not lvl.known:
            raise SynthesisError(
                f"level of pair ({x1},{x2}) above {format_rational(c)} unknown after "
                f"{lvl.iterations} iterations"
            )
        k = lvl.value
        if k <= 1:
            return []  # different labels: the exists player moves to bottom
        prev = self.iterates()[k - 1]
        total = self.iterates()[k][x1][x2]
        assert total > c, "iteration inconsistency: d_k <= c"
        # smallest dyadic scale 1 - 2^-j keeping the coupling inequality strict
        scale = Fraction(1, 2)
        while scale * total <= c:
            scale = (1 + scale) / 2
        out: dict[tuple[int, int], Fraction] = {}
        for u in self.lmc.succ(x1):
            for v in self.lmc.succ(x2):
                if u == v or prev[u][v] == 0:
                    continue
                key = (min(u, v), max(u, v))
                out.setdefault(key, scale * prev[u][v])
        return [(u, v, cv) for (u, v), cv in sorted(out.items())]

    def primal_strategy(self, b: BasisElement) -> tuple[BasisElement, ...]:
        if not isinstance(b, DistJoin):
            raise StructuralError(f"expected d^c_{{x1,x2}}, got {b!r}")
        return tuple(DistJoin(u, v, cv) for u, v, cv in self._constants(b.x1, b.x2, b.c))

    def dual_strategy(self, bd: BasisElement) -> tuple[BasisElement, ...]:
        if not isinstance(bd, DistMeet):
            raise StructuralError(f"expected a dual distance element, got {bd!r}")
        return tuple(DistMeet(u, v, cv) for u, v, cv in self._constants(bd.x1, bd.x2, bd.c))

    # -- laws ---------------------------------------------------------------------
    def alpha_logic_step(self, payloads: frozenset):
        """Exact alpha(l(A)): the label part, plus per pair the gap of an
        explicitly constructed optimal formula over cl(A), evaluated
        syntactically."""
        lmc = self.lmc
        n = lmc.n
        children = sorted(payloads, key=str)
        out = [[ZERO] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                if j < i:
                    out[i][j] = out[j][i]
                    continue
                if lmc.labels[i] != lmc.labels[j]:
                    out[i][j] = ONE
                    continue
                if children:
                    _, value = optimal_gap_formula(lmc, children, i, j)
                    out[i][j] = value
        return tuple(tuple(row) for row in out)

    def _gamma_alpha_of(self, payloads: frozenset) -> list[str]:
        alpha = self.alpha_set(payloads)
        out = []
        for p in payloads:
            vec = eval_vec(self.lmc, p)
            for i in range(self.lmc.n):
                for j in range(self.lmc.n):
                    if abs(vec[i] - vec[j]) > alpha[i][j]:
                        out.append(f"{p} is not non-expansive wrt alpha of the sample at ({i},{j})")
        return out

    def _alpha_gamma_of(self, d):
        """Sound under-approximation of alpha(gamma(d)) from explicitly checked
        non-expansive candidate functions."""
        self.behaviour.validate(d)
        n = self.lmc.n
        candidates: list[tuple[Fraction, ...]] = []
        values = sorted({q for row in d for q in row} | {ONE})
        for z in range(n):
            for q in values:
                f = tuple(max(q - d[z][y], ZERO) for y in range(n))
                candidates.append(f)
        admitted = [
            f
            for f in candidates
            if all(abs(f[i] - f[j]) <= d[i][j] for i in range(n) for j in range(n))
        ]
        return tuple(
            tuple(
                max((abs(f[i] - f[j]) for f in admitted), default=ZERO) for j in range(n)
            )
            for i in range(n)
        )

    # -- presentation ---------------------------------------------------------------
    def witness_evidence(self, element: BasisElement, payload) -> dict[str, str]:
        vec = eval_vec(self.lmc, payload)
        x1, x2 = element.x1, element.x2
        return {
            "formula": str(payload),
            f"value at {x1}": format_rational(vec[x1]),
            f"value at {x2}": format_rational(vec[x2]),
            "gap": format_rational(abs(vec[x1] - vec[x2])),
        }

    # -- serialization ----------------------------------------------------------------
    def payload_to_json(self, payload) -> dict:
        return formula_to_json(payload)

    def payload_from_json(self, data) -> MetricFormula:
        return formula_from_json(data)


def formula_to_json(f: MetricFormula) -> dict:
    if isinstance(f, LabelInd):
        return {"op": "label", "label": f.label}
    if isinstance(f, Next):
        return {"op": "next", "child": formula_to_json(f.child)}
    if isinstance(f, OneMinus):
        return {"op": "oneminus", "child": formula_to_json(f.child)}
    if isinstance(f, SubQ):
        return {"op": "subq", "child": formula_to_json(f.child), "q": format_rational(f.q)}
    if isinstance(f, MaxF):
        return {"op": "max", "left": formula_to_json(f.left), "right": formula_to_json(f.right)}
    raise StructuralError(f"not a metric formula: {f!r}")


def formula_from_json(data) -> MetricFormula:
    from .rat import parse_unit_rational

    if not isinstance(data, dict) or "op" not in data:
        raise StructuralError(f"malformed metric formula: {data!r}")
    op = data["op"]
    if op == "label":
        return LabelInd(str(data["label"]))
    if op == "next":
        return Next(formula_from_json(data["child"]))
    if op == "oneminus":
        return OneMinus(formula_from_json(data["child"]))
    if op == "subq":
        return SubQ(formula_from_json(data["child"]), parse_unit_rational(data["q"]))
    if op == "max":
        return MaxF(formula_from_json(data["left"]), formula_from_json(data["right"]))
    raise StructuralError(f"unknown metric operator {op!r}")


def metric_witness(lmc: LabelledMarkovChain, x1: int, x2: int, c: Fraction, max_iter: int = 64):
    """Formula with evaluation gap > c at the pair, or a DegreeResult marking Unknown."""
    inst = MetricInstance(lmc, max_iter)
    lvl = inst.level(x1, x2, c)
    if not lvl.known:
        return lvl

    def build(u: int, v: int, bound: Fraction) -> MetricFormula:
        if lmc.labels[u] != lmc.labels[v]:
            return LabelInd(lmc.labels[u])
        consts = inst._constants(u, v, bound)
        children = [build(a, b, cb) for a, b, cb in consts]
        return inst._formula_for(u, v, bound, children)

    return build(x1, x2, c)
