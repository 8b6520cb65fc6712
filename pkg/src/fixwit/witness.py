"""Witness data model, auxiliary constructions, witness/strategy transforms, verification.

A witness is a syntactic certificate (distinguishing formula, metric formula,
or tree) whose behaviour-side meaning, obtained through the instance's
``alpha``, settles a claim about the least fixpoint:

* primal claim for a join-basis element ``b``: ``b << alpha({w})``, hence
  ``b << mu(f)``;
* dual claim for a meet-basis element ``bd``: ``alpha({w})`` is not below
  ``bd``, hence ``mu(f)`` is not below ``bd``.

Transformations in both directions between witnesses and finitary game
strategies are provided; they never repair a broken witness silently but
surface the precise failed inequality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Sequence

from .errors import (
    IncompleteStrategyError,
    IntegrityError,
    NoWitnessError,
    StructuralError,
)
from .game import ExistsMove, ExistsTurn, ForallTurn, Strategy
from .instance import Instance
from .lattice import (
    BasisElement,
    DistLattice,
    DistMeet,
    Lattice,
    RelLattice,
    RelMeet,
    ValLattice,
    ValMeet,
    basis_from_json,
    basis_to_json,
    is_join_basis,
    is_meet_basis,
)

PRIMAL = "primal"
DUAL = "dual"


@dataclass(frozen=True)
class Witness:
    """Syntactic certificate with the instance tag and its claimed degree."""

    instance: str
    payload: Any
    claimed_degree: int


@dataclass(frozen=True)
class WitnessClaim:
    mode: str
    element: BasisElement

    def __post_init__(self) -> None:
        if self.mode not in (PRIMAL, DUAL):
            raise StructuralError(f"unknown claim mode {self.mode!r}")
        if self.mode == PRIMAL and not is_join_basis(self.element):
            raise StructuralError("a primal claim needs a join-basis element")
        if self.mode == DUAL and not is_meet_basis(self.element):
            raise StructuralError("a dual claim needs a meet-basis element")


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reasons: tuple[str, ...]
    evidence: dict

    def __str__(self) -> str:
        status = "accept" if self.accepted else "reject"
        return status + ("" if not self.reasons else ": " + "; ".join(self.reasons))


def make_witness(instance: Instance, payload: Any) -> Witness:
    instance.validate_payload(payload)
    return Witness(instance.kind, payload, instance.structural_degree(payload))


# ---------------------------------------------------------------------------
# Auxiliary functions


def _sorted_candidates(instance: Instance, a_set: Sequence[Witness]) -> list[Witness]:
    return sorted(a_set, key=lambda w: (w.claimed_degree, instance.payload_key(w.payload)))


def aux_p(
    instance: Instance,
    b: BasisElement,
    a_set: Sequence[Witness],
    apply_logic_step: bool = False,
) -> Witness:
    """Pick (or construct, with one logic step) a witness ``a`` with ``b << alpha({a})``."""
    lat = instance.behaviour
    target = lat.embed(b)
    if not apply_logic_step:
        for w in _sorted_candidates(instance, a_set):
            if lat.way_below(target, instance.alpha_set([w.payload])):
                return w
        raise NoWitnessError(
            f"no member of the {len(a_set)} candidate witnesses satisfies "
            f"b << alpha({{a}}) for b = {b}"
        )
    payload = instance.apc(b, [w.payload for w in a_set])
    out = make_witness(instance, payload)
    if not lat.way_below(target, instance.alpha_set([payload])):
        raise NoWitnessError(
            f"constructed witness {instance.describe_payload(payload)} does not satisfy "
            f"b << alpha({{a}}) for b = {b}"
        )
    return out


def aux_d(
    instance: Instance,
    bd: BasisElement,
    a_set: Sequence[Witness],
    apply_logic_step: bool = False,
) -> Witness:
    """Pick/construct a witness ``a`` with ``alpha({a})`` not below ``bd``."""
    lat = instance.behaviour
    target = lat.embed(bd)
    if not apply_logic_step:
        for w in _sorted_candidates(instance, a_set):
            if not lat.leq(instance.alpha_set([w.payload]), target):
                return w
        raise NoWitnessError(
            f"no member of the {len(a_set)} candidate witnesses satisfies "
            f"alpha({{a}}) not below {bd}"
        )
    payload = instance.adc(bd, [w.payload for w in a_set])
    out = make_witness(instance, payload)
    if lat.leq(instance.alpha_set([payload]), target):
        raise NoWitnessError(
            f"constructed witness {instance.describe_payload(payload)} does not satisfy "
            f"alpha({{a}}) not below {bd}"
        )
    return out


def z_pick(lattice: Lattice, e: Any, d: Any) -> BasisElement:
    """Meet-basis element way-above ``d`` that ``e`` still exceeds.

    On numeric lattices the constant is the rational midpoint of the gap; on
    relations it is a singleton pair separating the two values.
    """
    lattice.validate(e)
    lattice.validate(d)
    if lattice.leq(e, d):
        raise StructuralError("z_pick: e <= d, contract violated")
    if isinstance(lattice, ValLattice):
        for x in range(lattice.n):
            if e[x] > d[x]:
                return ValMeet(x, (d[x] + e[x]) / 2)
        raise StructuralError("z_pick: no gap point found (bug)")
    if isinstance(lattice, RelLattice):
        extra = d & ~e  # pairs demanded by d that e does not contain
        for x1, x2 in lattice.pairs(extra):
            return RelMeet(x1, x2)
        raise StructuralError("z_pick: no gap pair found (bug)")
    if isinstance(lattice, DistLattice):
        for i in range(lattice.n):
            for j in range(lattice.n):
                if i == j or e[i][j] <= d[i][j]:
                    continue
                lo = max(d[i][j], d[j][i])
                hi = e[i][j]
                if hi > lo:
                    a, b = (i, j) if i < j else (j, i)
                    return DistMeet(a, b, (lo + hi) / 2)
        raise StructuralError(
            "z_pick: the gap lies only at diagonal or irreparably asymmetric points, "
            "which no distance meet-basis element can capture"
        )
    raise StructuralError(f"z_pick unsupported on lattice {lattice!r}")


# ---------------------------------------------------------------------------
# Verification


def verify_witness(instance: Instance, claim: WitnessClaim, w: Witness) -> Verdict:
    """Independent check of a witness against a claim; failures become verdicts."""
    reasons: list[str] = []
    evidence: dict[str, Any] = {"claim": f"{claim.mode} {claim.element}"}
    if w.instance != instance.kind:
        return Verdict(False, (f"witness is tagged {w.instance!r}, model is {instance.kind!r}",), evidence)
    try:
        instance.validate_payload(w.payload)
    except StructuralError as exc:
        return Verdict(False, (f"malformed witness payload: {exc}",), evidence)

    structural = instance.structural_degree(w.payload)
    if structural != w.claimed_degree:
        reasons.append(
            f"claimed degree {w.claimed_degree} does not match structural degree {structural}"
        )

    lat = instance.behaviour
    alpha_val = instance.alpha_set([w.payload])
    evidence["alpha"] = lat.describe(alpha_val)
    evidence.update(instance.witness_evidence(claim.element, w.payload))
    target = lat.embed(claim.element)
    if claim.mode == PRIMAL:
        if not lat.way_below(target, alpha_val):
            reasons.append(f"b << alpha({{w}}) fails for b = {claim.element}")
    else:
        if lat.leq(alpha_val, target):
            reasons.append(f"alpha({{w}}) <= bd holds, so {claim.element} is not refuted")
    return Verdict(not reasons, tuple(reasons), evidence)


# ---------------------------------------------------------------------------
# Strategy -> witness


def primal_witness_from_strategy(
    instance: Instance, b: BasisElement, strategy: Strategy
) -> Witness:
    """Inductive witness construction along a finitary primal exists strategy."""
    memo: dict[BasisElement, Witness] = {}

    def build(cur: BasisElement) -> Witness:
        if cur in memo:
            return memo[cur]
        if cur not in strategy.moves:
            raise IncompleteStrategyError(f"strategy has no entry for reachable element {cur}")
        children = [build(nxt) for nxt in strategy.moves[cur]]
        w = aux_p(instance, cur, children, apply_logic_step=True)
        memo[cur] = w
        return w

    return build(b)


def dual_witness_from_strategy(
    instance: Instance, bd: BasisElement, strategy: Strategy
) -> Witness:
    """Inductive witness construction along a finitary dual forall strategy."""
    memo: dict[BasisElement, Witness] = {}

    def build(cur: BasisElement) -> Witness:
        if cur in memo:
            return memo[cur]
        if cur not in strategy.moves:
            raise IncompleteStrategyError(f"strategy has no entry for reachable element {cur}")
        children = [build(nxt) for nxt in strategy.moves[cur]]
        w = aux_d(instance, cur, children, apply_logic_step=True)
        memo[cur] = w
        return w

    return build(bd)


# ---------------------------------------------------------------------------
# Witness -> strategy (per-round players)


class PrimalWitnessPlayer:
    """Exists player for the primal game reading its moves off a witness.

    Each move is ``alpha`` of the join of the current witness's immediate
    subterms; after forall's reply the player descends to the subterm witness
    distinguishing that reply.  The claimed degree strictly decreases per round.
    """

    def __init__(self, instance: Instance, witness: Witness, b: BasisElement, check: bool = True):
        if check:
            verdict = verify_witness(instance, WitnessClaim(PRIMAL, b), witness)
            if not verdict.accepted:
                raise StructuralError(f"witness does not verify for primal claim {b}: {verdict}")
        self.instance = instance
        self.current = witness
        self.current_basis = b
        self._pending_subs: list[Witness] | None = None

    def move(self) -> ExistsMove:
        subs = [make_witness(self.instance, p) for p in self.instance.subterms(self.current.payload)]
        self._pending_subs = subs
        return ExistsMove(value=self.instance.alpha_set([w.payload for w in subs]))

    def observe(self, reply: BasisElement) -> None:
        if self._pending_subs is None:
            raise IntegrityError("observe() called before move()")
        try:
            nxt = aux_p(self.instance, reply, self._pending_subs, apply_logic_step=False)
        except NoWitnessError as exc:
            raise IntegrityError(
                f"the original witness fails verification during play: {exc}"
            ) from exc
        if nxt.claimed_degree >= self.current.claimed_degree:
            raise IntegrityError(
                f"witness degree did not decrease: {self.current.claimed_degree} -> {nxt.claimed_degree}"
            )
        self.current = nxt
        self.current_basis = reply
        self._pending_subs = None

    def as_policy(self):
        def policy(position: ExistsTurn) -> Optional[ExistsMove]:
            if position.basis != self.current_basis:
                self.observe(position.basis)
            return self.move()

        return policy


class DualWitnessPlayer:
    """Forall player for the dual game deriving replies from a dual witness."""

    def __init__(self, instance: Instance, witness: Witness, bd: BasisElement, check: bool = True):
        if check:
            verdict = verify_witness(instance, WitnessClaim(DUAL, bd), witness)
            if not verdict.accepted:
                raise StructuralError(f"witness does not verify for dual claim {bd}: {verdict}")
        self.instance = instance
        self.current = witness
        self.current_basis = bd

    def respond(self, d_value: Any) -> BasisElement:
        subs = [make_witness(self.instance, p) for p in self.instance.subterms(self.current.payload)]
        e = self.instance.alpha_set([w.payload for w in subs])
        try:
            reply = z_pick(self.instance.behaviour, e, d_value)
            nxt = aux_d(self.instance, reply, subs, apply_logic_step=False)
        except (StructuralError, NoWitnessError) as exc:
            raise IntegrityError(
                f"the original witness fails verification during play: {exc}"
            ) from exc
        if nxt.claimed_degree >= self.current.claimed_degree:
            raise IntegrityError(
                f"witness degree did not decrease: {self.current.claimed_degree} -> {nxt.claimed_degree}"
            )
        self.current = nxt
        self.current_basis = reply
        return reply

    def as_policy(self):
        def policy(position: ForallTurn) -> Optional[BasisElement]:
            return self.respond(position.value)

        return policy


def strategy_from_primal_witness(
    instance: Instance, witness: Witness, b: BasisElement
) -> PrimalWitnessPlayer:
    """Per-round move generator for the exists player, read off the witness."""
    return PrimalWitnessPlayer(instance, witness, b)


def dual_strategy_from_witness(
    instance: Instance, witness: Witness, bd: BasisElement
) -> DualWitnessPlayer:
    """Per-round forall responder derived from a dual witness."""
    return DualWitnessPlayer(instance, witness, bd)


# ---------------------------------------------------------------------------
# Serialization (canonical JSON; bit-exact round trip)


def witness_to_json(instance: Instance, w: Witness) -> dict:
    return {
        "instance": w.instance,
        "degree": w.claimed_degree,
        "payload": instance.payload_to_json(w.payload),
    }


def witness_from_json(instance: Instance, data: Any) -> Witness:
    if not isinstance(data, dict):
        raise StructuralError(f"malformed witness: {data!r}")
    for key in ("instance", "degree", "payload"):
        if key not in data:
            raise StructuralError(f"witness is missing field {key!r}")
    payload = instance.payload_from_json(data["payload"])
    instance.validate_payload(payload)
    return Witness(str(data["instance"]), payload, int(data["degree"]))


def claim_to_json(claim: WitnessClaim) -> dict:
    return {"mode": claim.mode, "element": basis_to_json(claim.element)}


def claim_from_json(data: Any) -> WitnessClaim:
    if not isinstance(data, dict) or "mode" not in data or "element" not in data:
        raise StructuralError(f"malformed claim: {data!r}")
    return WitnessClaim(str(data["mode"]), basis_from_json(data["element"]))
