"""Primal way-below game and dual game: move validation, play loop, strategies.

Primal game (exists proves ``b << mu(f)``): at a basis element ``b`` the
exists player moves to any ``d`` with ``b << f(d)``; the forall player answers
with a join-basis element ``b' << d``.  Infinite plays are won by forall.

Dual game (exists proves ``mu(f) <= bd``): at a meet-basis element ``bd`` the
exists player moves to any ``dd`` with ``f(dd) <= bd``; forall answers with a
meet-basis element way-above ``dd``.  Infinite plays are won by exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Mapping, Optional

from .errors import SynthesisError, TurnError
from .fixpoint import codegree, degree
from .instance import Instance
from .lattice import (
    BasisElement,
    DistJoin,
    DistLattice,
    RelLattice,
    SetLattice,
    ValLattice,
    basis_to_json,
    is_join_basis,
    is_meet_basis,
)

PRIMAL = "primal"
DUAL = "dual"


def infinite_play_winner(variant: str) -> str:
    return "forall" if variant == PRIMAL else "exists"


# ---------------------------------------------------------------------------
# Positions and moves


@dataclass(frozen=True)
class ExistsTurn:
    basis: BasisElement
    round_index: int


@dataclass(frozen=True)
class ForallTurn:
    value: Any
    round_index: int
    from_basis: BasisElement | None = None


GamePosition = ExistsTurn | ForallTurn


@dataclass(frozen=True)
class ExistsMove:
    """Move of the exists player: either a raw lattice value or a finite
    basis set whose join is materialized on demand."""

    basis_set: tuple[BasisElement, ...] | None = None
    value: Any = None

    def materialize(self, instance: Instance) -> Any:
        if self.basis_set is not None:
            lat = instance.behaviour
            return lat.join(lat.embed(b) for b in self.basis_set)
        return self.value

    def to_json(self, instance: Instance) -> Any:
        if self.basis_set is not None:
            return {"kind": "basis_join", "elements": [basis_to_json(b) for b in self.basis_set]}
        return instance.behaviour.value_to_json(self.value)


@dataclass(frozen=True)
class MoveVerdict:
    ok: bool
    reason: str


@dataclass(frozen=True)
class Strategy:
    """Finite map from basis elements to the finite basis sets of their moves."""

    variant: str
    moves: Mapping[BasisElement, tuple[BasisElement, ...]]


@dataclass(frozen=True)
class TranscriptEntry:
    round_index: int
    player: str
    move: Any  # JSON-serializable rendering of the move
    ok: bool
    detail: str

    def to_json(self) -> dict:
        return {
            "round": self.round_index,
            "player": self.player,
            "move": self.move,
            "verdict": "accepted" if self.ok else "rejected",
            "detail": self.detail,
        }


@dataclass(frozen=True)
class Outcome:
    winner: str
    reason: str
    transcript: tuple[TranscriptEntry, ...]


# ---------------------------------------------------------------------------
# Move validation


def _explain_not_way_below(lat, a: Any, b: Any) -> str:
    """Name a point at which ``a << b`` fails."""
    if isinstance(lat, RelLattice):
        for x1, x2 in lat.pairs(b & ~a):
            return f"pair ({x1},{x2}) is in the target relation but excluded by the position"
        return "no failing pair (bug)"
    if isinstance(lat, ValLattice):
        for x, (p, q) in enumerate(zip(a, b)):
            if not (p < q or p == 0):
                return f"at state {x}: need {p} < {q}"
        return "no failing state (bug)"
    if isinstance(lat, DistLattice):
        for i in range(lat.n):
            for j in range(lat.n):
                p, q = a[i][j], b[i][j]
                if not (p < q or p == 0):
                    return f"at pair ({i},{j}): need {p} < {q}"
        return "no failing pair (bug)"
    return f"{lat.describe(a)} is not way-below {lat.describe(b)}"


def _explain_not_leq(lat, a: Any, b: Any) -> str:
    if isinstance(lat, RelLattice):
        for x1, x2 in lat.pairs(b & ~a):
            return f"pair ({x1},{x2}) required by the position is not produced"
        return "no failing pair (bug)"
    if isinstance(lat, ValLattice):
        for x, (p, q) in enumerate(zip(a, b)):
            if p > q:
                return f"at state {x}: {p} > {q}"
        return "no failing state (bug)"
    if isinstance(lat, DistLattice):
        for i in range(lat.n):
            for j in range(lat.n):
                if a[i][j] > b[i][j]:
                    return f"at pair ({i},{j}): {a[i][j]} > {b[i][j]}"
        return "no failing pair (bug)"
    return f"{lat.describe(a)} is not below {lat.describe(b)}"


def validate_move(instance: Instance, variant: str, position: GamePosition, move: Any) -> MoveVerdict:
    """Check a move against the game rules; the verdict names the violated inequality."""
    lat = instance.behaviour
    if isinstance(position, ExistsTurn):
        if not isinstance(move, ExistsMove):
            raise TurnError("it is the exists player's turn; expected a lattice-value move")
        d = lat.validate(move.materialize(instance))
        b_val = lat.embed(position.basis)
        stepped = instance.behaviour_step(d)
        if variant == PRIMAL:
            if lat.way_below(b_val, stepped):
                return MoveVerdict(True, "b << f(d) holds")
            return MoveVerdict(
                False,
                f"b << f(d) fails for b = {position.basis}: "
                + _explain_not_way_below(lat, b_val, stepped),
            )
        else:
            if lat.leq(stepped, b_val):
                return MoveVerdict(True, "f(d) <= bd holds")
            return MoveVerdict(
                False,
                f"f(d) <= bd fails for bd = {position.basis}: "
                + _explain_not_leq(lat, stepped, b_val),
            )
    else:
        if isinstance(move, ExistsMove) or not (is_join_basis(move) or is_meet_basis(move)):
            raise TurnError("it is the forall player's turn; expected a basis element")
        reply = move
        d = position.value
        if variant == PRIMAL:
            if not is_join_basis(reply):
                raise TurnError("the primal forall player must play a join-basis element")
            if lat.way_below(lat.embed(reply), d):
                return MoveVerdict(True, "b' << d holds")
            return MoveVerdict(
                False,
                f"b' << d fails for b' = {reply}: "
                + _explain_not_way_below(lat, lat.embed(reply), d),
            )
        else:
            if not is_meet_basis(reply):
                raise TurnError("the dual forall player must play a meet-basis element")
            if lat.way_above(d, lat.embed(reply)):
                return MoveVerdict(True, "b' way-above d holds")
            return MoveVerdict(False, f"b' way-above d fails for b' = {reply}")


# ---------------------------------------------------------------------------
# Strategy synthesis


def primal_exists_strategy(instance: Instance, b: BasisElement) -> tuple[BasisElement, ...]:
    """Finitary exists move at ``b``; requires ``degree(b)`` to be known."""
    deg = degree(instance.problem, b)
    if not deg.known:
        raise SynthesisError(
            f"cannot synthesize a primal strategy for {b}: degree unknown "
            f"after {deg.iterations} iterations (b << mu(f) is unestablished)"
        )
    return instance.primal_strategy(b)


def dual_forall_strategy(instance: Instance, bd: BasisElement) -> tuple[BasisElement, ...]:
    """Finitary forall reply set at ``bd``; requires ``codegree(bd)`` to be known."""
    cdeg = codegree(instance.problem, bd)
    if not cdeg.known:
        raise SynthesisError(
            f"cannot synthesize a dual strategy for {bd}: co-degree unknown "
            f"after {cdeg.iterations} iterations (mu(f) <= bd may hold)"
        )
    return instance.dual_strategy(bd)


def synthesize_primal_strategy(instance: Instance, b: BasisElement) -> Strategy:
    """Full strategy map reachable from ``b`` (entries have strictly smaller degree)."""
    moves: dict[BasisElement, tuple[BasisElement, ...]] = {}
    work = [b]
    while work:
        cur = work.pop()
        if cur in moves:
            continue
        entry = primal_exists_strategy(instance, cur)
        moves[cur] = entry
        work.extend(x for x in entry if x not in moves)
    return Strategy(PRIMAL, moves)


def synthesize_dual_strategy(instance: Instance, bd: BasisElement) -> Strategy:
    moves: dict[BasisElement, tuple[BasisElement, ...]] = {}
    work = [bd]
    while work:
        cur = work.pop()
        if cur in moves:
            continue
        entry = dual_forall_strategy(instance, cur)
        moves[cur] = entry
        work.extend(x for x in entry if x not in moves)
    return Strategy(DUAL, moves)


# ---------------------------------------------------------------------------
# Policies


ExistsPolicy = Callable[[ExistsTurn], Optional[ExistsMove]]
ForallPolicy = Callable[[ForallTurn], Optional[BasisElement]]


def strategy_exists_policy(instance: Instance, strategy: Strategy) -> ExistsPolicy:
    def policy(position: ExistsTurn) -> Optional[ExistsMove]:
        entry = strategy.moves.get(position.basis)
        if entry is None:
            try:
                entry = primal_exists_strategy(instance, position.basis)
            except SynthesisError:
                return None
        return ExistsMove(basis_set=entry)

    return policy


def strategy_forall_policy(instance: Instance, strategy: Strategy) -> ForallPolicy:
    """Dual-game forall player answering from the precomputed reply sets."""
    lat = instance.behaviour

    def policy(position: ForallTurn) -> Optional[BasisElement]:
        replies = strategy.moves.get(position.from_basis)
        if replies is None:
            try:
                replies = dual_forall_strategy(instance, position.from_basis)
            except SynthesisError:
                return None
        for reply in replies:
            if lat.way_above(position.value, lat.embed(reply)):
                return reply
        return None

    return policy


def exhaustive_forall_candidates(instance: Instance, d: Any) -> list[BasisElement]:
    """Dominant legal forall replies to the exists move ``d`` in the primal game.

    For relations every legal reply is returned.  For the numeric lattices one
    reply per point suffices: any two legal constants in the same gap between
    consecutive Kleene-iterate values lead to positions with identical degree,
    so we return representatives just below ``d`` at each point.
    """
    lat = instance.behaviour
    out: list[BasisElement] = []
    if isinstance(lat, (RelLattice, SetLattice)):
        return list(lat.join_basis_under(d))
    chain = instance.iterates()
    if isinstance(lat, ValLattice):
        for y in range(lat.n):
            cap = d[y]
            if cap <= 0:
                continue
            below = [it[y] for it in chain if it[y] < cap]
            lo = max(below) if below else Fraction(0)
            out.append(_val_join(y, (lo + cap) / 2))
        return out
    if isinstance(lat, DistLattice):
        for i in range(lat.n):
            for j in range(i + 1, lat.n):
                cap = min(d[i][j], d[j][i])
                if cap <= 0:
                    continue
                below = [it[i][j] for it in chain if it[i][j] < cap]
                lo = max(below) if below else Fraction(0)
                out.append(DistJoin(i, j, (lo + cap) / 2))
        return out
    raise TypeError(f"no candidate enumeration for lattice {lat!r}")


def _val_join(state: int, c: Fraction):
    from .lattice import ValJoin

    return ValJoin(state, c)


def adversarial_forall_policy(instance: Instance) -> ForallPolicy:
    """Primal-game forall player picking the hardest reply: a candidate of
    unknown degree if one exists, otherwise one of maximal degree."""

    def policy(position: ForallTurn) -> Optional[BasisElement]:
        candidates = exhaustive_forall_candidates(instance, position.value)
        if not candidates:
            return None
        best = None
        best_key: tuple[int, int] | None = None
        for cand in sorted(candidates, key=str):
            deg = degree(instance.problem, cand)
            key = (1, 0) if not deg.known else (0, deg.value)
            if best_key is None or key > best_key:
                best, best_key = cand, key
        return best

    return policy


# ---------------------------------------------------------------------------
# Play loop


def _canonical_position(position: GamePosition) -> tuple:
    if isinstance(position, ExistsTurn):
        return ("exists", position.basis)
    return ("forall", position.value)


def play(
    instance: Instance,
    variant: str,
    start: BasisElement,
    exists_policy: ExistsPolicy,
    forall_policy: ForallPolicy,
    max_rounds: int = 100,
) -> Outcome:
    """Alternate validated moves until someone is stuck, cheats, or play cycles.

    A policy returning ``None`` means the player cannot move (the opponent
    wins); an invalid move loses immediately and is recorded in the
    transcript.  Position repetition and exceeding ``max_rounds`` both declare
    the infinite-play winner of the variant.
    """
    transcript: list[TranscriptEntry] = []
    seen: set = set()
    rnd = 0
    position: GamePosition = ExistsTurn(start, 0)
    seen.add(_canonical_position(position))
    while True:
        if rnd >= max_rounds:
            return Outcome(
                infinite_play_winner(variant),
                f"round limit {max_rounds} reached; infinite plays are won by "
                f"{infinite_play_winner(variant)}",
                tuple(transcript),
            )
        move = exists_policy(position)
        if move is None:
            transcript.append(TranscriptEntry(rnd, "exists", None, False, "no move available"))
            return Outcome("forall", "exists is stuck", tuple(transcript))
        verdict = validate_move(instance, variant, position, move)
        transcript.append(
            TranscriptEntry(rnd, "exists", move.to_json(instance), verdict.ok, verdict.reason)
        )
        if not verdict.ok:
            return Outcome("forall", f"exists played an invalid move: {verdict.reason}", tuple(transcript))
        position = ForallTurn(move.materialize(instance), rnd, from_basis=position.basis)

        reply = forall_policy(position)
        if reply is None:
            transcript.append(TranscriptEntry(rnd, "forall", None, False, "no move available"))
            return Outcome("exists", "forall is stuck", tuple(transcript))
        verdict = validate_move(instance, variant, position, reply)
        transcript.append(
            TranscriptEntry(rnd, "forall", basis_to_json(reply), verdict.ok, verdict.reason)
        )
        if not verdict.ok:
            return Outcome("exists", f"forall played an invalid move: {verdict.reason}", tuple(transcript))
        rnd += 1
        position = ExistsTurn(reply, rnd)
        key = _canonical_position(position)
        if key in seen:
            return Outcome(
                infinite_play_winner(variant),
                "position repeated; infinite plays are won by " + infinite_play_winner(variant),
                tuple(transcript),
            )
        seen.add(key)
