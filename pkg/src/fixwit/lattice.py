"""Concrete complete lattices and their join/meet bases.

Four carriers are implemented:

* ``RelLattice(n)``    -- relations over ``X = {0..n-1}``, ordered by *reverse*
  inclusion (the bottom element is the full relation ``X x X``).  Values are
  bitsets: an ``int`` whose bit ``i*n + j`` is set iff ``(i, j)`` is in the
  relation.
* ``DistLattice(n)``   -- distance matrices ``X x X -> [0,1]`` with exact
  rational entries, ordered pointwise.
* ``ValLattice(n)``    -- valuations ``X -> [0,1]``, ordered pointwise.
* ``SetLattice()``     -- finite sets of (hashable) syntactic objects, ordered
  by inclusion.  This lattice has no finitely representable top element, so
  its meet side is unsupported.

Way-below (``a << b``) and way-above are decided exactly: on the numeric
lattices they are the pointwise strict orders (plus the ``0 << 0`` and
``1 above 1`` corner cases), on the set-like lattices they collapse to the
order itself because every represented value is finite.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator

from .errors import CarrierMismatchError, StructuralError
from .rat import format_rational

ZERO = Fraction(0)
ONE = Fraction(1)


# ---------------------------------------------------------------------------
# Basis elements


@dataclass(frozen=True, order=True)
class RelJoin:
    """Co-singleton: the complement of ``{(x1, x2)}``; join basis of (Rel, >=)."""

    x1: int
    x2: int

    def __str__(self) -> str:
        return f"co{{({self.x1},{self.x2})}}"


@dataclass(frozen=True, order=True)
class RelMeet:
    """Singleton ``{(x1, x2)}``; meet basis of (Rel, >=)."""

    x1: int
    x2: int

    def __str__(self) -> str:
        return f"{{({self.x1},{self.x2})}}"


@dataclass(frozen=True, order=True)
class ValJoin:
    """f^c_x: value ``c`` at state ``x``, 0 elsewhere; requires ``c > 0``."""

    state: int
    c: Fraction

    def __post_init__(self) -> None:
        if not 0 < self.c <= 1:
            raise StructuralError(f"join basis constant must be in (0,1], got {self.c}")

    def __str__(self) -> str:
        return f"f^{{{format_rational(self.c)}}}_{self.state}"


@dataclass(frozen=True, order=True)
class ValMeet:
    """f-dot^c_x: value ``c`` at state ``x``, 1 elsewhere; requires ``c < 1``."""

    state: int
    c: Fraction

    def __post_init__(self) -> None:
        if not 0 <= self.c < 1:
            raise StructuralError(f"meet basis constant must be in [0,1), got {self.c}")

    def __str__(self) -> str:
        return f"~f^{{{format_rational(self.c)}}}_{self.state}"


@dataclass(frozen=True, order=True)
class DistJoin:
    """d^c_{x1,x2}: value ``c`` at the unordered pair, 0 elsewhere; ``c > 0``."""

    x1: int
    x2: int
    c: Fraction

    def __post_init__(self) -> None:
        if self.x1 == self.x2:
            raise StructuralError("distance basis elements live on pairs of distinct states")
        if self.x1 > self.x2:  # canonical order for the unordered pair
            a, b = self.x2, self.x1
            object.__setattr__(self, "x1", a)
            object.__setattr__(self, "x2", b)
        if not 0 < self.c <= 1:
            raise StructuralError(f"join basis constant must be in (0,1], got {self.c}")

    def __str__(self) -> str:
        return f"d^{{{format_rational(self.c)}}}_{{{self.x1},{self.x2}}}"


@dataclass(frozen=True, order=True)
class DistMeet:
    """d-dot^c_{x1,x2}: value ``c`` at the unordered pair, 1 elsewhere; ``c < 1``."""

    x1: int
    x2: int
    c: Fraction

    def __post_init__(self) -> None:
        if self.x1 == self.x2:
            raise StructuralError("distance basis elements live on pairs of distinct states")
        if self.x1 > self.x2:
            a, b = self.x2, self.x1
            object.__setattr__(self, "x1", a)
            object.__setattr__(self, "x2", b)
        if not 0 <= self.c < 1:
            raise StructuralError(f"meet basis constant must be in [0,1), got {self.c}")

    def __str__(self) -> str:
        return f"~d^{{{format_rational(self.c)}}}_{{{self.x1},{self.x2}}}"


@dataclass(frozen=True)
class SetJoin:
    """Singleton ``{item}``; join basis of the set lattice."""

    item: Any

    def __str__(self) -> str:
        return f"{{{self.item}}}"


BasisElement = RelJoin | RelMeet | ValJoin | ValMeet | DistJoin | DistMeet | SetJoin

JOIN_BASIS_KINDS = (RelJoin, ValJoin, DistJoin, SetJoin)
MEET_BASIS_KINDS = (RelMeet, ValMeet, DistMeet)


def is_join_basis(b: BasisElement) -> bool:
    return isinstance(b, JOIN_BASIS_KINDS)


def is_meet_basis(b: BasisElement) -> bool:
    return isinstance(b, MEET_BASIS_KINDS)


# ---------------------------------------------------------------------------
# Lattices


class Lattice:
    """Common interface; subclasses implement one concrete carrier each."""

    kind: str

    # -- carrier --------------------------------------------------------
    def validate(self, a: Any) -> Any:
        raise NotImplementedError

    @property
    def bottom(self) -> Any:
        raise NotImplementedError

    @property
    def top(self) -> Any:
        raise NotImplementedError

    # -- order ----------------------------------------------------------
    def leq(self, a: Any, b: Any) -> bool:
        raise NotImplementedError

    def join(self, elems: Iterable[Any]) -> Any:
        raise NotImplementedError

    def meet(self, elems: Iterable[Any]) -> Any:
        raise NotImplementedError

    def way_below(self, a: Any, b: Any) -> bool:
        raise NotImplementedError

    def way_above(self, a: Any, b: Any) -> bool:
        """True iff ``b`` is way-above ``a`` (the move relation of the dual game)."""
        raise NotImplementedError

    # -- bases ----------------------------------------------------------
    def join_basis_under(self, a: Any) -> Iterator[BasisElement]:
        raise NotImplementedError

    def meet_basis_over(self, a: Any) -> Iterator[BasisElement]:
        raise NotImplementedError

    def embed(self, b: BasisElement) -> Any:
        raise NotImplementedError

    # -- misc -----------------------------------------------------------
    def sample(self, rng: random.Random) -> Any:
        raise NotImplementedError

    def describe(self, a: Any) -> str:
        return repr(a)

    def value_to_json(self, a: Any) -> Any:
        raise NotImplementedError

    def value_from_json(self, data: Any) -> Any:
        raise NotImplementedError


class RelLattice(Lattice):
    """Relations over ``{0..n-1}`` ordered by reverse inclusion; bitset values."""

    kind = "rel"

    def __init__(self, n: int) -> None:
        if n <= 0:
            raise StructuralError("state count must be positive")
        self.n = n
        self._full = (1 << (n * n)) - 1

    def bit(self, x1: int, x2: int) -> int:
        return 1 << (x1 * self.n + x2)

    def pairs(self, a: int) -> Iterator[tuple[int, int]]:
        for x1 in range(self.n):
            for x2 in range(self.n):
                if a & self.bit(x1, x2):
                    yield (x1, x2)

    def from_pairs(self, pairs: Iterable[tuple[int, int]]) -> int:
        a = 0
        for x1, x2 in pairs:
            if not (0 <= x1 < self.n and 0 <= x2 < self.n):
                raise StructuralError(f"pair ({x1},{x2}) out of range for n={self.n}")
            a |= self.bit(x1, x2)
        return a

    def contains(self, a: int, x1: int, x2: int) -> bool:
        return bool(a & self.bit(x1, x2))

    def validate(self, a: Any) -> int:
        if not isinstance(a, int) or isinstance(a, bool) or not 0 <= a <= self._full:
            raise CarrierMismatchError(f"not a relation bitset for n={self.n}: {a!r}")
        return a

    @property
    def bottom(self) -> int:
        return self._full  # X x X is the least element under reverse inclusion

    @property
    def top(self) -> int:
        return 0

    def leq(self, a: int, b: int) -> bool:
        self.validate(a)
        self.validate(b)
        return (b & ~a) == 0  # a contains b as a set

    def join(self, elems: Iterable[int]) -> int:
        out = self._full
        for e in elems:
            out &= self.validate(e)
        return out

    def meet(self, elems: Iterable[int]) -> int:
        out = 0
        for e in elems:
            out |= self.validate(e)
        return out

    def way_below(self, a: int, b: int) -> bool:
        # every relation has a finite complement, so << collapses to the order
        return self.leq(a, b)

    def way_above(self, a: int, b: int) -> bool:
        # b is way-above a iff b is a subset of a (b above a; b always finite)
        self.validate(a)
        self.validate(b)
        return (b & ~a) == 0

    def join_basis_under(self, a: int) -> Iterator[RelJoin]:
        self.validate(a)
        for x1 in range(self.n):
            for x2 in range(self.n):
                if not a & self.bit(x1, x2):
                    yield RelJoin(x1, x2)

    def meet_basis_over(self, a: int) -> Iterator[RelMeet]:
        self.validate(a)
        for x1, x2 in self.pairs(a):
            yield RelMeet(x1, x2)

    def embed(self, b: BasisElement) -> int:
        if isinstance(b, RelJoin):
            return self._full & ~self.bit(b.x1, b.x2)
        if isinstance(b, RelMeet):
            return self.bit(b.x1, b.x2)
        raise CarrierMismatchError(f"{b!r} is not a relation basis element")

    def sample(self, rng: random.Random) -> int:
        return rng.randrange(self._full + 1)

    def describe(self, a: int) -> str:
        return "{" + ", ".join(f"({i},{j})" for i, j in self.pairs(a)) + "}"

    def value_to_json(self, a: int) -> Any:
        return {"kind": "relation", "pairs": sorted(self.pairs(a))}

    def value_from_json(self, data: Any) -> int:
        if not isinstance(data, dict) or data.get("kind") != "relation":
            raise StructuralError(f"expected a relation value, got {data!r}")
        return self.from_pairs((int(p[0]), int(p[1])) for p in data["pairs"])


def _check_unit(q: Any) -> Fraction:
    if not isinstance(q, Fraction) or not 0 <= q <= 1:
        raise CarrierMismatchError(f"entry {q!r} is not a Fraction in [0,1]")
    return q


class ValLattice(Lattice):
    """Valuations ``{0..n-1} -> [0,1]`` with the pointwise order; tuple values."""

    kind = "val"

    def __init__(self, n: int) -> None:
        if n <= 0:
            raise StructuralError("state count must be positive")
        self.n = n

    def validate(self, a: Any) -> tuple[Fraction, ...]:
        if not isinstance(a, tuple) or len(a) != self.n:
            raise CarrierMismatchError(f"not a valuation of length {self.n}: {a!r}")
        for q in a:
            _check_unit(q)
        return a

    @property
    def bottom(self) -> tuple[Fraction, ...]:
        return (ZERO,) * self.n

    @property
    def top(self) -> tuple[Fraction, ...]:
        return (ONE,) * self.n

    def leq(self, a, b) -> bool:
        self.validate(a)
        self.validate(b)
        return all(x <= y for x, y in zip(a, b))

    def join(self, elems: Iterable[Any]) -> tuple[Fraction, ...]:
        out = list(self.bottom)
        for e in elems:
            self.validate(e)
            out = [max(x, y) for x, y in zip(out, e)]
        return tuple(out)

    def meet(self, elems: Iterable[Any]) -> tuple[Fraction, ...]:
        out = list(self.top)
        for e in elems:
            self.validate(e)
            out = [min(x, y) for x, y in zip(out, e)]
        return tuple(out)

    def way_below(self, a, b) -> bool:
        self.validate(a)
        self.validate(b)
        return all(x < y or x == 0 for x, y in zip(a, b))

    def way_above(self, a, b) -> bool:
        self.validate(a)
        self.validate(b)
        return all(x < y or x == y == 1 for x, y in zip(a, b))

    def join_basis_under(self, a) -> Iterator[ValJoin]:
        self.validate(a)
        for x, q in enumerate(a):
            if q > 0:
                yield ValJoin(x, q)

    def meet_basis_over(self, a) -> Iterator[ValMeet]:
        self.validate(a)
        for x, q in enumerate(a):
            if q < 1:
                yield ValMeet(x, q)

    def embed(self, b: BasisElement) -> tuple[Fraction, ...]:
        if isinstance(b, ValJoin):
            return tuple(b.c if x == b.state else ZERO for x in range(self.n))
        if isinstance(b, ValMeet):
            return tuple(b.c if x == b.state else ONE for x in range(self.n))
        raise CarrierMismatchError(f"{b!r} is not a valuation basis element")

    def sample(self, rng: random.Random) -> tuple[Fraction, ...]:
        return tuple(Fraction(rng.randrange(0, 7), 6) for _ in range(self.n))

    def describe(self, a) -> str:
        return "[" + ", ".join(format_rational(q) for q in a) + "]"

    def value_to_json(self, a) -> Any:
        return {"kind": "valuation", "values": [format_rational(q) for q in a]}

    def value_from_json(self, data: Any) -> tuple[Fraction, ...]:
        from .rat import parse_unit_rational

        if not isinstance(data, dict) or data.get("kind") != "valuation":
            raise StructuralError(f"expected a valuation value, got {data!r}")
        vals = data["values"]
        if len(vals) != self.n:
            raise StructuralError(f"valuation has {len(vals)} entries, expected {self.n}")
        return tuple(parse_unit_rational(q) for q in vals)


class DistLattice(Lattice):
    """Distance matrices ``X x X -> [0,1]`` with the pointwise order.

    The carrier admits arbitrary matrices; the join/meet bases only span the
    symmetric ones (with zero resp. unit diagonal), which is where all Kleene
    iterates and all basis game positions live.  Basis decomposition on a
    value outside that span raises.
    """

    kind = "dist"

    def __init__(self, n: int) -> None:
        if n <= 0:
            raise StructuralError("state count must be positive")
        self.n = n

    def validate(self, a: Any) -> tuple[tuple[Fraction, ...], ...]:
        if not isinstance(a, tuple) or len(a) != self.n:
            raise CarrierMismatchError(f"not a {self.n}x{self.n} distance matrix: {a!r}")
        for row in a:
            if not isinstance(row, tuple) or len(row) != self.n:
                raise CarrierMismatchError(f"not a {self.n}x{self.n} distance matrix: {a!r}")
            for q in row:
                _check_unit(q)
        return a

    @property
    def bottom(self):
        return tuple((ZERO,) * self.n for _ in range(self.n))

    @property
    def top(self):
        return tuple((ONE,) * self.n for _ in range(self.n))

    def leq(self, a, b) -> bool:
        self.validate(a)
        self.validate(b)
        return all(x <= y for ra, rb in zip(a, b) for x, y in zip(ra, rb))

    def join(self, elems: Iterable[Any]):
        out = [list(row) for row in self.bottom]
        for e in elems:
            self.validate(e)
            for i in range(self.n):
                for j in range(self.n):
                    if e[i][j] > out[i][j]:
                        out[i][j] = e[i][j]
        return tuple(tuple(row) for row in out)

    def meet(self, elems: Iterable[Any]):
        out = [list(row) for row in self.top]
        for e in elems:
            self.validate(e)
            for i in range(self.n):
                for j in range(self.n):
                    if e[i][j] < out[i][j]:
                        out[i][j] = e[i][j]
        return tuple(tuple(row) for row in out)

    def way_below(self, a, b) -> bool:
        self.validate(a)
        self.validate(b)
        return all(x < y or x == 0 for ra, rb in zip(a, b) for x, y in zip(ra, rb))

    def way_above(self, a, b) -> bool:
        self.validate(a)
        self.validate(b)
        return all(x < y or x == y == 1 for ra, rb in zip(a, b) for x, y in zip(ra, rb))

    def _require_symmetric(self, a, diagonal: Fraction) -> None:
        for i in range(self.n):
            if a[i][i] != diagonal:
                raise StructuralError(
                    f"matrix outside the basis span: diagonal entry {format_rational(a[i][i])} at {i}"
                )
            for j in range(i + 1, self.n):
                if a[i][j] != a[j][i]:
                    raise StructuralError(
                        f"matrix outside the basis span: asymmetric at ({i},{j})"
                    )

    def join_basis_under(self, a) -> Iterator[DistJoin]:
        self.validate(a)
        self._require_symmetric(a, ZERO)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if a[i][j] > 0:
                    yield DistJoin(i, j, a[i][j])

    def meet_basis_over(self, a) -> Iterator[DistMeet]:
        self.validate(a)
        self._require_symmetric(a, ONE)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if a[i][j] < 1:
                    yield DistMeet(i, j, a[i][j])

    def embed(self, b: BasisElement):
        if isinstance(b, DistJoin):
            base, val = ZERO, b.c
        elif isinstance(b, DistMeet):
            base, val = ONE, b.c
        else:
            raise CarrierMismatchError(f"{b!r} is not a distance basis element")
        out = [[base] * self.n for _ in range(self.n)]
        out[b.x1][b.x2] = val
        out[b.x2][b.x1] = val
        return tuple(tuple(row) for row in out)

    def sample(self, rng: random.Random):
        m = [[ZERO] * self.n for _ in range(self.n)]
        for i in range(self.n):
            for j in range(i + 1, self.n):
                q = Fraction(rng.randrange(0, 7), 6)
                m[i][j] = m[j][i] = q
        return tuple(tuple(row) for row in m)

    def describe(self, a) -> str:
        cells = [
            f"({i},{j})={format_rational(a[i][j])}"
            for i in range(self.n)
            for j in range(self.n)
            if a[i][j] != 0
        ]
        return "{" + ", ".join(cells) + "}"

    def value_to_json(self, a) -> Any:
        return {"kind": "distance", "matrix": [[format_rational(q) for q in row] for row in a]}

    def value_from_json(self, data: Any):
        from .rat import parse_unit_rational

        if not isinstance(data, dict) or data.get("kind") != "distance":
            raise StructuralError(f"expected a distance value, got {data!r}")
        m = data["matrix"]
        if len(m) != self.n or any(len(r) != self.n for r in m):
            raise StructuralError(f"distance matrix must be {self.n}x{self.n}")
        return tuple(tuple(parse_unit_rational(q) for q in row) for row in m)


class SetLattice(Lattice):
    """Finite sets of hashable syntactic objects, ordered by inclusion.

    The top element (and with it the meet basis) of the intended carrier is
    not finitely representable, so the meet side raises; the dual game is
    never played on this lattice.
    """

    kind = "set"

    def validate(self, a: Any) -> frozenset:
        if not isinstance(a, frozenset):
            raise CarrierMismatchError(f"not a frozenset: {a!r}")
        return a

    @property
    def bottom(self) -> frozenset:
        return frozenset()

    @property
    def top(self) -> frozenset:
        raise StructuralError("the set lattice has no finitely representable top element")

    def leq(self, a, b) -> bool:
        return self.validate(a) <= self.validate(b)

    def join(self, elems: Iterable[Any]) -> frozenset:
        out: frozenset = frozenset()
        for e in elems:
            out |= self.validate(e)
        return out

    def meet(self, elems: Iterable[Any]) -> frozenset:
        items = [self.validate(e) for e in elems]
        if not items:
            return self.top
        out = items[0]
        for e in items[1:]:
            out &= e
        return out

    def way_below(self, a, b) -> bool:
        return self.validate(a) <= self.validate(b)

    def way_above(self, a, b) -> bool:
        raise StructuralError("way-above is not finitely representable on the set lattice")

    def join_basis_under(self, a) -> Iterator[SetJoin]:
        for item in sorted(self.validate(a), key=repr):
            yield SetJoin(item)

    def meet_basis_over(self, a) -> Iterator[BasisElement]:
        raise StructuralError("the set lattice has no finitely representable meet basis")

    def embed(self, b: BasisElement) -> frozenset:
        if isinstance(b, SetJoin):
            return frozenset({b.item})
        raise CarrierMismatchError(f"{b!r} is not a set basis element")

    def sample(self, rng: random.Random) -> frozenset:
        return frozenset(rng.sample(range(20), rng.randrange(0, 5)))

    def describe(self, a) -> str:
        return "{" + ", ".join(sorted(map(str, a))) + "}"

    def value_to_json(self, a) -> Any:
        raise StructuralError("set lattice values have no generic wire format")

    def value_from_json(self, data: Any) -> frozenset:
        raise StructuralError("set lattice values have no generic wire format")


# ---------------------------------------------------------------------------
# Basis element (de)serialization


def basis_to_json(b: BasisElement) -> dict:
    if isinstance(b, RelJoin):
        return {"kind": "rel_join", "pair": [b.x1, b.x2]}
    if isinstance(b, RelMeet):
        return {"kind": "rel_meet", "pair": [b.x1, b.x2]}
    if isinstance(b, ValJoin):
        return {"kind": "val_join", "state": b.state, "c": format_rational(b.c)}
    if isinstance(b, ValMeet):
        return {"kind": "val_meet", "state": b.state, "c": format_rational(b.c)}
    if isinstance(b, DistJoin):
        return {"kind": "dist_join", "pair": [b.x1, b.x2], "c": format_rational(b.c)}
    if isinstance(b, DistMeet):
        return {"kind": "dist_meet", "pair": [b.x1, b.x2], "c": format_rational(b.c)}
    raise StructuralError(f"basis element {b!r} has no wire format")


def basis_from_json(data: Any) -> BasisElement:
    from .rat import parse_unit_rational

    if not isinstance(data, dict) or "kind" not in data:
        raise StructuralError(f"malformed basis element: {data!r}")
    kind = data["kind"]
    if kind in ("rel_join", "rel_meet"):
        x1, x2 = (int(v) for v in data["pair"])
        return RelJoin(x1, x2) if kind == "rel_join" else RelMeet(x1, x2)
    if kind in ("val_join", "val_meet"):
        c = parse_unit_rational(data["c"])
        state = int(data["state"])
        return ValJoin(state, c) if kind == "val_join" else ValMeet(state, c)
    if kind in ("dist_join", "dist_meet"):
        c = parse_unit_rational(data["c"])
        x1, x2 = (int(v) for v in data["pair"])
        return DistJoin(x1, x2, c) if kind == "dist_join" else DistMeet(x1, x2, c)
    raise StructuralError(f"unknown basis element kind {kind!r}")
