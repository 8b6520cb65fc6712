"""Kleene iteration, degrees/co-degrees, and Galois-connection law checks."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .errors import IntegrityError, StructuralError
from .lattice import BasisElement, Lattice, is_join_basis, is_meet_basis

DEFAULT_MAX_ITER = 64


@dataclass
class FixpointProblem:
    """A monotone endofunction on a concrete lattice, with an iteration budget.

    The function is trusted to be monotone; :func:`spot_check_monotone` offers a
    cheap randomized guard, and the ascending-chain check during iteration
    catches violations that actually materialize.
    """

    lattice: Lattice
    fn: Callable[[Any], Any]
    max_iter: int = DEFAULT_MAX_ITER
    _iterates: list[Any] = field(default_factory=list, repr=False)
    _converged_at: int | None = field(default=None, repr=False)

    def iterates(self, upto: int | None = None) -> Sequence[Any]:
        """Kleene chain ``bottom, f(bottom), ...`` computed lazily and cached.

        Stops early once two consecutive iterates coincide; raises
        :class:`IntegrityError` if the chain ever fails to ascend.
        """
        limit = self.max_iter if upto is None else min(upto, self.max_iter)
        if not self._iterates:
            self._iterates.append(self.lattice.bottom)
        while self._converged_at is None and len(self._iterates) <= limit:
            prev = self._iterates[-1]
            nxt = self.lattice.validate(self.fn(prev))
            if nxt == prev:
                self._converged_at = len(self._iterates) - 1
                break
            if not self.lattice.leq(prev, nxt):
                raise IntegrityError(
                    f"Kleene chain not ascending at step {len(self._iterates)}: "
                    f"{self.lattice.describe(prev)} -> {self.lattice.describe(nxt)}"
                )
            self._iterates.append(nxt)
        return self._iterates

    @property
    def converged_at(self) -> int | None:
        return self._converged_at


@dataclass(frozen=True)
class DegreeResult:
    """Least iteration index satisfying the degree condition, or Unknown.

    ``value is None`` means the bound was exhausted without an answer; this is
    a regular outcome (it cannot be distinguished from slow convergence), not
    an error.
    """

    value: int | None
    iterations: int

    @property
    def known(self) -> bool:
        return self.value is not None

    def __str__(self) -> str:
        return str(self.value) if self.known else f"unknown (after {self.iterations} iterations)"


def kleene_lfp(problem: FixpointProblem) -> tuple[Any, int, bool]:
    """Iterate to the least fixpoint.

    Returns ``(value, iterations, converged)``.  When the budget runs out the
    last iterate is returned with ``converged=False``.
    """
    chain = problem.iterates()
    if problem.converged_at is not None:
        return chain[problem.converged_at], problem.converged_at, True
    return chain[-1], len(chain) - 1, False


def degree(problem: FixpointProblem, b: BasisElement) -> DegreeResult:
    """Least ``k`` with ``b << f^k(bottom)``."""
    if not is_join_basis(b):
        raise StructuralError(f"degree is defined on join-basis elements, got {b!r}")
    lat = problem.lattice
    target = lat.embed(b)
    k = 0
    while True:
        chain = problem.iterates(upto=k)
        if k >= len(chain):
            # either converged (stationary chain, no later iterate can help)
            # or the iteration budget is exhausted
            return DegreeResult(None, len(chain) - 1)
        if lat.way_below(target, chain[k]):
            return DegreeResult(k, k)
        if k >= problem.max_iter:
            return DegreeResult(None, k)
        k += 1


def codegree(problem: FixpointProblem, b: BasisElement) -> DegreeResult:
    """Least ``k`` with ``f^k(bottom)`` not below ``b``."""
    if not is_meet_basis(b):
        raise StructuralError(f"co-degree is defined on meet-basis elements, got {b!r}")
    lat = problem.lattice
    target = lat.embed(b)
    k = 0
    while True:
        chain = problem.iterates(upto=k)
        if k >= len(chain):
            return DegreeResult(None, len(chain) - 1)
        if not lat.leq(chain[k], target):
            return DegreeResult(k, k)
        if k >= problem.max_iter:
            return DegreeResult(None, k)
        k += 1


def spot_check_monotone(
    problem: FixpointProblem, rng: random.Random, samples: int = 10
) -> None:
    """Check ``a <= b  implies  f(a) <= f(b)`` on random comparable pairs."""
    lat = problem.lattice
    for _ in range(samples):
        x = lat.sample(rng)
        y = lat.sample(rng)
        a = lat.meet([x, y])
        b = lat.join([x, y])
        if not lat.leq(problem.fn(a), problem.fn(b)):
            raise IntegrityError(
                f"function not monotone: f({lat.describe(a)}) !<= f({lat.describe(b)})"
            )


# ---------------------------------------------------------------------------
# Galois-connection law checking


@dataclass
class LawReport:
    """Outcome of a sampled law check; empty ``violations`` means pass."""

    checked: int = 0
    violations: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def merge(self, other: "LawReport") -> "LawReport":
        self.checked += other.checked
        self.violations.extend(other.violations)
        self.skipped.extend(other.skipped)
        return self

    def __str__(self) -> str:
        status = "pass" if self.ok else "FAIL"
        lines = [f"{status}: {self.checked} checks, {len(self.violations)} violations"]
        lines += [f"  violation: {v}" for v in self.violations]
        lines += [f"  skipped: {s}" for s in self.skipped]
        return "\n".join(lines)


def check_galois_laws(instance, logic_samples: Iterable[Any], behaviour_samples: Iterable[Any]) -> LawReport:
    """Sampled check of the two unit laws of the Galois connection.

    ``logic_samples`` are finite sets of instance witnesses (logic-side
    values); ``behaviour_samples`` are behaviour-lattice values.  Where the
    instance has no computable concretization, the affected law is skipped
    with a notice.
    """
    report = LawReport()
    lat = instance.behaviour
    has_gamma = instance.gamma_alpha_of is not None

    for sample in logic_samples:
        sample = frozenset(sample)
        if has_gamma:
            # l <= gamma(alpha(l)) checked through alpha: the instance reports
            # whether every member of the sample is dominated by gamma(alpha(sample)).
            missing = instance.gamma_alpha_of(sample)
            report.checked += 1
            if missing:
                report.violations.append(
                    f"l <= gamma(alpha(l)) fails for sample of size {len(sample)}: {missing}"
                )
        else:
            report.skipped.append("l <= gamma(alpha(l)): no computable gamma for this instance")
            has_gamma = None  # note once
            break

    has_alpha_gamma = instance.alpha_gamma_of is not None
    for d in behaviour_samples:
        if has_alpha_gamma:
            approx = instance.alpha_gamma_of(d)
            report.checked += 1
            if not lat.leq(approx, d):
                report.violations.append(
                    f"alpha(gamma(d)) <= d fails at {lat.describe(d)}: got {lat.describe(approx)}"
                )
        else:
            report.skipped.append("alpha(gamma(d)) <= d: no computable gamma for this instance")
            break

    return report


def check_compatibility(instance, logic_samples: Iterable[Any]) -> LawReport:
    """Sampled check of the exchange law ``alpha . l = b . alpha``."""
    report = LawReport()
    lat = instance.behaviour
    for sample in logic_samples:
        sample = frozenset(sample)
        left = instance.alpha_logic_step(sample)
        right = instance.behaviour_step(instance.alpha_set(sample))
        report.checked += 1
        if left != right:
            report.violations.append(
                f"alpha(l(A)) != b(alpha(A)) on sample of size {len(sample)}: "
                f"{lat.describe(left)} vs {lat.describe(right)}"
            )
    return report
