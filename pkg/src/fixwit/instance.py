"""Interface every concrete instantiation (bisimilarity, metrics, termination) implements.

An *instance* bundles

* the behaviour lattice and its monotone step function, and
* the logic side: a syntax of witnesses, their interpretation ``alpha`` into
  the behaviour lattice, subterm decomposition, and the two inductive witness
  constructors (primal/dual) together with strategy synthesizers.

Witness *payloads* at this layer are raw syntax objects (formula ASTs or
trees); the wrapper carrying a claimed degree lives in :mod:`fixwit.witness`.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Callable, Iterable, Optional, Sequence

from .fixpoint import DEFAULT_MAX_ITER, FixpointProblem
from .lattice import BasisElement, Lattice


class Instance(ABC):
    kind: str

    def __init__(self, behaviour: Lattice, max_iter: int = DEFAULT_MAX_ITER) -> None:
        self.behaviour = behaviour
        self.max_iter = max_iter
        self._problem: FixpointProblem | None = None

    # -- behaviour side ---------------------------------------------------
    @abstractmethod
    def behaviour_step(self, value: Any) -> Any:
        """One application of the monotone behaviour function."""

    @property
    def problem(self) -> FixpointProblem:
        if self._problem is None:
            import random

            from .fixpoint import spot_check_monotone

            self._problem = FixpointProblem(self.behaviour, self.behaviour_step, self.max_iter)
            # cheap guard against a broken instance functional
            spot_check_monotone(self._problem, random.Random(0), samples=10)
        return self._problem

    def iterates(self, upto: int | None = None) -> Sequence[Any]:
        return self.problem.iterates(upto)

    # -- witness syntax -----------------------------------------------------
    @abstractmethod
    def validate_payload(self, payload: Any) -> None:
        """Raise StructuralError unless the payload is a well-formed witness."""

    @abstractmethod
    def structural_degree(self, payload: Any) -> int:
        """Modal depth / tree height: the Kleene stage generating the payload."""

    @abstractmethod
    def subterms(self, payload: Any) -> tuple[Any, ...]:
        """Immediate logic-side strategy of the payload (its direct sub-witnesses)."""

    @abstractmethod
    def alpha_set(self, payloads: Iterable[Any]) -> Any:
        """Interpret a finite set of witnesses as a behaviour-lattice value."""

    # -- witness construction / strategies ----------------------------------
    @abstractmethod
    def apc(self, b: BasisElement, children: Sequence[Any]) -> Any:
        """One logic step over ``children`` producing a witness ``a`` with b << alpha({a})."""

    @abstractmethod
    def adc(self, bd: BasisElement, children: Sequence[Any]) -> Any:
        """Dual constructor: witness ``a`` with alpha({a}) not below ``bd``."""

    @abstractmethod
    def primal_strategy(self, b: BasisElement) -> tuple[BasisElement, ...]:
        """Finitary winning move for the exists player at ``b`` in the primal game."""

    @abstractmethod
    def dual_strategy(self, bd: BasisElement) -> tuple[BasisElement, ...]:
        """Finitary reply set for the forall player at ``bd`` in the dual game."""

    # -- serialization -------------------------------------------------------
    @abstractmethod
    def payload_to_json(self, payload: Any) -> Any: ...

    @abstractmethod
    def payload_from_json(self, data: Any) -> Any: ...

    def payload_key(self, payload: Any) -> str:
        """Canonical serialized form, used for deterministic tie-breaking."""
        import json

        return json.dumps(self.payload_to_json(payload), sort_keys=True)

    # -- law checking hooks --------------------------------------------------
    @abstractmethod
    def alpha_logic_step(self, payloads: frozenset) -> Any:
        """Exact ``alpha(l(A))`` for a finite witness set, computed on the logic side."""

    # Optional: callables checking the unit laws, or None when gamma is not
    # computable for the instance (the law is then reported as skipped).
    gamma_alpha_of: Optional[Callable[[frozenset], list[str]]] = None
    alpha_gamma_of: Optional[Callable[[Any], Any]] = None

    # -- presentation ----------------------------------------------------------
    def witness_evidence(self, element: BasisElement, payload: Any) -> dict[str, str]:
        """Instance-specific human-readable evidence for a verification verdict."""
        return {}

    def describe_payload(self, payload: Any) -> str:
        return str(payload)
