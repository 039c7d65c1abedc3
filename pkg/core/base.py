"""
Abstract base classes for the pluggable univariate smoothers.
Supports multiple implementations: orthogonal series projection, local linear, etc.
"""

from abc import ABC, abstractmethod
from typing import Dict, Optional

import numpy as np

from shared.exceptions import InputError
from shared.models import ComponentRepresentation, SmootherKind, SmootherSpec


class BaseSmoother(ABC):
    """A fitted univariate linear smoother S_j for one design column.

    Instances are immutable after construction and may be shared across threads.
    """

    kind: SmootherKind

    def __init__(self, x: np.ndarray):
        x = np.array(x, dtype=float).ravel()
        x.setflags(write=False)
        self._x = x

    @property
    def x(self) -> np.ndarray:
        return self._x

    @property
    def n(self) -> int:
        return self._x.shape[0]

    @property
    @abstractmethod
    def trace(self) -> float:
        """Effective degrees of freedom nu_j = trace(S_j)."""

    @abstractmethod
    def apply(self, r: np.ndarray) -> np.ndarray:
        """Return S_j r."""

    def apply_full(self, r: np.ndarray) -> np.ndarray:
        """Smooth with constants reproduced (projection onto span{1, S_j})."""
        return self.apply(r)

    @abstractmethod
    def apply_weighted(self, w: np.ndarray, r: np.ndarray, ridge: float = 0.0) -> np.ndarray:
        """
        Penalized weighted smooth used by local scoring.
        With ridge = 0 this is the standard weighted smooth of r with weights w.
        """

    @abstractmethod
    def represent_weighted(self, w: np.ndarray, r: np.ndarray, ridge: float = 0.0) -> ComponentRepresentation:
        """Representation of apply_weighted(w, r, ridge) minus its training mean."""

    @abstractmethod
    def represent(self, targets: np.ndarray) -> ComponentRepresentation:
        """
        Representation of the component whose training values are
        S_j targets - mean(S_j targets), for evaluation at new points.
        """

    def _check_length(self, r: np.ndarray, name: str = "r") -> np.ndarray:
        r = np.asarray(r, dtype=float).ravel()
        if r.shape[0] != self.n:
            raise InputError(
                f"{name} has length {r.shape[0]}, smoother was fitted on {self.n} points"
            )
        return r

    def hat_matrix(self) -> np.ndarray:
        """Dense n x n smoothing matrix, assembled column by column."""
        return np.column_stack([self.apply(e) for e in np.eye(self.n)])

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(n={self.n}, trace={self.trace:.4g})"


class SmootherRegistry:
    """Registry for the available smoother implementations"""

    def __init__(self):
        self._implementations = {}

    def register(self, kind: SmootherKind, implementation_class: type, description: str = ""):
        """Register a smoother implementation"""
        self._implementations[SmootherKind(kind)] = {
            'class': implementation_class,
            'description': description
        }

    def get_implementation(self, kind: SmootherKind) -> Optional[type]:
        """Get implementation class by kind"""
        entry = self._implementations.get(SmootherKind(kind))
        if entry:
            return entry['class']
        return None

    def list_implementations(self) -> Dict[str, str]:
        """List all registered implementations with descriptions"""
        return {kind.value: impl['description'] for kind, impl in self._implementations.items()}

    def create_instance(self, spec: SmootherSpec, x: np.ndarray) -> BaseSmoother:
        """Fit the smoother described by spec on design column x"""
        impl_class = self.get_implementation(spec.kind)
        if impl_class is None:
            raise InputError(f"Unknown smoother kind: {spec.kind}")
        return impl_class.from_spec(spec, x)

    def evaluate(self, rep: ComponentRepresentation, x_new: np.ndarray) -> np.ndarray:
        """Evaluate a stored component representation at new points"""
        impl_class = self.get_implementation(rep.kind)
        if impl_class is None:
            raise InputError(f"Unknown smoother kind: {rep.kind}")
        return impl_class.evaluate(rep, x_new)


# Global registry instance
smoother_registry = SmootherRegistry()
