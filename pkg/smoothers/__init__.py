"""
Univariate linear smoothers S_j and the helpers to fit and apply them
"""

import numpy as np

from core.base import BaseSmoother, smoother_registry
from shared.exceptions import InputError
from shared.models import ComponentRepresentation, SmootherKind, SmootherSpec
from .basis import build_basis, default_bandwidth, default_truncation, linear_basis
from .local_linear import LocalLinearSmoother, local_linear_weights
from .series import OrthogonalSeriesSmoother


smoother_registry.register(
    SmootherKind.ORTHOGONAL_SERIES,
    OrthogonalSeriesSmoother,
    "Projection onto a truncated cosine (or linear) basis"
)
smoother_registry.register(
    SmootherKind.LOCAL_LINEAR,
    LocalLinearSmoother,
    "Gaussian-kernel local linear regression"
)


def fit_smoother(spec: SmootherSpec, x: np.ndarray) -> BaseSmoother:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] < 3:
        raise InputError(f"a smoother needs at least 3 points, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise InputError("design column contains non-finite values")
    return smoother_registry.create_instance(spec, x)


def apply(smoother: BaseSmoother, r: np.ndarray) -> np.ndarray:
    return smoother.apply(r)


def evaluate_representation(rep: ComponentRepresentation, x_new: np.ndarray) -> np.ndarray:
    return smoother_registry.evaluate(rep, x_new)


__all__ = [
    'BaseSmoother',
    'LocalLinearSmoother',
    'OrthogonalSeriesSmoother',
    'apply',
    'build_basis',
    'default_bandwidth',
    'default_truncation',
    'evaluate_representation',
    'fit_smoother',
    'linear_basis',
    'local_linear_weights',
]
