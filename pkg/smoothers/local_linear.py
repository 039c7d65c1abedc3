import logging

import numpy as np

from core.base import BaseSmoother
from shared.exceptions import InputError, NumericError
from shared.models import ComponentRepresentation, SmootherKind, SmootherSpec
from .basis import default_bandwidth


logger = logging.getLogger(__name__)


def local_linear_weights(x_eval: np.ndarray, x_train: np.ndarray, bandwidth: float) -> np.ndarray:
    r"""
    Rows of the local linear hat matrix with a Gaussian kernel.

    With :math:`d_i = x_i - x_0`, :math:`K_i = \exp(-d_i^2 / 2h^2)` and
    :math:`S_k = \sum_i K_i d_i^k`, the fitted value at :math:`x_0` is
    :math:`\sum_i l_i y_i` with

    .. math::

        l_i = \frac{K_i (S_2 - d_i S_1)}{S_0 S_2 - S_1^2}

    Rows whose local design is degenerate fall back to kernel (Nadaraya-Watson)
    weights.
    """
    x_eval = np.asarray(x_eval, dtype=float).ravel()
    x_train = np.asarray(x_train, dtype=float).ravel()

    d = x_train[None, :] - x_eval[:, None]
    z2 = 0.5 * (d / bandwidth) ** 2
    # the weights are invariant to a per-row factor; shift so the nearest point has K = 1
    K = np.exp(-(z2 - z2.min(axis=1, keepdims=True)))

    S0 = K.sum(axis=1)
    S1 = (K * d).sum(axis=1)
    S2 = (K * d * d).sum(axis=1)
    denom = S0 * S2 - S1 * S1

    degenerate = ~(denom > 1e-12 * S0 * S2)
    safe = np.where(degenerate, 1.0, denom)
    L = K * (S2[:, None] - d * S1[:, None]) / safe[:, None]
    if np.any(degenerate):
        L[degenerate] = K[degenerate] / S0[degenerate, None]
    return L


class LocalLinearSmoother(BaseSmoother):
    """Gaussian-kernel local linear smoother with a fixed bandwidth in data units."""

    kind = SmootherKind.LOCAL_LINEAR

    def __init__(self, x: np.ndarray, bandwidth: float):
        super().__init__(x)
        if not bandwidth > 0:
            raise InputError(f"bandwidth must be positive, got {bandwidth}")
        self.bandwidth = float(bandwidth)
        self.H = local_linear_weights(self.x, self.x, self.bandwidth)
        self.H.setflags(write=False)
        self._trace = float(np.trace(self.H))

    @classmethod
    def from_spec(cls, spec: SmootherSpec, x: np.ndarray) -> "LocalLinearSmoother":
        h = spec.bandwidth
        if h is None:
            h = default_bandwidth(x)
            if not h > 0:
                # constant column: any positive bandwidth gives the same (mean) smooth
                h = 1.0
        return cls(x, h)

    @property
    def trace(self) -> float:
        return self._trace

    def apply(self, r: np.ndarray) -> np.ndarray:
        return self.H @ self._check_length(r)

    def hat_matrix(self) -> np.ndarray:
        return np.array(self.H)

    def apply_weighted(self, w: np.ndarray, r: np.ndarray, ridge: float = 0.0) -> np.ndarray:
        w = self._check_length(w, "w")
        r = self._check_length(r)
        out = (self.H @ (w * r)) / (self.H @ w + ridge)
        if not np.all(np.isfinite(out)):
            raise NumericError("weighted local linear smooth produced non-finite values")
        return out

    def represent(self, targets: np.ndarray) -> ComponentRepresentation:
        targets = self._check_length(targets, "targets")
        return ComponentRepresentation(
            kind=self.kind,
            bandwidth=self.bandwidth,
            design=self.x.tolist(),
            training_targets=targets.tolist(),
            offset=float(np.mean(self.H @ targets)),
        )

    def represent_weighted(self, w: np.ndarray, r: np.ndarray, ridge: float = 0.0) -> ComponentRepresentation:
        w = self._check_length(w, "w")
        r = self._check_length(r)
        return ComponentRepresentation(
            kind=self.kind,
            bandwidth=self.bandwidth,
            design=self.x.tolist(),
            training_targets=(w * r).tolist(),
            weights=w.tolist(),
            ridge=float(ridge),
            offset=float(np.mean(self.apply_weighted(w, r, ridge))),
        )

    @staticmethod
    def evaluate(rep: ComponentRepresentation, x_new: np.ndarray) -> np.ndarray:
        L = local_linear_weights(x_new, np.asarray(rep.design), rep.bandwidth)
        smoothed = L @ np.asarray(rep.training_targets, dtype=float)
        if rep.weights is not None:
            smoothed = smoothed / (L @ np.asarray(rep.weights, dtype=float) + (rep.ridge or 0.0))
        return smoothed - rep.offset
