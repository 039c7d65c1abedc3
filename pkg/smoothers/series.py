import logging

import numpy as np
from scipy import linalg

from core.base import BaseSmoother
from shared.exceptions import InputError, NumericError
from shared.models import BasisKind, ComponentRepresentation, SmootherKind, SmootherSpec
from .basis import build_basis, default_truncation, linear_basis


logger = logging.getLogger(__name__)

# Gram matrices with a larger condition number get ridge jitter
MAX_CONDITION = 1e12


class OrthogonalSeriesSmoother(BaseSmoother):
    """
    Least squares projection onto a truncated orthonormal basis.

    The basis columns are centred by their training means, so the smoother
    projects onto span(Psi_j) with the constant function removed and its output
    always has mean zero.
    """

    kind = SmootherKind.ORTHOGONAL_SERIES

    def __init__(self, x: np.ndarray, truncation: int, basis: BasisKind = BasisKind.COSINE):
        super().__init__(x)
        self.basis = BasisKind(basis)
        self.truncation = int(truncation)
        self.linear_center = None
        self.linear_scale = None

        if self.basis == BasisKind.LINEAR:
            if self.truncation != 1:
                raise InputError("linear basis has exactly one column; truncation must be 1")
            self.linear_center = float(np.mean(self.x))
            sd = float(np.std(self.x))
            self.linear_scale = sd if sd > 0 else 1.0
            raw = linear_basis(self.x, self.linear_center, self.linear_scale)
        else:
            raw = build_basis(self.x, self.truncation)

        self.basis_means = raw.mean(axis=0)
        self.Psi = raw - self.basis_means
        self.gram = self.Psi.T @ self.Psi

        self.jitter = 0.0
        gram = self.gram
        cond = np.linalg.cond(gram) if gram.size else np.inf
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            d = gram.shape[0]
            self.jitter = 1e-10 * max(np.trace(gram) / d, 1.0)
            gram = gram + self.jitter * np.eye(d)
            logger.debug(f"near-singular Gram (cond={cond:.3g}), ridge jitter {self.jitter:.3g}")

        try:
            self._cho = linalg.cho_factor(gram, check_finite=False)
        except linalg.LinAlgError as e:
            raise NumericError(f"cannot factor basis Gram matrix: {e}") from e

        # (Psi^T Psi)^{-1} Psi^T, so that coefficients(r) is a single product
        self._solve_op = linalg.cho_solve(self._cho, self.Psi.T, check_finite=False)
        # basis entries are bounded, so column norms scale like sqrt(n)
        self._rank = int(np.linalg.matrix_rank(self.Psi, tol=1e-9 * np.sqrt(self.n)))

        for arr in (self.Psi, self.gram, self.basis_means, self._solve_op):
            arr.setflags(write=False)

    @classmethod
    def from_spec(cls, spec: SmootherSpec, x: np.ndarray) -> "OrthogonalSeriesSmoother":
        n = np.asarray(x).size
        if spec.basis == BasisKind.LINEAR:
            d = 1
        else:
            d = spec.truncation or default_truncation(n)
        if d >= n:
            raise InputError(f"truncation d={d} must be smaller than n={n}")
        return cls(x, d, spec.basis)

    @property
    def trace(self) -> float:
        return float(self._rank)

    def coefficients(self, r: np.ndarray) -> np.ndarray:
        r = self._check_length(r)
        return self._solve_op @ r

    def apply(self, r: np.ndarray) -> np.ndarray:
        return self.Psi @ self.coefficients(r)

    def apply_full(self, r: np.ndarray) -> np.ndarray:
        r = self._check_length(r)
        return np.mean(r) + self.Psi @ (self._solve_op @ r)

    def weighted_coefficients(self, w: np.ndarray, r: np.ndarray, ridge: float = 0.0) -> np.ndarray:
        w = self._check_length(w, "w")
        r = self._check_length(r)
        if self._rank == 0:
            return np.zeros(self.truncation)

        weighted = self.Psi * w[:, None]
        lhs = self.Psi.T @ weighted + ridge * self.gram + self.jitter * np.eye(self.truncation)
        rhs = weighted.T @ r
        try:
            beta = linalg.solve(lhs, rhs, assume_a='pos', check_finite=False)
        except (linalg.LinAlgError, ValueError) as e:
            raise NumericError(f"weighted projection failed: {e}") from e
        if not np.all(np.isfinite(beta)):
            raise NumericError("weighted projection produced non-finite coefficients")
        return beta

    def apply_weighted(self, w: np.ndarray, r: np.ndarray, ridge: float = 0.0) -> np.ndarray:
        # argmin_f 1/2 sum w (r - f)^2 + ridge/2 ||f||^2 over f in span(Psi)
        return self.Psi @ self.weighted_coefficients(w, r, ridge)

    def represent(self, targets: np.ndarray) -> ComponentRepresentation:
        coef = self.coefficients(targets)
        offset = float(np.mean(self.Psi @ coef))
        return ComponentRepresentation(
            kind=self.kind,
            basis=self.basis,
            coefficients=coef.tolist(),
            basis_means=self.basis_means.tolist(),
            linear_center=self.linear_center,
            linear_scale=self.linear_scale,
            offset=offset,
        )

    def represent_weighted(self, w: np.ndarray, r: np.ndarray, ridge: float = 0.0) -> ComponentRepresentation:
        coef = self.weighted_coefficients(w, r, ridge)
        return ComponentRepresentation(
            kind=self.kind,
            basis=self.basis,
            coefficients=coef.tolist(),
            basis_means=self.basis_means.tolist(),
            linear_center=self.linear_center,
            linear_scale=self.linear_scale,
            offset=float(np.mean(self.Psi @ coef)),
        )

    @staticmethod
    def evaluate(rep: ComponentRepresentation, x_new: np.ndarray) -> np.ndarray:
        coef = np.asarray(rep.coefficients, dtype=float)
        if rep.basis == BasisKind.LINEAR:
            raw = linear_basis(x_new, rep.linear_center, rep.linear_scale)
        else:
            raw = build_basis(x_new, coef.shape[0])
        return (raw - np.asarray(rep.basis_means, dtype=float)) @ coef - rep.offset
