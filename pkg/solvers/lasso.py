"""
Parametric solvers: cyclic coordinate-descent lasso and blockwise grouped lasso.

Both work on an internally rescaled design (unit-norm columns for the lasso,
thin-QR orthonormal blocks for the grouped lasso) and report coefficients on
the caller's scale.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import linalg

from shared.config import config
from shared.exceptions import InputError
from shared.observability import observability


logger = logging.getLogger(__name__)

# a group whose R factor has a diagonal entry below this (relative) is rank deficient
RANK_TOL = 1e-10


def _lasso_tol() -> float:
    return float(config.lasso.get('tol', 1e-10))


def _lasso_max_iters() -> int:
    return int(config.lasso.get('max_iters', 100000))


class LassoSolution(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, populate_by_name=True)

    beta: np.ndarray
    beta_normalized: np.ndarray
    scale: np.ndarray
    lambda_: float = Field(alias="lambda", ge=0)
    n_iters: int
    converged: bool
    objective: float


def lasso_objective(X: np.ndarray, Y: np.ndarray, beta: np.ndarray, lambda_: float) -> float:
    """(1/2)||Y - X beta||^2 + lambda ||beta||_1"""
    r = Y - X @ beta
    return 0.5 * float(r @ r) + lambda_ * float(np.abs(beta).sum())


def lasso_cd(
    X: np.ndarray,
    Y: np.ndarray,
    lambda_: float,
    tol: Optional[float] = None,
    max_iters: Optional[int] = None
) -> LassoSolution:
    """
    Coordinate-descent lasso on unit-norm columns.

    Columns are normalized internally; ``beta`` is returned on the original
    column scale and ``scale`` holds the column norms.
    """
    tol = tol or _lasso_tol()
    max_iters = max_iters or _lasso_max_iters()
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise InputError(f"X has shape {X.shape} but Y has {Y.shape[0]} entries")
    if lambda_ < 0:
        raise InputError(f"lambda must be non-negative, got {lambda_}")

    scale = np.linalg.norm(X, axis=0)
    zero = np.flatnonzero(scale == 0)
    if zero.size:
        raise InputError(f"column {zero[0] + 1} is identically zero and cannot be normalized")
    Xn = X / scale

    p = X.shape[1]
    beta = np.zeros(p)
    residual = Y.copy()
    converged = False
    n_iters = 0
    for n_iters in range(1, max_iters + 1):
        max_change = 0.0
        for j in range(p):
            P_j = float(Xn[:, j] @ residual) + beta[j]
            new = np.sign(P_j) * max(abs(P_j) - lambda_, 0.0)
            delta = new - beta[j]
            if delta != 0.0:
                residual -= delta * Xn[:, j]
                beta[j] = new
                max_change = max(max_change, abs(delta))
        if max_change < tol:
            converged = True
            break

    if not converged:
        logger.warning(f"lasso coordinate descent did not converge in {max_iters} sweeps")

    return LassoSolution(
        beta=beta / scale,
        beta_normalized=beta,
        scale=scale,
        lambda_=lambda_,
        n_iters=n_iters,
        converged=converged,
        objective=lasso_objective(Xn, Y, beta, lambda_),
    )


class GroupedDesign(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    groups: List[Tuple[str, np.ndarray]]
    Y: np.ndarray

    @model_validator(mode='after')
    def _check_groups(self):
        if not self.groups:
            raise ValueError("grouped design needs at least one group")
        Y = np.asarray(self.Y, dtype=float).ravel()
        groups = []
        for label, block in self.groups:
            block = np.asarray(block, dtype=float)
            if block.ndim == 1:
                block = block[:, None]
            if block.shape[0] != Y.shape[0]:
                raise ValueError(f"group '{label}' has {block.shape[0]} rows, Y has {Y.shape[0]}")
            if block.shape[1] < 1:
                raise ValueError(f"group '{label}' has no columns")
            groups.append((label, block))
        object.__setattr__(self, 'groups', groups)
        object.__setattr__(self, 'Y', Y)
        return self

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def sizes(self) -> List[int]:
        return [block.shape[1] for _, block in self.groups]

    @property
    def labels(self) -> List[str]:
        return [label for label, _ in self.groups]


class GroupedSolution(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, populate_by_name=True)

    beta: List[np.ndarray]
    lambda_: float = Field(alias="lambda", ge=0)
    kkt_residual: float = Field(ge=0)
    converged: bool
    n_iters: int
    objective: float
    objective_trace: List[float] = Field(default_factory=list)
    # coefficients in the orthonormalized block coordinates, used for warm starts
    block_coefficients: List[np.ndarray]
    labels: List[str]

    @property
    def active_groups(self) -> List[int]:
        return [k for k, b in enumerate(self.block_coefficients) if np.any(b)]


def orthonormalize_groups(design: GroupedDesign) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Thin QR of every group; rank-deficient groups are rejected by label."""
    factors = []
    for label, block in design.groups:
        Q, R = linalg.qr(block, mode='economic')
        diag = np.abs(np.diag(R))
        ref = max(float(diag.max()), 1.0) if diag.size else 1.0
        if diag.size < block.shape[1] or np.any(diag <= RANK_TOL * ref):
            raise InputError(f"group '{label}' is rank deficient after orthonormalization")
        factors.append((Q, R))
    return factors


def grouped_lasso_objective(design: GroupedDesign, beta: Sequence[np.ndarray], lambda_: float) -> float:
    """
    (1/2)||Y - X beta||^2 + lambda sum_j sqrt(d_j) ||R_j beta_j||,
    with ||R_j beta_j|| = ||X_j beta_j|| for the thin QR X_j = Q_j R_j.
    """
    fitted = np.zeros(design.n)
    penalty = 0.0
    for (_, block), b in zip(design.groups, beta):
        contrib = block @ np.asarray(b, dtype=float)
        fitted += contrib
        penalty += np.sqrt(block.shape[1]) * float(np.linalg.norm(contrib))
    r = design.Y - fitted
    return 0.5 * float(r @ r) + lambda_ * penalty


def _block_objective(Y, Qs, blocks, lambda_, sqrt_d) -> float:
    r = Y - sum(Q @ b for Q, b in zip(Qs, blocks))
    return 0.5 * float(r @ r) + lambda_ * float(sum(s * np.linalg.norm(b) for s, b in zip(sqrt_d, blocks)))


def grouped_lasso_lambda_max(design: GroupedDesign) -> float:
    """Smallest lambda at which every block is zero."""
    factors = orthonormalize_groups(design)
    return max(
        float(np.linalg.norm(Q.T @ design.Y)) / np.sqrt(Q.shape[1]) for Q, _ in factors
    )


def grouped_lasso(
    design: GroupedDesign,
    lambda_: float,
    warm_start: Optional[GroupedSolution] = None,
    tol: Optional[float] = None,
    max_iters: Optional[int] = None,
    start_block: int = 0,
    factors: Optional[List[Tuple[np.ndarray, np.ndarray]]] = None
) -> GroupedSolution:
    """
    Blockwise coordinate descent on orthonormalized groups:
    b_j = [1 - lambda sqrt(d_j) / ||S_j||]_+ S_j with S_j = Q_j^T (Y - sum_{k != j} Q_k b_k).
    """
    tol = tol or _lasso_tol()
    max_iters = max_iters or _lasso_max_iters()
    if lambda_ < 0:
        raise InputError(f"lambda must be non-negative, got {lambda_}")
    if factors is None:
        factors = orthonormalize_groups(design)

    Qs = [Q for Q, _ in factors]
    sqrt_d = [np.sqrt(Q.shape[1]) for Q in Qs]
    G = len(Qs)
    Y = design.Y

    if warm_start is not None:
        if len(warm_start.block_coefficients) != G:
            raise InputError(f"warm start has {len(warm_start.block_coefficients)} groups, design has {G}")
        blocks = [np.array(b, dtype=float) for b in warm_start.block_coefficients]
    else:
        blocks = [np.zeros(Q.shape[1]) for Q in Qs]

    order = [(start_block + k) % G for k in range(G)]
    residual = Y - sum(Q @ b for Q, b in zip(Qs, blocks))
    objective_trace = []
    converged = False
    n_iters = 0
    for n_iters in range(1, max_iters + 1):
        max_change = 0.0
        for j in order:
            S_j = Qs[j].T @ residual + blocks[j]
            norm = float(np.linalg.norm(S_j))
            if norm == 0.0 or norm <= lambda_ * sqrt_d[j]:
                new = np.zeros_like(S_j)
            else:
                new = (1.0 - lambda_ * sqrt_d[j] / norm) * S_j
            delta = new - blocks[j]
            if np.any(delta):
                residual -= Qs[j] @ delta
                blocks[j] = new
                max_change = max(max_change, float(np.max(np.abs(delta))))
        objective_trace.append(_block_objective(Y, Qs, blocks, lambda_, sqrt_d))
        if max_change < tol:
            converged = True
            break

    if not converged:
        logger.warning(f"grouped lasso did not converge in {max_iters} sweeps at lambda={lambda_:.6g}")

    kkt = 0.0
    for j, Q in enumerate(Qs):
        grad = Q.T @ residual
        norm = float(np.linalg.norm(blocks[j]))
        if norm > 0:
            kkt = max(kkt, float(np.linalg.norm(-grad + lambda_ * sqrt_d[j] * blocks[j] / norm)))
        else:
            kkt = max(kkt, float(np.linalg.norm(grad)) - lambda_ * sqrt_d[j])
    kkt = max(kkt, 0.0)

    beta = [linalg.solve_triangular(R, b) for (_, R), b in zip(factors, blocks)]
    solution = GroupedSolution(
        beta=beta,
        lambda_=lambda_,
        kkt_residual=kkt,
        converged=converged,
        n_iters=n_iters,
        objective=objective_trace[-1],
        objective_trace=objective_trace,
        block_coefficients=blocks,
        labels=design.labels,
    )
    observability.trace_fit(
        "grouped_lasso", lambda_, n_iters, converged,
        [design.labels[k] for k in solution.active_groups],
        {"kkt_residual": kkt},
    )
    return solution


def grouped_lasso_path(
    design: GroupedDesign,
    lambdas: Sequence[float],
    tol: Optional[float] = None
) -> List[GroupedSolution]:
    """Solutions along a descending lambda grid, each warm-started from the previous one."""
    lambdas = [float(lam) for lam in lambdas]
    if any(b >= a for a, b in zip(lambdas, lambdas[1:])):
        raise InputError("lambda grid must be strictly decreasing")
    factors = orthonormalize_groups(design)
    path = []
    previous = None
    for lam in lambdas:
        previous = grouped_lasso(design, lam, warm_start=previous, tol=tol, factors=factors)
        path.append(previous)
    return path
