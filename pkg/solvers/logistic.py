import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from core.base import BaseSmoother
from shared.config import config
from shared.exceptions import InputError, NumericError
from shared.models import ComponentRepresentation, Dataset, FitConfig
from shared.observability import observability
from .backfit import fit_smoothers, relative_change, validate_dataset
from .model import ComponentFunction, SpamModel, logistic


logger = logging.getLogger(__name__)


def _prob_clamp() -> float:
    return float(config.logistic.get('prob_clamp', 1e-5))


class LogisticFitState(BaseModel):
    """Working quantities of one local scoring step, computed from the current predictor."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    f: np.ndarray
    p_hat: np.ndarray
    w: np.ndarray
    Z: np.ndarray

    @classmethod
    def from_predictor(
        cls,
        eta: np.ndarray,
        y: np.ndarray,
        clamp: Optional[float] = None
    ) -> "LogisticFitState":
        clamp = _prob_clamp() if clamp is None else clamp
        eta = np.asarray(eta, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        p_hat = np.clip(logistic(eta), clamp, 1.0 - clamp)
        w = p_hat * (1.0 - p_hat)
        Z = eta + (y - p_hat) / w
        return cls(f=eta, p_hat=p_hat, w=w, Z=Z)


def _check_weights(w: np.ndarray):
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise NumericError(
            "local scoring weights are non-finite or non-positive; probability clamping failed"
        )


def penalized_weighted_smooth(
    s: BaseSmoother,
    w: np.ndarray,
    R_j: np.ndarray,
    lambda_: float,
    f_prev: Optional[np.ndarray] = None,
    max_iters: Optional[int] = None,
    tol: Optional[float] = None
) -> Tuple[np.ndarray, float]:
    """
    Sparse local scoring update for one component.

    Returns ``(f, ridge)`` where f solves f = S(wR) / (S w + ridge) with
    ridge = lambda sqrt(n) / ||f||, or f = 0 (ridge = inf) when
    ||S(wR)|| <= lambda sqrt(n).
    """
    max_iters = max_iters or int(config.logistic.get('inner_max_iters', 50))
    tol = tol or float(config.logistic.get('inner_tol', 1e-6))
    w = np.asarray(w, dtype=float).ravel()
    R_j = np.asarray(R_j, dtype=float).ravel()
    _check_weights(w)
    n = R_j.shape[0]

    if lambda_ == 0:
        return s.apply_weighted(w, R_j, 0.0), 0.0

    threshold = lambda_ * np.sqrt(n)
    if np.linalg.norm(s.apply(w * R_j)) <= threshold:
        return np.zeros(n), np.inf

    if f_prev is not None and np.any(f_prev):
        f = np.asarray(f_prev, dtype=float).ravel()
    else:
        f = s.apply_weighted(w, R_j, 0.0)

    ridge = np.inf
    for _ in range(max_iters):
        norm = float(np.linalg.norm(f))
        if norm == 0.0:
            return np.zeros(n), np.inf
        ridge = threshold / norm
        f_new = s.apply_weighted(w, R_j, ridge)
        change = relative_change(f_new, f)
        f = f_new
        if change < tol:
            break
    else:
        logger.debug(f"inner fixed point stopped after {max_iters} iterations at lambda={lambda_:.6g}")

    return f, ridge


def local_scoring_update(
    state: LogisticFitState,
    s: BaseSmoother,
    R_j: np.ndarray,
    lambda_: float,
    f_prev: Optional[np.ndarray] = None,
    max_iters: Optional[int] = None,
    tol: Optional[float] = None
) -> np.ndarray:
    """Fixed point of f_j <- S_j(w R_j) / (S_j w + lambda sqrt(n) / ||f_j||), or zero."""
    f, _ = penalized_weighted_smooth(s, state.w, R_j, lambda_, f_prev, max_iters, tol)
    return f


def check_binary_response(y: np.ndarray):
    y = np.asarray(y, dtype=float)
    if not np.all((y == 0) | (y == 1)):
        bad = int(np.flatnonzero((y != 0) & (y != 1))[0])
        raise InputError(f"logistic response must be 0/1, got {y[bad]!r} at row {bad}")
    if y.min() == y.max():
        raise InputError(f"logistic response has a single class ({int(y[0])})")


def logistic_lambda_max(data: Dataset, smoothers: Sequence[Optional[BaseSmoother]]) -> float:
    """Smallest lambda at which the null model (intercept only) is stationary."""
    y_centered = data.Y - data.y_mean
    n = data.n
    norms = [
        float(np.linalg.norm(s.apply(y_centered))) / np.sqrt(n)
        for s in smoothers if s is not None
    ]
    return max(norms) if norms else 0.0


def logistic_objective(y: np.ndarray, eta: np.ndarray, F: np.ndarray, lambda_: float) -> float:
    """Penalized mean negative log-likelihood."""
    n = y.shape[0]
    nll = float(np.mean(np.logaddexp(0.0, eta) - y * eta))
    return nll + lambda_ * float(np.linalg.norm(F, axis=1).sum()) / np.sqrt(n)


def fit_logistic(
    data: Dataset,
    cfg: FitConfig,
    warm_start: Optional[SpamModel] = None,
    smoothers: Optional[Sequence[Optional[BaseSmoother]]] = None
) -> SpamModel:
    """Sparse local scoring: batch (p, w, Z) recomputation around sparse weighted backfitting sweeps."""
    validate_dataset(data)
    check_binary_response(data.Y)
    if smoothers is None:
        smoothers = fit_smoothers(data, cfg.smoother)
    if len(smoothers) != data.p:
        raise InputError(f"{len(smoothers)} smoothers for {data.p} columns")

    n, p = data.n, data.p
    lam = cfg.lambda_
    y = data.Y
    clamp = _prob_clamp()

    y_bar = data.y_mean
    alpha = float(np.log(y_bar / (1.0 - y_bar)))
    F = np.zeros((p, n))
    if warm_start is not None:
        if warm_start.p != p:
            raise InputError(f"warm start has {warm_start.p} components, data has {p} columns")
        F = np.array(warm_start.fitted_components(), dtype=float)
        if F.shape != (p, n):
            raise InputError(f"warm start was fitted on {F.shape[1]} rows, data has {n}")
        alpha = warm_start.intercept
    eligible = [j for j in range(p) if smoothers[j] is not None]
    for j in range(p):
        if smoothers[j] is None:
            F[j] = 0.0

    # last weighted update per component, replayed to build the representations
    last_update: List[Optional[Tuple[np.ndarray, np.ndarray, float]]] = [None] * p
    # pre-threshold norms ||S_j(w R_j)|| / sqrt(n) from the last sweep
    s_hat = np.zeros(p)

    eta = alpha + F.sum(axis=0)
    objective_trace = []
    converged = False
    n_iters = 0
    for n_iters in range(1, cfg.max_outer_iters + 1):
        eta_old = eta
        state = LogisticFitState.from_predictor(eta, y, clamp)
        _check_weights(state.w)
        alpha = float(np.sum(state.w * (state.Z - F.sum(axis=0))) / np.sum(state.w))

        residual = state.Z - alpha - F.sum(axis=0)
        for j in eligible:
            R_j = residual + F[j]
            s_hat[j] = float(np.linalg.norm(smoothers[j].apply(state.w * R_j))) / np.sqrt(n)
            f, ridge = penalized_weighted_smooth(smoothers[j], state.w, R_j, lam, f_prev=F[j])
            if np.any(f):
                f = f - f.mean()
                last_update[j] = (state.w, R_j, ridge)
            else:
                last_update[j] = None
            F[j] = f
            residual = R_j - f

        eta = alpha + F.sum(axis=0)
        if not np.all(np.isfinite(eta)):
            raise NumericError(f"additive predictor became non-finite at lambda={lam:.6g}")
        objective_trace.append(logistic_objective(y, eta, F, lam))
        if relative_change(eta, eta_old) < cfg.tol:
            converged = True
            break

    if not converged:
        logger.warning(
            f"local scoring did not converge in {cfg.max_outer_iters} iterations at lambda={lam:.6g}"
        )

    components = []
    for j in range(p):
        active = bool(np.any(F[j]))
        if active:
            w_j, R_j, ridge = last_update[j]
            rep = smoothers[j].represent_weighted(w_j, R_j, ridge)
        else:
            rep = ComponentRepresentation(kind=cfg.smoother.kind)
        components.append(ComponentFunction(
            j=j,
            fitted=F[j].copy(),
            s_hat=float(s_hat[j]),
            active=active,
            representation=rep,
            scale=data.column_scales[j],
        ))

    model = SpamModel(
        intercept=alpha,
        components=components,
        lambda_=lam,
        converged=converged,
        n_iters=n_iters,
        objective=objective_trace[-1],
        objective_trace=objective_trace,
        link="logistic",
        clip_unit=data.scaled,
    )
    observability.trace_fit("logistic_spam", lam, n_iters, converged, model.support)
    return model
