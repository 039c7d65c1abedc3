import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from core.base import BaseSmoother
from shared.exceptions import InputError
from shared.models import ComponentRepresentation, Dataset, FitConfig, SmootherKind, SmootherSpec
from shared.observability import observability
from smoothers import OrthogonalSeriesSmoother, fit_smoother
from .model import ComponentFunction, SpamModel


logger = logging.getLogger(__name__)


def soft_threshold_component(P_hat: np.ndarray, lambda_: float) -> Tuple[np.ndarray, float]:
    """
    Functional soft thresholding of one smoothed residual.

    Returns f = [1 - lambda / s_hat]_+ P_hat (not centred) and
    s_hat = sqrt(mean(P_hat^2)).
    """
    P_hat = np.asarray(P_hat, dtype=float).ravel()
    if P_hat.size == 0:
        raise InputError("cannot threshold an empty vector")
    if lambda_ < 0:
        raise InputError(f"lambda must be non-negative, got {lambda_}")

    s_hat = float(np.sqrt(np.mean(P_hat ** 2)))
    if s_hat == 0.0 or s_hat <= lambda_:
        return np.zeros_like(P_hat), s_hat
    return (1.0 - lambda_ / s_hat) * P_hat, s_hat


def validate_dataset(data: Dataset):
    if data.n == 0 or data.p == 0:
        raise InputError(f"dataset is empty (n={data.n}, p={data.p})")
    if not np.all(np.isfinite(data.X)):
        rows, cols = np.nonzero(~np.isfinite(data.X))
        raise InputError(f"non-finite value in X at row {rows[0]}, column {cols[0] + 1}")
    if not np.all(np.isfinite(data.Y)):
        raise InputError(f"non-finite value in Y at row {int(np.flatnonzero(~np.isfinite(data.Y))[0])}")


def fit_smoothers(data: Dataset, spec: SmootherSpec) -> List[Optional[BaseSmoother]]:
    """One fitted smoother per column; constant columns get None (permanently inactive)."""
    validate_dataset(data)
    smoothers = []
    for j in range(data.p):
        if data.is_constant(j) or np.ptp(data.X[:, j]) == 0:
            logger.info(f"column {j + 1} is constant, marked permanently inactive")
            smoothers.append(None)
        else:
            smoothers.append(fit_smoother(spec, data.X[:, j]))
    return smoothers


def lambda_max(data: Dataset, smoothers: Sequence[Optional[BaseSmoother]]) -> float:
    """Smallest lambda at which the first sweep from zero keeps every component at zero."""
    y_centered = data.Y - data.y_mean
    norms = [
        float(np.sqrt(np.mean(s.apply(y_centered) ** 2)))
        for s in smoothers if s is not None
    ]
    return max(norms) if norms else 0.0


def relative_change(new: np.ndarray, old: np.ndarray) -> float:
    """
    ||new - old|| / max(||old||, 1e-12) over the whole stacked array.

    This is a ratio of Euclidean norms, not the largest entrywise relative
    change: one component moving a lot while the rest are still counts only
    through its share of the total norm. Zero change is always 0.
    """
    diff = float(np.linalg.norm(new - old))
    if diff == 0.0:
        return 0.0
    return diff / max(float(np.linalg.norm(old)), 1e-12)


def _objective(
    residual: np.ndarray,
    F: np.ndarray,
    s_hat: np.ndarray,
    lambda_: float,
    kind: SmootherKind
) -> float:
    n = residual.shape[0]
    loss = float(residual @ residual) / (2.0 * n)
    if kind == SmootherKind.ORTHOGONAL_SERIES:
        # sqrt(beta^T Psi^T Psi beta / n) = ||f_j|| / sqrt(n) on the centred basis
        penalty = float(np.linalg.norm(F, axis=1).sum()) / np.sqrt(n)
    else:
        penalty = float(s_hat.sum())
    return loss + lambda_ * penalty


def fit(
    data: Dataset,
    cfg: FitConfig,
    warm_start: Optional[SpamModel] = None,
    smoothers: Optional[Sequence[Optional[BaseSmoother]]] = None
) -> SpamModel:
    """SpAM backfitting: residualize, smooth, estimate norm, soft-threshold, centre."""
    validate_dataset(data)
    if smoothers is None:
        smoothers = fit_smoothers(data, cfg.smoother)
    if len(smoothers) != data.p:
        raise InputError(f"{len(smoothers)} smoothers for {data.p} columns")

    n, p = data.n, data.p
    lam = cfg.lambda_
    y_mean = data.y_mean
    y_centered = data.Y - y_mean

    F = np.zeros((p, n))
    if warm_start is not None:
        if warm_start.p != p:
            raise InputError(f"warm start has {warm_start.p} components, data has {p} columns")
        F = np.array(warm_start.fitted_components(), dtype=float)
        if F.shape != (p, n):
            raise InputError(f"warm start was fitted on {F.shape[1]} rows, data has {n}")

    targets = np.zeros((p, n))
    s_hat = np.zeros(p)
    residual = y_centered - F.sum(axis=0)
    eligible = [j for j in range(p) if smoothers[j] is not None]
    for j in range(p):
        if smoothers[j] is None and np.any(F[j]):
            residual += F[j]
            F[j] = 0.0

    def sweep(columns):
        nonlocal residual
        F_old = F.copy()
        for j in columns:
            partial = residual + F[j]
            P_hat = smoothers[j].apply(partial)
            f, s_hat[j] = soft_threshold_component(P_hat, lam)
            if np.any(f):
                targets[j] = (1.0 - lam / s_hat[j]) * partial
                f -= f.mean()
            else:
                targets[j] = 0.0
            F[j] = f
            residual = partial - f
        objective_trace.append(_objective(residual, F, s_hat, lam, cfg.smoother.kind))
        return relative_change(F, F_old)

    # full sweeps over every column, with sweeps restricted to the current
    # active set in between; convergence is only declared on a full sweep
    objective_trace = []
    converged = False
    n_iters = 0
    while n_iters < cfg.max_outer_iters:
        n_iters += 1
        if sweep(eligible) < cfg.tol:
            converged = True
            break
        active = [j for j in eligible if np.any(F[j])]
        while active and n_iters < cfg.max_outer_iters:
            n_iters += 1
            if sweep(active) < cfg.tol:
                break

    if not converged:
        logger.warning(
            f"backfitting did not converge in {cfg.max_outer_iters} sweeps at lambda={lam:.6g}"
        )

    components = []
    for j in range(p):
        active = bool(np.any(F[j]))
        if active:
            rep = smoothers[j].represent(targets[j])
        else:
            rep = ComponentRepresentation(kind=cfg.smoother.kind)
        components.append(ComponentFunction(
            j=j,
            fitted=F[j].copy() if active else np.zeros(n),
            s_hat=float(s_hat[j]),
            active=active,
            representation=rep,
            scale=data.column_scales[j],
        ))

    model = SpamModel(
        intercept=y_mean,
        components=components,
        lambda_=lam,
        converged=converged,
        n_iters=n_iters,
        objective=objective_trace[-1],
        objective_trace=objective_trace,
        link="identity",
        clip_unit=data.scaled,
    )
    observability.trace_fit("spam", lam, n_iters, converged, model.support)
    return model


class KKTEntry(BaseModel):
    j: int
    active: bool
    stationarity: float
    threshold_gap: float


def kkt_report(
    model: SpamModel,
    data: Dataset,
    smoothers: Sequence[Optional[BaseSmoother]]
) -> List[KKTEntry]:
    """
    Block optimality residuals of the orthogonal-series objective.

    Active blocks report the sup-norm of
    (1/n) Psi^T (R_j - f_j) - lambda Psi^T f_j / (sqrt(n) ||f_j||);
    inactive blocks report sqrt(mean((S_j R_j)^2)) - lambda, which must be <= 0.
    """
    n = data.n
    F = model.fitted_components()
    residual = (data.Y - model.intercept) - F.sum(axis=0)
    entries = []
    for j, smoother in enumerate(smoothers):
        if smoother is None:
            continue
        if not isinstance(smoother, OrthogonalSeriesSmoother):
            raise InputError("KKT certificate is defined for orthogonal series smoothers only")
        partial = residual + F[j]
        if model.components[j].active:
            f = F[j]
            Psi = smoother.Psi
            grad = Psi.T @ (partial - f) / n
            sub = model.lambda_ * (Psi.T @ f) / (np.sqrt(n) * np.linalg.norm(f))
            entries.append(KKTEntry(
                j=j, active=True,
                stationarity=float(np.max(np.abs(grad - sub))),
                threshold_gap=0.0,
            ))
        else:
            s = float(np.sqrt(np.mean(smoother.apply(partial) ** 2)))
            entries.append(KKTEntry(
                j=j, active=False, stationarity=0.0, threshold_gap=s - model.lambda_
            ))
    return entries
