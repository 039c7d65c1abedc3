import io
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from core.base import BaseSmoother
from shared.config import config
from shared.exceptions import InputError, NumericError, PathFitError
from shared.models import Dataset, Family, FitConfig, RiskEstimates
from solvers import fit_model, fit_smoothers, lambda_max, logistic_lambda_max
from solvers.model import SpamModel
from .risk import BINOMIAL_DISPERSION, effective_df, estimate_sigma2, residual_sum_of_squares, risk_estimates


logger = logging.getLogger(__name__)

PATH_COLUMNS = ['lambda', 'normalized_coordinate', 'j', 'component_norm', 'active', 'df', 'cp', 'gcv']


class LambdaPath(BaseModel):
    """
    Fits along a strictly decreasing lambda grid, each warm-started from the previous one.

    ``lambdas`` holds the grid points actually fitted: the path ends early at
    the first model whose df reaches n.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lambdas: np.ndarray
    models: List[SpamModel]
    risk: List[RiskEstimates]
    normalized_coordinate: np.ndarray
    sigma2_hat: Optional[float] = None
    family: Family = Family.GAUSSIAN

    def __len__(self) -> int:
        return len(self.models)

    @property
    def total_norms(self) -> np.ndarray:
        return np.array([m.component_norms().sum() for m in self.models])

    @property
    def active_set_sizes(self) -> List[int]:
        return [len(m.active_set) for m in self.models]


def default_grid(lam_max: float, n_lambdas: Optional[int] = None, min_ratio: Optional[float] = None) -> np.ndarray:
    n_lambdas = n_lambdas or int(config.path.get('n_lambdas', 50))
    min_ratio = min_ratio or float(config.path.get('min_ratio', 1e-3))
    if not lam_max > 0:
        raise InputError("lambda_max is zero: the response has no signal any smoother can pick up")
    return np.geomspace(lam_max, min_ratio * lam_max, n_lambdas)


def _check_grid(grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise InputError("lambda grid is empty")
    if np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise InputError("lambda grid must contain positive finite values")
    if np.any(np.diff(grid) >= 0):
        raise InputError("lambda grid must be strictly decreasing")
    return grid


def default_sigma2(data: Dataset, models: Sequence[SpamModel], dfs: Sequence[float]) -> float:
    """RSS/(n - df) of the least regularized model with df < n/2, else var(Y)."""
    n = data.n
    for model, df in zip(reversed(models), reversed(list(dfs))):
        if df < n / 2:
            sigma2 = estimate_sigma2(residual_sum_of_squares(data, model), n, df)
            if sigma2 > 0:
                return sigma2
            break
    fallback = float(np.var(data.Y))
    logger.warning(f"no usable path model for the noise variance, falling back to var(Y)={fallback:.6g}")
    return fallback if fallback > 0 else 1.0


def compute_path(
    data: Dataset,
    cfg_base: FitConfig,
    grid: Optional[Sequence[float]] = None,
    sigma2: Optional[float] = None,
    holdout: Optional[Dataset] = None,
    smoothers: Optional[Sequence[Optional[BaseSmoother]]] = None
) -> LambdaPath:
    if smoothers is None:
        smoothers = fit_smoothers(data, cfg_base.smoother)

    logistic = cfg_base.family == Family.LOGISTIC
    if grid is None:
        lam_max = logistic_lambda_max(data, smoothers) if logistic else lambda_max(data, smoothers)
        grid = default_grid(lam_max)
    grid = _check_grid(grid)

    # stop at the first model with df >= n
    stop_when_saturated = bool(config.path.get('stop_when_saturated', True))
    models, dfs = [], []
    previous = None
    for lam in grid:
        try:
            previous = fit_model(data, cfg_base.with_lambda(lam), warm_start=previous, smoothers=smoothers)
        except (InputError, NumericError, np.linalg.LinAlgError) as e:
            raise PathFitError(float(lam), e) from e
        logger.debug(f"path lambda={lam:.6g} active={previous.support}")
        models.append(previous)
        dfs.append(effective_df(previous, smoothers))
        if stop_when_saturated and dfs[-1] >= data.n and len(models) < len(grid):
            logger.info(
                f"path stopped after {len(models)} of {len(grid)} lambdas: "
                f"df={dfs[-1]:.6g} reached n={data.n} at lambda={lam:.6g}"
            )
            break
    grid = grid[:len(models)]

    if sigma2 is None:
        sigma2 = BINOMIAL_DISPERSION if logistic else default_sigma2(data, models, dfs)
    risk = [risk_estimates(data, m, smoothers, sigma2, holdout) for m in models]

    totals = np.array([m.component_norms().sum() for m in models])
    peak = totals.max()
    coordinate = totals / peak if peak > 0 else np.zeros_like(totals)

    return LambdaPath(
        lambdas=grid,
        models=models,
        risk=risk,
        normalized_coordinate=coordinate,
        sigma2_hat=sigma2,
        family=cfg_base.family,
    )


def select_model(path: LambdaPath, criterion: Optional[str] = None) -> Tuple[int, SpamModel]:
    """Index and model minimizing Cp, GCV or hold-out error; ties go to the larger lambda."""
    criterion = (criterion or config.path.get('criterion', 'cp')).lower()
    if criterion == 'cp':
        scores = [r.cp for r in path.risk]
    elif criterion == 'gcv':
        scores = [r.gcv for r in path.risk]
    elif criterion == 'holdout':
        scores = [r.holdout_error for r in path.risk]
        if any(s is None for s in scores):
            raise InputError("hold-out selection needs a path computed with a hold-out dataset")
    else:
        raise InputError(f"unknown selection criterion '{criterion}' (expected cp, gcv or holdout)")

    scores = np.asarray(scores, dtype=float)
    if np.all(np.isnan(scores)):
        raise InputError(f"{criterion} is undefined for every model on this path")
    best = int(np.nanargmin(scores))
    return best, path.models[best]


def path_table(path: LambdaPath) -> pd.DataFrame:
    """One row per (lambda, j) with 1-based j."""
    rows = []
    for lam, coord, model, risk in zip(path.lambdas, path.normalized_coordinate, path.models, path.risk):
        for comp in model.components:
            rows.append({
                'lambda': float(lam),
                'normalized_coordinate': float(coord),
                'j': comp.j + 1,
                'component_norm': comp.norm,
                'active': comp.active,
                'df': risk.df,
                'cp': risk.cp,
                'gcv': risk.gcv,
            })
    return pd.DataFrame(rows, columns=PATH_COLUMNS)


def export_path_csv(path: LambdaPath, dest: Optional[Union[str, Path, io.TextIOBase]] = None) -> Optional[str]:
    """Write the path table as CSV; returns the text when no destination is given."""
    return path_table(path).to_csv(dest, index=False, lineterminator='\n')
