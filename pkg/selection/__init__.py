"""
Risk estimates (df, Cp, GCV, hold-out error) and regularization paths
"""

from .path import LambdaPath, compute_path, default_grid, export_path_csv, path_table, select_model
from .risk import (
    BINOMIAL_DISPERSION,
    GcvScore,
    binomial_deviance,
    cp_score,
    effective_df,
    gcv_score,
    holdout_error,
    model_loss,
    residual_sum_of_squares,
    risk_estimates,
)

__all__ = [
    'BINOMIAL_DISPERSION',
    'GcvScore',
    'LambdaPath',
    'binomial_deviance',
    'compute_path',
    'cp_score',
    'default_grid',
    'effective_df',
    'export_path_csv',
    'gcv_score',
    'holdout_error',
    'model_loss',
    'path_table',
    'residual_sum_of_squares',
    'risk_estimates',
    'select_model',
]
