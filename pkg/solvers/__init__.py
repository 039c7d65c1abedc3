"""
Model fitting: SpAM backfitting, sparse logistic local scoring and the parametric lasso solvers
"""

from shared.models import Family
from .backfit import (
    KKTEntry,
    fit,
    fit_smoothers,
    kkt_report,
    lambda_max,
    relative_change,
    soft_threshold_component,
    validate_dataset,
)
from .lasso import (
    GroupedDesign,
    GroupedSolution,
    LassoSolution,
    grouped_lasso,
    grouped_lasso_lambda_max,
    grouped_lasso_objective,
    grouped_lasso_path,
    lasso_cd,
    lasso_objective,
)
from .logistic import (
    LogisticFitState,
    fit_logistic,
    local_scoring_update,
    logistic_lambda_max,
    penalized_weighted_smooth,
)
from .model import (
    ComponentFunction,
    SpamModel,
    evaluate_component,
    load_model,
    logistic,
    predict,
    predict_additive,
    save_model,
)


def fit_model(data, cfg, warm_start=None, smoothers=None) -> SpamModel:
    """Dispatch on cfg.family."""
    if cfg.family == Family.LOGISTIC:
        return fit_logistic(data, cfg, warm_start=warm_start, smoothers=smoothers)
    return fit(data, cfg, warm_start=warm_start, smoothers=smoothers)


def component_norms(model: SpamModel):
    return model.component_norms()


__all__ = [
    'ComponentFunction',
    'GroupedDesign',
    'GroupedSolution',
    'KKTEntry',
    'LassoSolution',
    'LogisticFitState',
    'SpamModel',
    'component_norms',
    'evaluate_component',
    'fit',
    'fit_logistic',
    'fit_model',
    'fit_smoothers',
    'grouped_lasso',
    'grouped_lasso_lambda_max',
    'grouped_lasso_objective',
    'grouped_lasso_path',
    'kkt_report',
    'lambda_max',
    'lasso_cd',
    'lasso_objective',
    'load_model',
    'local_scoring_update',
    'logistic',
    'logistic_lambda_max',
    'penalized_weighted_smooth',
    'predict',
    'predict_additive',
    'relative_change',
    'save_model',
    'soft_threshold_component',
    'validate_dataset',
]
