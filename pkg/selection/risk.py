import logging
from typing import NamedTuple, Optional, Sequence

import numpy as np

from core.base import BaseSmoother
from shared.exceptions import InputError
from shared.models import Dataset, RiskEstimates
from solvers.model import SpamModel, logistic, predict


logger = logging.getLogger(__name__)

# dispersion of the binomial family; plays the role of sigma2 in logistic Cp
BINOMIAL_DISPERSION = 1.0


class GcvScore(NamedTuple):
    value: float
    defined: bool


def effective_df(model: SpamModel, smoothers: Sequence[Optional[BaseSmoother]]) -> float:
    """Sum of smoother traces over the active components."""
    if len(smoothers) != model.p:
        raise InputError(f"{len(smoothers)} smoothers for a model with {model.p} components")
    return float(sum(
        smoothers[j].trace for j in model.active_set if smoothers[j] is not None
    ))


def residual_sum_of_squares(data: Dataset, model: SpamModel) -> float:
    residual = data.Y - model.fitted_values()
    return float(residual @ residual)


def binomial_deviance(data: Dataset, model: SpamModel) -> float:
    """-2 log-likelihood of 0/1 responses under the model's additive predictor."""
    eta = model.fitted_values()
    return float(2.0 * np.sum(np.logaddexp(0.0, eta) - data.Y * eta))


def model_loss(data: Dataset, model: SpamModel) -> float:
    """RSS for identity-link models, binomial deviance for logistic ones."""
    if model.link == "logistic":
        return binomial_deviance(data, model)
    return residual_sum_of_squares(data, model)


def cp_score(data: Dataset, model: SpamModel, df: float, sigma2: float) -> float:
    """
    loss/n + 2 sigma2 df / n

    The loss is the RSS, or the deviance for logistic models, where sigma2 is
    the binomial dispersion.
    """
    if not sigma2 > 0:
        raise InputError(f"sigma2 must be positive, got {sigma2}")
    n = data.n
    return model_loss(data, model) / n + 2.0 * sigma2 * df / n


def gcv_score(data: Dataset, model: SpamModel, df: float) -> GcvScore:
    """(loss/n) / (1 - df/n)^2; undefined (+inf) when df >= n."""
    n = data.n
    if df >= n:
        return GcvScore(float('inf'), False)
    return GcvScore((model_loss(data, model) / n) / (1.0 - df / n) ** 2, True)


def holdout_error(model: SpamModel, holdout: Dataset) -> float:
    """Mean squared error, or the misclassification rate for logistic models."""
    fitted = predict(model, holdout.original_X())
    if model.link == "logistic":
        return float(np.mean((fitted >= 0.5) != (holdout.Y >= 0.5)))
    return float(np.mean((holdout.Y - fitted) ** 2))


def estimate_sigma2(rss: float, n: int, df: float) -> float:
    return rss / (n - df)


def risk_estimates(
    data: Dataset,
    model: SpamModel,
    smoothers: Sequence[Optional[BaseSmoother]],
    sigma2: Optional[float] = None,
    holdout: Optional[Dataset] = None
) -> RiskEstimates:
    """
    df, Cp and GCV for one fitted model. Cp is NaN when no sigma2 is available;
    logistic models default to the binomial dispersion.
    """
    df = effective_df(model, smoothers)
    held = holdout_error(model, holdout) if holdout is not None else None

    deviance = None
    if model.link == "logistic":
        if sigma2 is None:
            sigma2 = BINOMIAL_DISPERSION
        rss = float(np.sum((data.Y - logistic(model.fitted_values())) ** 2))
        deviance = binomial_deviance(data, model)
    else:
        rss = residual_sum_of_squares(data, model)

    cp = cp_score(data, model, df, sigma2) if sigma2 else float('nan')
    gcv = gcv_score(data, model, df)
    return RiskEstimates(
        df=df, rss=rss, deviance=deviance, cp=cp, gcv=gcv.value, gcv_defined=gcv.defined,
        sigma2_hat=sigma2, holdout_error=held,
    )
