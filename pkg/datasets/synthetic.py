"""
The four-component additive benchmark model on uniform covariates.

    f1(x) = -2 sin(2x)
    f2(x) = x^2 - 1/3
    f3(x) = x - 1/2
    f4(x) = exp(-x) + exp(-1) - 1

Under the default law (iid U(0, 1)) f2, f3 and f4 integrate to zero; f1 does
not, and its mean (cos 2 - 1) is left in the response for the intercept to
absorb. The wide law draws covariates from U(-2.5, 2.5); the dataset stores
them rescaled to [0, 1] with the range kept as column scaling metadata, and
the response is built from the original values.
"""

import logging
from typing import Callable, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from shared.exceptions import InputError
from shared.models import ColumnScale, CovariateLaw, Dataset, GroundTruth, SyntheticSpec


logger = logging.getLogger(__name__)


def f1(x):
    return -2.0 * np.sin(2.0 * np.asarray(x, dtype=float))


def f2(x):
    return np.asarray(x, dtype=float) ** 2 - 1.0 / 3.0


def f3(x):
    return np.asarray(x, dtype=float) - 0.5


def f4(x):
    return np.exp(-np.asarray(x, dtype=float)) + np.exp(-1.0) - 1.0


TRUE_COMPONENTS: Dict[int, Callable[[np.ndarray], np.ndarray]] = {1: f1, 2: f2, 3: f3, 4: f4}

TRUE_SUPPORT: List[int] = [1, 2, 3, 4]

COVARIATE_RANGES: Dict[CovariateLaw, Tuple[float, float]] = {
    CovariateLaw.UNIFORM_IID: (0.0, 1.0),
    CovariateLaw.UNIFORM_WIDE: (-2.5, 2.5),
}


def covariate_range(law: CovariateLaw) -> Tuple[float, float]:
    try:
        return COVARIATE_RANGES[CovariateLaw(law)]
    except (KeyError, ValueError):
        raise InputError(f"unsupported covariate law: {law}")


def component_mean(j: int, law: CovariateLaw = CovariateLaw.UNIFORM_IID) -> float:
    """E[f_j(X)] for X uniform on the law's range (closed form); 0 off the support."""
    a, b = covariate_range(law)
    if j == 1:
        return float((np.cos(2.0 * b) - np.cos(2.0 * a)) / (b - a))
    if j == 2:
        return float((a * a + a * b + b * b) / 3.0 - 1.0 / 3.0)
    if j == 3:
        return float((a + b) / 2.0 - 0.5)
    if j == 4:
        return float((np.exp(-a) - np.exp(-b)) / (b - a) + np.exp(-1.0) - 1.0)
    return 0.0


# E[f_j(X)] for X ~ U(0, 1)
COMPONENT_MEANS: Dict[int, float] = {j: component_mean(j) for j in TRUE_SUPPORT}


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def centered_component(j: int, x: np.ndarray, law: CovariateLaw = CovariateLaw.UNIFORM_IID) -> np.ndarray:
    """True component j (1-based) at original-unit points, minus its mean under the law."""
    if j not in TRUE_COMPONENTS:
        return np.zeros_like(np.asarray(x, dtype=float))
    return TRUE_COMPONENTS[j](x) - component_mean(j, law)


class SyntheticData(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dataset: Dataset
    truth: GroundTruth

    def component(self, j: int) -> Callable[[np.ndarray], np.ndarray]:
        """Evaluator of the true centred component j (1-based) in original units; zero off the support."""
        law = self.truth.covariate_law
        return lambda x: centered_component(j, x, law)


def sample_covariates(rng: np.random.Generator, n: int, p: int, law: CovariateLaw) -> np.ndarray:
    """Covariates in original units."""
    lo, hi = covariate_range(law)
    return rng.uniform(lo, hi, size=(n, p))


def generate_synthetic(spec: SyntheticSpec) -> SyntheticData:
    rng = make_rng(spec.seed)
    lo, hi = covariate_range(spec.covariate_law)
    raw = sample_covariates(rng, spec.n, spec.p, spec.covariate_law)
    signal = sum(TRUE_COMPONENTS[j](raw[:, j - 1]) for j in TRUE_SUPPORT)
    Y = signal + rng.normal(0.0, spec.noise_sd, size=spec.n)

    scale = ColumnScale(min=lo, max=hi)
    X = raw if (lo, hi) == (0.0, 1.0) else scale.scale(raw)
    dataset = Dataset(
        X=X,
        Y=Y,
        column_scales=[scale] * spec.p,
        scaled=True,
    )
    truth = GroundTruth(
        support=list(TRUE_SUPPORT),
        noise_sd=spec.noise_sd,
        seed=spec.seed,
        n=spec.n,
        p=spec.p,
        covariate_law=spec.covariate_law,
    )
    logger.debug(
        f"generated synthetic data n={spec.n} p={spec.p} seed={spec.seed} law={spec.covariate_law.value}"
    )
    return SyntheticData(dataset=dataset, truth=truth)
