from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from shared.config import config


class SmootherKind(str, Enum):
    ORTHOGONAL_SERIES = "series"
    LOCAL_LINEAR = "loclin"


class BasisKind(str, Enum):
    COSINE = "cosine"
    LINEAR = "linear"


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    LOGISTIC = "logistic"


class CovariateLaw(str, Enum):
    UNIFORM_IID = "uniform_iid"      # iid U(0, 1)
    UNIFORM_WIDE = "uniform_wide"    # iid U(-2.5, 2.5), stored rescaled to [0, 1]


class SmootherSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: SmootherKind = Field(
        default_factory=lambda: SmootherKind(config.smoother.get('kind', 'series'))
    )
    truncation: Optional[int] = Field(
        default_factory=lambda: config.smoother.get('truncation'), ge=1
    )
    bandwidth: Optional[float] = Field(
        default_factory=lambda: config.smoother.get('bandwidth'), gt=0
    )
    basis: BasisKind = Field(
        default_factory=lambda: BasisKind(config.smoother.get('basis', 'cosine'))
    )

    @model_validator(mode='after')
    def _check_basis(self):
        if (
            self.kind == SmootherKind.ORTHOGONAL_SERIES
            and self.basis == BasisKind.LINEAR
            and self.truncation not in (None, 1)
        ):
            raise ValueError("linear basis has exactly one column; truncation must be 1")
        return self


class FitConfig(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: float = Field(alias="lambda", ge=0)
    smoother: SmootherSpec = Field(default_factory=SmootherSpec)
    max_outer_iters: int = Field(
        default_factory=lambda: int(config.backfit.get('max_outer_iters', 100)), ge=1
    )
    tol: float = Field(
        default_factory=lambda: float(config.backfit.get('tol', 1e-4)), gt=0
    )
    family: Family = Family.GAUSSIAN

    def with_lambda(self, lambda_: float) -> "FitConfig":
        return self.model_copy(update={"lambda_": float(lambda_)})


class SyntheticSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    p: int = Field(ge=4)
    noise_sd: float = Field(default=1.0, gt=0)
    seed: int = Field(default=0, ge=0)
    covariate_law: CovariateLaw = CovariateLaw.UNIFORM_IID


class ColumnScale(BaseModel):
    model_config = ConfigDict(frozen=True)

    min: float
    max: float

    @property
    def constant(self) -> bool:
        return not self.max > self.min

    def scale(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if self.constant:
            return np.zeros_like(values)
        return (values - self.min) / (self.max - self.min)

    def unscale(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return self.min + values * (self.max - self.min)


IDENTITY_SCALE = ColumnScale(min=0.0, max=1.0)


class Dataset(BaseModel):
    """Design matrix and response, with per-column scaling metadata.

    ``X`` is stored as used by the smoothers (scaled to [0, 1] when the
    loader was asked to scale); ``column_scales`` maps back to original units.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    X: np.ndarray
    Y: np.ndarray
    column_scales: List[ColumnScale]
    feature_names: List[str] = Field(default_factory=list)
    response_name: str = "y"
    scaled: bool = True
    constant_columns: List[int] = Field(default_factory=list)
    irrelevant_columns: List[int] = Field(default_factory=list)

    @field_validator('X', mode='before')
    @classmethod
    def _as_matrix(cls, value):
        value = np.asarray(value, dtype=float)
        if value.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {value.shape}")
        return value

    @field_validator('Y', mode='before')
    @classmethod
    def _as_vector(cls, value):
        return np.asarray(value, dtype=float).ravel()

    @model_validator(mode='after')
    def _check_shapes(self):
        n, p = self.X.shape
        if self.Y.shape[0] != n:
            raise ValueError(f"Y has {self.Y.shape[0]} entries but X has {n} rows")
        if len(self.column_scales) != p:
            raise ValueError(f"{len(self.column_scales)} column scales for {p} columns")
        if self.feature_names and len(self.feature_names) != p:
            raise ValueError(f"{len(self.feature_names)} feature names for {p} columns")
        if not self.feature_names:
            object.__setattr__(self, 'feature_names', [f"x{j + 1}" for j in range(p)])
        return self

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def y_mean(self) -> float:
        return float(np.mean(self.Y))

    def is_constant(self, j: int) -> bool:
        return j in self.constant_columns or self.column_scales[j].constant

    def original_X(self) -> np.ndarray:
        return np.column_stack(
            [scale.unscale(self.X[:, j]) for j, scale in enumerate(self.column_scales)]
        ) if self.p else self.X.copy()


class RiskEstimates(BaseModel):
    model_config = ConfigDict(frozen=True)

    df: float = Field(ge=0)
    rss: float
    deviance: Optional[float] = None
    cp: float
    gcv: float
    gcv_defined: bool = True
    sigma2_hat: Optional[float] = None
    holdout_error: Optional[float] = None


class ComponentRepresentation(BaseModel):
    """Everything needed to evaluate one fitted component at new points."""

    kind: SmootherKind
    offset: float = 0.0
    # orthogonal series
    basis: Optional[BasisKind] = None
    coefficients: Optional[List[float]] = None
    basis_means: Optional[List[float]] = None
    linear_center: Optional[float] = None
    linear_scale: Optional[float] = None
    # local linear
    bandwidth: Optional[float] = None
    design: Optional[List[float]] = None
    training_targets: Optional[List[float]] = None
    # local linear fits from weighted (local scoring) updates
    weights: Optional[List[float]] = None
    ridge: Optional[float] = None


class ComponentRecord(ComponentRepresentation):
    j: int = Field(ge=1, description="1-based column index")
    active: bool
    s_hat: float = Field(ge=0)
    scale: ColumnScale


class ModelRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    intercept: float
    lambda_: float = Field(alias="lambda")
    converged: bool
    n_iters: int
    objective: float
    link: str = "identity"
    clip_unit: bool = True
    components: List[ComponentRecord]


class GroundTruth(BaseModel):
    support: List[int] = Field(default_factory=lambda: [1, 2, 3, 4])
    noise_sd: float
    seed: int
    n: int
    p: int
    covariate_law: CovariateLaw = CovariateLaw.UNIFORM_IID


class RecoveryRow(BaseModel):
    p: int
    n: int
    trials: int
    proportion: float
    failures: int = 0
