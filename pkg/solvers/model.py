import json
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from shared.exceptions import InputError
from shared.models import ColumnScale, ComponentRecord, ComponentRepresentation, ModelRecord
from smoothers import evaluate_representation


logger = logging.getLogger(__name__)


def logistic(eta: np.ndarray) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class ComponentFunction(BaseModel):
    """One additive component f_j. ``j`` is the 0-based column index."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    j: int = Field(ge=0)
    fitted: Optional[np.ndarray] = None
    s_hat: float = Field(default=0.0, ge=0)
    active: bool = False
    representation: ComponentRepresentation
    scale: ColumnScale

    @property
    def norm(self) -> float:
        """Empirical norm sqrt(mean(f_j^2)) over the training points."""
        if self.fitted is None:
            return 0.0
        return float(np.sqrt(np.mean(self.fitted ** 2)))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at points already on the training scale."""
        x = np.asarray(x, dtype=float).ravel()
        if not self.active:
            return np.zeros_like(x)
        return evaluate_representation(self.representation, x)

    def to_record(self) -> ComponentRecord:
        return ComponentRecord(
            j=self.j + 1,
            active=self.active,
            s_hat=self.s_hat,
            scale=self.scale,
            **self.representation.model_dump(exclude_none=True),
        )

    @classmethod
    def from_record(cls, record: ComponentRecord) -> "ComponentFunction":
        rep_fields = set(ComponentRepresentation.model_fields)
        rep = ComponentRepresentation(**record.model_dump(include=rep_fields))
        return cls(
            j=record.j - 1,
            s_hat=record.s_hat,
            active=record.active,
            representation=rep,
            scale=record.scale,
        )


class SpamModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, populate_by_name=True)

    intercept: float
    components: List[ComponentFunction]
    lambda_: float = Field(alias="lambda", ge=0)
    converged: bool
    n_iters: int
    objective: float
    objective_trace: List[float] = Field(default_factory=list)
    link: str = "identity"
    clip_unit: bool = True

    @property
    def p(self) -> int:
        return len(self.components)

    @property
    def active_set(self) -> List[int]:
        """0-based indices of the active components."""
        return [c.j for c in self.components if c.active]

    @property
    def support(self) -> List[int]:
        """1-based indices of the active components."""
        return [j + 1 for j in self.active_set]

    def component_norms(self) -> np.ndarray:
        return np.array([c.norm for c in self.components])

    def fitted_components(self) -> np.ndarray:
        """p x n matrix of training fitted values."""
        if any(c.fitted is None for c in self.components):
            raise InputError("model was loaded from JSON and carries no training fit")
        return np.vstack([c.fitted for c in self.components])

    def fitted_values(self) -> np.ndarray:
        """Training additive predictor: intercept + sum_j f_j(X_ij)."""
        return self.intercept + self.fitted_components().sum(axis=0)

    def to_record(self) -> ModelRecord:
        return ModelRecord(
            intercept=self.intercept,
            lambda_=self.lambda_,
            converged=self.converged,
            n_iters=self.n_iters,
            objective=self.objective,
            link=self.link,
            clip_unit=self.clip_unit,
            components=[c.to_record() for c in self.components],
        )

    def to_json(self, indent: int = 2) -> str:
        return self.to_record().model_dump_json(by_alias=True, indent=indent, exclude_none=True)

    @classmethod
    def from_record(cls, record: ModelRecord) -> "SpamModel":
        return cls(
            intercept=record.intercept,
            components=[ComponentFunction.from_record(c) for c in record.components],
            lambda_=record.lambda_,
            converged=record.converged,
            n_iters=record.n_iters,
            objective=record.objective,
            link=record.link,
            clip_unit=record.clip_unit,
        )


def evaluate_component(model: SpamModel, j: int, x: np.ndarray) -> np.ndarray:
    """f_j at points on the training [0, 1] scale; ``j`` is 0-based."""
    if not 0 <= j < model.p:
        raise InputError(f"component index {j} out of range for p={model.p}")
    return model.components[j].evaluate(x)


def predict_additive(model: SpamModel, X_new: np.ndarray) -> np.ndarray:
    """intercept + sum_j f_j(x_j) for rows of X_new given in original units."""
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim == 1:
        X_new = X_new[None, :]
    if X_new.shape[1] != model.p:
        raise InputError(f"X_new has {X_new.shape[1]} columns, model has {model.p}")

    out = np.full(X_new.shape[0], model.intercept, dtype=float)
    for comp in model.components:
        if not comp.active:
            continue
        x = comp.scale.scale(X_new[:, comp.j])
        if model.clip_unit:
            x = np.clip(x, 0.0, 1.0)
        out += comp.evaluate(x)
    return out


def predict(model: SpamModel, X_new: np.ndarray) -> np.ndarray:
    """Mean response: the additive fit, or probabilities for logistic models."""
    eta = predict_additive(model, X_new)
    if model.link == "logistic":
        return logistic(eta)
    return eta


def save_model(model: SpamModel, path: Union[str, Path]):
    Path(path).write_text(model.to_json(), encoding='utf-8')


def load_model(path: Union[str, Path]) -> SpamModel:
    try:
        payload = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read model JSON {path}: {e}") from e
    return SpamModel.from_record(ModelRecord.model_validate(payload))
