import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from shared.exceptions import InputError, ParseError
from shared.models import IDENTITY_SCALE, ColumnScale, Dataset, GroundTruth


logger = logging.getLogger(__name__)


def _to_float(frame: pd.DataFrame) -> np.ndarray:
    """Convert a frame of strings to floats, reporting the first bad cell (1-based data row)."""
    columns = []
    for name in frame.columns:
        raw = frame[name]
        try:
            columns.append(raw.astype(float).to_numpy())
        except ValueError:
            for row, cell in enumerate(raw, start=1):
                try:
                    float(cell)
                except ValueError:
                    raise ParseError(f"non-numeric cell {cell!r}", row=row, column=name) from None
            raise
    return np.column_stack(columns) if columns else np.empty((len(frame), 0))


def read_numeric_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read a header-plus-numeric-cells CSV into a float frame."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except FileNotFoundError as e:
        raise InputError(f"CSV file not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot parse CSV {path}: {e}") from e
    frame.columns = [str(c).strip() for c in frame.columns]
    values = _to_float(frame.apply(lambda col: col.str.strip()))
    if not np.all(np.isfinite(values)):
        rows, cols = np.nonzero(~np.isfinite(values))
        raise ParseError("non-finite cell", row=int(rows[0]) + 1, column=frame.columns[cols[0]])
    return pd.DataFrame(values, columns=frame.columns)


def load_csv(path: Union[str, Path], response_column: str, scale: bool = True) -> Dataset:
    """
    Load a dataset; every column but the response becomes a covariate.
    With ``scale`` the covariates are min-max scaled to [0, 1] and constant
    columns are flagged.
    """
    frame = read_numeric_csv(path)
    if response_column not in frame.columns:
        raise InputError(
            f"response column '{response_column}' not found; columns are {list(frame.columns)}"
        )
    if len(frame) == 0:
        raise InputError(f"CSV {path} has no data rows")

    Y = frame[response_column].to_numpy()
    features = frame.drop(columns=[response_column])
    names: List[str] = list(features.columns)
    raw = features.to_numpy(dtype=float)

    scales = []
    constant = []
    columns = []
    for j, name in enumerate(names):
        x = raw[:, j]
        col_scale = ColumnScale(min=float(x.min()), max=float(x.max())) if scale else IDENTITY_SCALE
        if float(x.min()) == float(x.max()):
            logger.warning(f"column '{name}' is constant, marked inactive")
            constant.append(j)
        scales.append(col_scale)
        columns.append(col_scale.scale(x) if scale else x)

    X = np.column_stack(columns) if columns else np.empty((len(frame), 0))
    logger.info(f"loaded {path}: n={X.shape[0]} p={X.shape[1]} response='{response_column}'")
    return Dataset(
        X=X,
        Y=Y,
        column_scales=scales,
        feature_names=names,
        response_name=response_column,
        scaled=scale,
        constant_columns=constant,
    )


def write_csv(dataset: Dataset, path: Union[str, Path], original_units: bool = False):
    """Covariates followed by the response; floats use the shortest round-trip repr."""
    X = dataset.original_X() if original_units else dataset.X
    frame = pd.DataFrame(X, columns=dataset.feature_names)
    frame[dataset.response_name] = dataset.Y
    frame.to_csv(path, index=False, lineterminator='\n', encoding='utf-8')


def write_ground_truth(truth: GroundTruth, path: Union[str, Path]):
    Path(path).write_text(truth.model_dump_json(indent=2), encoding='utf-8')
