import logging

import numpy as np

from shared.exceptions import InputError
from shared.models import IDENTITY_SCALE, Dataset
from .synthetic import make_rng


logger = logging.getLogger(__name__)


def augment_irrelevant(data: Dataset, n_uniform: int, n_permuted: int, seed: int) -> Dataset:
    """
    Append n_uniform Uniform(0, 1) columns and n_permuted row-permuted copies
    of randomly chosen original columns. The appended columns are recorded
    in ``irrelevant_columns``.
    """
    if n_uniform < 0 or n_permuted < 0:
        raise InputError("column counts must be non-negative")
    if n_permuted > data.p:
        raise InputError(f"cannot permute {n_permuted} columns of a {data.p}-column dataset")
    if n_uniform == 0 and n_permuted == 0:
        return data

    rng = make_rng(seed)
    n, p = data.n, data.p

    uniform = rng.uniform(0.0, 1.0, size=(n, n_uniform))
    sources = rng.choice(p, size=n_permuted, replace=False) if n_permuted else np.array([], dtype=int)
    permuted = np.column_stack(
        [data.X[rng.permutation(n), j] for j in sources]
    ) if n_permuted else np.empty((n, 0))

    names = list(data.feature_names)
    names += [f"uniform{k + 1}" for k in range(n_uniform)]
    names += [f"perm_{data.feature_names[j]}" for j in sources]

    scales = list(data.column_scales)
    scales += [IDENTITY_SCALE] * n_uniform
    scales += [data.column_scales[j] for j in sources]

    constant = list(data.constant_columns)
    constant += [p + n_uniform + k for k, j in enumerate(sources) if data.is_constant(int(j))]

    logger.info(f"appended {n_uniform} uniform and {n_permuted} permuted columns to p={p}")
    return Dataset(
        X=np.hstack([data.X, uniform, permuted]),
        Y=data.Y.copy(),
        column_scales=scales,
        feature_names=names,
        response_name=data.response_name,
        scaled=data.scaled,
        constant_columns=constant,
        irrelevant_columns=list(data.irrelevant_columns) + list(range(p, p + n_uniform + n_permuted)),
    )
