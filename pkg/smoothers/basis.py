import math

import numpy as np

from shared.exceptions import InputError


SQRT2 = math.sqrt(2.0)


def build_basis(x: np.ndarray, d: int) -> np.ndarray:
    """
    Cosine basis psi_k(x) = sqrt(2) cos(k pi x), k = 1..d, evaluated at x.

    The constant function is not part of the basis; components are centred
    separately.

    Parameters
    ----------
    x : array of shape (n,)
        Points in [0, 1].
    d : int
        Truncation, number of basis functions.

    Returns
    -------
    array of shape (n, d)
    """
    if int(d) != d or d < 1:
        raise InputError(f"truncation must be a positive integer, got {d}")
    x = np.asarray(x, dtype=float).ravel()

    outside = np.flatnonzero(~((x >= 0.0) & (x <= 1.0)))
    if outside.size:
        i = int(outside[0])
        raise InputError(
            f"cosine basis is defined on [0, 1]: row {i} has value {x[i]!r}"
            + (f" ({outside.size} rows outside)" if outside.size > 1 else "")
        )

    k = np.arange(1, int(d) + 1, dtype=float)
    return SQRT2 * np.cos(np.pi * np.outer(x, k))


def linear_basis(x: np.ndarray, center: float, scale: float) -> np.ndarray:
    """One-column identity map (x - center) / scale."""
    x = np.asarray(x, dtype=float).ravel()
    return ((x - center) / scale)[:, None]


def default_truncation(n: int) -> int:
    # d ~ n^(1/5), at least 3 so tiny samples still smooth, at most n/4
    d = max(int(round(n ** 0.2)), 3)
    return max(1, min(d, n // 4))


def default_bandwidth(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float).ravel()
    n = x.shape[0]
    sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
    return 1.06 * sd * n ** (-0.2)
