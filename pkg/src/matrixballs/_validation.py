"""Input validation helpers shared by the public functions and estimators."""

import math
import numbers

import numpy as np


class DomainError(ValueError):
    """Argument lies outside the mathematical domain of the operation."""


class SingularityError(ValueError):
    """Coincident points make a logarithmic interaction infinite."""


class DegenerateInputWarning(UserWarning):
    """Input is valid but excluded by the underlying limit theorem."""


_INF_NAMES = {"inf", "infinity", "+inf", "oo"}


def check_p(p, name="p", allow_inf=False):
    """Return ``p`` as a float, accepting ``math.inf`` (or ``"inf"``) when allowed."""
    if isinstance(p, str):
        if p.strip().lower() in _INF_NAMES:
            p = math.inf
        else:
            try:
                p = float(p)
            except ValueError:
                raise ValueError(f"{name} must be a positive number, got {p!r}") from None
    if not isinstance(p, numbers.Real) or isinstance(p, bool):
        raise ValueError(f"{name} must be a positive number, got {p!r}")
    p = float(p)
    if math.isnan(p) or p <= 0:
        raise ValueError(f"{name} must be positive, got {p}")
    if math.isinf(p) and not allow_inf:
        raise ValueError(f"{name}=inf is not supported here")
    return p


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ValueError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be finite and positive, got {value}")
    return value


def check_int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_finite_scalar(x, name="x"):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    return x


def check_points(points, name="points", min_size=1):
    """Validate a 1-D array of finite reals."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_size:
        raise ValueError(f"{name} needs at least {min_size} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    return arr


def check_rows(values, n=None, name="values"):
    """Validate a 2-D array of eigenvalue tuples, one tuple per row."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[1] != n:
        raise ValueError(f"{name} rows must have length {n}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    return arr


def as_generator(seed):
    """Turn ``None``, an int, a SeedSequence or a Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
