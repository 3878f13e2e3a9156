"""Lexicographic enumeration of F_p^d and resource budgeting.

Points are indexed in C order with the first coordinate most
significant, so index(x) = sum x_i p^(d-1-i).
"""
from __future__ import annotations

import os
import warnings

import numpy as np

from .errors import BudgetError

BUDGET_ENV = "SPHERICAL_GOWERS_MEMORY_BUDGET"
DEFAULT_BUDGET = 1 << 30
WARN_POINTS = 10**8


def memory_budget() -> int:
    """Bytes available to a single dense allocation."""
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(float(raw))
    except ValueError:
        raise ValueError(f"{BUDGET_ENV}={raw!r} is not a byte count") from None


def check_budget(count: int, bytes_per_item: int = 8, what: str = "points") -> None:
    need = int(count) * int(bytes_per_item)
    if need > memory_budget():
        raise BudgetError(
            f"{what}: {count} items need {need} bytes, budget is {memory_budget()}",
            required=int(count),
            unit=what,
        )
    if count > WARN_POINTS:
        warnings.warn(f"enumerating {count} {what}", ResourceWarning, stacklevel=3)


def grid_size(p: int, d: int) -> int:
    return int(p) ** int(d)


def grid_points(p: int, d: int) -> np.ndarray:
    """All of F_p^d as a (p^d, d) int64 array in lexicographic order."""
    n = grid_size(p, d)
    check_budget(n, 8 * max(d, 1))
    if d == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    out = np.empty((n, d), dtype=np.int64)
    for i in range(d - 1, -1, -1):
        out[:, i] = idx % p
        idx //= p
    return out


def index_of(x, p: int) -> np.ndarray:
    """Flat lexicographic index of points (last axis = coordinates)."""
    x = np.mod(np.asarray(x, dtype=np.int64), p)
    d = x.shape[-1]
    weights = p ** np.arange(d - 1, -1, -1, dtype=np.int64)
    return x @ weights


def points_of(idx, p: int, d: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64).copy()
    out = np.empty(idx.shape + (d,), dtype=np.int64)
    for i in range(d - 1, -1, -1):
        out[..., i] = idx % p
        idx //= p
    return out


def add_index(a, b, p: int, d: int) -> np.ndarray:
    """Index of x + y given the indices of x and y."""
    return index_of(points_of(a, p, d) + points_of(b, p, d), p)
