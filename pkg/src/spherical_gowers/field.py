"""Exact arithmetic over F_p and linear algebra on numpy integer arrays.

Vectors and matrices over F_p are plain ``numpy.int64`` arrays whose
entries lie in ``[0, p)``.  Every function takes ``p`` explicitly and
returns fresh arrays; inputs are never modified.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Integral, Rational

import numpy as np

from .errors import DimensionError, PreconditionError

MAX_PRIME = 2**31

_MR_BASES = (2, 3, 5, 7, 11, 13, 17)


@lru_cache(maxsize=1024)
def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.4e14."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    r, s = n - 1, 0
    while r % 2 == 0:
        r //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, r, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def check_prime(p) -> int:
    p = int(p)
    if not (2 < p < MAX_PRIME) or not is_prime(p):
        raise ValueError(f"p={p} must be an odd prime below 2^31")
    return p


@dataclass(frozen=True)
class Prime:
    p: int

    def __post_init__(self):
        object.__setattr__(self, "p", check_prime(self.p))

    def __int__(self):
        return self.p

    def __index__(self):
        return self.p


@dataclass(frozen=True)
class Fp:
    """A single element of F_p."""

    value: int
    p: int

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "value", int(self.value) % self.p)

    def _coerce(self, other):
        if isinstance(other, Fp):
            if other.p != self.p:
                raise DimensionError("elements of different fields")
            return other.value
        if isinstance(other, Integral):
            return int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Fp(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Fp(self.value - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Fp(o - self.value, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Fp(self.value * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return Fp(-self.value, self.p)

    def inv(self) -> "Fp":
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in F_p")
        return Fp(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * Fp(o, self.p).inv()

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        return Fp(pow(self.value, e, self.p), self.p)

    def __int__(self):
        return self.value

    def tau(self) -> int:
        return self.value


def inv_mod(a: int, p: int) -> int:
    a = int(a) % p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, -1, p)


def iota(x, p: int):
    """Reduce integers, p-integral rationals, or integer arrays into F_p.

    ``iota(x/y) = x * y^{-1} mod p`` for ``p`` not dividing ``y``.
    """
    if isinstance(x, np.ndarray):
        if x.dtype == object:
            return np.array([iota(v, p) for v in x.ravel()], dtype=np.int64).reshape(x.shape)
        return np.mod(x, p).astype(np.int64)
    if isinstance(x, Fp):
        return x.value
    if isinstance(x, Integral):
        return int(x) % p
    if isinstance(x, Rational):
        q = Fraction(x)
        if q.denominator % p == 0:
            raise ZeroDivisionError(f"{q} is not p-integral for p={p}")
        return q.numerator * pow(q.denominator, -1, p) % p
    if isinstance(x, (list, tuple)):
        return np.array([iota(v, p) for v in x], dtype=np.int64)
    raise TypeError(f"cannot reduce {type(x).__name__} into F_{p}")


def tau(x, p: int) -> np.ndarray:
    """The representative map F_p^k -> {0, ..., p-1}^k."""
    return np.mod(np.asarray(x, dtype=np.int64), p)


def as_matrix(A, p: int) -> np.ndarray:
    M = np.asarray(A)
    if M.dtype == object:
        M = iota(M, p)
    M = np.mod(M.astype(np.int64), p)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {M.shape}")
    return M


def _safe_int64(inner: int, p: int) -> bool:
    return inner * (p - 1) ** 2 < 2**62


def matmul_mod(X, Y, p: int) -> np.ndarray:
    """``X @ Y mod p`` without int64 overflow."""
    X = np.asarray(X, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64)
    if X.shape[-1] != Y.shape[0]:
        raise DimensionError(f"cannot multiply {X.shape} by {Y.shape}")
    if _safe_int64(max(X.shape[-1], 1), p):
        return np.mod(X @ Y, p)
    out = np.mod(X.astype(object) @ Y.astype(object), p)
    return out.astype(np.int64)


def rref(A, p: int):
    """Reduced row echelon form over F_p.

    Returns ``(R, rank, pivots)``; pivots are chosen as the first nonzero
    entry in scan order, so the result is deterministic.
    """
    R = as_matrix(A, p).copy()
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        R[r] = R[r] * inv_mod(R[r, c], p) % p
        col = R[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            R[hit] = np.mod(R[hit] - np.outer(col[hit], R[r]), p)
        pivots.append(c)
        r += 1
    return R, r, tuple(pivots)


def rank(A, p: int) -> int:
    M = as_matrix(A, p)
    if M.size == 0:
        return 0
    return rref(M, p)[1]


def row_basis(A, p: int) -> np.ndarray:
    """Nonzero rows of the RREF: a canonical basis of the row space."""
    M = as_matrix(A, p)
    if M.shape[0] == 0:
        return M.reshape(0, M.shape[1])
    R, r, _ = rref(M, p)
    return R[:r]


def null_space(A, p: int) -> np.ndarray:
    """Basis of ``{x : A x = 0}`` as the rows of a ``(cols - rank, cols)`` array."""
    M = as_matrix(A, p)
    cols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    R, r, pivots = rref(M, p)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for i, pc in enumerate(pivots):
            basis[t, pc] = (-R[i, f]) % p
    return basis


def solve(A, b, p: int):
    """Some ``x`` with ``A x = b``, or ``None`` if the system is inconsistent.

    Free variables are set to zero.
    """
    M = as_matrix(A, p)
    rhs = np.mod(np.asarray(b, dtype=np.int64).ravel(), p)
    if rhs.shape[0] != M.shape[0]:
        raise DimensionError(f"A has {M.shape[0]} rows but b has length {rhs.shape[0]}")
    cols = M.shape[1]
    if M.shape[0] == 0:
        return np.zeros(cols, dtype=np.int64)
    R, r, pivots = rref(np.hstack([M, rhs.reshape(-1, 1)]), p)
    if pivots and pivots[-1] == cols:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = R[i, cols]
    return x


def inverse(A, p: int) -> np.ndarray:
    M = as_matrix(A, p)
    n = M.shape[0]
    if M.shape != (n, n):
        raise DimensionError("only square matrices are invertible")
    R, r, pivots = rref(np.hstack([M, np.eye(n, dtype=np.int64)]), p)
    if r < n or pivots[n - 1] != n - 1:
        raise ZeroDivisionError("matrix is singular over F_p")
    return R[:, n:].copy()


def span_dim(vectors, p: int) -> int:
    V = np.asarray(vectors, dtype=np.int64)
    if V.size == 0:
        return 0
    return rank(V.reshape(-1, V.shape[-1]), p)


def intersection_dim(U, W, p: int) -> int:
    """dim(span U ∩ span W) from dim U + dim W - dim(U + W)."""
    U = np.asarray(U, dtype=np.int64)
    W = np.asarray(W, dtype=np.int64)
    du = span_dim(U, p) if U.size else 0
    dw = span_dim(W, p) if W.size else 0
    if du == 0 or dw == 0:
        return 0
    return du + dw - rank(np.vstack([U.reshape(-1, U.shape[-1]), W.reshape(-1, W.shape[-1])]), p)


MAX_DRAWS = 10000  # rejection loops give up after this many proposals


def random_invertible(n: int, p: int, rng) -> np.ndarray:
    for _ in range(MAX_DRAWS):
        M = rng.integers(0, p, size=(n, n))
        if rank(M, p) == n:
            return M.astype(np.int64)
    raise PreconditionError(f"no invertible {n}x{n} matrix in {MAX_DRAWS} draws; rank computation suspect")
