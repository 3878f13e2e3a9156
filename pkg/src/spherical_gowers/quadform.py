"""Quadratic forms over F_p, affine subspaces, and spheres V(M)^{h_1..h_r}.

Vectors are rows: a form is M(n) = (nA).n + n.u + v with A symmetric.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

import numpy as np

from . import field as F
from .errors import DimensionError, MalformedDataError, PreconditionError
from .grid import check_budget, grid_points, grid_size


def _vec(x, p, d=None):
    a = np.mod(np.asarray(x, dtype=np.int64).ravel(), p)
    if d is not None and a.shape[0] != d:
        raise DimensionError(f"expected a vector of length {d}, got {a.shape[0]}")
    return a


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    A: np.ndarray
    u: np.ndarray
    v: int
    p: int

    def __post_init__(self):
        p = F.check_prime(self.p)
        A = F.as_matrix(self.A, p)
        d = A.shape[0]
        if A.shape != (d, d):
            raise DimensionError(f"A must be square, got {A.shape}")
        if not np.array_equal(A, A.T):
            raise MalformedDataError("A must be symmetric")
        u = _vec(self.u if self.u is not None else np.zeros(d), p, d)
        A.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", int(self.v) % p)
        object.__setattr__(self, "p", p)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @classmethod
    def identity(cls, p, d):
        return cls(np.eye(d, dtype=np.int64), np.zeros(d, dtype=np.int64), 0, p)

    @classmethod
    def random(cls, p, d, rng, nondegenerate=True, pure=True, homogeneous=True):
        for _ in range(F.MAX_DRAWS):
            B = rng.integers(0, p, size=(d, d))
            A = np.mod(B + B.T, p)
            if not nondegenerate or F.rank(A, p) == d:
                break
        else:
            raise PreconditionError(f"no nondegenerate form in {F.MAX_DRAWS} draws")
        u = np.zeros(d, dtype=np.int64) if pure else rng.integers(0, p, size=d)
        v = 0 if homogeneous else int(rng.integers(0, p))
        return cls(A, u, v, p)

    def __eq__(self, other):
        return (isinstance(other, QuadraticForm) and self.p == other.p
                and np.array_equal(self.A, other.A) and np.array_equal(self.u, other.u)
                and self.v == other.v)

    def __hash__(self):
        return hash((self.p, self.A.tobytes(), self.u.tobytes(), self.v))

    def __call__(self, n):
        return self.eval(n)

    def eval(self, n):
        """M(n) for a single point or a stack of points (last axis = d)."""
        x = np.mod(np.asarray(n, dtype=np.int64), self.p)
        if x.shape[-1] != self.d:
            raise DimensionError(f"point has length {x.shape[-1]}, form has d={self.d}")
        p = self.p
        flat = x.reshape(-1, self.d)
        xa = F.matmul_mod(flat, self.A, p)
        q = np.mod((xa * flat) % p, p).sum(axis=-1) % p
        lin = F.matmul_mod(flat, self.u.reshape(-1, 1), p)[:, 0]
        out = (q + lin + self.v) % p
        return int(out[0]) if x.ndim == 1 else out.reshape(x.shape[:-1])

    def bilinear(self, x, y):
        """(xA).y, vectorized over leading axes."""
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        xa = np.mod(x.reshape(-1, self.d), self.p) @ self.A % self.p
        out = (xa * np.mod(y.reshape(-1, self.d), self.p) % self.p).sum(-1) % self.p
        shape = np.broadcast_shapes(x.shape, y.shape)[:-1]
        return int(out[0]) if not shape else out.reshape(shape)

    def rank(self) -> int:
        return F.rank(self.A, self.p)

    def is_nondegenerate(self) -> bool:
        return self.rank() == self.d

    def is_pure(self) -> bool:
        return not self.u.any()

    def is_homogeneous(self) -> bool:
        return self.is_pure() and self.v == 0

    def shifted(self, c):
        """The form n -> M(n + c)."""
        c = _vec(c, self.p, self.d)
        u = np.mod(2 * (c @ self.A) + self.u, self.p)
        return QuadraticForm(self.A, u, self.eval(c), self.p)

    def restrict(self, S: "AffineSubspace", phi=None) -> "QuadraticForm":
        """The form m -> M(m Phi + c) on F_p^r.

        ``phi`` is an r x d matrix whose rows form a basis of V; it defaults
        to the stored basis of ``S``.
        """
        p = self.p
        Phi = S.basis if phi is None else F.as_matrix(phi, p)
        r = S.dim
        if Phi.shape != (r, self.d) or F.rank(Phi, p) != r:
            raise DimensionError("phi must be an injective map onto V")
        if r and F.rank(np.vstack([Phi, S.basis]), p) != r:
            raise DimensionError("phi does not map onto V")
        if r == 0:
            return QuadraticForm(np.zeros((0, 0), dtype=np.int64), np.zeros(0), self.eval(S.offset), p)
        c = S.offset
        A2 = F.matmul_mod(F.matmul_mod(Phi, self.A, p), Phi.T, p)
        u2 = F.matmul_mod(np.mod(2 * F.matmul_mod(c.reshape(1, -1), self.A, p) + self.u, p), Phi.T, p)[0]
        return QuadraticForm(A2, u2, self.eval(c), p)

    def to_text(self) -> str:
        A = "[" + ",".join("[" + ",".join(str(int(x)) for x in row) + "]" for row in self.A) + "]"
        u = "[" + ",".join(str(int(x)) for x in self.u) + "]"
        return f"p={self.p} d={self.d} A={A} u={u} v={self.v}"

    @classmethod
    def from_text(cls, text: str) -> "QuadraticForm":
        fields = dict(re.findall(r"(\w+)=(\[[^ ]*\]|\S+)", text.strip()))
        try:
            p = int(fields["p"])
            d = int(fields["d"])
            A = np.array(_parse_list(fields["A"]), dtype=np.int64).reshape(d, d)
            u = np.array(_parse_list(fields.get("u", "[" + ",".join(["0"] * d) + "]")), dtype=np.int64)
            v = int(fields.get("v", 0))
        except (KeyError, ValueError) as exc:
            raise MalformedDataError(f"cannot parse quadratic form {text!r}: {exc}") from None
        return cls(A, u, v, p)

    def __repr__(self):
        return f"QuadraticForm({self.to_text()})"


def _parse_list(s):
    import json

    return json.loads(s)


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """V + c with V spanned by the rows of ``basis``."""

    basis: np.ndarray
    offset: np.ndarray
    p: int
    _annihilator: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = F.check_prime(self.p)
        c = _vec(self.offset, p)
        B = np.asarray(self.basis, dtype=np.int64)
        B = np.mod(B.reshape(-1, c.shape[0]), p)
        if B.shape[0] and F.rank(B, p) != B.shape[0]:
            raise MalformedDataError("basis vectors are not independent")
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "offset", c)
        object.__setattr__(self, "p", p)
        W = F.null_space(B, p) if B.shape[0] else np.eye(c.shape[0], dtype=np.int64)
        object.__setattr__(self, "_annihilator", W)

    @property
    def d(self):
        return self.offset.shape[0]

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def codim(self):
        return self.d - self.dim

    @classmethod
    def full(cls, p, d):
        return cls(np.eye(d, dtype=np.int64), np.zeros(d, dtype=np.int64), p)

    @classmethod
    def from_equations(cls, W, b, p):
        """{x : W x = b} for a full-row-rank W."""
        W = F.as_matrix(W, p)
        c = F.solve(W, b, p)
        if c is None:
            raise MalformedDataError("inconsistent affine equations")
        return cls(F.null_space(W, p), c, p)

    @classmethod
    def random(cls, p, d, codim, rng, offset=True):
        for _ in range(F.MAX_DRAWS):
            W = rng.integers(0, p, size=(codim, d))
            if F.rank(W, p) == codim:
                break
        else:
            raise PreconditionError(f"no rank-{codim} constraint matrix in {F.MAX_DRAWS} draws")
        c = rng.integers(0, p, size=d) if offset else np.zeros(d, dtype=np.int64)
        return cls(F.null_space(W, p) if codim else np.eye(d, dtype=np.int64), c, p)

    def contains(self, x):
        x = np.mod(np.asarray(x, dtype=np.int64), self.p)
        diff = np.mod(x - self.offset, self.p)
        if self._annihilator.shape[0] == 0:
            return np.ones(x.shape[:-1], dtype=bool) if x.ndim > 1 else True
        res = np.mod(diff @ self._annihilator.T, self.p)
        hit = ~res.any(axis=-1)
        return bool(hit) if x.ndim == 1 else hit

    def points(self) -> np.ndarray:
        r = self.dim
        check_budget(self.p ** r, 8 * self.d)
        coeffs = grid_points(self.p, r)
        if r == 0:
            return self.offset.reshape(1, -1).copy()
        pts = F.matmul_mod(coeffs, self.basis, self.p)
        return np.mod(pts + self.offset, self.p)


def perp(V, M: QuadraticForm) -> np.ndarray:
    """Basis of V^{perp_M} = {n : (mA).n = 0 for all m in V}."""
    B = np.asarray(V, dtype=np.int64).reshape(-1, M.d)
    if B.shape[0] == 0:
        return np.eye(M.d, dtype=np.int64)
    return F.null_space(F.matmul_mod(B, M.A, M.p), M.p)


def rank_restriction(M: QuadraticForm, S) -> int:
    """rank(M|_{V+c}) = dim V - dim(V cap V^{perp_M})."""
    B = S.basis if isinstance(S, AffineSubspace) else np.asarray(S, dtype=np.int64).reshape(-1, M.d)
    r = F.span_dim(B, M.p) if B.size else 0
    if r == 0:
        return 0
    return r - F.intersection_dim(B, perp(B, M), M.p)


def is_isotropic(hs, M: QuadraticForm) -> bool:
    """Whether span(hs) meets its own M-orthogonal complement nontrivially."""
    H = np.asarray(hs, dtype=np.int64).reshape(-1, M.d)
    if H.shape[0] == 0:
        return False
    H = F.row_basis(H, M.p)
    r = H.shape[0]
    if r == 0:
        return False
    G = F.matmul_mod(F.matmul_mod(H, M.A, M.p), H.T, M.p)
    return F.rank(G, M.p) < r


@dataclass(frozen=True, eq=False)
class SphereSet:
    """V(M)^{h_1..h_r}, optionally intersected with an affine subspace."""

    form: QuadraticForm
    shifts: tuple = ()
    subspace: AffineSubspace | None = None

    def __post_init__(self):
        hs = tuple(_vec(h, self.form.p, self.form.d) for h in self.shifts)
        object.__setattr__(self, "shifts", hs)

    @property
    def p(self):
        return self.form.p

    @property
    def d(self):
        return self.form.d

    def contains(self, x):
        x = np.mod(np.asarray(x, dtype=np.int64), self.p)
        ok = self.form.eval(x) == 0
        for h in self.shifts:
            ok = ok & (self.form.eval(x + h) == 0)
        if self.subspace is not None:
            ok = ok & self.subspace.contains(x)
        return bool(ok) if x.ndim == 1 else np.asarray(ok)

    def indicator(self) -> np.ndarray:
        """Boolean mask over F_p^d in lexicographic order."""
        return self.contains(grid_points(self.p, self.d))

    def points(self) -> np.ndarray:
        if self.subspace is not None and self.subspace.dim < self.d:
            pts = self.subspace.points()
            return pts[self.contains(pts)]
        pts = grid_points(self.p, self.d)
        return pts[self.contains(pts)]


def sphere_points(S: SphereSet):
    """Exhaustive point list of S (lexicographic) and its size."""
    pts = S.points()
    if S.subspace is not None and S.subspace.dim < S.d:
        from .grid import index_of

        pts = pts[np.argsort(index_of(pts, S.p), kind="stable")]
    return pts, int(pts.shape[0])


def isotropy_census(M: QuadraticForm, k: int, budget: int | None = None, mode="exhaustive",
                    samples: int = 10000, rng=None):
    """Count k-tuples that are linearly dependent, and that span an isotropic subspace.

    Exhaustive mode returns exact counts over (F_p^d)^k.  Sampled mode returns
    estimates of the same totals scaled from ``samples`` uniform tuples.
    """
    p, d = M.p, M.d
    total = grid_size(p, d * k)
    if mode == "exhaustive":
        limit = budget if budget is not None else 10**7
        if total > limit:
            from .errors import BudgetError

            raise BudgetError(f"{total} tuples exceed the census budget {limit}", required=total, unit="tuples")
        tuples = (np.array(t, dtype=np.int64).reshape(k, d)
                  for t in itertools.product(range(p), repeat=d * k))
        n = total
    elif mode == "sampled":
        if rng is None:
            rng = np.random.default_rng(0)
        tuples = (rng.integers(0, p, size=(k, d)) for _ in range(samples))
        n = samples
    else:
        raise ValueError(f"unknown census mode {mode!r}")
    dep = iso = 0
    for H in tuples:
        if F.rank(H, p) < k:
            dep += 1
        if is_isotropic(H, M):
            iso += 1
    if mode == "sampled":
        return dep * total / n, iso * total / n
    return dep, iso
