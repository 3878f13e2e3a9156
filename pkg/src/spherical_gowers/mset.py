"""M-integral quadratic functions, M-families and M-sets on (F_p^d)^k.

A function on k blocks of variables n_1..n_k is

    F = sum_{i<=j} b_ij (n_i A).n_j + sum_i v_i.n_i + u

and is stored by its coefficients.  Blocks are 0-based in code; the text
and JSON formats use 1-based block labels.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import field as F
from .errors import BudgetError, DimensionError, DomainError, MalformedDataError, PreconditionError
from .fourier import dft, idft
from .grid import check_budget, grid_points, grid_size, index_of
from .quadform import QuadraticForm, SphereSet


@dataclass(frozen=True, eq=False)
class MQuadratic:
    b: np.ndarray  # (k, k), upper triangular
    v: np.ndarray  # (k, d)
    u: int
    p: int

    def __post_init__(self):
        p = self.p
        b = np.mod(np.asarray(self.b, dtype=np.int64), p)
        v = np.mod(np.asarray(self.v, dtype=np.int64), p)
        k = b.shape[0]
        if b.shape != (k, k) or v.ndim != 2 or v.shape[0] != k:
            raise DimensionError(f"inconsistent coefficient shapes {b.shape}, {v.shape}")
        if np.tril(b, -1).any():
            raise MalformedDataError("b must be upper triangular (i <= j)")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "u", int(self.u) % p)

    @property
    def k(self):
        return self.b.shape[0]

    @property
    def d(self):
        return self.v.shape[1]

    @classmethod
    def zero(cls, k, d, p):
        return cls(np.zeros((k, k), dtype=np.int64), np.zeros((k, d), dtype=np.int64), 0, p)

    @classmethod
    def of_form(cls, M: QuadraticForm, c, k=None):
        """n -> M(sum_i c_i n_i) as a (M, k)-integral function."""
        p = M.p
        c = np.mod(np.asarray(c, dtype=np.int64), p)
        k = len(c) if k is None else k
        b = np.zeros((k, k), dtype=np.int64)
        for i in range(k):
            b[i, i] = c[i] * c[i] % p
            for j in range(i + 1, k):
                b[i, j] = 2 * c[i] * c[j] % p
        v = np.mod(np.outer(c, M.u), p)
        return cls(b, v, M.v, p)

    def __add__(self, other):
        return MQuadratic(self.b + other.b, self.v + other.v, self.u + other.u, self.p)

    def __sub__(self, other):
        return MQuadratic(self.b - other.b, self.v - other.v, self.u - other.u, self.p)

    def scale(self, c):
        return MQuadratic(self.b * c, self.v * c, self.u * c, self.p)

    def __eq__(self, other):
        return (isinstance(other, MQuadratic) and self.p == other.p and np.array_equal(self.b, other.b)
                and np.array_equal(self.v, other.v) and self.u == other.u)

    def is_pure(self):
        return not self.v.any()

    def is_nice(self):
        """sum_{i<=k'} b_i (n_k' A).n_i + u for a single k'."""
        if self.v.any():
            return False
        rows, cols = np.nonzero(self.b)
        if rows.size == 0:
            return True
        top = cols.max()
        return bool(np.all(cols == top))

    def depends_on(self):
        """Sorted block indices with a nonzero coefficient."""
        used = set(np.flatnonzero(self.v.any(axis=1)).tolist())
        rows, cols = np.nonzero(self.b)
        used.update(rows.tolist())
        used.update(cols.tolist())
        return tuple(sorted(used))

    def eval(self, x, A):
        """x has shape (..., k, d)."""
        p = self.p
        x = np.mod(np.asarray(x, dtype=np.int64), p)
        xa = np.mod(x @ np.asarray(A, dtype=np.int64), p)
        out = np.full(x.shape[:-2], self.u, dtype=np.int64)
        for i in range(self.k):
            for j in range(i, self.k):
                if self.b[i, j]:
                    g = (xa[..., i, :] * x[..., j, :] % p).sum(-1) % p
                    out = (out + self.b[i, j] * g) % p
            if self.v[i].any():
                out = (out + (x[..., i, :] * self.v[i] % p).sum(-1)) % p
        return out

    def vector(self):
        """v_M(F): per block i = k..1, (b_ii, b_i,i-1, ..., b_i1, v_i); then u."""
        parts = []
        for i in range(self.k - 1, -1, -1):
            parts.append([self.b[min(i, j), max(i, j)] for j in range(i, -1, -1)])
            parts.append(self.v[i])
        parts.append([self.u])
        return np.concatenate([np.asarray(q, dtype=np.int64) for q in parts])

    @classmethod
    def from_vector(cls, vec, k, d, p):
        vec = np.mod(np.asarray(vec, dtype=np.int64), p)
        b = np.zeros((k, k), dtype=np.int64)
        v = np.zeros((k, d), dtype=np.int64)
        pos = 0
        for i in range(k - 1, -1, -1):
            for j in range(i, -1, -1):
                b[j, i] = vec[pos]
                pos += 1
            v[i] = vec[pos:pos + d]
            pos += d
        return cls(b, v, int(vec[pos]), p)

    def substitute(self, blocks, values, A):
        """Fix the listed blocks to ``values``; returns a function of the remaining blocks."""
        p = self.p
        blocks = list(blocks)
        rest = [i for i in range(self.k) if i not in blocks]
        val = {i: np.mod(np.asarray(values[t], dtype=np.int64), p) for t, i in enumerate(blocks)}
        A = np.asarray(A, dtype=np.int64)
        pos = {i: t for t, i in enumerate(rest)}
        b = np.zeros((len(rest), len(rest)), dtype=np.int64)
        v = np.zeros((len(rest), self.d), dtype=np.int64)
        u = self.u
        for i in range(self.k):
            for j in range(i, self.k):
                c = self.b[i, j]
                if not c:
                    continue
                if i in val and j in val:
                    u += c * int((val[i] @ A % p) @ val[j] % p)
                elif i in val:
                    v[pos[j]] += c * (val[i] @ A % p)
                elif j in val:
                    v[pos[i]] += c * (val[j] @ A % p)
                else:
                    b[pos[i], pos[j]] += c
        for i in range(self.k):
            if i in val:
                u += int(self.v[i] @ val[i] % p)
            else:
                v[pos[i]] += self.v[i]
        return MQuadratic(b % p, v % p, u % p, p)

    def to_dict(self):
        bd = {f"{i + 1},{j + 1}": int(self.b[i, j]) for i in range(self.k)
              for j in range(i, self.k) if self.b[i, j]}
        return {"b": bd, "v": self.v.tolist(), "u": self.u}


def _vec_len(k, d):
    return k * (k + 1) // 2 + k * d + 1


def _block_slices(k, d):
    """Column ranges of v_M for each block (0-based block index)."""
    out = {}
    pos = 0
    for i in range(k - 1, -1, -1):
        out[i] = (pos, pos + i + 1 + d)
        pos += i + 1 + d
    return out


def _columns_touching(k, d, blocks):
    """v_M columns whose coefficient involves at least one of ``blocks``."""
    blocks = set(blocks)
    cols = []
    pos = 0
    for i in range(k - 1, -1, -1):
        for j in range(i, -1, -1):
            if i in blocks or j in blocks:
                cols.append(pos)
            pos += 1
        if i in blocks:
            cols.extend(range(pos, pos + d))
        pos += d
    return cols


@dataclass(frozen=True)
class FamilyFlags:
    consistent: bool
    independent: bool
    dimension: int


class MFamily:
    """A list of (M, k)-integral quadratics sharing the form M and block count k."""

    def __init__(self, M: QuadraticForm, k: int, functions=()):
        self.M = M
        self.k = int(k)
        self.p, self.d = M.p, M.d
        fs = list(functions)
        for f in fs:
            if f.k != self.k or f.d != self.d or f.p != self.p:
                raise DimensionError("family members must share (p, d, k)")
        self.functions = tuple(fs)
        self._vm = None

    def __len__(self):
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    @property
    def A(self):
        return self.M.A

    def v_matrix(self) -> np.ndarray:
        if self._vm is None:
            L = _vec_len(self.k, self.d)
            rows = [f.vector() for f in self.functions]
            self._vm = np.array(rows, dtype=np.int64).reshape(-1, L)
        return self._vm

    def vprime_matrix(self) -> np.ndarray:
        return self.v_matrix()[:, :-1]

    def flags(self) -> FamilyFlags:
        V = self.v_matrix()
        if V.shape[0] == 0:
            return FamilyFlags(True, True, 0)
        p = self.p
        dim = F.rank(V[:, :-1], p)
        e = np.zeros((1, V.shape[1]), dtype=np.int64)
        e[0, -1] = 1
        consistent = F.rank(np.vstack([V, e]), p) > F.rank(V, p)
        return FamilyFlags(bool(consistent), dim == V.shape[0], dim)

    def is_pure(self):
        return all(f.is_pure() for f in self.functions)

    def eval(self, x) -> np.ndarray:
        """All member values at x (..., k, d) -> (..., r)."""
        x = np.asarray(x, dtype=np.int64)
        if not self.functions:
            return np.zeros(x.shape[:-2] + (0,), dtype=np.int64)
        return np.stack([f.eval(x, self.A) for f in self.functions], axis=-1)

    def _from_rows(self, rows):
        return MFamily(self.M, self.k, [MQuadratic.from_vector(r, self.k, self.d, self.p) for r in rows])

    def block_of(self, f: MQuadratic) -> int:
        """Largest block index f depends on (-1 for constants)."""
        dep = f.depends_on()
        return dep[-1] if dep else -1

    def standard_representation(self):
        """(RREF family, dimension vector (r_1..r_k))."""
        fl = self.flags()
        if not fl.independent:
            raise PreconditionError("standard representation needs an independent family")
        red = self._from_rows(F.row_basis(self.v_matrix(), self.p)) if len(self) else MFamily(self.M, self.k)
        dims = [0] * self.k
        for f in red:
            dims[self.block_of(f)] += 1
        return red, tuple(dims)

    def independent_subfamily(self):
        """Greedy maximal subfamily with independent v'_M rows."""
        keep, cur = [], np.zeros((0, _vec_len(self.k, self.d) - 1), dtype=np.int64)
        for f, row in zip(self.functions, self.vprime_matrix()):
            trial = np.vstack([cur, row])
            if F.rank(trial, self.p) > cur.shape[0]:
                keep.append(f)
                cur = trial
        return MFamily(self.M, self.k, keep)

    def total_codimension(self) -> int:
        if not self.flags().consistent:
            raise PreconditionError("total co-dimension is defined for consistent families only")
        return len(self.independent_subfamily())

    def i_decomposition(self, I):
        """(J', J''): J' spans the I-only part of span(J); J'' completes a basis."""
        I = sorted(set(int(i) for i in I))
        if any(i < 0 or i >= self.k for i in I):
            raise DimensionError(f"block indices {I} out of range for k={self.k}")
        V = self.v_matrix()
        p = self.p
        if V.shape[0] == 0:
            return MFamily(self.M, self.k), MFamily(self.M, self.k)
        out_blocks = [i for i in range(self.k) if i not in I]
        cols = _columns_touching(self.k, self.d, out_blocks)
        if cols:
            N = F.null_space(V[:, cols].T, p)
            Jp = F.row_basis(F.matmul_mod(N, V, p), p) if N.shape[0] else np.zeros((0, V.shape[1]), dtype=np.int64)
        else:
            Jp = F.row_basis(V, p)
        basis = Jp.copy()
        extra = []
        for row in V:
            trial = np.vstack([basis, row])
            if F.rank(trial, p) > basis.shape[0]:
                basis = trial
                extra.append(row)
        return self._from_rows(Jp), self._from_rows(extra)

    def compose(self, L, shift=None) -> "MFamily":
        """Family of F(L(x) + shift) for a d-integral map L (k x k over F_p)."""
        p, k, d = self.p, self.k, self.d
        L = F.as_matrix(L, p)
        if L.shape != (k, k):
            raise DimensionError(f"L must be {k}x{k}")
        c = np.zeros((k, d), dtype=np.int64) if shift is None else np.mod(np.asarray(shift, dtype=np.int64).reshape(k, d), p)
        A = self.A
        inv2 = F.inv_mod(2, p)
        out = []
        for f in self.functions:
            B = np.zeros((k, k), dtype=np.int64)
            for i in range(k):
                B[i, i] = f.b[i, i]
                for j in range(i + 1, k):
                    B[i, j] = B[j, i] = f.b[i, j] * inv2 % p
            B2 = F.matmul_mod(F.matmul_mod(L.T, B, p), L, p)
            b = np.zeros((k, k), dtype=np.int64)
            for i in range(k):
                b[i, i] = B2[i, i]
                for j in range(i + 1, k):
                    b[i, j] = 2 * B2[i, j] % p
            cA = F.matmul_mod(c, A, p)  # (k, d)
            w = np.mod(2 * F.matmul_mod(B, cA, p) + f.v, p)  # coefficient of y_i
            v = F.matmul_mod(L.T, w, p)
            u = int(f.eval(c, A))
            out.append(MQuadratic(b, v, u, p))
        return MFamily(self.M, k, out)

    def to_json(self) -> str:
        doc = {"p": self.p, "d": self.d, "k": self.k, "A": self.A.tolist(),
               "u_form": self.M.u.tolist(), "v_form": self.M.v,
               "functions": [f.to_dict() for f in self.functions]}
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text) -> "MFamily":
        try:
            doc = json.loads(text) if isinstance(text, str) else text
            p, d, k = int(doc["p"]), int(doc["d"]), int(doc["k"])
            M = QuadraticForm(np.array(doc["A"], dtype=np.int64), doc.get("u_form", [0] * d),
                              doc.get("v_form", 0), p)
            fs = []
            for t, item in enumerate(doc["functions"]):
                b = np.zeros((k, k), dtype=np.int64)
                for key, val in item.get("b", {}).items():
                    i, j = (int(s) - 1 for s in key.split(","))
                    if i > j:
                        i, j = j, i
                    b[i, j] = val
                v = np.array(item.get("v", [[0] * d] * k), dtype=np.int64).reshape(k, d)
                fs.append(MQuadratic(b, v, item.get("u", 0), p))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedDataError(f"bad M-family document: {exc}") from None
        return cls(M, k, fs)


def box_family(M: QuadraticForm, s: int) -> MFamily:
    """Box_s(V(M)) as an (M, s+1)-family in (n, h_1..h_s): M(n + sum_{i in S} h_i)."""
    k = s + 1
    fs = []
    for S in itertools.product((0, 1), repeat=s):
        c = (1,) + S
        fs.append(MQuadratic.of_form(M, c, k))
    return MFamily(M, k, fs)


def box_codimension(s: int) -> int:
    return (s * s + s + 2) // 2


# -- M-sets ------------------------------------------------------------------

class MSet:
    def __init__(self, family: MFamily):
        self.family = family
        self.k, self.d, self.p = family.k, family.d, family.p

    def contains(self, x):
        vals = self.family.eval(x)
        return ~vals.any(axis=-1)

    def total_codimension(self):
        return self.family.total_codimension()

    def iter_points(self, chunk=1 << 20):
        """Points of Omega in lexicographic order over (F_p^d)^k, by chunks."""
        N = grid_size(self.p, self.d * self.k)
        kd = self.k * self.d
        for start in range(0, N, chunk):
            idx = np.arange(start, min(N, start + chunk), dtype=np.int64)
            pts = np.empty((idx.size, kd), dtype=np.int64)
            for t in range(kd - 1, -1, -1):
                pts[:, t] = idx % self.p
                idx //= self.p
            pts = pts.reshape(-1, self.k, self.d)
            yield pts[self.contains(pts)]

    def points(self, budget=None):
        N = grid_size(self.p, self.d * self.k)
        if budget is not None and N > budget:
            raise BudgetError(f"enumerating {N} points exceeds {budget}", required=N, unit="points")
        check_budget(N, 1, "M-set candidates")
        return np.concatenate(list(self.iter_points()) or [np.zeros((0, self.k, self.d), dtype=np.int64)])

    def count(self):
        return int(sum(c.shape[0] for c in self.iter_points()))

    def projection_and_fibers(self, I):
        """(Omega_I, fiber) where fiber(x_I) is the M-set of the remaining blocks."""
        I = sorted(set(I))
        rest = [i for i in range(self.k) if i not in I]
        Jp, Jpp = self.family.i_decomposition(I)
        zero = np.zeros((len(rest), self.d), dtype=np.int64)
        proj = MFamily(self.family.M, len(I), [f.substitute(rest, zero, self.family.A) for f in Jp])
        A = self.family.A

        def fiber(xI):
            xI = np.asarray(xI, dtype=np.int64).reshape(len(I), self.d)
            return MSet(MFamily(self.family.M, len(rest), [f.substitute(I, xI, A) for f in Jpp]))

        return MSet(proj), fiber


@dataclass(frozen=True)
class FubiniReport:
    flat: float
    iterated: float
    discrepancy: float
    points: int
    projected: int
    empty_fibers: int


def _as_exact(vals):
    vals = np.asarray(vals)
    return np.issubdtype(vals.dtype, np.integer)


def fubini_check(f, omega: MSet, I, budget=None) -> FubiniReport:
    """|E_Omega f - E_{x_I in Omega_I} E_{fiber(x_I)} f|, by enumeration.

    ``f`` maps arrays of shape (T, k, d) to T values.  Integer-valued f is
    averaged exactly with rationals.
    """
    I = sorted(set(I))
    rest = [i for i in range(omega.k) if i not in I]
    proj, fiber = omega.projection_and_fibers(I)
    total = 0
    count = 0
    it_sum = Fraction(0)
    it_float = 0.0
    nproj = 0
    empty = 0
    exact = None
    for xI in proj.points(budget):
        nproj += 1
        fib = fiber(xI).points(budget).reshape(-1, len(rest), omega.d) if rest else np.zeros((1, 0, omega.d), dtype=np.int64)
        if fib.shape[0] == 0:
            empty += 1
            continue
        x = np.zeros((fib.shape[0], omega.k, omega.d), dtype=np.int64)
        x[:, I] = xI
        x[:, rest] = fib
        vals = np.asarray(f(x))
        if exact is None:
            exact = _as_exact(vals)
        s = int(vals.sum()) if exact else complex(vals.sum())
        total += s
        count += fib.shape[0]
        if exact:
            it_sum += Fraction(s, fib.shape[0])
        else:
            it_float += s / fib.shape[0]
    if count == 0 or nproj == 0:
        raise DomainError("Omega is empty")
    if exact:
        flat = Fraction(total, count)
        itr = it_sum / nproj
        return FubiniReport(float(flat), float(itr), float(abs(flat - itr)), count, nproj, empty)
    flat = total / count
    itr = it_float / nproj
    return FubiniReport(abs(flat), abs(itr), float(abs(flat - itr)), count, nproj, empty)


class ProductTestFunction:
    """f(n, h) = a(n) b(h) c(n + h) on (F_p^d)^2 with +-1 tables a, b, c."""

    def __init__(self, a, b, c, p, d):
        self.p, self.d = p, d
        self.a, self.b, self.c = (np.asarray(t, dtype=np.int64) for t in (a, b, c))

    @classmethod
    def random(cls, p, d, rng):
        N = grid_size(p, d)
        return cls(*(rng.choice(np.array([-1, 1]), size=N) for _ in range(3)), p, d)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.int64)
        n, h = x[..., 0, :], x[..., 1, :]
        p = self.p
        return self.a[index_of(n, p)] * self.b[index_of(h, p)] * self.c[index_of(n + h, p)]


def fubini_box1_product(f: ProductTestFunction, M: QuadraticForm) -> FubiniReport:
    """Fubini check on Box_1(V(M)) with I = {n} for product test functions.

    The fiber over n in V(M) is {h : M(n+h) = 0}, so the inner sums
    S(n) = sum_{m in V(M)} b(m - n) c(m) form a correlation computed with
    one transform pair.  Fiber sizes come from the same correlation with
    b = c = 1.  All sums are exact integers.
    """
    p, d = M.p, M.d
    mask = SphereSet(M).indicator()
    N = grid_size(p, d)
    neg = index_of(-grid_points(p, d), p)

    def corr(bvals, cvals):
        # sum_m b(m - n) c(m) is the convolution of c with x -> b(-x)
        br = np.asarray(bvals, dtype=np.float64)[neg]
        raw = idft(dft(br, p, d) * dft(np.asarray(cvals, dtype=np.float64), p, d), p, d).real * N
        out = np.rint(raw)
        if np.max(np.abs(raw - out), initial=0.0) > 1e-3:
            raise ArithmeticError("fiber correlation lost integrality")
        return out.astype(np.int64)

    S = corr(f.b, f.c * mask)
    sizes = corr(np.ones(N), mask.astype(np.float64))
    on = np.flatnonzero(mask)
    if on.size == 0:
        raise DomainError("V(M) is empty")
    fib = sizes[on]
    num = f.a[on] * S[on]
    total = int(num.sum())
    count = int(fib.sum())
    nz = fib > 0
    it = sum((Fraction(int(a), int(b)) for a, b in zip(num[nz], fib[nz])), Fraction(0)) / on.size
    flat = Fraction(total, count)
    return FubiniReport(float(flat), float(it), float(abs(flat - it)), count, int(on.size), int((~nz).sum()))


def fiber_census(omega: MSet, I, budget=None):
    """Fiber sizes over every point of Omega_I (Counter-like dict size -> multiplicity)."""
    proj, fiber = omega.projection_and_fibers(I)
    sizes = {}
    for xI in proj.points(budget):
        n = fiber(xI).count()
        sizes[n] = sizes.get(n, 0) + 1
    return dict(sorted(sizes.items()))
