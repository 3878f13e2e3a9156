"""Gowers sets Box_s(Omega), local Gowers norms, and Fourier-assisted counts."""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import field as F
from .errors import BudgetError, DimensionError, DomainError, MalformedDataError, PreconditionError
from .fourier import dft, self_convolution_counts
from .grid import check_budget, grid_points, grid_size, index_of, points_of
from .quadform import AffineSubspace, QuadraticForm, SphereSet

BOUND_TOL = 1e-12
_MAGIC_FMT = "<qqq"


# -- functions on the grid ---------------------------------------------------

class GridFunction:
    """A dense map F_p^d -> C^D, rows in lexicographic order."""

    def __init__(self, values, p, d, bounded=False):
        self.p = F.check_prime(p)
        self.d = int(d)
        a = np.asarray(values, dtype=np.complex128)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2 or a.shape[0] != grid_size(self.p, self.d):
            raise DimensionError(f"need {grid_size(self.p, self.d)} rows of values, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise MalformedDataError("values must be finite")
        self.values = a
        self.values.setflags(write=False)
        self.bounded = bool(bounded)
        if bounded and self.sup_norm() > 1 + BOUND_TOL:
            raise MalformedDataError(f"function flagged 1-bounded has sup norm {self.sup_norm()}")

    @property
    def D(self):
        return self.values.shape[1]

    @property
    def scalar(self) -> np.ndarray:
        if self.D != 1:
            raise DimensionError("operation needs a scalar-valued function")
        return self.values[:, 0]

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=1), initial=0.0))

    def __call__(self, x):
        idx = index_of(x, self.p)
        out = self.values[idx]
        return out[..., 0] if self.D == 1 else out

    @classmethod
    def from_callable(cls, fn, p, d, bounded=False):
        return cls(fn(grid_points(p, d)), p, d, bounded=bounded)

    @classmethod
    def constant(cls, c, p, d):
        return cls(np.full(grid_size(p, d), c, dtype=np.complex128), p, d, bounded=abs(c) <= 1)

    @classmethod
    def character(cls, xi, p, d):
        """n -> e(xi.tau(n)/p)."""
        xi = np.mod(np.asarray(xi, dtype=np.int64), p)
        pts = grid_points(p, d)
        return cls(np.exp(2j * np.pi * ((pts @ xi) % p) / p), p, d, bounded=True)

    def save(self, path) -> None:
        """Binary little-endian: (p, d, D) as int64, then (re, im) float64 pairs."""
        path = Path(path)
        body = np.ascontiguousarray(self.values).view("<f8").astype("<f8", copy=False)
        with open(path, "wb") as fh:
            fh.write(struct.pack(_MAGIC_FMT, self.p, self.d, self.D))
            fh.write(body.tobytes())
        meta = {"p": self.p, "d": self.d, "D": self.D, "entries": int(self.values.shape[0]),
                "bounded": self.bounded, "order": "lexicographic", "dtype": "complex128-le"}
        Path(str(path) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "GridFunction":
        raw = Path(path).read_bytes()
        head = struct.calcsize(_MAGIC_FMT)
        if len(raw) < head:
            raise MalformedDataError(f"{path}: truncated header")
        p, d, D = struct.unpack(_MAGIC_FMT, raw[:head])
        body = np.frombuffer(raw[head:], dtype="<f8")
        if body.size != 2 * D * p ** d:
            raise MalformedDataError(f"{path}: expected {2 * D * p ** d} floats, found {body.size}")
        vals = body.view(np.complex128).reshape(p ** d, D)
        bounded = False
        side = Path(str(path) + ".json")
        if side.exists():
            bounded = bool(json.loads(side.read_text()).get("bounded", False))
        return cls(vals.copy(), p, d, bounded=bounded)


# -- Omega descriptors -------------------------------------------------------

@dataclass(frozen=True)
class FullGrid:
    p: int
    d: int

    def contains(self, x):
        x = np.asarray(x)
        return True if x.ndim == 1 else np.ones(x.shape[:-1], dtype=bool)

    def indicator(self):
        return np.ones(grid_size(self.p, self.d), dtype=bool)

    def points(self):
        return grid_points(self.p, self.d)


class PointSet:
    """An explicit subset of F_p^d."""

    def __init__(self, points, p, d):
        self.p, self.d = F.check_prime(p), int(d)
        pts = np.mod(np.asarray(points, dtype=np.int64).reshape(-1, self.d), self.p)
        idx = np.unique(index_of(pts, self.p))
        self._mask = np.zeros(grid_size(self.p, self.d), dtype=bool)
        self._mask[idx] = True

    def contains(self, x):
        hit = self._mask[index_of(x, self.p)]
        return bool(hit) if np.asarray(x).ndim == 1 else hit

    def indicator(self):
        return self._mask.copy()

    def points(self):
        return points_of(np.flatnonzero(self._mask), self.p, self.d)


def omega_of(spec, p=None, d=None):
    """Accept a descriptor, a QuadraticForm (meaning V(M)) or None (full grid)."""
    if spec is None:
        return FullGrid(p, d)
    if isinstance(spec, QuadraticForm):
        return SphereSet(spec)
    return spec


# -- Box_s -------------------------------------------------------------------

def corner_signs(s: int) -> np.ndarray:
    """(2^s, s) 0/1 matrix; row e holds the bits of e, least significant first."""
    e = np.arange(2 ** s)
    return ((e[:, None] >> np.arange(s)) & 1).astype(np.int64)


def corners(n, hs, p) -> np.ndarray:
    """Corner points n + eps.h for stacked tuples: n (T, d), hs (T, s, d) -> (T, 2^s, d)."""
    n = np.asarray(n, dtype=np.int64)
    hs = np.asarray(hs, dtype=np.int64)
    s = hs.shape[-2]
    eps = corner_signs(s)
    return np.mod(n[..., None, :] + np.einsum("es,...sd->...ed", eps, hs), p)


def box_member(omega, n, hs) -> bool:
    """Whether all 2^s corners of (n, h_1..h_s) lie in Omega."""
    hs = np.asarray(hs, dtype=np.int64).reshape(-1, np.asarray(n).shape[-1])
    pts = corners(np.asarray(n), hs, omega.p)
    return bool(np.all(omega.contains(pts)))


def box_member_sphere(M: QuadraticForm, S: AffineSubspace, n, hs) -> bool:
    """Box_s(V(M) cap (V+c)) membership through the orthogonality characterization."""
    p = M.p
    n = np.mod(np.asarray(n, dtype=np.int64), p)
    hs = np.mod(np.asarray(hs, dtype=np.int64).reshape(-1, M.d), p)
    lin = AffineSubspace(S.basis, np.zeros(M.d, dtype=np.int64), p)
    if not S.contains(n) or not all(lin.contains(h) for h in hs):
        return False
    if M.eval(n) != 0 or any(M.eval(n + h) != 0 for h in hs):
        return False
    s = hs.shape[0]
    return all(M.bilinear(hs[i], hs[j]) == 0 for i in range(s) for j in range(i + 1, s))


def box_tuples(omega, s: int, limit: int | None = None):
    """All of Box_s(Omega) as (n (T, d), hs (T, s, d)), grown one shift at a time."""
    p, d = omega.p, omega.d
    mask = omega.indicator()
    base = np.flatnonzero(mask)
    n = points_of(base, p, d)
    cur = n.reshape(-1, 1, d)  # corners so far
    hs = np.zeros((n.shape[0], 0, d), dtype=np.int64)
    H = grid_points(p, d)
    for _ in range(s):
        T = cur.shape[0]
        need = T * H.shape[0] * cur.shape[1]
        check_budget(need, 8 * d, "box candidates")
        if limit is not None and need > limit:
            raise BudgetError(f"Box enumeration needs {need} corner checks", required=need, unit="corners")
        new = np.mod(cur[:, None, :, :] + H[None, :, None, :], p)  # (T, P, C, d)
        ok = mask[index_of(new, p)].all(axis=2)
        ti, hi = np.nonzero(ok)
        hs = np.concatenate([hs[ti], H[hi][:, None, :]], axis=1)
        cur = np.concatenate([cur[ti], new[ti, hi]], axis=1)
        n = n[ti]
    return n, hs


def _omega_points(omega):
    if isinstance(omega, FullGrid):
        return None
    return omega.points()


def sample_box(omega, s: int, count: int, rng, max_draws: int = 10**9, batch: int = 1 << 18):
    """Uniform samples from Box_s(Omega) by rejection.

    Proposals draw n and every n + h_i uniformly from Omega, which is uniform
    on a superset of Box_s(Omega); the remaining corners are then tested.
    Returns (n, hs, draws, accepted); accepted may exceed ``count`` because
    whole batches are tested.
    """
    p, d = omega.p, omega.d
    pts = _omega_points(omega)
    ns, hss = [], []
    got = draws = 0
    mask = omega.indicator() if grid_size(p, d) <= 10**7 else None
    signs = corner_signs(s).astype(bool)
    rest = [e for e in signs if e.sum() > 1]
    full = list(signs)
    if pts is not None and pts.shape[0] == 0:
        raise DomainError("Omega is empty")
    while got < count:
        if draws >= max_draws:
            raise BudgetError(f"rejection sampler accepted {got} of {count} after {draws} draws",
                              required=count, unit="samples")
        b = min(batch, max_draws - draws)
        if pts is None:
            n = rng.integers(0, p, size=(b, d))
            hs = rng.integers(0, p, size=(b, s, d))
        else:
            sel = rng.integers(0, pts.shape[0], size=(b, s + 1))
            n = pts[sel[:, 0]]
            hs = np.mod(pts[sel[:, 1:]] - n[:, None, :], p)
        draws += b
        ok = np.ones(b, dtype=bool)
        if s > 1 or pts is None:
            # corners with at most one shift are in Omega by construction
            for e in (rest if pts is not None else full):
                c = np.mod(n + hs[:, e].sum(axis=1), p)
                ok &= mask[index_of(c, p)] if mask is not None else omega.contains(c)
        ns.append(n[ok])
        hss.append(hs[ok])
        got += int(ok.sum())
    n = np.concatenate(ns)[:count]
    hs = np.concatenate(hss)[:count]
    return n, hs, draws, got


def box_count(omega, s: int, mode: str = "exhaustive", samples: int = 20000, rng=None):
    """|Box_s(Omega)|.

    ``exhaustive`` and ``fourier`` (s = 2 only) are exact.  ``sampled``
    returns ``BoxEstimate`` with the sample size.
    """
    p, d = omega.p, omega.d
    if mode == "exhaustive":
        return int(box_tuples(omega, s)[0].shape[0])
    if mode == "fourier":
        if s != 2:
            raise PreconditionError("fourier counting is only available for s = 2")
        r = self_convolution_counts(omega.indicator(), p, d)
        return int(np.sum(r * r))
    if mode == "sampled":
        rng = np.random.default_rng(0) if rng is None else rng
        pts = _omega_points(omega)
        base = grid_size(p, d) if pts is None else pts.shape[0]
        if s == 0:
            return BoxEstimate(float(base), 0, 0.0)
        _, _, draws, got = sample_box(omega, s, samples, rng)
        rate = got / draws
        est = base ** (s + 1) * rate
        stderr = base ** (s + 1) * np.sqrt(rate * (1 - rate) / draws)
        return BoxEstimate(float(est), samples, float(stderr))
    raise ValueError(f"unknown counting mode {mode!r}")


@dataclass(frozen=True)
class BoxEstimate:
    estimate: float
    samples: int
    stderr: float


# -- norms -------------------------------------------------------------------

def box_terms(f: GridFunction, n, hs) -> np.ndarray:
    """Per-tuple products prod_eps C^{|eps|} f(n + eps.h) for scalar f."""
    hs = np.asarray(hs, dtype=np.int64)
    s = hs.shape[-2]
    vals = f.scalar[index_of(corners(n, hs, f.p), f.p)]  # (T, 2^s)
    odd = (corner_signs(s).sum(axis=1) % 2).astype(bool)
    vals = np.where(odd, np.conj(vals), vals)
    return np.prod(vals, axis=-1)


def _tensor_terms(f: GridFunction, n, hs) -> np.ndarray:
    hs = np.asarray(hs, dtype=np.int64)
    s = hs.shape[-2]
    vals = f.values[index_of(corners(n, hs, f.p), f.p)]  # (T, 2^s, D)
    odd = (corner_signs(s).sum(axis=1) % 2).astype(bool)
    vals = np.where(odd[None, :, None], np.conj(vals), vals)
    out = vals[:, 0, :]
    for e in range(1, 2 ** s):
        out = np.einsum("ta,tb->tab", out, vals[:, e, :]).reshape(out.shape[0], -1)
    return out


@dataclass(frozen=True)
class GowersEstimate:
    value: float
    stderr: float
    samples: int
    mean: complex


def gowers_average(f: GridFunction, omega, s: int):
    """Exact E_{Box_s(Omega)} of the corner product (a tensor when D > 1)."""
    n, hs = box_tuples(omega, s)
    if n.shape[0] == 0:
        raise DomainError("Box_s(Omega) is empty")
    if f.D == 1:
        return complex(np.mean(box_terms(f, n, hs)))
    return _tensor_terms(f, n, hs).mean(axis=0)


def gowers_norm(f: GridFunction, omega=None, s: int = 2, mode: str = "exhaustive",
                samples: int = 20000, seed: int = 0, rng=None):
    """|E_{Box_s(Omega)} prod C^{|eps|} f(n + eps.h)|^(1/2^s).

    Sampled mode returns a ``GowersEstimate`` computed from uniform Box
    samples; the standard error is propagated through the 2^s-th root.
    """
    omega = omega_of(omega, f.p, f.d)
    if mode == "exhaustive":
        avg = gowers_average(f, omega, s)
        mag = abs(avg) if f.D == 1 else float(np.linalg.norm(avg))
        return float(mag) ** (1.0 / 2 ** s)
    if mode == "sampled":
        rng = np.random.default_rng(seed) if rng is None else rng
        n, hs, _, _ = sample_box(omega, s, samples, rng)
        if f.D == 1:
            t = box_terms(f, n, hs)
            mean = complex(t.mean())
            mag = abs(mean)
            se = float(np.std(t) / np.sqrt(len(t)))
        else:
            t = _tensor_terms(f, n, hs)
            m = t.mean(axis=0)
            mag = float(np.linalg.norm(m))
            mean = complex(m.ravel()[0])
            se = float(np.linalg.norm(t.std(axis=0)) / np.sqrt(len(t)))
        k = 1.0 / 2 ** s
        val = mag ** k
        dval = k * mag ** (k - 1) * se if mag > 0 else se ** k
        return GowersEstimate(float(val), float(dval), int(samples), mean)
    raise ValueError(f"unknown norm mode {mode!r}")


def u2_fourier(f: GridFunction) -> float:
    """(sum_xi |f^(xi)|^4)^(1/4), the U^2 norm on the full grid."""
    fh = dft(f.scalar, f.p, f.d)
    return float(np.sum(np.abs(fh) ** 4)) ** 0.25


def box2_fourier_sum(g, p, d) -> float:
    """sum over additive quadruples of g(a) g(b) conj(g(c) g(d)), = p^{3d} sum |g^|^4."""
    gh = dft(g, p, d)
    return float(p ** (3 * d) * np.sum(np.abs(gh) ** 4))


@dataclass(frozen=True)
class PlaBound:
    lhs: float
    rhs: float
    argmax: tuple
    box2: int

    @property
    def holds(self):
        return self.lhs <= self.rhs


def sup_frequency(gh, tol=1e-12):
    """Index of the largest |gh|, ties broken toward the smallest lexicographic index."""
    mag = np.abs(gh)
    top = mag.max()
    return int(np.flatnonzero(mag >= top - tol)[0])


@lru_cache(maxsize=8)
def sphere_box2(M: QuadraticForm):
    """(indicator of V(M), |Box_2(V(M))|), cached per form."""
    mask = SphereSet(M).indicator()
    r = self_convolution_counts(mask, M.p, M.d)
    mask.setflags(write=False)
    return mask, int(np.sum(r * r))


def pla_from_transform(gh, box2, p, d, slack=3.0):
    """lhs and rhs of the inequality from the transform of g = 1_{V(M)} f."""
    if box2 == 0:
        raise DomainError("Box_2(V(M)) is empty")
    lhs = p ** (3 * d) * float(np.sum(np.abs(gh) ** 4)) / box2
    k = sup_frequency(gh)
    rhs = p * float(np.abs(gh[k])) * (1 + slack * p ** (-1 / 8))
    return lhs, rhs, k


def pla_bound(f: GridFunction, M: QuadraticForm, force: bool = False, slack: float = 3.0) -> PlaBound:
    """Both sides of the U^2(V(M)) versus Fourier-coefficient inequality.

    lhs = ||f||^4_{U^2(V(M))}; rhs = p^{1-d} sup_xi |sum_x g(x) e(-xi.x/p)| (1 + slack p^{-1/8})
    with g = 1_{V(M)} f.
    """
    p, d = f.p, f.d
    if M.d != d:
        raise DimensionError("form and function dimensions differ")
    if not force and (d < 9 or not M.is_nondegenerate()):
        raise PreconditionError("need d >= 9 and a nondegenerate form (pass force=True to override)")
    mask, box2 = sphere_box2(M)
    gh = dft(np.where(mask, f.scalar, 0), p, d)
    lhs, rhs, k = pla_from_transform(gh, box2, p, d, slack)
    return PlaBound(lhs, rhs, tuple(int(x) for x in points_of(k, p, d)), box2)


def box_density(omega, p, d) -> float:
    """|Box_2(Omega)| / p^{3d}."""
    return box_count(omega, 2, "fourier") / p ** (3 * d)
