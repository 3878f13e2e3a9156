"""Polynomial phases, correlations, and the constructive degree-1 inverse step."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import field as F
from .errors import DimensionError, DomainError, MalformedDataError, PreconditionError
from .fourier import dft
from .gowers import GridFunction, gowers_norm, omega_of, pla_bound, pla_from_transform, sphere_box2
from .grid import grid_points, points_of
from .polynomials import Poly, monomials
from .quadform import QuadraticForm, SphereSet


class PolyPhase:
    """phi(n) = exp(2 pi i P(tau(n))) with P = sum_m (c_m / p) x^m, c_m in [0, p)."""

    def __init__(self, coeffs, d, p):
        self.p, self.d = F.check_prime(p), int(d)
        self.poly = Poly(coeffs, self.d, self.p)  # numerators mod p
        if self.degree >= self.p:
            raise PreconditionError(f"phase degree {self.degree} must be below p={self.p}")

    @property
    def degree(self):
        return max(self.poly.degree(), 0)

    @property
    def coeffs(self):
        return dict(self.poly.terms)

    @classmethod
    def linear(cls, xi, p):
        xi = np.mod(np.asarray(xi, dtype=np.int64), p)
        return cls({tuple(int(i == t) for i in range(len(xi))): int(c) for t, c in enumerate(xi)}, len(xi), p)

    @classmethod
    def random(cls, s, d, p, rng, homogeneous=False):
        degs = [s] if homogeneous else range(s + 1)
        terms = {m: int(rng.integers(0, p)) for j in degs for m in monomials(d, j)}
        top = monomials(d, s)
        if not any(terms.get(m, 0) for m in top):
            terms[top[0]] = 1
        return cls(terms, d, p)

    def phase_numerators(self, n):
        """p * P(tau(n)) mod p."""
        return self.poly.eval(np.asarray(n, dtype=np.int64))

    def __call__(self, n):
        return np.exp(2j * np.pi * self.phase_numerators(n) / self.p)

    def eval_lift(self, x):
        """exp(2 pi i P(x)) at arbitrary integer points x (not reduced)."""
        lifted = self.poly.lift() * 1
        num = lifted.integer_numerators(np.asarray(x, dtype=np.int64), 1)
        return np.exp(2j * np.pi * (np.asarray(num, dtype=object) % self.p).astype(np.float64) / self.p)

    def grid_function(self) -> GridFunction:
        return GridFunction(self(grid_points(self.p, self.d)), self.p, self.d, bounded=True)

    def to_json(self):
        terms = sorted(([list(m), int(c)] for m, c in self.poly.terms.items()), reverse=True)
        return json.dumps({"p": self.p, "d": self.d, "denominator": self.p, "terms": terms})

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls({tuple(m): c for m, c in doc["terms"]}, doc["d"], doc["p"])


def affine_pullback(phi: PolyPhase, L, c=None) -> PolyPhase:
    """The phase n -> phi(nL + c) on F_p^{d'}, for L a d' x d matrix."""
    p = phi.p
    L = F.as_matrix(L, p)
    dp, d = L.shape
    if d != phi.d:
        raise DimensionError(f"L maps into F_p^{d}, phase lives on F_p^{phi.d}")
    c = np.zeros(d, dtype=np.int64) if c is None else np.mod(np.asarray(c, dtype=np.int64), p)
    subs = [Poly.linear(L[:, i], dp, p) + int(c[i]) for i in range(d)]
    out = Poly.zero(dp, p)
    for m, coef in phi.poly.terms.items():
        term = Poly.const(coef, dp, p)
        for i, e in enumerate(m):
            for _ in range(e):
                term = term * subs[i]
        out = out + term
    return PolyPhase(out.terms, dp, p)


def _values(g, p, d):
    if isinstance(g, PolyPhase):
        return g(grid_points(p, d))
    if isinstance(g, GridFunction):
        return g.values if g.D > 1 else g.scalar
    return np.asarray(g)


def correlate(f: GridFunction, phi, omega=None):
    """E_{n in Omega} f(n) phi(n); a vector for vector-valued f."""
    omega = omega_of(omega, f.p, f.d)
    if isinstance(phi, (PolyPhase, GridFunction)) and (phi.p, phi.d) != (f.p, f.d):
        raise DimensionError("function and phase live on different grids")
    mask = omega.indicator()
    if not mask.any():
        raise DomainError("Omega is empty")
    ph = _values(phi, f.p, f.d)
    if ph.ndim > 1:
        ph = ph[:, 0]
    if f.D == 1:
        return complex(np.mean(f.scalar[mask] * ph[mask]))
    return (f.values[mask] * ph[mask, None]).mean(axis=0)


@dataclass(frozen=True)
class InverseCertificate:
    xi: tuple
    correlation: float
    threshold: float
    p: int
    d: int

    def phase(self) -> PolyPhase:
        """n -> exp(-tau(xi.n)/p), the phase that correlates with f."""
        return PolyPhase.linear(np.mod(-np.asarray(self.xi), self.p), self.p)

    def recompute(self, f: GridFunction, M: QuadraticForm) -> float:
        return abs(correlate(f, self.phase(), SphereSet(M)))

    def to_json(self):
        return json.dumps({"xi": list(self.xi), "correlation": self.correlation,
                           "threshold": self.threshold, "p": self.p, "d": self.d}, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        try:
            return cls(tuple(doc["xi"]), float(doc["correlation"]), float(doc["threshold"]),
                       int(doc["p"]), int(doc["d"]))
        except KeyError as exc:
            raise MalformedDataError(f"certificate lacks {exc}") from None


def u2_sphere(f: GridFunction, M: QuadraticForm) -> float:
    """||f||_{U^2(V(M))} via the additive-quadruple identity."""
    return pla_bound(f, M, force=True).lhs ** 0.25


def sgi1_invert(f: GridFunction, M: QuadraticForm, eps=None, slack: float = 5.0, force: bool = True):
    """Largest Fourier coefficient of 1_{V(M)} f as a correlation certificate.

    The certificate frequency xi satisfies |E_{V(M)} f(n) e(-xi.n/p)| = correlation.
    ``eps`` defaults to the measured U^2(V(M)) norm.  Returns None only when
    the correlation is below (eps/2)^4 (1 - slack p^{-1/2}).
    """
    p, d = f.p, f.d
    if not force and (d < 9 or not M.is_nondegenerate()):
        raise PreconditionError("the guarantee needs d >= 9 and a nondegenerate form")
    mask, box2 = sphere_box2(M)
    size = int(mask.sum())
    if size == 0:
        raise DomainError("V(M) is empty")
    gh = dft(np.where(mask, f.scalar, 0), p, d)
    lhs, _, k = pla_from_transform(gh, box2, p, d)
    corr = float(abs(gh[k])) * p ** d / size
    if eps is None:
        eps = lhs ** 0.25
    thr = (eps / 2) ** 4
    if corr < thr * (1 - slack * p ** -0.5):
        return None
    xi = tuple(int(x) for x in points_of(k, p, d))
    return InverseCertificate(xi, corr, float(thr), p, d)


@dataclass(frozen=True)
class ConverseReport:
    correlation: float
    u_norm: float
    s: int
    rank_restriction: int
    guarantee: bool


def converse_check(f: GridFunction, phi: PolyPhase, omega: SphereSet, s=None, mode="exhaustive",
                   samples=20000, seed=0) -> ConverseReport:
    """(|E_Omega f conj(phi)|, ||f||_{U^{s+1}(Omega)}) for Omega = V(M) cap (V + c)."""
    from .quadform import AffineSubspace, rank_restriction

    s = phi.degree if s is None else s
    corr = abs(correlate(f, np.conj(phi(grid_points(f.p, f.d))), omega))
    nrm = gowers_norm(f, omega, s + 1, mode=mode, samples=samples, seed=seed)
    if mode == "sampled":
        nrm = nrm.value
    S = omega.subspace if omega.subspace is not None else AffineSubspace.full(f.p, f.d)
    r = rank_restriction(omega.form, S)
    return ConverseReport(float(corr), float(nrm), int(s), r, r >= s * s + 3 * s + 5)
