"""Strings, M-ideal membership and reducibility of (1/p)Z-coefficient polynomials."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import field as F
from .errors import BudgetError, DimensionError, MalformedDataError, PreconditionError
from .gowers import box_tuples, corner_signs, sample_box
from .polynomials import Poly, mfact, monomials
from .quadform import QuadraticForm, is_isotropic

SEARCH_BUDGET = 10**6


# -- strings -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HString:
    """A (j, d, p)-string: xi_m = num_m / p for |m| = j, monomials in descending lex order."""

    nums: tuple
    j: int
    d: int
    p: int

    def __post_init__(self):
        F.check_prime(self.p)
        nums = tuple(int(x) % self.p for x in self.nums)
        if len(nums) != len(monomials(self.d, self.j)):
            raise DimensionError(f"a ({self.j},{self.d})-string has {len(monomials(self.d, self.j))} entries")
        object.__setattr__(self, "nums", nums)

    @classmethod
    def random(cls, j, d, p, rng):
        return cls(tuple(rng.integers(0, p, size=len(monomials(d, j)))), j, d, p)

    @classmethod
    def zero(cls, j, d, p):
        return cls((0,) * len(monomials(d, j)), j, d, p)

    @property
    def xi(self):
        return tuple(Fraction(x, self.p) for x in self.nums)

    def __add__(self, other):
        return HString(tuple(a + b for a, b in zip(self.nums, other.nums)), self.j, self.d, self.p)

    def __sub__(self, other):
        return HString(tuple(a - b for a, b in zip(self.nums, other.nums)), self.j, self.d, self.p)

    def scale(self, c):
        return HString(tuple(int(c) * a for a in self.nums), self.j, self.d, self.p)

    def __eq__(self, other):
        return isinstance(other, HString) and (self.nums, self.j, self.d, self.p) == (other.nums, other.j, other.d, other.p)

    def __hash__(self):
        return hash((self.nums, self.j, self.d, self.p))

    def to_json(self):
        return json.dumps({"p": self.p, "d": self.d, "j": self.j, "xi": list(self.nums)})

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text) if isinstance(text, str) else text
        return cls(tuple(doc["xi"]), int(doc["j"]), int(doc["d"]), int(doc["p"]))


@dataclass(frozen=True)
class Tower:
    """Floors F_1..F_s; floor j holds degree-j strings."""

    floors: tuple

    def __post_init__(self):
        for j, floor in enumerate(self.floors, start=1):
            if any(s.j != j for s in floor):
                raise MalformedDataError(f"floor {j} holds a string of the wrong degree")

    @property
    def dims(self):
        return tuple(len(f) for f in self.floors)


def string_to_poly(xi: HString) -> Poly:
    """f(n) = sum (m!)^* xi_m n^m with (m!)^* in {1..p-1}."""
    if xi.j >= xi.p:
        raise PreconditionError(f"string degree j={xi.j} must be below p={xi.p}")
    terms = {}
    for m, a in zip(monomials(xi.d, xi.j), xi.nums):
        if a:
            terms[m] = Fraction(F.inv_mod(mfact(m), xi.p) * a, xi.p)
    return Poly(terms, xi.d, None)


def poly_to_string(f: Poly, j: int | None = None, p: int | None = None) -> HString:
    """xi_m = m! a_m (mod 1); all a_m must lie in (1/(m! p))Z."""
    if f.p is not None:
        raise TypeError("expected a rational polynomial")
    j = f.degree() if j is None else j
    if p is None:
        raise ValueError("p is required")
    if j >= p:
        raise PreconditionError(f"string degree j={j} must be below p={p}")
    if not f.is_homogeneous(j):
        raise MalformedDataError("only homogeneous polynomials of degree j are strings")
    nums = []
    for m in monomials(f.d, j):
        x = mfact(m) * Fraction(f.coefficient(m))
        if (x * p).denominator != 1:
            raise MalformedDataError(f"coefficient of {m} is not in (1/(m! p))Z")
        nums.append(int(x * p) % p)
    return HString(tuple(nums), j, f.d, p)


def induced_form(xi: HString) -> Poly:
    """F = iota(p f) in F_p[x], for the polynomial f associated with xi."""
    return Poly({m: c * xi.p for m, c in string_to_poly(xi).terms.items()}, xi.d, None).reduce(xi.p)


# -- M-ideals ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MIdeal:
    """J^M_{h_1..h_k} = <(nA).n, (h_1 A).n, ..., (h_k A).n>."""

    M: QuadraticForm
    shifts: tuple = ()

    def __post_init__(self):
        hs = tuple(np.mod(np.asarray(h, dtype=np.int64), self.M.p) for h in self.shifts)
        for h in hs:
            if h.shape != (self.M.d,):
                raise DimensionError("shift dimension mismatch")
        object.__setattr__(self, "shifts", hs)

    @property
    def p(self):
        return self.M.p

    @property
    def d(self):
        return self.M.d

    def generators(self):
        p, A = self.p, self.M.A
        Q = Poly.quadratic(A, p=p)
        return [Q] + [Poly.linear(h @ A % p, self.d, p) for h in self.shifts]

    def hypotheses(self, j):
        """Which hypotheses of the ideal/reducibility equivalence hold."""
        k = len(self.shifts)
        H = np.array(self.shifts, dtype=np.int64).reshape(k, self.d)
        return {
            "nondegenerate": self.M.is_nondegenerate(),
            "independent": F.rank(H, self.p) == k if k else True,
            "non_isotropic": (not is_isotropic(H, self.M)) if k else True,
            "dimension": self.d >= k + j + 3,
        }


@dataclass(frozen=True)
class IdealWitness:
    g0: Poly
    gs: tuple

    def combine(self, J: MIdeal) -> Poly:
        gens = J.generators()
        out = gens[0] * self.g0
        for L, g in zip(gens[1:], self.gs):
            out = out + L * g
        return out


def _membership_matrix(J: MIdeal, j: int):
    """Columns = images of the cofactor monomials under multiplication by generators."""
    d, p = J.d, J.p
    target = monomials(d, j)
    pos = {m: t for t, m in enumerate(target)}
    gens = J.generators()
    cols, labels = [], []
    if j >= 2:
        for mu in monomials(d, j - 2):
            cols.append(gens[0] * Poly({mu: 1}, d, p))
            labels.append((0, mu))
    for i, L in enumerate(gens[1:], start=1):
        if j >= 1:
            for nu in monomials(d, j - 1):
                cols.append(L * Poly({nu: 1}, d, p))
                labels.append((i, nu))
    Mat = np.zeros((len(target), len(cols)), dtype=np.int64)
    for c, poly in enumerate(cols):
        for m, coef in poly.terms.items():
            Mat[pos[m], c] = coef
    return Mat, labels


def ideal_member(Fpoly: Poly, J: MIdeal):
    """Homogeneous cofactors (g_0, g_1..g_k) with F = Q g_0 + sum L_i g_i, or None."""
    if Fpoly.p != J.p:
        Fpoly = Fpoly.reduce(J.p) if Fpoly.p is None else Fpoly
    if not Fpoly.is_homogeneous():
        raise MalformedDataError("ideal membership is tested for homogeneous polynomials")
    d, p = J.d, J.p
    j = Fpoly.degree()
    if j < 0:
        return IdealWitness(Poly.zero(d, p), tuple(Poly.zero(d, p) for _ in J.shifts))
    Mat, labels = _membership_matrix(J, j)
    b = np.array(Fpoly.coeff_vector(j), dtype=np.int64)
    if Mat.shape[1] == 0:
        return None
    x = F.solve(Mat, b, p)
    if x is None:
        return None
    g = [dict() for _ in range(len(J.shifts) + 1)]
    for val, (i, mon) in zip(x, labels):
        if val:
            g[i][mon] = int(val)
    w = IdealWitness(Poly(g[0], d, p), tuple(Poly(t, d, p) for t in g[1:]))
    assert w.combine(J) == Fpoly, "witness identity failed"
    return w


class IdealSlice:
    """Degree-j slice of J: a quotient map P with F in J iff P . coeffs(F) = 0."""

    def __init__(self, J: MIdeal, j: int):
        self.J, self.j = J, j
        Mat, _ = _membership_matrix(J, j)
        p = J.p
        n = len(monomials(J.d, j))
        self.P = F.null_space(Mat.T, p) if Mat.shape[1] else np.eye(n, dtype=np.int64)

    def contains_vectors(self, coeffs) -> np.ndarray:
        """Vectorized membership for rows of degree-j coefficient vectors."""
        c = np.mod(np.asarray(coeffs, dtype=np.int64).reshape(-1, self.P.shape[1]), self.J.p)
        return ~F.matmul_mod(c, self.P.T, self.J.p).any(axis=1)


# -- reducibility ------------------------------------------------------------

@dataclass(frozen=True)
class ReducibilityResult:
    reducible: bool
    counterexample: tuple | None = None
    checked: int = 0
    exhaustive: bool = True
    hypotheses: dict = field(default_factory=dict)

    def __bool__(self):
        return self.reducible


def _difference_numerators(f: Poly, n, hs, D):
    """sum_eps (-1)^{j-|eps|} D f(n + eps.h) for stacked integer tuples."""
    j = hs.shape[1]
    eps = corner_signs(j)
    pts = n[:, None, :] + np.einsum("es,tsd->ted", eps, hs)
    vals = f.integer_numerators(pts, D)
    sign = np.where((j - eps.sum(axis=1)) % 2 == 0, 1, -1)
    return (vals * sign).sum(axis=1)


def is_reducible_direct(f, omega, j: int, mode: str = "exhaustive", samples: int = 100000,
                        rng=None, lift_range: int = 3, budget: int = 5 * 10**7,
                        batch: int = 1 << 16) -> ReducibilityResult:
    """Whether the j-fold differences of f are integers on Box_{p,j}(tau(Omega_0) + pZ^d).

    ``omega`` is a descriptor over F_p^d.  Exhaustive mode walks Box_j(Omega_0)
    with tau-lifts.  Sampled mode draws uniform Box tuples and adds random
    multiples of p to the lifts; a violation it reports is certain.
    """
    if isinstance(f, HString):
        f = string_to_poly(f)
    if f.p is not None:
        raise TypeError("expected a rational polynomial")
    p = omega.p
    D = f.max_denominator()
    if mode == "exhaustive":
        n, hs = box_tuples(omega, j, limit=budget)
        for start in range(0, n.shape[0], batch):
            nn, hh = n[start:start + batch], hs[start:start + batch]
            num = _difference_numerators(f, nn, hh, D)
            bad = np.flatnonzero(np.asarray(num % D != 0))
            if bad.size:
                t = start + int(bad[0])
                return ReducibilityResult(False, (tuple(n[t].tolist()), tuple(map(tuple, hs[t].tolist()))),
                                          t + 1, True)
        return ReducibilityResult(True, None, int(n.shape[0]), True)
    if mode == "sampled":
        rng = np.random.default_rng(0) if rng is None else rng
        done = 0
        while done < samples:
            b = min(batch, samples - done)
            nn, hh, _, _ = sample_box(omega, j, b, rng)
            nn = nn + p * rng.integers(-lift_range, lift_range + 1, size=nn.shape)
            hh = hh + p * rng.integers(-lift_range, lift_range + 1, size=hh.shape)
            num = _difference_numerators(f, nn, hh, D)
            bad = np.flatnonzero(np.asarray(num % D != 0))
            if bad.size:
                t = int(bad[0])
                return ReducibilityResult(False, (tuple(nn[t].tolist()), tuple(map(tuple, hh[t].tolist()))),
                                          done + t + 1, False)
            done += nn.shape[0]
        return ReducibilityResult(True, None, done, False)
    raise ValueError(f"unknown mode {mode!r}")


def is_reducible_ideal(xi: HString, M: QuadraticForm, shifts) -> ReducibilityResult:
    """Reducibility on tau(V(M)^{h_1..h_k}) through membership of the induced form."""
    J = MIdeal(M, tuple(shifts))
    w = ideal_member(induced_form(xi), J)
    return ReducibilityResult(w is not None, None, 0, True, J.hypotheses(xi.j))


# -- decomposition witnesses -------------------------------------------------

@dataclass(frozen=True)
class Att5Witness:
    g0: Poly
    gs: tuple
    g_frac: Poly  # degree < s, coefficients in [0, 1)
    g_int: Poly  # integer coefficients
    shifts: tuple
    hypotheses: dict

    def reconstruct(self, M: QuadraticForm) -> Poly:
        Mt = lifted_form(M)
        out = Mt * self.g0
        for m, g in zip(self.shifts, self.gs):
            out = out + (_shift_poly(Mt, m) - Mt) * g
        return out + self.g_frac + self.g_int


def lifted_form(M: QuadraticForm) -> Poly:
    """(1/p)((n tau(A)).n + n.tau(u) + tau(v)) with rational coefficients."""
    q = Poly.quadratic(M.A, M.u, M.v, p=None)
    return q * Fraction(1, M.p)


def _shift_poly(f: Poly, m) -> Poly:
    """n -> f(n + m) for an integer vector m."""
    d = f.d
    subs = [Poly.var(i, d) + int(m[i]) for i in range(d)]
    out = Poly.zero(d)
    for mon, c in f.terms.items():
        term = Poly.const(c, d)
        for i, e in enumerate(mon):
            for _ in range(e):
                term = term * subs[i]
        out = out + term
    return out


def _split_parts(g: Poly):
    whole, frac = {}, {}
    for m, c in g.terms.items():
        w = c.numerator // c.denominator
        if w:
            whole[m] = Fraction(w)
        if c - w:
            frac[m] = c - w
    return Poly(whole, g.d), Poly(frac, g.d)


def att5_decompose(g: Poly, M: QuadraticForm, shifts) -> Att5Witness | None:
    """Write g = M g_0 + sum (M(n + m_i) - M(n)) g_i + g' + g''.

    M is the tau-lift of the form divided by p; g must have coefficients
    in (1/p)Z.  The cofactors come from ideal membership of the top layer
    iota(p g_s); the remainder is split into g'' (integer parts) and g'
    (fractional parts, which must vanish in degree s).
    """
    p, d = M.p, M.d
    if g.p is not None:
        raise TypeError("expected a rational polynomial")
    if any((c * p).denominator != 1 for c in g.terms.values()):
        raise MalformedDataError("g must have coefficients in (1/p)Z")
    shifts = tuple(np.mod(np.asarray(m, dtype=np.int64), p) for m in shifts)
    s = max(g.degree(), 0)
    J = MIdeal(M, shifts)
    hyp = J.hypotheses(s)
    top = Poly({m: c * p for m, c in g.homogeneous_part(s).terms.items()}, d).reduce(p)
    w = ideal_member(top, J)
    if w is None:
        return None
    inv2 = F.inv_mod(2, p)
    G0 = w.g0.lift()
    Gs = tuple((gi * inv2).lift() for gi in w.gs)
    Mt = lifted_form(M)
    R = g - Mt * G0
    for m, Gi in zip(shifts, Gs):
        R = R - (_shift_poly(Mt, m) - Mt) * Gi
    g_int, g_frac = _split_parts(R)
    if g_frac.homogeneous_part(s):
        return None
    out = Att5Witness(G0, Gs, g_frac, g_int, shifts, hyp)
    assert out.reconstruct(M) == g, "decomposition identity failed"
    return out


# -- linear combinations of strings ------------------------------------------

def coefficient_box(ell: int, c: int):
    """All a in [-c, c]^ell, smallest L1 norm first (then max norm, then lexicographic)."""
    pts = list(itertools.product(range(-c, c + 1), repeat=ell))
    pts.sort(key=lambda a: (sum(map(abs, a)), max(map(abs, a), default=0), a))
    return pts


def _check_search(ell, c, p):
    if c >= p:
        raise PreconditionError(f"coefficient bound c={c} must be below p={p}")
    size = (2 * c + 1) ** ell
    if size > SEARCH_BUDGET:
        raise BudgetError(f"search box has {size} points", required=size, unit="combinations")


def _combo(target, basis, a):
    out = target
    for ak, b in zip(a, basis):
        if ak:
            out = out - b.scale(ak)
    return out


def _reducible_fn(M, shifts, omega=None, j=None):
    if omega is None:
        return lambda xi: bool(is_reducible_ideal(xi, M, shifts))
    return lambda xi: bool(is_reducible_direct(string_to_poly(xi), omega, xi.j))


def string_combination(target: HString, basis, c: int, M: QuadraticForm, shifts=(), omega=None):
    """Some a in [-c, c]^l with target - sum a_k basis_k reducible, or None."""
    basis = list(basis)
    _check_search(len(basis), c, target.p)
    red = _reducible_fn(M, shifts, omega)
    for a in coefficient_box(len(basis), c):
        if red(_combo(target, basis, a)):
            return tuple(a)
    return None


def strings_independent(strings, c: int, M: QuadraticForm, shifts=(), omega=None, order=None):
    """(True, None) if no nonzero a in [-c, c]^l makes sum a_k xi_k reducible, else (False, a)."""
    strings = list(strings)
    if not strings:
        return True, None
    _check_search(len(strings), c, strings[0].p)
    red = _reducible_fn(M, shifts, omega)
    zero = HString.zero(strings[0].j, strings[0].d, strings[0].p)
    box = coefficient_box(len(strings), c)
    if order is not None:
        box = [box[i] for i in order]
    for a in box:
        if not any(a):
            continue
        comb = zero
        for ak, s in zip(a, strings):
            comb = comb + s.scale(ak)
        if red(comb):
            return False, tuple(a)
    return True, None


# -- almost linear functions -------------------------------------------------

def _frac(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


class AlmostLinearFunction:
    """h -> sum_i {alpha_i . tau(h)} beta_i with alpha_i in (1/p)Z^d, beta_i in (1/p)Z."""

    def __init__(self, alphas, betas, p, domain=None):
        self.p = F.check_prime(p)
        self.alphas = [tuple(Fraction(a) for a in al) for al in alphas]
        self.betas = [Fraction(b) for b in betas]
        if len(self.alphas) != len(self.betas):
            raise DimensionError("need one beta per alpha")
        self.d = len(self.alphas[0]) if self.alphas else 0
        for x in [a for al in self.alphas for a in al] + self.betas:
            if (x * self.p).denominator != 1:
                raise MalformedDataError(f"{x} is not in (1/p)Z")
        if domain is not None:
            for h in domain:
                self(h)

    @property
    def K(self):
        return len(self.betas)

    def raw(self, h) -> Fraction:
        t = [int(x) % self.p for x in np.asarray(h).ravel()]
        return sum((_frac(sum((a * x for a, x in zip(al, t)), Fraction(0))) * b
                    for al, b in zip(self.alphas, self.betas)), Fraction(0))

    def __call__(self, h) -> Fraction:
        val = self.raw(h)
        if (val * self.p).denominator != 1:
            raise MalformedDataError(f"value {val} at h={tuple(np.asarray(h).ravel())} leaves (1/p)Z")
        return val


@dataclass(frozen=True)
class FreimanResult:
    holds: bool
    quadruple: tuple | None
    checked: int


def is_freiman(xi: AlmostLinearFunction, H, mode="exhaustive", samples=100000, rng=None,
               budget=10**8) -> FreimanResult:
    """Check xi(h1)+xi(h2) = xi(h3)+xi(h4) mod Z over additive quadruples of H."""
    p = xi.p
    H = np.mod(np.asarray(H, dtype=np.int64).reshape(-1, max(xi.d, 1)), p)
    d = H.shape[1]
    from .grid import grid_size, index_of

    idx = index_of(H, p)
    vals = np.full(grid_size(p, d), -1, dtype=np.int64)
    for t, h in zip(idx, H):
        vals[t] = int(xi(h) * p) % p
    n = H.shape[0]
    if mode == "exhaustive":
        if n ** 3 > budget:
            raise BudgetError(f"{n ** 3} triples exceed the budget", required=n ** 3, unit="triples")
        trip = np.stack(np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij"), -1).reshape(-1, 3)
    elif mode == "sampled":
        rng = np.random.default_rng(0) if rng is None else rng
        trip = rng.integers(0, n, size=(samples, 3))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    h1, h2, h3 = H[trip[:, 0]], H[trip[:, 1]], H[trip[:, 2]]
    h4 = np.mod(h1 + h2 - h3, p)
    i4 = index_of(h4, p)
    v4 = vals[i4]
    inside = v4 >= 0
    lhs = (vals[idx[trip[:, 0]]] + vals[idx[trip[:, 1]]]) % p
    rhs = (vals[idx[trip[:, 2]]] + v4) % p
    bad = np.flatnonzero(inside & (lhs != rhs))
    checked = int(inside.sum())
    if bad.size:
        t = int(bad[0])
        quad = tuple(tuple(int(c) for c in v) for v in (h1[t], h2[t], h3[t], h4[t]))
        return FreimanResult(False, quad, checked)
    return FreimanResult(True, None, checked)
