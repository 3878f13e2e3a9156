"""Sparse multivariate polynomials over F_p or Q.

A polynomial is a dict from exponent tuples to coefficients.  With
``p`` set the coefficients are ints mod p; with ``p=None`` they are
``Fraction``s.
"""
from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DimensionError, MalformedDataError


@lru_cache(maxsize=256)
def monomials(d: int, j: int) -> tuple:
    """Exponent vectors with |m| = j, in descending lexicographic order."""
    if j < 0:
        return ()
    out = [m for m in itertools.product(range(j + 1), repeat=d) if sum(m) == j]
    return tuple(sorted(out, reverse=True))


def mfact(m) -> int:
    out = 1
    for e in m:
        out *= math.factorial(e)
    return out


def _add_exp(a, b):
    return tuple(x + y for x, y in zip(a, b))


class Poly:
    __slots__ = ("d", "p", "terms")

    def __init__(self, terms=None, d=None, p=None):
        terms = dict(terms or {})
        if d is None:
            if not terms:
                raise DimensionError("d is required for an empty polynomial")
            d = len(next(iter(terms)))
        self.d, self.p = int(d), p
        clean = {}
        for m, c in terms.items():
            m = tuple(int(e) for e in m)
            if len(m) != self.d or min(m, default=0) < 0:
                raise DimensionError(f"bad exponent {m} for d={self.d}")
            c = self._norm(c)
            if c:
                clean[m] = self._norm(clean.get(m, 0) + c)
                if not clean[m]:
                    del clean[m]
        self.terms = clean

    def _norm(self, c):
        if self.p is None:
            return Fraction(c)
        if isinstance(c, Fraction):
            if c.denominator % self.p == 0:
                raise ZeroDivisionError(f"{c} is not p-integral")
            return c.numerator * pow(c.denominator, -1, self.p) % self.p
        return int(c) % self.p

    # construction helpers
    @classmethod
    def zero(cls, d, p=None):
        return cls({}, d, p)

    @classmethod
    def const(cls, c, d, p=None):
        return cls({(0,) * d: c}, d, p)

    @classmethod
    def var(cls, i, d, p=None):
        e = [0] * d
        e[i] = 1
        return cls({tuple(e): 1}, d, p)

    @classmethod
    def linear(cls, w, d, p=None):
        return cls({tuple(int(t == i) for t in range(d)): int(c) for i, c in enumerate(w)}, d, p)

    @classmethod
    def quadratic(cls, A, u=None, v=0, p=None):
        """(nA).n + n.u + v."""
        A = np.asarray(A, dtype=np.int64)
        d = A.shape[0]
        terms = {}
        for i in range(d):
            for j in range(d):
                if A[i, j]:
                    e = [0] * d
                    e[i] += 1
                    e[j] += 1
                    terms[tuple(e)] = terms.get(tuple(e), 0) + int(A[i, j])
        out = cls(terms, d, p)
        if u is not None:
            out = out + cls.linear(u, d, p)
        return out + cls.const(v, d, p)

    def like(self, terms):
        return Poly(terms, self.d, self.p)

    # arithmetic
    def _check(self, other):
        if not isinstance(other, Poly):
            return self.const(other, self.d, self.p)
        if other.d != self.d or other.p != self.p:
            raise DimensionError("polynomials live in different rings")
        return other

    def __add__(self, other):
        other = self._check(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return self.like(t)

    __radd__ = __add__

    def __neg__(self):
        return self.like({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.like({m: c * other for m, c in self.terms.items()})
        other = self._check(other)
        t = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _add_exp(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return self.like(t)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = self.const(other, self.d, self.p)
        return self.d == other.d and self.p == other.p and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, self.p, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # structure
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def homogeneous_part(self, j):
        return self.like({m: c for m, c in self.terms.items() if sum(m) == j})

    def is_homogeneous(self, j=None) -> bool:
        degs = {sum(m) for m in self.terms}
        if not degs:
            return True
        return len(degs) == 1 and (j is None or degs == {j})

    def coefficient(self, m):
        return self.terms.get(tuple(m), 0)

    def coeff_vector(self, j):
        """Coefficients on ``monomials(d, j)``."""
        return [self.terms.get(m, 0) for m in monomials(self.d, j)]

    def reduce(self, p):
        """Image in F_p[x] of a p-integral rational polynomial."""
        return Poly(self.terms, self.d, p)

    def lift(self):
        """tau-lift of an F_p polynomial to integer (Fraction) coefficients in [0, p)."""
        if self.p is None:
            return self
        return Poly({m: Fraction(c) for m, c in self.terms.items()}, self.d, None)

    def scale(self, c):
        return self * c

    def max_denominator(self) -> int:
        if self.p is not None:
            return 1
        return math.lcm(*(c.denominator for c in self.terms.values())) if self.terms else 1

    # evaluation
    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        """Exact values at integer points; x has shape (..., d).

        F_p polynomials return ints mod p, rational ones return Fractions
        (object arrays for stacked input).
        """
        x = np.asarray(x)
        if x.shape[-1] != self.d:
            raise DimensionError("point dimension mismatch")
        if self.p is not None:
            xx = np.mod(x.astype(np.int64), self.p)
            out = np.zeros(xx.shape[:-1], dtype=np.int64)
            for m, c in self.terms.items():
                term = np.full(xx.shape[:-1], c, dtype=np.int64)
                for i, e in enumerate(m):
                    if e:
                        term = term * _powmod(xx[..., i], e, self.p) % self.p
                out = (out + term) % self.p
            return int(out) if out.ndim == 0 else out
        D = self.max_denominator()
        nums = self.integer_numerators(x, D)
        if nums.ndim == 0:
            return Fraction(int(nums), D)
        return np.vectorize(lambda n: Fraction(int(n), D), otypes=[object])(nums)

    def integer_numerators(self, x, D=None):
        """D * f(x) as exact integers (int64 when safe, else Python ints)."""
        if self.p is not None:
            raise TypeError("numerators are defined for rational polynomials")
        D = self.max_denominator() if D is None else D
        x = np.asarray(x)
        ints = {m: int(c * D) for m, c in self.terms.items()}
        if any(Fraction(v) != c * D for v, (m, c) in zip(ints.values(), self.terms.items())):
            raise ValueError("D is not a common denominator")
        bound = float(np.max(np.abs(x), initial=0)) + 1
        total = sum(abs(v) for v in ints.values()) * bound ** max(self.degree(), 0)
        dtype = np.int64 if total < 2**62 else object
        xx = x.astype(dtype)
        out = np.zeros(x.shape[:-1], dtype=dtype)
        for m, c in ints.items():
            term = np.full(x.shape[:-1], c, dtype=dtype)
            for i, e in enumerate(m):
                if e:
                    term = term * xx[..., i] ** e
            out = out + term
        return out

    # text format
    def to_text(self) -> str:
        if not self.terms:
            body = "0"
        else:
            keys = sorted(self.terms, key=lambda m: (-sum(m), tuple(-e for e in m)))
            body = " + ".join(_term_text(self.terms[m], m) for m in keys)
        return body + (f" (mod {self.p})" if self.p is not None else "")

    def __repr__(self):
        return f"Poly({self.to_text()})"

    @classmethod
    def from_text(cls, text: str, d: int | None = None):
        text = text.strip()
        mm = re.search(r"\(mod\s+(\d+)\)\s*$", text)
        p = int(mm.group(1)) if mm else None
        if mm:
            text = text[:mm.start()].strip()
        if d is None:
            idx = [int(k) for k in re.findall(r"x(\d+)", text)]
            d = max(idx, default=1)
        out = cls.zero(d, p)
        if text in ("", "0"):
            return out
        for raw in re.split(r"\s*(?=[+-])", text.replace(" ", "")):
            if not raw or raw in "+-":
                continue
            sign = -1 if raw.startswith("-") else 1
            raw = raw.lstrip("+-")
            coeff = Fraction(1)
            exps = [0] * d
            for fac in raw.split("*"):
                vm = re.fullmatch(r"x(\d+)(?:\^(\d+))?", fac)
                if vm:
                    i = int(vm.group(1)) - 1
                    if i >= d:
                        raise MalformedDataError(f"variable x{i + 1} exceeds d={d}")
                    exps[i] += int(vm.group(2) or 1)
                else:
                    try:
                        coeff *= Fraction(fac)
                    except ValueError:
                        raise MalformedDataError(f"cannot parse factor {fac!r}") from None
            out = out + cls({tuple(exps): sign * coeff}, d, p)
        return out


def _term_text(c, m):
    vars_ = [f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(m) if e]
    if not vars_:
        return str(c)
    if c == 1:
        return "*".join(vars_)
    return f"{c}*" + "*".join(vars_)


def _powmod(base, e, p):
    out = np.ones_like(base)
    b = base % p
    while e:
        if e & 1:
            out = out * b % p
        b = b * b % p
        e >>= 1
    return out


def from_coeff_vector(vec, d, j, p=None):
    return Poly(dict(zip(monomials(d, j), vec)), d, p)
