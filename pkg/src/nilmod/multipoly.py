"""Sparse multivariate polynomials over exact rationals.

A polynomial is a finite map from exponent multi-indices to nonzero
rational coefficients.  The module fixes one global monomial order
(graded lexicographic with x_1 > x_2 > ... > x_n) that every canonical
basis and serialization in the library relies on.  Variable indices in
the public API are 1-based.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .exactalg import as_fraction, format_rational, parse_rational

MultiIndex = tuple[int, ...]

#: Degree of the zero polynomial.
MINUS_INFINITY = float("-inf")


def grlex_key(alpha: MultiIndex):
    """Sort key realizing graded lex with x_1 > x_2 > ... > x_n."""
    return (sum(alpha), alpha)


def multi_factorial(alpha: MultiIndex) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def monomials_of_degree(n: int, degree: int) -> Iterator[MultiIndex]:
    """All exponent vectors of length n with total degree exactly `degree`."""
    if n == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in monomials_of_degree(n - 1, degree - first):
            yield (first,) + rest


def monomials_up_to_degree(n: int, bound: int) -> Iterator[MultiIndex]:
    for d in range(bound + 1):
        yield from monomials_of_degree(n, d)


def lower_set_closure(indices: Iterable[MultiIndex]) -> set[MultiIndex]:
    """Downward closure under componentwise <=."""
    closed: set[MultiIndex] = set()
    for alpha in indices:
        for beta in product(*(range(a + 1) for a in alpha)):
            closed.add(beta)
    return closed


def is_lower_set(indices: Iterable[MultiIndex]) -> bool:
    index_set = set(indices)
    for alpha in index_set:
        for i, a in enumerate(alpha):
            if a > 0 and alpha[:i] + (a - 1,) + alpha[i + 1 :] not in index_set:
                return False
    return True


class Poly:
    """Sparse polynomial; zero coefficients are never stored."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Optional[Mapping[MultiIndex, object]] = None):
        if n < 1:
            raise ValueError("variable count must be at least 1")
        clean: dict[MultiIndex, Fraction] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != n or any(a < 0 or not isinstance(a, int) for a in alpha):
                raise ValueError(f"bad exponent vector {alpha} for n={n}")
            c = as_fraction(c)
            if c != 0:
                clean[alpha] = c
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def zero(cls, n: int) -> "Poly":
        return cls(n)

    @classmethod
    def one(cls, n: int) -> "Poly":
        return cls(n, {(0,) * n: 1})

    @classmethod
    def constant(cls, n: int, c) -> "Poly":
        return cls(n, {(0,) * n: c})

    @classmethod
    def monomial(cls, n: int, alpha: MultiIndex, coef=1) -> "Poly":
        return cls(n, {tuple(alpha): coef})

    @classmethod
    def variable(cls, n: int, i: int) -> "Poly":
        _check_var(n, i)
        alpha = tuple(1 if k == i - 1 else 0 for k in range(n))
        return cls(n, {alpha: 1})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.n == other.n and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self.terms.items())))

    def monomials(self) -> set[MultiIndex]:
        return set(self.terms)

    def coeff(self, alpha: MultiIndex) -> Fraction:
        return self.terms.get(tuple(alpha), Fraction(0))

    def eval_zero(self) -> Fraction:
        """The constant term (the value at the origin)."""
        return self.terms.get((0,) * self.n, Fraction(0))

    def degree_in(self, i: int):
        _check_var(self.n, i)
        if not self.terms:
            return MINUS_INFINITY
        return max(alpha[i - 1] for alpha in self.terms)

    def total_degree(self):
        if not self.terms:
            return MINUS_INFINITY
        return max(sum(alpha) for alpha in self.terms)

    def leading_monomial(self) -> Optional[MultiIndex]:
        if not self.terms:
            return None
        return max(self.terms, key=grlex_key)

    def __add__(self, other: "Poly") -> "Poly":
        self._check_compatible(other)
        out = dict(self.terms)
        for alpha, c in other.terms.items():
            s = out.get(alpha, Fraction(0)) + c
            if s == 0:
                out.pop(alpha, None)
            else:
                out[alpha] = s
        return Poly(self.n, out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        return Poly(self.n, {alpha: -c for alpha, c in self.terms.items()})

    def scale(self, c) -> "Poly":
        c = as_fraction(c)
        if c == 0:
            return Poly.zero(self.n)
        return Poly(self.n, {alpha: c * v for alpha, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Poly):
            self._check_compatible(other)
            out: dict[MultiIndex, Fraction] = {}
            for a, ca in self.terms.items():
                for b, cb in other.terms.items():
                    g = tuple(x + y for x, y in zip(a, b))
                    s = out.get(g, Fraction(0)) + ca * cb
                    if s == 0:
                        out.pop(g, None)
                    else:
                        out[g] = s
            return Poly(self.n, out)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def partial(self, i: int) -> "Poly":
        """Exact partial derivative with respect to x_i (1-based)."""
        _check_var(self.n, i)
        k = i - 1
        out: dict[MultiIndex, Fraction] = {}
        for alpha, c in self.terms.items():
            if alpha[k] == 0:
                continue
            beta = alpha[:k] + (alpha[k] - 1,) + alpha[k + 1 :]
            out[beta] = c * alpha[k]
        return Poly(self.n, out)

    def integrate(self, i: int) -> "Poly":
        """Antiderivative in x_i vanishing at x_i = 0.

        Every term of the result has a positive x_i exponent, so
        partial(integrate(p, i), i) == p.
        """
        _check_var(self.n, i)
        k = i - 1
        out: dict[MultiIndex, Fraction] = {}
        for alpha, c in self.terms.items():
            beta = alpha[:k] + (alpha[k] + 1,) + alpha[k + 1 :]
            out[beta] = c / (alpha[k] + 1)
        return Poly(self.n, out)

    def partial_multi(self, alpha: MultiIndex) -> "Poly":
        p = self
        for i, a in enumerate(alpha, start=1):
            for _ in range(a):
                p = p.partial(i)
        return p

    def _check_compatible(self, other: "Poly") -> None:
        if self.n != other.n:
            raise ValueError("variable count mismatch")

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for alpha in sorted(self.terms, key=grlex_key, reverse=True):
            c = self.terms[alpha]
            factors = [
                f"x{i + 1}" + (f"^{a}" if a > 1 else "")
                for i, a in enumerate(alpha)
                if a > 0
            ]
            if not factors:
                parts.append(format_rational(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(format_rational(c) + "*" + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> list[dict]:
        return [
            {"exps": list(alpha), "coef": format_rational(self.terms[alpha])}
            for alpha in sorted(self.terms, key=grlex_key, reverse=True)
        ]

    @classmethod
    def from_json(cls, data, n: int) -> "Poly":
        if not isinstance(data, list):
            raise ValueError("polynomial JSON must be a list of terms")
        terms: dict[MultiIndex, Fraction] = {}
        for item in data:
            exps = item["exps"]
            if not isinstance(exps, list) or len(exps) != n:
                raise ValueError(f"exponent vector {exps} has wrong length")
            alpha = tuple(exps)
            if alpha in terms:
                raise ValueError(f"duplicate exponent vector {alpha}")
            c = parse_rational(item["coef"])
            if c == 0:
                raise ValueError("zero coefficient in polynomial JSON")
            terms[alpha] = c
        return cls(n, terms)


def _check_var(n: int, i: int) -> None:
    if not 1 <= i <= n:
        raise IndexError(f"variable index {i} out of range 1..{n}")


def poly_to_vector(p: Poly, monomial_list: Sequence[MultiIndex]) -> Optional[tuple]:
    """Coefficient vector of p over an ordered monomial list.

    Returns None when p involves a monomial outside the list.
    """
    position = {alpha: idx for idx, alpha in enumerate(monomial_list)}
    out = [Fraction(0)] * len(monomial_list)
    for alpha, c in p.terms.items():
        idx = position.get(alpha)
        if idx is None:
            return None
        out[idx] = c
    return tuple(out)


def vector_to_poly(v: Sequence, monomial_list: Sequence[MultiIndex], n: int) -> Poly:
    return Poly(n, {alpha: c for alpha, c in zip(monomial_list, v)})
