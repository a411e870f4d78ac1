"""Truncated differential-operator series and what they do to submodules.

Every endomorphism of the derivative module is a (formal) series
sum c_alpha d^alpha with the convolution product; truncating at a total
degree gives an exact finite model.  This module implements application,
coefficient extraction from monomial-image tables, composition, formal
exp/log, isomorphism extension between polynomial submodules, and the
automorphism groups of monomial submodules.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Mapping, Optional, Sequence

from .errors import (
    IncompatibleMap,
    NothingToExtend,
    NotAnEndomorphism,
    TruncationTooLow,
    WrongConstantTerm,
)
from .exactalg import QMatrix, as_fraction, format_rational, parse_rational
from .modcore import ModuleMap, PolySubmodule
from .multipoly import (
    MultiIndex,
    Poly,
    grlex_key,
    is_lower_set,
    monomials_of_degree,
    monomials_up_to_degree,
    multi_factorial,
    poly_to_vector,
)


class DiffOpSeries:
    """sum c_alpha d^alpha with all |alpha| <= trunc; zeros not stored."""

    __slots__ = ("n", "trunc", "coeffs")

    def __init__(self, n: int, trunc: int, coeffs: Optional[Mapping[MultiIndex, object]] = None):
        if n < 1:
            raise ValueError("variable count must be at least 1")
        if trunc < 0:
            raise ValueError("truncation degree must be non-negative")
        clean: dict[MultiIndex, Fraction] = {}
        for alpha, c in (coeffs or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != n or any(a < 0 for a in alpha):
                raise ValueError(f"bad operator index {alpha}")
            if sum(alpha) > trunc:
                raise ValueError(f"index {alpha} exceeds truncation {trunc}")
            c = as_fraction(c)
            if c != 0:
                clean[alpha] = c
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, name, value):
        raise AttributeError("DiffOpSeries is immutable")

    @classmethod
    def zero(cls, n: int, trunc: int) -> "DiffOpSeries":
        return cls(n, trunc)

    @classmethod
    def identity(cls, n: int, trunc: int) -> "DiffOpSeries":
        return cls(n, trunc, {(0,) * n: 1})

    @classmethod
    def derivative(cls, n: int, trunc: int, i: int) -> "DiffOpSeries":
        alpha = tuple(1 if k == i - 1 else 0 for k in range(n))
        return cls(n, trunc, {alpha: 1})

    def coeff(self, alpha: MultiIndex) -> Fraction:
        return self.coeffs.get(tuple(alpha), Fraction(0))

    @property
    def unit(self) -> Fraction:
        """The constant-operator coefficient c_(0,...,0)."""
        return self.coeffs.get((0,) * self.n, Fraction(0))

    def is_automorphism(self) -> bool:
        return self.unit != 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DiffOpSeries)
            and self.n == other.n
            and self.trunc == other.trunc
            and self.coeffs == other.coeffs
        )

    def __hash__(self) -> int:
        return hash((self.n, self.trunc, frozenset(self.coeffs.items())))

    def __repr__(self) -> str:
        return f"DiffOpSeries(n={self.n}, trunc={self.trunc}, {len(self.coeffs)} terms)"

    def _check_n(self, other: "DiffOpSeries") -> None:
        if self.n != other.n:
            raise ValueError("variable count mismatch")

    def __add__(self, other: "DiffOpSeries") -> "DiffOpSeries":
        self._check_n(other)
        trunc = min(self.trunc, other.trunc)
        out = {a: c for a, c in self.coeffs.items() if sum(a) <= trunc}
        for a, c in other.coeffs.items():
            if sum(a) > trunc:
                continue
            s = out.get(a, Fraction(0)) + c
            if s == 0:
                out.pop(a, None)
            else:
                out[a] = s
        return DiffOpSeries(self.n, trunc, out)

    def __neg__(self) -> "DiffOpSeries":
        return DiffOpSeries(self.n, self.trunc, {a: -c for a, c in self.coeffs.items()})

    def __sub__(self, other: "DiffOpSeries") -> "DiffOpSeries":
        return self + (-other)

    def scale(self, c) -> "DiffOpSeries":
        c = as_fraction(c)
        return DiffOpSeries(self.n, self.trunc, {a: c * v for a, v in self.coeffs.items()})

    def compose(self, other: "DiffOpSeries") -> "DiffOpSeries":
        """Operator composition = convolution of coefficients (commutative)."""
        self._check_n(other)
        trunc = min(self.trunc, other.trunc)
        out: dict[MultiIndex, Fraction] = {}
        for a, ca in self.coeffs.items():
            for b, cb in other.coeffs.items():
                g = tuple(x + y for x, y in zip(a, b))
                if sum(g) > trunc:
                    continue
                s = out.get(g, Fraction(0)) + ca * cb
                if s == 0:
                    out.pop(g, None)
                else:
                    out[g] = s
        return DiffOpSeries(self.n, trunc, out)

    def apply(self, p: Poly) -> Poly:
        """sum c_alpha d^alpha p; refuses polynomials beyond the truncation.

        A series truncated at D only determines an operator on
        polynomials of total degree <= D, so higher-degree input is an
        error rather than a silent approximation.
        """
        if p.n != self.n:
            raise ValueError("variable count mismatch")
        deg = p.total_degree()
        if isinstance(deg, int) and deg > self.trunc:
            raise TruncationTooLow(
                f"polynomial degree {deg} exceeds truncation {self.trunc}"
            )
        out = Poly.zero(self.n)
        for alpha, c in self.coeffs.items():
            term = p.partial_multi(alpha)
            if not term.is_zero():
                out = out + term.scale(c)
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "trunc": self.trunc,
            "coeffs": [
                {"exps": list(a), "coef": format_rational(self.coeffs[a])}
                for a in sorted(self.coeffs, key=grlex_key, reverse=True)
            ],
        }

    @classmethod
    def from_json(cls, data) -> "DiffOpSeries":
        n = data["n"]
        trunc = data["trunc"]
        coeffs: dict[MultiIndex, Fraction] = {}
        for item in data["coeffs"]:
            alpha = tuple(item["exps"])
            if alpha in coeffs:
                raise ValueError(f"duplicate operator index {alpha}")
            c = parse_rational(item["coef"])
            if c == 0:
                raise ValueError("zero coefficient in series JSON")
            coeffs[alpha] = c
        return cls(n, trunc, coeffs)


def series_exp(s: DiffOpSeries) -> DiffOpSeries:
    """Formal exponential; needs zero constant term.

    Powers of s gain at least one total degree each, so the sum
    stabilizes after trunc steps.
    """
    if s.unit != 0:
        raise WrongConstantTerm("exp needs a zero constant term")
    acc = DiffOpSeries.identity(s.n, s.trunc)
    power = DiffOpSeries.identity(s.n, s.trunc)
    fact = 1
    for k in range(1, s.trunc + 1):
        power = power.compose(s)
        fact *= k
        acc = acc + power.scale(Fraction(1, fact))
    return acc


def series_log(s: DiffOpSeries) -> DiffOpSeries:
    """Formal logarithm; needs constant term one.  Inverse of series_exp."""
    if s.unit != 1:
        raise WrongConstantTerm("log needs constant term one")
    u = s - DiffOpSeries.identity(s.n, s.trunc)
    acc = DiffOpSeries.zero(s.n, s.trunc)
    power = DiffOpSeries.identity(s.n, s.trunc)
    for k in range(1, s.trunc + 1):
        power = power.compose(u)
        acc = acc + power.scale(Fraction(-1 if k % 2 == 0 else 1, k))
    return acc


def monomial_images(s: DiffOpSeries, degree: Optional[int] = None) -> dict[MultiIndex, Poly]:
    """The table alpha -> s(x^alpha) for all |alpha| <= degree."""
    if degree is None:
        degree = s.trunc
    return {
        alpha: s.apply(Poly.monomial(s.n, alpha))
        for alpha in monomials_up_to_degree(s.n, degree)
    }


def extract_coeffs(
    n: int, degree: int, images: Mapping[MultiIndex, Poly]
) -> DiffOpSeries:
    """Recover the series from a monomial-image table.

    The table must cover every monomial of total degree <= degree and
    commute with each partial derivative wherever both sides stay
    inside the table; that check is exactly what makes the coefficient
    formula c_alpha = image(x^alpha)(0)/alpha! reproduce the whole map.
    """
    table: dict[MultiIndex, Poly] = {}
    for alpha in monomials_up_to_degree(n, degree):
        if alpha not in images:
            raise ValueError(f"image table is missing monomial {alpha}")
        p = images[alpha]
        if p.n != n:
            raise ValueError("variable count mismatch in image table")
        table[alpha] = p
    for alpha in sorted(table, key=grlex_key):
        for i in range(1, n + 1):
            lowered = (
                table[alpha[: i - 1] + (alpha[i - 1] - 1,) + alpha[i:]].scale(alpha[i - 1])
                if alpha[i - 1] >= 1
                else Poly.zero(n)
            )
            if table[alpha].partial(i) != lowered:
                raise NotAnEndomorphism(i, alpha)
    coeffs = {
        alpha: table[alpha].eval_zero() / multi_factorial(alpha) for alpha in table
    }
    return DiffOpSeries(n, degree, coeffs)


class MonomialSubmodule:
    """A submodule of the derivative module spanned by monomials.

    The exponent set is a lower set: closed downward under the
    componentwise order and containing the origin.
    """

    __slots__ = ("n", "indices")

    def __init__(self, n: int, indices):
        indices = frozenset(tuple(a) for a in indices)
        if not indices:
            raise ValueError("a monomial submodule needs at least the origin")
        for alpha in indices:
            if len(alpha) != n or any(a < 0 for a in alpha):
                raise ValueError(f"bad exponent vector {alpha}")
        if not is_lower_set(indices):
            raise ValueError("the exponent set is not a lower set")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "indices", indices)

    def __setattr__(self, name, value):
        raise AttributeError("MonomialSubmodule is immutable")

    @property
    def m(self) -> int:
        return len(self.indices)

    @property
    def max_degree(self) -> int:
        return max(sum(a) for a in self.indices)

    def monomials_descending(self) -> tuple[MultiIndex, ...]:
        return tuple(sorted(self.indices, key=grlex_key, reverse=True))

    def as_poly_submodule(self) -> PolySubmodule:
        return PolySubmodule(
            self.n, [Poly.monomial(self.n, a) for a in self.monomials_descending()]
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MonomialSubmodule)
            and self.n == other.n
            and self.indices == other.indices
        )

    def __hash__(self) -> int:
        return hash((self.n, self.indices))

    def __repr__(self) -> str:
        return f"MonomialSubmodule(n={self.n}, m={self.m})"

    def to_json(self) -> dict:
        return {"n": self.n, "indices": [list(a) for a in self.monomials_descending()]}

    @classmethod
    def from_json(cls, data) -> "MonomialSubmodule":
        return cls(data["n"], data["indices"])


def restrict(s: DiffOpSeries, module: MonomialSubmodule) -> ModuleMap:
    """The action of the series on the monomial basis, as a module map.

    Lower sets are closed under taking derivatives, so the matrix
    depends only on the coefficients c_lambda with lambda in the set.
    """
    if s.n != module.n:
        raise ValueError("variable count mismatch")
    if s.trunc < module.max_degree:
        raise TruncationTooLow(
            f"series truncation {s.trunc} below the submodule degree "
            f"{module.max_degree}"
        )
    space = module.as_poly_submodule()
    columns = []
    for p in space.basis:
        coords = space.coordinates_of(s.apply(p))
        assert coords is not None, "a lower set is stable under every d^alpha"
        columns.append(coords)
    return ModuleMap(space, space, QMatrix.from_columns(columns, rows=space.dim))


# --- extension of isomorphisms between polynomial submodules -----------

def _check_iso(source: PolySubmodule, target: PolySubmodule, phi: ModuleMap) -> None:
    if phi.source != source or phi.target != target:
        raise IncompatibleMap("map endpoints disagree with the given submodules")
    if not phi.is_isomorphism():
        raise IncompatibleMap("map is not an intertwining bijection")


def _least_missing_monomial(
    module: PolySubmodule, within: Optional[MonomialSubmodule]
) -> MultiIndex:
    """The monomial-order-least exponent of minimal total degree whose
    monomial lies outside the submodule."""
    if within is not None:
        missing = [
            a
            for a in within.indices
            if not module.contains(Poly.monomial(module.n, a))
        ]
        if not missing:
            raise NothingToExtend("the target monomials are already covered")
        least_degree = min(sum(a) for a in missing)
        return min((a for a in missing if sum(a) == least_degree), key=grlex_key)
    degree = 0
    while True:
        for alpha in sorted(monomials_of_degree(module.n, degree), key=grlex_key):
            if not module.contains(Poly.monomial(module.n, alpha)):
                return alpha
        degree += 1


def extend_iso_step(
    source: PolySubmodule,
    target: PolySubmodule,
    phi: ModuleMap,
    within: Optional[MonomialSubmodule] = None,
) -> tuple[PolySubmodule, PolySubmodule, ModuleMap]:
    """Extend an isomorphism by one dimension.

    Adjoins the least missing monomial x^kappa of minimal total degree
    to the source; its image is the potential of the images of its
    derivatives, which lands outside the target.  With `within`, the
    monomial is chosen among that submodule's exponents only.
    """
    from .embed import potential

    _check_iso(source, target, phi)
    n = source.n
    kappa = _least_missing_monomial(source, within)
    image_polys = [phi.image_poly(r) for r in range(source.dim)]

    def phi_of(p: Poly) -> Poly:
        coords = source.coordinates_of(p)
        assert coords is not None
        out = Poly.zero(n)
        for c, q in zip(coords, image_polys):
            if c != 0:
                out = out + q.scale(c)
        return out

    new_monomial = Poly.monomial(n, kappa)
    # kappa has minimal degree among missing monomials, so its partials
    # (one degree lower) all lie inside the source.
    gs = [phi_of(new_monomial.partial(i)) for i in range(1, n + 1)]
    g = potential(gs, n)
    assert not target.contains(g), "the extension image must be new"

    new_source = PolySubmodule(n, list(source.basis) + [new_monomial])
    new_target = PolySubmodule(n, list(target.basis) + [g])

    old_columns = [
        poly_to_vector(p, new_source.monomial_list) for p in source.basis
    ] + [poly_to_vector(new_monomial, new_source.monomial_list)]
    decompose = QMatrix.from_columns(old_columns)
    columns = []
    for q in new_source.basis:
        coeffs = decompose.solve(poly_to_vector(q, new_source.monomial_list))
        assert coeffs is not None
        image = Poly.zero(n)
        for c, p in zip(coeffs[:-1], image_polys):
            if c != 0:
                image = image + p.scale(c)
        if coeffs[-1] != 0:
            image = image + g.scale(coeffs[-1])
        coords = new_target.coordinates_of(image)
        assert coords is not None
        columns.append(coords)
    extended = ModuleMap(
        new_source, new_target, QMatrix.from_columns(columns, rows=new_target.dim)
    )
    return new_source, new_target, extended


def extend_iso(
    source: PolySubmodule,
    target: PolySubmodule,
    phi: ModuleMap,
    goal: MonomialSubmodule,
) -> ModuleMap:
    """Extend an isomorphism until its domain contains the goal's span.

    Finitely many single steps; each adjoins one missing goal monomial,
    so the loop ends after at most m steps.
    """
    _check_iso(source, target, phi)
    current = phi
    src, tgt = source, target
    while True:
        covered = all(
            src.contains(Poly.monomial(src.n, a)) for a in goal.indices
        )
        if covered:
            return current
        src, tgt, current = extend_iso_step(src, tgt, current, within=goal)


# --- automorphism groups of monomial submodules -------------------------

class AutDescriptor:
    """Coordinates for an automorphism of a monomial submodule.

    One nonzero unit (the scale) and one additive coordinate per
    non-origin exponent, living in logarithmic coordinates where
    composition is plain addition.
    """

    __slots__ = ("unit", "additive")

    def __init__(self, unit, additive: Optional[Mapping[MultiIndex, object]] = None):
        unit = as_fraction(unit)
        if unit == 0:
            raise ValueError("the unit coordinate must be nonzero")
        clean: dict[MultiIndex, Fraction] = {}
        for alpha, c in (additive or {}).items():
            alpha = tuple(alpha)
            if all(a == 0 for a in alpha):
                raise ValueError("the origin is not an additive coordinate")
            c = as_fraction(c)
            if c != 0:
                clean[alpha] = c
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "additive", clean)

    def __setattr__(self, name, value):
        raise AttributeError("AutDescriptor is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, AutDescriptor)
            and self.unit == other.unit
            and self.additive == other.additive
        )

    def __hash__(self) -> int:
        return hash((self.unit, frozenset(self.additive.items())))

    def __repr__(self) -> str:
        return f"AutDescriptor(unit={self.unit}, {len(self.additive)} additive terms)"

    def to_json(self) -> dict:
        return {
            "unit": format_rational(self.unit),
            "additive": [
                {"exps": list(a), "coef": format_rational(self.additive[a])}
                for a in sorted(self.additive, key=grlex_key, reverse=True)
            ],
        }

    @classmethod
    def from_json(cls, data) -> "AutDescriptor":
        additive: dict[MultiIndex, Fraction] = {}
        for item in data["additive"]:
            alpha = tuple(item["exps"])
            if alpha in additive:
                raise ValueError(f"duplicate additive coordinate {alpha}")
            additive[alpha] = parse_rational(item["coef"])
        return cls(parse_rational(data["unit"]), additive)


class AutGroup:
    """The automorphism group of a monomial submodule.

    The group is the direct product of the nonzero rationals (units) and
    m-1 additive lines: a descriptor (u, t) maps to the restriction of
    u * exp(sum t_lambda d^lambda), and the group law in descriptor
    coordinates is (u, t) . (u', t') = (u u', t + t').  Restriction to a
    lower set is an algebra map, so everything here is exact.
    """

    def __init__(self, module: MonomialSubmodule):
        self.module = module
        self.space = module.as_poly_submodule()
        self._order = self.module.monomials_descending()
        self._position = {a: i for i, a in enumerate(self._order)}

    @property
    def unit_count(self) -> int:
        return 1

    @property
    def additive_count(self) -> int:
        return self.module.m - 1

    def identity(self) -> AutDescriptor:
        return AutDescriptor(1)

    def compose(self, a: AutDescriptor, b: AutDescriptor) -> AutDescriptor:
        """The group law: units multiply, additive coordinates add."""
        self._check_descriptor(a)
        self._check_descriptor(b)
        total = dict(a.additive)
        for alpha, c in b.additive.items():
            s = total.get(alpha, Fraction(0)) + c
            if s == 0:
                total.pop(alpha, None)
            else:
                total[alpha] = s
        return AutDescriptor(a.unit * b.unit, total)

    def inverse(self, a: AutDescriptor) -> AutDescriptor:
        self._check_descriptor(a)
        return AutDescriptor(1 / a.unit, {k: -v for k, v in a.additive.items()})

    def _check_descriptor(self, desc: AutDescriptor) -> None:
        for alpha in desc.additive:
            if alpha not in self.module.indices:
                raise ValueError(f"additive coordinate {alpha} outside the submodule")

    def parametrize(self, desc: AutDescriptor) -> ModuleMap:
        """The automorphism of the submodule named by a descriptor."""
        self._check_descriptor(desc)
        trunc = self.module.max_degree
        log_part = DiffOpSeries(self.module.n, trunc, desc.additive)
        series = series_exp(log_part).scale(desc.unit)
        return restrict(series, self.module)

    def matrix_of(self, desc: AutDescriptor) -> QMatrix:
        return self.parametrize(desc).images

    def descriptor_of(self, automorphism) -> AutDescriptor:
        """Inverse of parametrize; accepts the map or its matrix.

        The coefficient c_lambda of the underlying series is read off
        the constant-monomial row, then the unit is split off and the
        rest moved to logarithmic coordinates.
        """
        matrix = automorphism.images if isinstance(automorphism, ModuleMap) else automorphism
        if matrix.rows != self.module.m or matrix.cols != self.module.m:
            raise ValueError("matrix size disagrees with the submodule")
        origin_row = self._position[(0,) * self.module.n]
        coeffs = {}
        for alpha, col in self._position.items():
            c = matrix.entries[origin_row][col] / multi_factorial(alpha)
            if c != 0:
                coeffs[alpha] = c
        unit = coeffs.get((0,) * self.module.n, Fraction(0))
        if unit == 0:
            raise ValueError("not an automorphism: zero unit coefficient")
        trunc = self.module.max_degree
        series = DiffOpSeries(self.module.n, trunc, coeffs)
        logs = series_log(series.scale(1 / unit))
        additive = {
            alpha: logs.coeff(alpha)
            for alpha in self.module.indices
            if any(a != 0 for a in alpha)
        }
        desc = AutDescriptor(unit, additive)
        if self.matrix_of(desc) != matrix:
            raise ValueError("matrix is not the restriction of any series")
        return desc


def aut_structure(module: MonomialSubmodule) -> AutGroup:
    return AutGroup(module)


# --- reporters for the questions the theory leaves open -----------------

def endomorphism_space_dim(module: PolySubmodule) -> int:
    """Dimension of the space of all linear maps commuting with every
    partial-derivative action on the submodule."""
    mats = module.action_matrices()
    d = module.dim
    rows = []
    for s in mats:
        for a in range(d):
            for c in range(d):
                row = [Fraction(0)] * (d * d)
                for b in range(d):
                    row[a * d + b] += s.entries[b][c]
                    row[b * d + c] -= s.entries[a][b]
                rows.append(row)
    return QMatrix(rows, cols=d * d).kernel().dim if rows else d * d


def restricted_series_dim(module: PolySubmodule) -> int:
    """Dimension of the span of the restrictions of all d^beta."""
    d = module.dim
    degree = 0
    for p in module.basis:
        t = p.total_degree()
        if isinstance(t, int):
            degree = max(degree, t)
    flat = []
    for beta in monomials_up_to_degree(module.n, degree):
        columns = []
        for p in module.basis:
            coords = module.coordinates_of(p.partial_multi(beta))
            assert coords is not None
            columns.append(coords)
        mat = QMatrix.from_columns(columns, rows=d)
        flat.append([mat.entries[r][c] for r in range(d) for c in range(d)])
    return QMatrix(flat, cols=d * d).rank()


def endomorphism_gap(module: PolySubmodule) -> dict:
    """Compare End(M) with the span of restricted operator series.

    Whether the two always agree for non-monomial submodules is left
    open by the theory; this reports what exhaustive small searches see.
    """
    end_dim = endomorphism_space_dim(module)
    series_dim = restricted_series_dim(module)
    return {
        "end_dim": end_dim,
        "series_dim": series_dim,
        "gap": end_dim - series_dim,
    }


def restriction_kernel_dim(module: MonomialSubmodule, trunc: int) -> int:
    """Dimension of the kernel of series restriction at a truncation.

    The quotient description of the automorphism group of a submodule
    comes with this kernel; no closed form is claimed, the number is
    simply computed.
    """
    if trunc < module.max_degree:
        raise TruncationTooLow(
            f"truncation {trunc} below the submodule degree {module.max_degree}"
        )
    alphas = list(monomials_up_to_degree(module.n, trunc))
    d = module.m
    space = module.as_poly_submodule()
    rows = []
    for alpha in alphas:
        columns = []
        for p in space.basis:
            coords = space.coordinates_of(p.partial_multi(alpha))
            assert coords is not None
            columns.append(coords)
        mat = QMatrix.from_columns(columns, rows=d)
        rows.append([mat.entries[r][c] for r in range(d) for c in range(d)])
    # Rows are images of the basis operators d^alpha; the kernel of the
    # restriction is what the rank misses.
    return len(alphas) - QMatrix(rows, cols=d * d).rank()
