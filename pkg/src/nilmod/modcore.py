"""Finite-dimensional modules over a polynomial ring in n variables.

A module is a rational vector space together with n pairwise-commuting
matrices giving the action of the variables.  This layer owns
validation, nilpotency, socles, codimension-1 submodules, twisting by a
rational shift of the variables, the bridge to derivative-closed
polynomial subspaces, and seeded random generators for tests.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import (
    NoCommonEigenline,
    NonCommuting,
    NonRationalEigenvalue,
    NotNilpotent,
)
from .exactalg import (
    QMatrix,
    Subspace,
    Vector,
    format_rational,
    parse_rational,
    standard_basis_vector,
    vector,
)
from .multipoly import (
    MultiIndex,
    Poly,
    grlex_key,
    lower_set_closure,
    monomials_up_to_degree,
    poly_to_vector,
    vector_to_poly,
)


class FDModule:
    """n pairwise-commuting d x d matrices; commutativity is checked."""

    __slots__ = ("n", "dim", "matrices")

    def __init__(self, n: int, matrices: Sequence[QMatrix]):
        matrices = tuple(matrices)
        if n < 1 or len(matrices) != n:
            raise ValueError("need one action matrix per variable")
        dim = matrices[0].rows
        for m in matrices:
            if not m.is_square() or m.rows != dim:
                raise ValueError("action matrices must be square and equal-sized")
        for i in range(n):
            for j in range(i + 1, n):
                if matrices[i] * matrices[j] != matrices[j] * matrices[i]:
                    raise NonCommuting(i + 1, j + 1)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "matrices", matrices)

    def __setattr__(self, name, value):
        raise AttributeError("FDModule is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FDModule)
            and self.n == other.n
            and self.matrices == other.matrices
        )

    def __hash__(self) -> int:
        return hash((self.n, self.matrices))

    def __repr__(self) -> str:
        return f"FDModule(n={self.n}, dim={self.dim})"

    def action(self, i: int) -> QMatrix:
        """Matrix of x_i (1-based)."""
        if not 1 <= i <= self.n:
            raise IndexError(f"variable index {i} out of range 1..{self.n}")
        return self.matrices[i - 1]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dim": self.dim,
            "matrices": [m.to_json() for m in self.matrices],
        }

    @classmethod
    def from_json(cls, data) -> "FDModule":
        n = data["n"]
        matrices = [QMatrix.from_json(m) for m in data["matrices"]]
        mod = cls(n, matrices)
        if "dim" in data and data["dim"] != mod.dim:
            raise ValueError("declared dim disagrees with the matrices")
        return mod


def validate(matrices: Sequence[QMatrix]) -> FDModule:
    """Build an FDModule from candidate matrices, checking commutativity."""
    return FDModule(len(matrices), matrices)


def _is_nilpotent_matrix(m: QMatrix) -> bool:
    # Square repeatedly: S^(2^k) = 0 for 2^k >= dim iff S is nilpotent.
    d = m.rows
    if d == 0:
        return True
    power = m
    steps = 1
    while steps < d:
        if power.is_zero():
            return True
        power = power * power
        steps *= 2
    return power.is_zero()


def is_nilpotent(module: FDModule) -> bool:
    """True iff every action matrix is nilpotent.

    For commuting matrices this is equivalent to every zero-constant
    polynomial acting nilpotently.
    """
    return all(_is_nilpotent_matrix(m) for m in module.matrices)


def socle(module: FDModule) -> Subspace:
    """Intersection of the kernels of all action matrices."""
    if not is_nilpotent(module):
        raise NotNilpotent("socle is only computed for nilpotent modules")
    result = Subspace.full(module.dim)
    for m in module.matrices:
        result = result.intersect(m.kernel())
    return result


def _restriction_matrix(m: QMatrix, space: Subspace) -> QMatrix:
    """Matrix of m on an m-invariant subspace, in the subspace's basis."""
    columns = []
    for b in space.basis:
        coords = space.coordinates_of(m.apply(b))
        if coords is None:
            raise ValueError("subspace is not invariant under the matrix")
        columns.append(coords)
    return QMatrix.from_columns(columns, rows=space.dim)


def restrict_module(module: FDModule, space: Subspace) -> FDModule:
    """The module's action on an invariant subspace, in that subspace's basis."""
    return FDModule(module.n, [_restriction_matrix(m, space) for m in module.matrices])


def codim1_submodule(
    module: FDModule, rng: Optional[random.Random] = None
) -> tuple[Subspace, FDModule, Vector]:
    """A codimension-1 invariant subspace W, the restricted module, and a
    complement vector v_0.

    W contains U = sum of the images of all action matrices (so it is
    automatically invariant) and is completed to dimension d-1 with
    standard basis vectors in index order; v_0 is the first standard
    basis vector outside W.  Passing an rng completes U with random
    vectors instead, which is how choice-independence of downstream
    canonical forms gets exercised.
    """
    d = module.dim
    image_sum = Subspace.zero(d)
    for m in module.matrices:
        image_sum = image_sum.sum(
            Subspace.from_vectors(d, [m.column(j) for j in range(d)])
        )
    if image_sum.dim >= d:
        raise NotNilpotent("the images of the action matrices span the whole space")
    w = image_sum
    if rng is None:
        for j in range(d):
            if w.dim == d - 1:
                break
            candidate = w.sum(Subspace.from_vectors(d, [standard_basis_vector(d, j)]))
            if candidate.dim > w.dim:
                w = candidate
    else:
        while w.dim < d - 1:
            v = tuple(Fraction(rng.randint(-4, 4)) for _ in range(d))
            candidate = w.sum(Subspace.from_vectors(d, [v]))
            if candidate.dim > w.dim:
                w = candidate
    v0 = None
    for j in range(d):
        e = standard_basis_vector(d, j)
        if not w.contains(e):
            v0 = e
            break
    assert v0 is not None, "a proper subspace misses some standard basis vector"
    return w, restrict_module(module, w), v0


def twist(module: FDModule, shift: Sequence) -> FDModule:
    """Replace the action of x_i by S_i - shift_i * I (substitution twist)."""
    shift = vector(shift)
    if len(shift) != module.n:
        raise ValueError("shift length differs from the variable count")
    eye = QMatrix.identity(module.dim)
    return FDModule(
        module.n,
        [m - eye.scale(a) for m, a in zip(module.matrices, shift)],
    )


class PolySubmodule:
    """A derivative-closed subspace of polynomials containing the constants.

    Stored canonically: the list of monomials occurring in any member
    (descending monomial order) and the RREF basis of coefficient
    vectors over that list.  Equality of the stored data is equality of
    the subspaces.
    """

    __slots__ = ("n", "monomial_list", "coords", "basis")

    def __init__(self, n: int, polys: Sequence[Poly]):
        support: set[MultiIndex] = set()
        for p in polys:
            if p.n != n:
                raise ValueError("variable count mismatch")
            support |= p.monomials()
        monomial_list = tuple(sorted(support, key=grlex_key, reverse=True))
        rows = []
        for p in polys:
            v = poly_to_vector(p, monomial_list)
            assert v is not None
            rows.append(v)
        coords = Subspace.from_vectors(len(monomial_list), rows)
        basis = tuple(
            vector_to_poly(row, monomial_list, n) for row in coords.basis
        )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "monomial_list", monomial_list)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "basis", basis)
        self._validate_closed()

    def _validate_closed(self) -> None:
        if not self.contains(Poly.one(self.n)):
            raise ValueError("a polynomial submodule must contain the constants")
        for p in self.basis:
            for i in range(1, self.n + 1):
                if not self.contains(p.partial(i)):
                    raise ValueError("subspace is not closed under differentiation")

    def __setattr__(self, name, value):
        raise AttributeError("PolySubmodule is immutable")

    @property
    def dim(self) -> int:
        return self.coords.dim

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PolySubmodule)
            and self.n == other.n
            and self.monomial_list == other.monomial_list
            and self.coords == other.coords
        )

    def __hash__(self) -> int:
        return hash((self.n, self.monomial_list, self.coords))

    def __repr__(self) -> str:
        return f"PolySubmodule(n={self.n}, dim={self.dim})"

    def coordinates_of(self, p: Poly) -> Optional[Vector]:
        """Coordinates of p over the canonical basis, or None if outside."""
        if p.n != self.n:
            raise ValueError("variable count mismatch")
        v = poly_to_vector(p, self.monomial_list)
        if v is None:
            return None
        return self.coords.coordinates_of(v)

    def contains(self, p: Poly) -> bool:
        return self.coordinates_of(p) is not None

    def from_coordinates(self, coords: Sequence) -> Poly:
        coords = vector(coords)
        if len(coords) != self.dim:
            raise ValueError("coordinate length differs from dimension")
        out = Poly.zero(self.n)
        for c, p in zip(coords, self.basis):
            if c != 0:
                out = out + p.scale(c)
        return out

    def action_matrices(self) -> tuple[QMatrix, ...]:
        """Matrices of the partial derivatives in the canonical basis."""
        out = []
        for i in range(1, self.n + 1):
            columns = []
            for p in self.basis:
                coords = self.coordinates_of(p.partial(i))
                assert coords is not None
                columns.append(coords)
            out.append(QMatrix.from_columns(columns, rows=self.dim))
        return tuple(out)

    def to_json(self) -> dict:
        return {"n": self.n, "basis": [p.to_json() for p in self.basis]}

    @classmethod
    def from_json(cls, data) -> "PolySubmodule":
        n = data["n"]
        return cls(n, [Poly.from_json(p, n) for p in data["basis"]])


def submodule_from_polys(n: int, gens: Sequence[Poly]) -> PolySubmodule:
    """Smallest derivative-closed subspace containing the generators and 1."""
    support: set[MultiIndex] = {(0,) * n}
    for g in gens:
        if g.n != n:
            raise ValueError("variable count mismatch")
        support |= lower_set_closure(g.monomials())
    monomial_list = tuple(sorted(support, key=grlex_key, reverse=True))
    width = len(monomial_list)
    span = Subspace.zero(width)
    queue = [Poly.one(n)] + [g for g in gens if not g.is_zero()]
    members: list[Poly] = []
    while queue:
        p = queue.pop()
        v = poly_to_vector(p, monomial_list)
        assert v is not None, "derivatives stay inside the lower-set closure"
        if span.contains(v):
            continue
        span = span.sum(Subspace.from_vectors(width, [v]))
        members.append(p)
        for i in range(1, n + 1):
            queue.append(p.partial(i))
    return PolySubmodule(n, members)


class ExpSubmodule:
    """A polynomial submodule shifted by an exponential weight.

    Models exp(a . x) * W: the action of x_i on coordinates is
    a_i * I + D_i where D_i differentiates the polynomial part.
    """

    __slots__ = ("eigenvalues", "part")

    def __init__(self, eigenvalues: Sequence, part: PolySubmodule):
        eigenvalues = vector(eigenvalues)
        if len(eigenvalues) != part.n:
            raise ValueError("eigenvalue count differs from the variable count")
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "part", part)

    def __setattr__(self, name, value):
        raise AttributeError("ExpSubmodule is immutable")

    @property
    def n(self) -> int:
        return self.part.n

    @property
    def dim(self) -> int:
        return self.part.dim

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExpSubmodule)
            and self.eigenvalues == other.eigenvalues
            and self.part == other.part
        )

    def __hash__(self) -> int:
        return hash((self.eigenvalues, self.part))

    def action_matrices(self) -> tuple[QMatrix, ...]:
        eye = QMatrix.identity(self.part.dim)
        return tuple(
            d + eye.scale(a)
            for d, a in zip(self.part.action_matrices(), self.eigenvalues)
        )

    def to_json(self) -> dict:
        return {
            "eigenvalues": [format_rational(a) for a in self.eigenvalues],
            "part": self.part.to_json(),
        }

    @classmethod
    def from_json(cls, data) -> "ExpSubmodule":
        return cls(
            [parse_rational(a) for a in data["eigenvalues"]],
            PolySubmodule.from_json(data["part"]),
        )


ModuleLike = Union[FDModule, PolySubmodule, ExpSubmodule]


def action_matrices(module: ModuleLike) -> tuple[QMatrix, ...]:
    """The variable-action matrices of any module-like object, in its
    canonical basis."""
    if isinstance(module, FDModule):
        return module.matrices
    return module.action_matrices()


def module_dim(module: ModuleLike) -> int:
    return module.dim


class ModuleMap:
    """A linear map between modules, stored as exact coordinates.

    Column j of `images` holds the coordinates (in the target's
    canonical basis) of the image of the source's j-th basis vector.
    Construction does not check the intertwining identity; call
    is_intertwining / is_isomorphism where the contract requires it.
    """

    __slots__ = ("source", "target", "images")

    def __init__(self, source: ModuleLike, target: ModuleLike, images: QMatrix):
        if images.cols != module_dim(source) or images.rows != module_dim(target):
            raise ValueError("image matrix shape disagrees with the modules")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "images", images)

    def __setattr__(self, name, value):
        raise AttributeError("ModuleMap is immutable")

    @classmethod
    def identity(cls, module: ModuleLike) -> "ModuleMap":
        return cls(module, module, QMatrix.identity(module_dim(module)))

    def is_intertwining(self) -> bool:
        """Whether map(x_i . v) = x_i . map(v) for all i, as matrices."""
        src = action_matrices(self.source)
        tgt = action_matrices(self.target)
        if len(src) != len(tgt):
            return False
        return all(self.images * s == t * self.images for s, t in zip(src, tgt))

    def rank(self) -> int:
        return self.images.rank()

    def is_isomorphism(self) -> bool:
        return (
            self.images.is_square()
            and self.images.inverse() is not None
            and self.is_intertwining()
        )

    def apply_coords(self, v: Sequence) -> Vector:
        return self.images.apply(v)

    def image_poly(self, j: int) -> Poly:
        """The image of source basis vector j as a polynomial (Poly targets)."""
        target = self.target
        if isinstance(target, ExpSubmodule):
            target = target.part
        if not isinstance(target, PolySubmodule):
            raise TypeError("target does not have a polynomial basis")
        return target.from_coordinates(self.images.column(j))

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """self after other."""
        if other.target is not self.source and other.target != self.source:
            raise ValueError("maps are not composable")
        return ModuleMap(other.source, self.target, self.images * other.images)


def as_matrices(module: PolySubmodule) -> tuple[FDModule, ModuleMap]:
    """The matrix module of the derivative action on a polynomial
    submodule, plus the identifying map onto it."""
    fd = FDModule(module.n, module.action_matrices())
    return fd, ModuleMap(fd, module, QMatrix.identity(module.dim))


def random_poly(n: int, degree_bound: int, rng: random.Random) -> Poly:
    """A random polynomial with small integer coefficients, deterministic
    in the rng state."""
    terms = {}
    for alpha in monomials_up_to_degree(n, degree_bound):
        if rng.random() < 0.55:
            terms[alpha] = rng.randint(-5, 5)
    return Poly(n, terms)


def random_nilpotent_module(n: int, degree_bound: int, seed: int) -> FDModule:
    """Seeded generator: the derivative module of a random polynomial.

    Always nilpotent with one-dimensional socle, by construction.
    """
    rng = random.Random(seed)
    p = random_poly(n, degree_bound, rng)
    fd, _ = as_matrices(submodule_from_polys(n, [p]))
    return fd


# --- socle eigenvalues -------------------------------------------------

def _char_poly(m: QMatrix) -> list[Fraction]:
    """Coefficients c_0..c_d (ascending) of det(tI - m), monic."""
    d = m.rows
    coeffs = [Fraction(0)] * (d + 1)
    coeffs[d] = Fraction(1)
    mk = QMatrix.zeros(d, d)
    eye = QMatrix.identity(d)
    last = Fraction(1)
    for k in range(1, d + 1):
        mk = m * mk + eye.scale(last)
        am = m * mk
        trace = sum(am.entries[i][i] for i in range(d))
        last = -trace / k
        coeffs[d - k] = last
    return coeffs


def _poly_div_linear(coeffs: list[Fraction], root: Fraction) -> Optional[list[Fraction]]:
    """Divide by (t - root); None when root is not actually a root."""
    horner = []
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * root + c
        horner.append(acc)
    remainder = horner.pop()
    if remainder != 0:
        return None
    return list(reversed(horner))


def _rational_roots(coeffs: list[Fraction]) -> tuple[list[Fraction], bool]:
    """Distinct rational roots of a monic rational polynomial, plus
    whether it splits completely into rational linear factors."""
    work = list(coeffs)
    while len(work) > 1 and work[-1] == 0:
        work.pop()
    degree = len(work) - 1
    roots: list[Fraction] = []
    # Strip zero roots first.
    while degree > 0 and work[0] == 0:
        if not roots or roots[-1] != 0:
            roots.append(Fraction(0))
        work = work[1:]
        degree -= 1
    while degree > 0:
        root = _find_one_rational_root(work)
        if root is None:
            return roots, False
        roots.append(root)
        while True:
            quotient = _poly_div_linear(work, root)
            if quotient is None:
                break
            work = quotient
            degree -= 1
    return roots, True


def _find_one_rational_root(coeffs: list[Fraction]) -> Optional[Fraction]:
    from math import gcd

    scale = 1
    for c in coeffs:
        scale = scale * c.denominator // gcd(scale, c.denominator)
    ints = [int(c * scale) for c in coeffs]
    a0, ad = ints[0], ints[-1]
    if a0 == 0:
        return Fraction(0)

    def divisors(v: int) -> list[int]:
        v = abs(v)
        out = []
        f = 1
        while f * f <= v:
            if v % f == 0:
                out.append(f)
                if f != v // f:
                    out.append(v // f)
            f += 1
        return sorted(out)

    for q in divisors(ad):
        for p in divisors(a0):
            for cand in (Fraction(p, q), Fraction(-p, q)):
                acc = Fraction(0)
                for c in reversed(coeffs):
                    acc = acc * cand + c
                if acc == 0:
                    return cand
    return None


def _eigenvalue_tuples(
    matrices: Sequence[QMatrix], space: Subspace
) -> tuple[list[tuple[Fraction, ...]], bool]:
    """All rational joint-eigenvalue tuples on a joint-invariant subspace.

    Refines the space one matrix at a time through restricted
    eigenspaces.  The flag reports whether some characteristic
    polynomial failed to split over the rationals along the way.
    """
    if not matrices:
        return [()], False
    head, tail = matrices[0], matrices[1:]
    restricted = _restriction_matrix(head, space)
    roots, split = _rational_roots(_char_poly(restricted))
    irrational = not split
    tuples: list[tuple[Fraction, ...]] = []
    eye = QMatrix.identity(space.dim)
    for lam in roots:
        ker = (restricted - eye.scale(lam)).kernel()
        lifted_vectors = []
        for coords in ker.basis:
            v = [Fraction(0)] * space.ambient_dim
            for c, row in zip(coords, space.basis):
                if c != 0:
                    v = [x + c * y for x, y in zip(v, row)]
            lifted_vectors.append(tuple(v))
        eigenspace = Subspace.from_vectors(space.ambient_dim, lifted_vectors)
        rest, sub_irr = _eigenvalue_tuples(tail, eigenspace)
        irrational = irrational or sub_irr
        tuples.extend((lam,) + t for t in rest)
    return tuples, irrational


def socle_eigenvalues(module: FDModule) -> tuple[Fraction, ...]:
    """The joint eigenvalue tuple on the unique common eigenline.

    The matrices are refined through successive restricted eigenspaces;
    exactly one rational tuple must survive.
    """
    if module.dim == 0:
        raise NoCommonEigenline("the zero module has no eigenline")
    tuples, irrational = _eigenvalue_tuples(
        module.matrices, Subspace.full(module.dim)
    )
    distinct = sorted(set(tuples))
    if not distinct:
        if irrational:
            raise NonRationalEigenvalue(
                "no rational joint eigenvalue exists; the socle eigenvalues "
                "lie in a proper extension field"
            )
        raise NoCommonEigenline("no common eigenline exists")
    if len(distinct) > 1:
        raise NoCommonEigenline(
            f"{len(distinct)} distinct joint eigenvalue tuples found"
        )
    return distinct[0]
