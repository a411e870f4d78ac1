"""Embedding nilpotent modules into the derivative module of polynomials.

The polynomial space in n variables is a module where x_i acts as
d/dx_i.  Every finite-dimensional nilpotent module whose socle is a
single line embeds into it, the image is unique, and equality of images
decides isomorphism.  Modules with a rational joint eigenvalue tuple
reduce to the nilpotent case by twisting and land in an exponentially
weighted copy instead.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    DimensionTooLarge,
    Incompatible,
    NotNilpotent,
    SocleNotOneDimensional,
)
from .exactalg import QMatrix, Subspace, Vector
from .modcore import (
    ExpSubmodule,
    FDModule,
    ModuleMap,
    PolySubmodule,
    codim1_submodule,
    is_nilpotent,
    socle,
    socle_eigenvalues,
    twist,
)
from .multipoly import Poly


class EmbeddingResult:
    """An isomorphism from a matrix module onto a polynomial submodule."""

    __slots__ = ("image", "map")

    def __init__(self, image: PolySubmodule, map: ModuleMap):
        object.__setattr__(self, "image", image)
        object.__setattr__(self, "map", map)

    def __setattr__(self, name, value):
        raise AttributeError("EmbeddingResult is immutable")

    def image_polys(self) -> tuple[Poly, ...]:
        """Image polynomial of each source basis vector, in order."""
        return tuple(
            self.map.image_poly(j) for j in range(self.map.images.cols)
        )

    def to_json(self) -> dict:
        return {
            "image": self.image.to_json(),
            "map": [p.to_json() for p in self.image_polys()],
        }


def potential(fs: Sequence[Poly], n: int) -> Poly:
    """The polynomial h with dh/dx_i = fs[i-1] for i = 1..len(fs).

    Mixed partials are checked first; the witness is the lexicographically
    first failing pair.  The output is normalized so that every term
    involves one of x_1..x_k — in particular the constant term is zero —
    which pins down the one representative of the solution class.
    """
    k = len(fs)
    if k > n:
        raise ValueError("more prescribed derivatives than variables")
    for f in fs:
        if f.n != n:
            raise ValueError("variable count mismatch")
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            if fs[i - 1].partial(j) != fs[j - 1].partial(i):
                raise Incompatible(i, j)
    h = Poly.zero(n)
    for i in range(1, k + 1):
        h = h + (fs[i - 1] - h.partial(i)).integrate(i)
    return h


def _check_embeddable(module: FDModule) -> None:
    if not is_nilpotent(module):
        raise NotNilpotent("only nilpotent modules embed into the derivative module")
    if module.dim == 0:
        raise SocleNotOneDimensional("the zero module has no socle line")
    if socle(module).dim != 1:
        raise SocleNotOneDimensional(
            f"socle has dimension {socle(module).dim}, not 1"
        )


def _embed_recursive(
    module: FDModule, rng: Optional[random.Random]
) -> tuple[PolySubmodule, list[Poly]]:
    """Returns the image and the image polynomial of each basis vector."""
    n, d = module.n, module.dim
    if d == 1:
        return PolySubmodule(n, [Poly.one(n)]), [Poly.one(n)]
    w, restriction, v0 = codim1_submodule(module, rng)
    sub_image, sub_polys = _embed_recursive(restriction, rng)

    def phi_w(coords: Vector) -> Poly:
        out = Poly.zero(n)
        for c, p in zip(coords, sub_polys):
            if c != 0:
                out = out + p.scale(c)
        return out

    fs = []
    for i in range(1, n + 1):
        coords = w.coordinates_of(module.action(i).apply(v0))
        assert coords is not None, "images of the action lie inside the hyperplane"
        fs.append(phi_w(coords))
    h = potential(fs, n)
    assert not sub_image.contains(h), "the new potential must leave the image"
    image = PolySubmodule(n, list(sub_image.basis) + [h])

    # Express each standard basis vector over (basis of W, v0) to extend
    # the map by v0 -> h.
    change = QMatrix(list(w.basis) + [v0], cols=d).transpose()
    inv = change.inverse()
    assert inv is not None, "hyperplane basis plus complement vector spans"
    polys = []
    for m in range(d):
        coeffs = inv.column(m)
        p = phi_w(coeffs[: d - 1])
        if coeffs[d - 1] != 0:
            p = p + h.scale(coeffs[d - 1])
        polys.append(p)
    return image, polys


def embed_nilpotent(
    module: FDModule, rng: Optional[random.Random] = None
) -> EmbeddingResult:
    """Embed a nilpotent module with one-dimensional socle.

    Recursive construction: peel off a codimension-1 submodule, embed
    it, and integrate the images of the complement vector's action to
    extend the map.  The optional rng randomizes the internal
    hyperplane choices; the image is the same either way.
    """
    _check_embeddable(module)
    image, polys = _embed_recursive(module, rng)
    columns = []
    for p in polys:
        coords = image.coordinates_of(p)
        assert coords is not None
        columns.append(coords)
    images = QMatrix.from_columns(columns, rows=image.dim)
    assert images.rank() == module.dim, "the embedding must be injective"
    return EmbeddingResult(image, ModuleMap(module, image, images))


def canonical_form(
    module: FDModule, rng: Optional[random.Random] = None
) -> PolySubmodule:
    """The unique polynomial submodule isomorphic to the module.

    A complete isomorphism invariant: two modules are isomorphic exactly
    when their canonical forms are equal.
    """
    return embed_nilpotent(module, rng).image


def is_isomorphic(first: FDModule, second: FDModule) -> bool:
    if first.n != second.n:
        raise ValueError("variable count mismatch")
    if first.dim != second.dim:
        return False
    return canonical_form(first) == canonical_form(second)


def _intertwiner_space(first: FDModule, second: FDModule) -> list[QMatrix]:
    """Basis of {P : P S_i = T_i P for all i} as d x d matrices."""
    d = first.dim
    rows = []
    for s, t in zip(first.matrices, second.matrices):
        for a in range(d):
            for c in range(d):
                row = [Fraction(0)] * (d * d)
                for b in range(d):
                    row[a * d + b] += s.entries[b][c]
                    row[b * d + c] -= t.entries[a][b]
                rows.append(row)
    if not rows:
        kernel = Subspace.full(d * d)
    else:
        kernel = QMatrix(rows, cols=d * d).kernel()
    return [
        QMatrix([v[r * d : (r + 1) * d] for r in range(d)], cols=d)
        for v in kernel.basis
    ]


def _symbolic_det(mats: list[QMatrix], d: int) -> Poly:
    """det(sum t_m B_m) as a polynomial in the t_m, by memoized Laplace
    expansion along columns."""
    k = len(mats)
    entry = [
        [
            Poly(
                k,
                {
                    tuple(1 if v == m else 0 for v in range(k)): mats[m].entries[r][c]
                    for m in range(k)
                },
            )
            for c in range(d)
        ]
        for r in range(d)
    ]
    memo: dict[tuple[int, ...], Poly] = {}

    def minor(rows: tuple[int, ...]) -> Poly:
        if not rows:
            return Poly.one(k)
        cached = memo.get(rows)
        if cached is not None:
            return cached
        col = d - len(rows)
        total = Poly.zero(k)
        for pos, r in enumerate(rows):
            e = entry[r][col]
            if e.is_zero():
                continue
            term = e * minor(rows[:pos] + rows[pos + 1 :])
            total = total + (term if pos % 2 == 0 else -term)
        memo[rows] = total
        return total

    return minor(tuple(range(d)))


def brute_force_isomorphic(
    first: FDModule, second: FDModule, max_dim: int = 6
) -> bool:
    """Ground-truth isomorphism test by solving the intertwiner system.

    The solution space is computed exactly; an invertible element exists
    iff the determinant, as a polynomial on that space, is nonzero —
    over the rationals that is decided by symbolic expansion.  Intended
    as an oracle at small dimensions.
    """
    if first.n != second.n:
        raise ValueError("variable count mismatch")
    if max(first.dim, second.dim) > max_dim:
        raise DimensionTooLarge(
            f"brute-force oracle is limited to dimension {max_dim}"
        )
    if first.dim != second.dim:
        return False
    if first.dim == 0:
        return True
    basis = _intertwiner_space(first, second)
    if not basis:
        return False
    return not _symbolic_det(basis, first.dim).is_zero()


def embed_general(
    module: FDModule, rng: Optional[random.Random] = None
) -> tuple[ExpSubmodule, ModuleMap]:
    """Embed a module with a unique rational joint eigenvalue tuple.

    Twisting by the socle eigenvalues reduces to the nilpotent case; the
    image lives in the exponentially weighted module, where x_i acts as
    eigenvalue_i + d/dx_i, and the returned map intertwines exactly that
    action.
    """
    alpha = socle_eigenvalues(module)
    twisted = twist(module, alpha)
    if not is_nilpotent(twisted):
        raise SocleNotOneDimensional(
            "the action is not nilpotent after twisting by the socle eigenvalues"
        )
    result = embed_nilpotent(twisted, rng)
    weighted = ExpSubmodule(alpha, result.image)
    return weighted, ModuleMap(module, weighted, result.map.images)
