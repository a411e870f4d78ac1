"""Exact linear algebra over the rationals.

Dense matrices of `fractions.Fraction` entries with reduced row-echelon
forms, kernels, solving, and a small lattice of subspaces (sum,
intersection, membership).  Everything is exact: no floats, no
tolerances.  All values are immutable after construction and all
operations are pure functions.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Optional, Sequence

Vector = tuple[Fraction, ...]

_RATIONAL_RE = re.compile(r"^-?\d+(/[1-9]\d*)?$")


def format_rational(x: Fraction) -> str:
    """Render as "p/q", or just "p" when the denominator is 1."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    """Parse the "p/q" wire format (sign on the numerator only)."""
    if not isinstance(s, str) or not _RATIONAL_RE.match(s):
        raise ValueError(f"not a rational literal: {s!r}")
    return Fraction(s)


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def vector(entries: Iterable) -> Vector:
    return tuple(as_fraction(x) for x in entries)


class QMatrix:
    """Dense row-major matrix of exact rationals."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence], cols: Optional[int] = None):
        data = tuple(tuple(as_fraction(x) for x in row) for row in entries)
        if data:
            width = len(data[0])
            if any(len(row) != width for row in data):
                raise ValueError("ragged rows")
        else:
            width = cols if cols is not None else 0
        if cols is not None and width != cols:
            raise ValueError("explicit column count disagrees with rows")
        object.__setattr__(self, "rows", len(data))
        object.__setattr__(self, "cols", width)
        object.__setattr__(self, "entries", data)

    def __setattr__(self, name, value):
        raise AttributeError("QMatrix is immutable")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        zero = Fraction(0)
        return cls([[zero] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, d: int) -> "QMatrix":
        return cls(
            [[Fraction(1 if i == j else 0) for j in range(d)] for i in range(d)],
            cols=d,
        )

    @classmethod
    def from_columns(cls, columns: Sequence[Vector], rows: Optional[int] = None) -> "QMatrix":
        if not columns:
            return cls([], cols=0) if rows is None else cls([[] for _ in range(rows)], cols=0)
        height = len(columns[0])
        return cls([[col[i] for col in columns] for i in range(height)], cols=len(columns))

    def row(self, i: int) -> Vector:
        return self.entries[i]

    def column(self, j: int) -> Vector:
        return tuple(row[j] for row in self.entries)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self) -> str:
        body = "; ".join(
            " ".join(format_rational(x) for x in row) for row in self.entries
        )
        return f"QMatrix({self.rows}x{self.cols}: {body})"

    def __add__(self, other: "QMatrix") -> "QMatrix":
        self._check_same_shape(other)
        return QMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ],
            cols=self.cols,
        )

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        self._check_same_shape(other)
        return QMatrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ],
            cols=self.cols,
        )

    def __neg__(self) -> "QMatrix":
        return QMatrix([[-x for x in row] for row in self.entries], cols=self.cols)

    def scale(self, c) -> "QMatrix":
        c = as_fraction(c)
        return QMatrix([[c * x for x in row] for row in self.entries], cols=self.cols)

    def __mul__(self, other):
        if isinstance(other, QMatrix):
            return self.matmul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def matmul(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise ValueError("inner dimensions differ")
        ot = other.transpose().entries
        return QMatrix(
            [
                [sum(a * b for a, b in zip(row, col)) for col in ot]
                for row in self.entries
            ],
            cols=other.cols,
        )

    def apply(self, v: Sequence) -> Vector:
        """Matrix-vector product (column-vector convention)."""
        v = vector(v)
        if len(v) != self.cols:
            raise ValueError("vector length differs from column count")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.entries)

    def transpose(self) -> "QMatrix":
        return QMatrix(
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
            cols=self.rows,
        )

    def _check_same_shape(self, other: "QMatrix") -> None:
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch")

    def rref(self) -> "QMatrix":
        """The unique reduced row-echelon form (same row space)."""
        m = [list(row) for row in self.entries]
        piv_r = 0
        for c in range(self.cols):
            if piv_r == self.rows:
                break
            pr = None
            for r in range(piv_r, self.rows):
                if m[r][c] != 0:
                    pr = r
                    break
            if pr is None:
                continue
            m[piv_r], m[pr] = m[pr], m[piv_r]
            inv = Fraction(1) / m[piv_r][c]
            m[piv_r] = [inv * x for x in m[piv_r]]
            for r in range(self.rows):
                if r != piv_r and m[r][c] != 0:
                    factor = m[r][c]
                    m[r] = [x - factor * y for x, y in zip(m[r], m[piv_r])]
            piv_r += 1
        return QMatrix(m, cols=self.cols)

    def pivot_columns(self) -> tuple[int, ...]:
        """Pivot columns of the RREF (assumes `self` is already in RREF)."""
        pivots = []
        for r in range(self.rows):
            for c in range(self.cols):
                if self.entries[r][c] != 0:
                    pivots.append(c)
                    break
        return tuple(pivots)

    def rank(self) -> int:
        return len(self.rref().pivot_columns())

    def kernel(self) -> "Subspace":
        """The solution space of m.x = 0 as a canonical subspace."""
        R = self.rref()
        pivots = R.pivot_columns()
        pivot_of_col = {c: r for r, c in enumerate(pivots)}
        free = [c for c in range(self.cols) if c not in pivot_of_col]
        vectors = []
        for f in free:
            v = [Fraction(0)] * self.cols
            v[f] = Fraction(1)
            for c, r in pivot_of_col.items():
                v[c] = -R.entries[r][f]
            vectors.append(tuple(v))
        return Subspace.from_vectors(self.cols, vectors)

    def solve(self, b: Sequence) -> Optional[Vector]:
        """Some exact solution of m.x = b, or None if inconsistent.

        Free variables are set to zero, so the answer is deterministic.
        """
        b = vector(b)
        if len(b) != self.rows:
            raise ValueError("right-hand side length differs from row count")
        aug = QMatrix(
            [list(row) + [b[i]] for i, row in enumerate(self.entries)],
            cols=self.cols + 1,
        ).rref()
        x = [Fraction(0)] * self.cols
        for r in range(aug.rows):
            pivot = None
            for c in range(self.cols + 1):
                if aug.entries[r][c] != 0:
                    pivot = c
                    break
            if pivot is None:
                continue
            if pivot == self.cols:
                return None
            x[pivot] = aug.entries[r][self.cols]
        return tuple(x)

    def inverse(self) -> Optional["QMatrix"]:
        """Exact inverse, or None when singular."""
        if not self.is_square():
            raise ValueError("inverse of a non-square matrix")
        d = self.rows
        aug = QMatrix(
            [
                list(row) + [Fraction(1 if i == j else 0) for j in range(d)]
                for i, row in enumerate(self.entries)
            ],
            cols=2 * d,
        ).rref()
        for i in range(d):
            if aug.entries[i][i] != 1:
                return None
        return QMatrix([row[d:] for row in aug.entries], cols=d)

    def det(self) -> Fraction:
        """Exact determinant by fraction-free-ish Gaussian elimination."""
        if not self.is_square():
            raise ValueError("determinant of a non-square matrix")
        m = [list(row) for row in self.entries]
        d = self.rows
        det = Fraction(1)
        for c in range(d):
            pr = None
            for r in range(c, d):
                if m[r][c] != 0:
                    pr = r
                    break
            if pr is None:
                return Fraction(0)
            if pr != c:
                m[c], m[pr] = m[pr], m[c]
                det = -det
            det *= m[c][c]
            inv = Fraction(1) / m[c][c]
            for r in range(c + 1, d):
                if m[r][c] != 0:
                    factor = m[r][c] * inv
                    m[r] = [x - factor * y for x, y in zip(m[r], m[c])]
        return det

    def to_json(self) -> list[list[str]]:
        return [[format_rational(x) for x in row] for row in self.entries]

    @classmethod
    def from_json(cls, data) -> "QMatrix":
        if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
            raise ValueError("matrix JSON must be a nested array")
        return cls([[parse_rational(x) for x in row] for row in data])


class Subspace:
    """A linear subspace of Q^n held as a canonical RREF basis.

    Two subspaces are equal as sets of vectors iff their stored bases are
    identical, which makes equality a structural check.
    """

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, ambient_dim: int, basis: Sequence[Vector]):
        # Callers must pass canonical RREF rows; use from_vectors otherwise.
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "basis", tuple(vector(v) for v in basis))

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @classmethod
    def from_vectors(cls, ambient_dim: int, vectors: Iterable[Sequence]) -> "Subspace":
        rows = [vector(v) for v in vectors]
        for v in rows:
            if len(v) != ambient_dim:
                raise ValueError("vector length differs from ambient dimension")
        if not rows:
            return cls(ambient_dim, [])
        reduced = QMatrix(rows, cols=ambient_dim).rref()
        basis = [row for row in reduced.entries if any(x != 0 for x in row)]
        return cls(ambient_dim, basis)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, [])

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, QMatrix.identity(ambient_dim).entries)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def basis_matrix(self) -> QMatrix:
        return QMatrix(self.basis, cols=self.ambient_dim)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self.basis == other.basis
        )

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim {self.dim} of Q^{self.ambient_dim})"

    def coordinates_of(self, v: Sequence) -> Optional[Vector]:
        """Coordinates of v in the RREF basis, or None if v is outside.

        Because the basis is RREF, the coefficient of row r is just the
        entry of v at that row's pivot column.
        """
        v = vector(v)
        if len(v) != self.ambient_dim:
            raise ValueError("vector length differs from ambient dimension")
        pivots = self.basis_matrix().pivot_columns()
        coords = tuple(v[c] for c in pivots)
        residual = list(v)
        for coeff, row in zip(coords, self.basis):
            if coeff != 0:
                residual = [x - coeff * y for x, y in zip(residual, row)]
        if any(x != 0 for x in residual):
            return None
        return coords

    def contains(self, v: Sequence) -> bool:
        return self.coordinates_of(v) is not None

    def contains_subspace(self, other: "Subspace") -> bool:
        self._check_ambient(other)
        return all(self.contains(v) for v in other.basis)

    def sum(self, other: "Subspace") -> "Subspace":
        self._check_ambient(other)
        return Subspace.from_vectors(self.ambient_dim, self.basis + other.basis)

    def intersect(self, other: "Subspace") -> "Subspace":
        """Intersection via the kernel of the stacked-basis matrix."""
        self._check_ambient(other)
        p, q = self.dim, other.dim
        if p == 0 or q == 0:
            return Subspace.zero(self.ambient_dim)
        # Columns: coefficients (u, w) with u.A = w.B; kernel vectors give
        # intersection elements u.A.
        stacked = QMatrix(
            [
                [self.basis[k][i] for k in range(p)]
                + [-other.basis[k][i] for k in range(q)]
                for i in range(self.ambient_dim)
            ],
            cols=p + q,
        )
        vectors = []
        for uv in stacked.kernel().basis:
            u = uv[:p]
            vec = [Fraction(0)] * self.ambient_dim
            for coeff, row in zip(u, self.basis):
                if coeff != 0:
                    vec = [x + coeff * y for x, y in zip(vec, row)]
            vectors.append(tuple(vec))
        return Subspace.from_vectors(self.ambient_dim, vectors)

    def _check_ambient(self, other: "Subspace") -> None:
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")


def standard_basis_vector(ambient_dim: int, j: int) -> Vector:
    return tuple(Fraction(1 if i == j else 0) for i in range(ambient_dim))
