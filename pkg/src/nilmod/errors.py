"""Typed domain errors raised across the library.

Every error carries enough structure for a machine-readable report: the
CLI serializes the class name as the error kind.
"""

from __future__ import annotations


class NilmodError(Exception):
    """Base class for all domain errors."""


class NonCommuting(NilmodError):
    """A pair of action matrices fails to commute (1-based indices)."""

    def __init__(self, i: int, j: int):
        self.i = i
        self.j = j
        super().__init__(f"matrices {i} and {j} do not commute")


class NotNilpotent(NilmodError):
    """An operation requiring a nilpotent module got a non-nilpotent one."""


class SocleNotOneDimensional(NilmodError):
    """The module's socle is not a single line."""


class NoCommonEigenline(SocleNotOneDimensional):
    """No unique common eigenline exists for the action matrices.

    This is a special case of the socle failing to be one-dimensional
    under the general (possibly non-nilpotent) action.
    """


class NonRationalEigenvalue(NilmodError):
    """A required eigenvalue lies outside the rational field."""


class Incompatible(NilmodError):
    """Prescribed partial derivatives have asymmetric mixed partials."""

    def __init__(self, i: int, j: int):
        self.i = i
        self.j = j
        super().__init__(f"incompatible pair ({i}, {j}): mixed partials differ")


class TruncationTooLow(NilmodError):
    """A series' truncation degree cannot accommodate the operand."""


class NotAnEndomorphism(NilmodError):
    """A monomial-image table does not commute with the partial derivatives."""

    def __init__(self, i: int, witness: tuple[int, ...]):
        self.i = i
        self.witness = witness
        super().__init__(
            f"map does not commute with derivative {i} at monomial {witness}"
        )


class WrongConstantTerm(NilmodError):
    """Series exp/log called with a constant term outside its domain."""


class DimensionTooLarge(NilmodError):
    """Input exceeds the configured bound of the brute-force oracle."""


class NothingToExtend(NilmodError):
    """No monomial is available to adjoin during an extension step."""


class IncompatibleMap(NilmodError):
    """A supplied map is not an intertwining bijection between its modules."""
