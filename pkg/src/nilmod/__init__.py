"""Exact computational algebra for modules over polynomial rings.

A finite-dimensional module over a polynomial ring is a tuple of
pairwise-commuting matrices.  When the action is nilpotent with a
one-dimensional socle, the module embeds uniquely into the space of
polynomials carrying the partial-derivative action; the image is a
canonical form that decides isomorphism.  Around that core: exact
rational linear algebra, sparse multivariate polynomials, truncated
differential-operator series, isomorphism extension, and automorphism
groups of monomial submodules.
"""

from .errors import (
    DimensionTooLarge,
    Incompatible,
    IncompatibleMap,
    NilmodError,
    NoCommonEigenline,
    NonCommuting,
    NonRationalEigenvalue,
    NotAnEndomorphism,
    NothingToExtend,
    NotNilpotent,
    SocleNotOneDimensional,
    TruncationTooLow,
    WrongConstantTerm,
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
    MINUS_INFINITY,
    MultiIndex,
    Poly,
    grlex_key,
    is_lower_set,
    lower_set_closure,
    monomials_of_degree,
    monomials_up_to_degree,
    multi_factorial,
)
from .modcore import (
    ExpSubmodule,
    FDModule,
    ModuleMap,
    PolySubmodule,
    action_matrices,
    as_matrices,
    codim1_submodule,
    is_nilpotent,
    random_nilpotent_module,
    restrict_module,
    socle,
    socle_eigenvalues,
    submodule_from_polys,
    twist,
    validate,
)
from .embed import (
    EmbeddingResult,
    brute_force_isomorphic,
    canonical_form,
    embed_general,
    embed_nilpotent,
    is_isomorphic,
    potential,
)
from .diffop import (
    AutDescriptor,
    AutGroup,
    DiffOpSeries,
    MonomialSubmodule,
    aut_structure,
    endomorphism_gap,
    extend_iso,
    extend_iso_step,
    extract_coeffs,
    monomial_images,
    restrict,
    restriction_kernel_dim,
    series_exp,
    series_log,
)

__version__ = "0.1.0"

__all__ = [
    "AutDescriptor",
    "AutGroup",
    "DiffOpSeries",
    "DimensionTooLarge",
    "EmbeddingResult",
    "ExpSubmodule",
    "FDModule",
    "Incompatible",
    "IncompatibleMap",
    "MINUS_INFINITY",
    "ModuleMap",
    "MonomialSubmodule",
    "MultiIndex",
    "NilmodError",
    "NoCommonEigenline",
    "NonCommuting",
    "NonRationalEigenvalue",
    "NotAnEndomorphism",
    "NothingToExtend",
    "NotNilpotent",
    "Poly",
    "PolySubmodule",
    "QMatrix",
    "SocleNotOneDimensional",
    "Subspace",
    "TruncationTooLow",
    "Vector",
    "WrongConstantTerm",
    "action_matrices",
    "as_matrices",
    "aut_structure",
    "brute_force_isomorphic",
    "canonical_form",
    "codim1_submodule",
    "embed_general",
    "embed_nilpotent",
    "endomorphism_gap",
    "extend_iso",
    "extend_iso_step",
    "extract_coeffs",
    "format_rational",
    "grlex_key",
    "is_isomorphic",
    "is_lower_set",
    "is_nilpotent",
    "lower_set_closure",
    "monomial_images",
    "monomials_of_degree",
    "monomials_up_to_degree",
    "multi_factorial",
    "parse_rational",
    "potential",
    "random_nilpotent_module",
    "restrict",
    "restrict_module",
    "restriction_kernel_dim",
    "series_exp",
    "series_log",
    "socle",
    "socle_eigenvalues",
    "standard_basis_vector",
    "submodule_from_polys",
    "twist",
    "validate",
    "vector",
]
