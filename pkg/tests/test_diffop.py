"""Tests for truncated differential-operator series and everything
built on them: coefficient extraction, composition, exp/log, submodule
restriction, isomorphism extension, and automorphism groups.

Oracles: the falling-factorial formula for d^alpha on monomials,
operator composition checked pointwise, and matrix products for the
group structure.
"""

import math
import random
from fractions import Fraction

import pytest

from nilmod.diffop import (
    AutDescriptor,
    AutGroup,
    DiffOpSeries,
    MonomialSubmodule,
    aut_structure,
    endomorphism_gap,
    endomorphism_space_dim,
    extend_iso,
    extend_iso_step,
    extract_coeffs,
    monomial_images,
    restrict,
    restricted_series_dim,
    restriction_kernel_dim,
    series_exp,
    series_log,
)
from nilmod.errors import (
    IncompatibleMap,
    NotAnEndomorphism,
    NothingToExtend,
    TruncationTooLow,
    WrongConstantTerm,
)
from nilmod.exactalg import QMatrix
from nilmod.modcore import ModuleMap, PolySubmodule, submodule_from_polys
from nilmod.multipoly import (
    Poly,
    lower_set_closure,
    monomials_up_to_degree,
)


def random_series(rng, n, trunc, zero_unit=False, unit_one=False):
    coeffs = {}
    for alpha in monomials_up_to_degree(n, trunc):
        if rng.random() < 0.5:
            coeffs[alpha] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    origin = (0,) * n
    if zero_unit:
        coeffs.pop(origin, None)
    elif unit_one:
        coeffs[origin] = Fraction(1)
    return DiffOpSeries(n, trunc, coeffs)


def random_poly(rng, n, degree):
    return Poly(
        n,
        {
            alpha: Fraction(rng.randint(-4, 4))
            for alpha in monomials_up_to_degree(n, degree)
            if rng.random() < 0.5
        },
    )


def falling_derivative(beta, alpha, n):
    """d^alpha x^beta by the falling-factorial formula."""
    if any(a > b for a, b in zip(alpha, beta)):
        return Poly.zero(n)
    coef = 1
    for a, b in zip(alpha, beta):
        coef *= math.factorial(b) // math.factorial(b - a)
    return Poly(n, {tuple(b - a for a, b in zip(alpha, beta)): coef})


# --- series construction ----------------------------------------------------

def test_series_drops_zeros_and_validates():
    s = DiffOpSeries(2, 2, {(1, 0): 0, (0, 1): 3})
    assert s.coeffs == {(0, 1): Fraction(3)}
    with pytest.raises(ValueError):
        DiffOpSeries(2, 1, {(1, 1): 1})
    with pytest.raises(ValueError):
        DiffOpSeries(2, 3, {(1,): 1})
    with pytest.raises(ValueError):
        DiffOpSeries(2, 3, {(-1, 0): 1})


def test_series_unit_and_accessors():
    s = DiffOpSeries(2, 2, {(0, 0): Fraction(5, 2), (1, 1): -1})
    assert s.unit == Fraction(5, 2)
    assert s.coeff((1, 1)) == -1
    assert s.coeff((2, 0)) == 0
    assert DiffOpSeries.identity(2, 3).unit == 1
    assert DiffOpSeries.derivative(2, 3, 2).coeff((0, 1)) == 1


def test_series_arithmetic():
    a = DiffOpSeries(1, 2, {(0,): 1, (2,): 3})
    b = DiffOpSeries(1, 2, {(0,): -1, (1,): 2})
    assert (a + b).coeffs == {(1,): Fraction(2), (2,): Fraction(3)}
    assert (a - a) == DiffOpSeries.zero(1, 2)
    assert (-b).coeff((1,)) == -2
    assert a.scale(Fraction(1, 3)).coeff((2,)) == 1


def test_series_add_truncates_to_min():
    a = DiffOpSeries(1, 3, {(3,): 1})
    b = DiffOpSeries(1, 2, {(1,): 1})
    total = a + b
    assert total.trunc == 2
    assert total.coeffs == {(1,): Fraction(1)}


def test_series_json_round_trip():
    rng = random.Random(401)
    for _ in range(10):
        s = random_series(rng, 2, 3)
        assert DiffOpSeries.from_json(s.to_json()) == s


# --- application -------------------------------------------------------------

def test_apply_identity_is_identity():
    rng = random.Random(403)
    ident = DiffOpSeries.identity(2, 4)
    for _ in range(10):
        p = random_poly(rng, 2, 4)
        assert ident.apply(p) == p


def test_apply_single_derivative():
    d1 = DiffOpSeries.derivative(1, 3, 1)
    assert d1.apply(Poly(1, {(2,): 1})) == Poly(1, {(1,): 2})


def test_apply_matches_falling_factorial_oracle():
    rng = random.Random(409)
    for _ in range(30):
        n = rng.randint(1, 3)
        s = random_series(rng, n, 3)
        beta = tuple(rng.randint(0, 3) for _ in range(n))
        while sum(beta) > 3:
            beta = tuple(rng.randint(0, 3) for _ in range(n))
        expected = Poly.zero(n)
        for alpha, c in s.coeffs.items():
            expected = expected + falling_derivative(beta, alpha, n).scale(c)
        assert s.apply(Poly.monomial(n, beta)) == expected


def test_apply_never_raises_variable_degrees():
    rng = random.Random(419)
    for _ in range(40):
        n = rng.randint(1, 3)
        s = random_series(rng, n, 4)
        p = random_poly(rng, n, 4)
        image = s.apply(p)
        for i in range(1, n + 1):
            assert image.degree_in(i) <= p.degree_in(i)


def test_apply_rejects_polynomials_beyond_truncation():
    s = DiffOpSeries.identity(1, 2)
    with pytest.raises(TruncationTooLow):
        s.apply(Poly(1, {(3,): 1}))


def test_apply_preserves_derivative_closed_submodules():
    rng = random.Random(421)
    for seed in range(10):
        gen = random_poly(random.Random(seed), 2, 3)
        sub = submodule_from_polys(2, [gen])
        s = random_series(rng, 2, 4)
        for b in sub.basis:
            assert sub.contains(s.apply(b))


# --- coefficient extraction -----------------------------------------------------

def test_extract_identity_table():
    images = {
        alpha: Poly.monomial(2, alpha)
        for alpha in monomials_up_to_degree(2, 2)
    }
    s = extract_coeffs(2, 2, images)
    assert s == DiffOpSeries.identity(2, 2)


def test_extract_first_derivative_table():
    images = {
        alpha: Poly.monomial(2, alpha).partial(1)
        for alpha in monomials_up_to_degree(2, 2)
    }
    s = extract_coeffs(2, 2, images)
    assert s == DiffOpSeries.derivative(2, 2, 1)


def test_extract_round_trip_on_random_series():
    rng = random.Random(431)
    for _ in range(20):
        n = rng.randint(1, 3)
        s = random_series(rng, n, 3)
        assert extract_coeffs(n, 3, monomial_images(s)) == s


def test_extracted_series_reproduces_the_map():
    rng = random.Random(433)
    for _ in range(10):
        s = random_series(rng, 2, 3)
        table = monomial_images(s)
        recovered = extract_coeffs(2, 3, table)
        p = random_poly(rng, 2, 3)
        assert recovered.apply(p) == s.apply(p)


def test_extract_rejects_non_commuting_table():
    s = random_series(random.Random(439), 2, 2)
    images = dict(monomial_images(s))
    images[(1, 1)] = images[(1, 1)] + Poly.variable(2, 1)
    with pytest.raises(NotAnEndomorphism) as info:
        extract_coeffs(2, 2, images)
    assert info.value.i == 1
    assert info.value.witness == (1, 1)


def test_extract_requires_full_table():
    images = {(0, 0): Poly.one(2)}
    with pytest.raises(ValueError):
        extract_coeffs(2, 1, images)


# --- composition ------------------------------------------------------------------

def test_compose_identity_neutral():
    rng = random.Random(443)
    ident = DiffOpSeries.identity(2, 3)
    for _ in range(10):
        s = random_series(rng, 2, 3)
        assert ident.compose(s) == s
        assert s.compose(ident) == s


def test_compose_two_derivatives():
    d1 = DiffOpSeries.derivative(2, 3, 1)
    d2 = DiffOpSeries.derivative(2, 3, 2)
    prod = d1.compose(d2)
    assert prod.coeffs == {(1, 1): Fraction(1)}
    assert prod.apply(Poly(2, {(1, 1): 1})) == Poly.one(2)


def test_compose_matches_operator_composition():
    rng = random.Random(449)
    for _ in range(15):
        n = rng.randint(1, 2)
        a = random_series(rng, n, 3)
        b = random_series(rng, n, 3)
        p = random_poly(rng, n, 3)
        assert a.compose(b).apply(p) == a.apply(b.apply(p))


def test_compose_commutative_and_associative():
    rng = random.Random(457)
    for _ in range(10):
        a = random_series(rng, 2, 3)
        b = random_series(rng, 2, 3)
        c = random_series(rng, 2, 3)
        assert a.compose(b) == b.compose(a)
        assert a.compose(b).compose(c) == a.compose(b.compose(c))


def test_compose_variable_count_mismatch():
    with pytest.raises(ValueError):
        DiffOpSeries.identity(1, 2).compose(DiffOpSeries.identity(2, 2))


def test_compose_truncates_to_min():
    a = DiffOpSeries(1, 3, {(2,): 1})
    b = DiffOpSeries(1, 2, {(1,): 1})
    out = a.compose(b)
    assert out.trunc == 2
    assert out.coeffs == {}


# --- exponentials and logarithms ------------------------------------------------

def test_exp_log_trivial_cases():
    assert series_log(DiffOpSeries.identity(2, 3)) == DiffOpSeries.zero(2, 3)
    assert series_exp(DiffOpSeries.zero(2, 3)) == DiffOpSeries.identity(2, 3)


def test_exp_is_shift_operator():
    # exp(d/dx) f = f(x + 1)
    e = series_exp(DiffOpSeries.derivative(1, 3, 1))
    cubed = Poly(1, {(3,): 1})
    assert e.apply(cubed) == Poly(1, {(3,): 1, (2,): 3, (1,): 3, (0,): 1})


def test_exp_log_round_trips():
    rng = random.Random(461)
    for _ in range(15):
        n = rng.randint(1, 2)
        a = random_series(rng, n, 3, zero_unit=True)
        assert series_log(series_exp(a)) == a
        u = random_series(rng, n, 3, unit_one=True)
        assert series_exp(series_log(u)) == u


def test_exp_turns_sums_into_compositions():
    rng = random.Random(463)
    for _ in range(10):
        a = random_series(rng, 2, 3, zero_unit=True)
        b = random_series(rng, 2, 3, zero_unit=True)
        assert series_exp(a + b) == series_exp(a).compose(series_exp(b))


def test_exp_log_constant_term_guards():
    with pytest.raises(WrongConstantTerm):
        series_exp(DiffOpSeries.identity(1, 2))
    with pytest.raises(WrongConstantTerm):
        series_log(DiffOpSeries.zero(1, 2))
    with pytest.raises(WrongConstantTerm):
        series_log(DiffOpSeries(1, 2, {(0,): 2}))


# --- automorphism criterion ------------------------------------------------------

def test_is_automorphism_literals():
    assert DiffOpSeries.identity(2, 3).is_automorphism()
    assert not DiffOpSeries.derivative(2, 3, 1).is_automorphism()


def test_automorphism_criterion_matches_rank_oracle():
    rng = random.Random(467)
    module = MonomialSubmodule(2, lower_set_closure([(2, 1)]))
    for _ in range(15):
        s = random_series(rng, 2, 4)
        full_rank = restrict(s, module).rank() == module.m
        assert s.is_automorphism() == full_rank


# --- restriction to monomial submodules -------------------------------------------

def test_monomial_submodule_validation():
    MonomialSubmodule(2, [(0, 0), (1, 0), (0, 1)])
    with pytest.raises(ValueError):
        MonomialSubmodule(2, [(1, 0)])  # origin missing
    with pytest.raises(ValueError):
        MonomialSubmodule(2, [(0, 0), (1, 1)])  # not downward closed


def test_monomial_submodule_accessors():
    module = MonomialSubmodule(2, lower_set_closure([(1, 1)]))
    assert module.m == 4
    assert module.max_degree == 2
    assert module.monomials_descending() == ((1, 1), (1, 0), (0, 1), (0, 0))
    polys = module.as_poly_submodule()
    assert polys.dim == 4
    assert MonomialSubmodule.from_json(module.to_json()) == module


def test_restrict_identity_series():
    module = MonomialSubmodule(2, lower_set_closure([(1, 1)]))
    bridge = restrict(DiffOpSeries.identity(2, 3), module)
    assert bridge.images == QMatrix.identity(4)


def test_restrict_ignores_coefficients_outside_the_set():
    module = MonomialSubmodule(2, [(0, 0), (1, 0)])
    s = DiffOpSeries(2, 3, {(0, 0): 1, (0, 2): 7, (2, 1): -2})
    bridge = restrict(s, module)
    assert bridge.images == QMatrix.identity(2)


def test_restrict_is_multiplicative():
    rng = random.Random(479)
    module = MonomialSubmodule(2, lower_set_closure([(2, 0), (0, 1)]))
    for _ in range(10):
        a = random_series(rng, 2, 3)
        b = random_series(rng, 2, 3)
        lhs = restrict(a.compose(b), module).images
        rhs = restrict(a, module).images * restrict(b, module).images
        assert lhs == rhs


def test_restrict_truncation_guard():
    module = MonomialSubmodule(1, [(0,), (1,), (2,)])
    with pytest.raises(TruncationTooLow):
        restrict(DiffOpSeries.identity(1, 1), module)


# --- isomorphism extension ----------------------------------------------------------

def identity_map(sub):
    return ModuleMap.identity(sub)


def test_extend_step_from_constants():
    base = submodule_from_polys(1, [])
    src, tgt, phi = extend_iso_step(base, base, identity_map(base))
    x1 = Poly.variable(1, 1)
    assert src == submodule_from_polys(1, [x1])
    assert tgt == src
    assert phi.image_poly(0) == x1  # basis descending: [x1, 1]
    assert phi.is_isomorphism()


def test_extend_step_prefers_low_degree():
    # span{1, x1} inside two variables: x2 beats x1^2
    sub = submodule_from_polys(2, [Poly.variable(2, 1)])
    src, tgt, phi = extend_iso_step(sub, sub, identity_map(sub))
    assert src.contains(Poly.variable(2, 2))
    assert tgt == src
    assert phi.is_isomorphism()


def test_extend_step_identity_stays_identity():
    rng = random.Random(487)
    for _ in range(8):
        support = lower_set_closure(
            [tuple(rng.randint(0, 2) for _ in range(2))]
        )
        sub = MonomialSubmodule(2, support).as_poly_submodule()
        src, tgt, phi = extend_iso_step(sub, sub, identity_map(sub))
        assert src == tgt
        assert phi.images == QMatrix.identity(src.dim)


def test_extend_step_nontrivial_map():
    one = Poly.one(2)
    diag = Poly(2, {(1, 0): 1, (0, 1): 1})
    source = PolySubmodule(2, [diag, one])
    target_poly = diag.scale(3) + one
    target = PolySubmodule(2, [target_poly, one])
    # phi(1) = 3, phi(x1+x2) = 3(x1+x2) + 1: an intertwining bijection
    images = QMatrix.from_columns(
        [
            target.coordinates_of(target_poly),
            target.coordinates_of(one.scale(3)),
        ],
        rows=2,
    )
    phi = ModuleMap(source, target, images)
    assert phi.is_isomorphism()
    src, tgt, extended = extend_iso_step(source, target, phi)
    assert src.dim == 3 and tgt.dim == 3
    assert extended.is_isomorphism()
    # the new pair is (x2, 3x2) and the old action is untouched
    x2 = Poly.variable(2, 2)
    coords = src.coordinates_of(x2)
    image = tgt.from_coordinates(extended.apply_coords(coords))
    assert image == x2.scale(3)
    old = src.coordinates_of(diag)
    assert tgt.from_coordinates(extended.apply_coords(old)) == target_poly


def test_extend_step_grows_by_exactly_one():
    rng = random.Random(491)
    sub = submodule_from_polys(2, [random_poly(rng, 2, 2)])
    phi = identity_map(sub)
    src, tgt = sub, sub
    for _ in range(4):
        nsrc, ntgt, phi = extend_iso_step(src, tgt, phi)
        assert nsrc.dim == src.dim + 1
        assert ntgt.dim == tgt.dim + 1
        assert phi.is_isomorphism()
        src, tgt = nsrc, ntgt


def test_extend_step_within_exhausted():
    sub = submodule_from_polys(1, [Poly.variable(1, 1)])
    goal = MonomialSubmodule(1, [(0,), (1,)])
    with pytest.raises(NothingToExtend):
        extend_iso_step(sub, sub, identity_map(sub), within=goal)


def test_extend_step_rejects_bad_maps():
    sub = submodule_from_polys(1, [Poly.variable(1, 1)])
    collapse = ModuleMap(sub, sub, QMatrix([[0, 0], [0, 0]]))
    with pytest.raises(IncompatibleMap):
        extend_iso_step(sub, sub, collapse)
    # invertible but not intertwining
    swap = ModuleMap(sub, sub, QMatrix([[0, 1], [1, 0]]))
    with pytest.raises(IncompatibleMap):
        extend_iso_step(sub, sub, swap)


def test_extend_iso_noop_when_goal_covered():
    sub = submodule_from_polys(2, [Poly(2, {(1, 1): 1})])
    goal = MonomialSubmodule(2, lower_set_closure([(1, 1)]))
    phi = identity_map(sub)
    assert extend_iso(sub, sub, phi, goal) is phi


def test_extend_iso_rescaling_example():
    one = Poly.one(2)
    diag = Poly(2, {(1, 0): 1, (0, 1): 1})
    sub = PolySubmodule(2, [diag, one])
    images = QMatrix.from_columns(
        [sub.coordinates_of(diag.scale(2)), sub.coordinates_of(one.scale(2))],
        rows=2,
    )
    phi = ModuleMap(sub, sub, images)
    goal = MonomialSubmodule(2, [(0, 0), (1, 0), (0, 1)])
    extended = extend_iso(sub, sub, phi, goal)
    assert extended.is_isomorphism()
    src = extended.source
    for alpha in goal.indices:
        assert src.contains(Poly.monomial(2, alpha))
    # restricting back to the original submodule reproduces phi exactly
    tgt = extended.target
    for p, expected in [(diag, diag.scale(2)), (one, one.scale(2))]:
        coords = src.coordinates_of(p)
        assert tgt.from_coordinates(extended.apply_coords(coords)) == expected


def test_extend_iso_reaches_larger_goals():
    sub = submodule_from_polys(2, [Poly(2, {(1, 0): 1, (0, 1): -2})])
    goal = MonomialSubmodule(2, lower_set_closure([(2, 0), (1, 1)]))
    extended = extend_iso(sub, sub, identity_map(sub), goal)
    assert extended.is_isomorphism()
    for alpha in goal.indices:
        assert extended.source.contains(Poly.monomial(2, alpha))


# --- automorphism groups --------------------------------------------------------------

def test_aut_group_point_module():
    group = aut_structure(MonomialSubmodule(1, [(0,)]))
    assert group.unit_count == 1
    assert group.additive_count == 0
    five = AutDescriptor(5)
    assert group.matrix_of(five) == QMatrix([[5]])
    assert group.compose(five, five).unit == 25
    assert group.inverse(five).unit == Fraction(1, 5)


def test_aut_descriptor_validation():
    with pytest.raises(ValueError):
        AutDescriptor(0)
    group = aut_structure(MonomialSubmodule(2, [(0, 0), (1, 0)]))
    with pytest.raises(ValueError):
        group.parametrize(AutDescriptor(1, {(0, 1): 1}))


def test_aut_group_two_variable_plane():
    module = MonomialSubmodule(2, [(0, 0), (1, 0), (0, 1)])
    group = aut_structure(module)
    assert group.additive_count == 2
    a = AutDescriptor(2, {(1, 0): Fraction(1, 2)})
    b = AutDescriptor(3, {(0, 1): -1})
    ab = group.compose(a, b)
    assert ab.unit == 6
    assert ab.additive == {(1, 0): Fraction(1, 2), (0, 1): Fraction(-1)}
    # matrix oracle: descriptors compose exactly like their matrices
    assert group.matrix_of(ab) == group.matrix_of(a) * group.matrix_of(b)


def test_aut_group_is_abelian_on_matrices():
    rng = random.Random(499)
    module = MonomialSubmodule(2, lower_set_closure([(1, 1)]))
    group = aut_structure(module)

    def rand_desc():
        unit = Fraction(0)
        while unit == 0:
            unit = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        additive = {
            alpha: Fraction(rng.randint(-3, 3))
            for alpha in module.indices
            if any(alpha) and rng.random() < 0.7
        }
        return AutDescriptor(unit, additive)

    for _ in range(10):
        a, b = rand_desc(), rand_desc()
        assert group.compose(a, b) == group.compose(b, a)
        ma, mb = group.matrix_of(a), group.matrix_of(b)
        assert ma * mb == mb * ma
        assert ma * mb == group.matrix_of(group.compose(a, b))
        # inverses really invert
        assert group.matrix_of(group.inverse(a)) == ma.inverse()


def test_aut_parametrize_descriptor_round_trip():
    rng = random.Random(503)
    module = MonomialSubmodule(2, lower_set_closure([(2, 0), (0, 1)]))
    group = aut_structure(module)
    for _ in range(10):
        unit = Fraction(0)
        while unit == 0:
            unit = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        additive = {
            alpha: Fraction(rng.randint(-3, 3), rng.randint(1, 2))
            for alpha in module.indices
            if any(alpha) and rng.random() < 0.6
        }
        desc = AutDescriptor(unit, additive)
        back = group.descriptor_of(group.parametrize(desc))
        assert back == desc


def test_aut_descriptor_of_rejects_non_restrictions():
    module = MonomialSubmodule(2, [(0, 0), (1, 0), (0, 1)])
    group = aut_structure(module)
    # invertible, but does not commute with the derivative action
    swap = QMatrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    with pytest.raises(ValueError):
        group.descriptor_of(swap)
    zero_unit = QMatrix([[1, 0, 0], [0, 1, 0], [0, 0, 0]])
    with pytest.raises(ValueError):
        group.descriptor_of(zero_unit)


def test_aut_descriptor_json_round_trip():
    desc = AutDescriptor(Fraction(-7, 2), {(1, 0): Fraction(1, 3)})
    assert AutDescriptor.from_json(desc.to_json()) == desc


def test_every_plane_automorphism_is_a_series_restriction():
    # the commutant of the derivative action on span{1, x1, x2} has
    # dimension 3 = m, so invertible intertwiners all carry descriptors
    module = MonomialSubmodule(2, [(0, 0), (1, 0), (0, 1)])
    sub = module.as_poly_submodule()
    assert endomorphism_space_dim(sub) == 3
    assert restricted_series_dim(sub) == 3


# --- reporters ---------------------------------------------------------------------------

def test_endomorphism_gap_on_diagonal_line():
    sub = submodule_from_polys(2, [Poly(2, {(1, 0): 1, (0, 1): 1})])
    report = endomorphism_gap(sub)
    assert set(report) == {"end_dim", "series_dim", "gap"}
    assert report["end_dim"] == 2
    assert report["gap"] == 0


def test_endomorphism_gap_small_search_sees_no_gap():
    rng = random.Random(509)
    for _ in range(8):
        sub = submodule_from_polys(2, [random_poly(rng, 2, 2)])
        report = endomorphism_gap(sub)
        assert report["end_dim"] >= report["series_dim"]
        assert report["gap"] == 0


def test_restriction_kernel_dimensions():
    module = MonomialSubmodule(2, [(0, 0), (1, 0), (0, 1)])
    assert restriction_kernel_dim(module, 1) == 0
    assert restriction_kernel_dim(module, 3) == 7
    with pytest.raises(TruncationTooLow):
        restriction_kernel_dim(module, 0)
