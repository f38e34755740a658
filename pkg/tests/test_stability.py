import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oligopoly import dynamics, reference_cd, region, stability
from oligopoly.stability import CharPoly, char_poly, schur_cohn

from oracles import numeric_jacobian, unit_disk_stable

coef = st.floats(-2, 2, allow_nan=False)


@st.composite
def root_polynomials(draw):
    """Monic real polynomials assembled from chosen roots, so stable and
    unstable cases are both common."""
    deg = draw(st.integers(1, 5))
    roots = []
    while len(roots) < deg:
        r = draw(st.floats(0.0, 1.6))
        if deg - len(roots) >= 2 and draw(st.booleans()):
            th = draw(st.floats(0.05, math.pi - 0.05))
            roots += [r * complex(math.cos(th), math.sin(th)), r * complex(math.cos(th), -math.sin(th))]
        else:
            roots.append(r * draw(st.sampled_from([-1, 1])))
    p = np.real(np.poly(roots))  # highest degree first
    return tuple(p[::-1][:-1]), roots


@given(root_polynomials())
@settings(max_examples=400, deadline=None)
def test_schur_cohn_matches_chosen_roots(case):
    a, roots = case
    # gap measured on the exact roots: eigenvalue solvers smear repeated roots
    moduli = np.abs(np.array(roots, dtype=complex))
    assume(np.min(np.abs(moduli - 1)) > 1e-6)
    verdict = schur_cohn(CharPoly(a)).verdict
    assert verdict == ("stable" if np.all(moduli < 1) else "unstable")


@given(st.lists(coef, min_size=3, max_size=4))
@settings(max_examples=400, deadline=None)
def test_corollary_block_agrees_with_schur_cohn(a):
    stable, gap = unit_disk_stable(a)
    # wide band: hypothesis favours round coefficients, i.e. repeated roots
    # on the circle, which eigenvalue solvers smear by up to ~1e-4
    assume(gap > 1e-3)
    p = CharPoly(tuple(a))
    assert stability.corollary_conditions(p).verdict == schur_cohn(p).verdict
    assert (schur_cohn(p).verdict == "stable") == stable


@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_verdict_invariant_under_permutation_similarity(n, seed):
    rng = np.random.default_rng(seed)
    J = rng.uniform(-0.9, 0.9, size=(n, n))
    P = np.eye(n)[rng.permutation(n)]
    a = schur_cohn(char_poly(J))
    b = schur_cohn(char_poly(P @ J @ P.T))
    stable, gap = unit_disk_stable(char_poly(J).coeffs)
    assume(gap > 1e-3)
    assert a.verdict == b.verdict == ("stable" if stable else "unstable")


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_char_poly_matches_numpy(n, seed):
    J = np.random.default_rng(seed).uniform(-3, 3, size=(n, n))
    want = np.poly(J)[::-1]
    np.testing.assert_allclose(char_poly(J).full, want, rtol=1e-9, atol=1e-9)


def test_char_poly_exact():
    J = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(-1, 5), Fraction(2)]]
    p = char_poly(J)
    assert p.coeffs == (Fraction(1) + Fraction(1, 15), Fraction(-5, 2))
    assert p(Fraction(0)) == Fraction(16, 15)


def test_schur_cohn_degree_two_frozen():
    # lam^2 - 0.5 lam + 0.06 has roots 0.2, 0.3
    rep = schur_cohn(CharPoly((0.06, -0.5)))
    assert rep.verdict == "stable"
    assert rep.boundary_checks["A(1)"] == pytest.approx(0.56)
    assert rep.boundary_checks["(-1)^2A(-1)"] == pytest.approx(1.56)
    assert rep.determinants["D1+"] == pytest.approx(1.06)
    assert rep.determinants["D1-"] == pytest.approx(0.94)
    assert schur_cohn(CharPoly((1.0, 0.0))).verdict == "marginal"  # roots +-i
    assert schur_cohn(CharPoly((0.0, -1.5))).verdict == "unstable"


def test_marginal_at_exact_duopoly_threshold():
    J = stability.scaled_jacobian("gb", Fraction(2), Fraction(0))
    assert schur_cohn(char_poly(J)).verdict == "marginal"
    assert stability.analytic_verdict("gb", 2.0, None, 0.5) == "marginal"


def test_classify_values_arrays():
    vals = [np.array([1.0, 1.0, 1.0]), np.array([1.0, -1.0, 0.0])]
    assert list(stability.classify_values(vals)) == [stability.STABLE, stability.UNSTABLE, stability.MARGINAL]


TABLE_POINTS = [(p, float(k), float(l), float(c)) for p, rows in region.load_sample_points().items()
                for k, l, c, _ in rows]
GRID_POINTS = [(p, k, l, c) for p in stability.PRESETS for k in (0.5, 1.0, 2.0)
               for l in (0.25, 0.75, 1.0) for c in (0.25, 0.5, 1.5)]


@pytest.mark.parametrize("preset, k, l, c", TABLE_POINTS + GRID_POINTS)
def test_fd_matches_derived_jacobian(preset, k, l, c):
    model = dynamics.preset(preset, k, l, c)
    E = dynamics.interior_equilibrium(model)
    J = stability.jacobian_fd(model, E)
    scale = max(1.0, float(np.max(np.abs(J))))
    assert np.max(np.abs(J - stability.jacobian_analytic(preset, k, l, c, "derived"))) < 1e-6 * scale


def test_fd_oracle_agrees_with_library_fd():
    from oracles import map_step

    model = dynamics.gbalr(1.2, 0.6, 0.7)
    E = dynamics.interior_equilibrium(model)
    J = numeric_jacobian(lambda x: map_step("gbalr", 1.2, 0.6, 0.7, x), E)
    np.testing.assert_allclose(J, stability.jacobian_fd(model, E), atol=1e-7)


def test_printed_and_derived_differ_only_in_gbalr_row_three():
    for p in ("gb", "gba", "gbal"):
        assert np.array_equal(stability.jacobian_analytic(p, 1.1, 0.4, 0.6, "printed"),
                              stability.jacobian_analytic(p, 1.1, 0.4, 0.6, "derived"))
    A = stability.jacobian_analytic("gbalr", 1.1, 0.4, 0.6, "printed")
    B = stability.jacobian_analytic("gbalr", 1.1, 0.4, 0.6, "derived")
    diff = np.abs(A - B) > 0
    assert diff[2].all() and not diff[[0, 1, 3]].any()


@pytest.mark.parametrize("variant", stability.VARIANTS)
@pytest.mark.parametrize("preset", stability.PRESETS)
@pytest.mark.parametrize("l", [0.05, 0.3, 0.7, 1.0])
def test_threshold_is_where_verdict_flips(preset, l, variant):
    flip = stability.locate_flip(preset, l, variant)
    assert abs(flip - stability.stability_threshold(preset, l, variant)) < 1e-8


@pytest.mark.parametrize("c", [0.25, 1.0, 3.0])
def test_threshold_scales_with_sqrt_c(c):
    t = stability.stability_threshold("gba", 0.5)
    k = t / math.sqrt(c)
    assert stability.analytic_verdict("gba", k * (1 - 1e-6), 0.5, c) == "stable"
    assert stability.analytic_verdict("gba", k * (1 + 1e-6), 0.5, c) == "unstable"


def test_derived_gbalr_threshold_limits():
    printed = 10172 * math.sqrt(2) / 5737
    assert stability.stability_threshold("gbalr", 1e-9, "derived") == pytest.approx(printed, rel=1e-8)
    assert stability.stability_threshold("gbalr", 1.0, "derived") == pytest.approx(2.4751, abs=1e-4)


def test_threshold_ordering_reports_violations():
    rep = stability.threshold_ordering([0.01, 0.5, 1.0])
    assert rep.ordered and rep.n_ordered == 3
    assert stability.threshold_ordering([0.01, 0.5, 1.0], "derived").ordered
    with pytest.raises(ValueError):
        stability.stability_threshold("gba", 0.0)


def test_threshold_spot_values_at_half():
    assert stability.stability_threshold("gba", 0.5) == pytest.approx(9 * (-149.5) / (2 * (-379)))
    assert stability.stability_threshold("gbal", 0.5) == pytest.approx(2 * math.sqrt(6) * (113 - 441) / (256 - 1017))


def _row(preset, k, l, c):
    return region.evaluate_sample_point(preset, Fraction(k), Fraction(l), Fraction(c))


def test_frozen_table_rows():
    assert _row("gba", "455/256", "71/256", "1/4").computed == (True,) * 4
    assert _row("gbal", "301/32", "109/256", "3/2").computed == (True, False, False, True, True, True)
    assert _row("gbalr", "89603/32", "251/256", "1/2").computed == (True, False, True, False, True, False)


@pytest.mark.parametrize("preset", ["gba", "gbal", "gbalr"])
def test_reference_polynomials_equal_normalised_margins(preset):
    for k, l, c, _ in region.load_sample_points()[preset]:
        block = stability.cd_block(preset, k, l, c)
        root = stability.rational_sqrt(reference_cd.RADICAND[preset] * c)
        ref = reference_cd.evaluate(preset, k, l, root)
        assert tuple(block.values) == tuple(ref)


def test_cd_block_exact_and_float_agree():
    exact = stability.cd_block("gbal", Fraction(7), Fraction(1, 3), Fraction(3, 2))
    approx = stability.cd_block("gbal", 7.0, 1 / 3, 1.5)
    assert all(isinstance(v, Fraction) for v in exact.values)
    assert exact.satisfied == approx.satisfied
    for a, b in zip(exact.values, approx.values):
        assert float(a) == pytest.approx(b, rel=1e-9)
    assert stability.cd_relations("gba") == (">", ">", "<", "<")
    with pytest.raises(ValueError):
        stability.cd_block("gb", 1.0, 0.5, 1.0)
