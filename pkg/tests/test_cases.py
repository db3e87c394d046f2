import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import fsolve

from pentapod_asd import cases as cs
from pentapod_asd import polysys
from pentapod_asd.cases import CaseId, CaseProblem
from pentapod_asd.geometry import PentapodDesign, distance, singularity_residual, tls_line

from conftest import SAMPLE_T, planar_at

EXPECTED_COMBINATIONS = {
    "0": 10, "1": 10, "2": 10, "3a": 30, "3b": 5, "4": 5, "5a": 10, "5b": 1, "6": 10, "7": 15, "8": 10, "9": 1,
}

KNOWN_C9_BASE = [
    [0.2298889247, 0.0071714756, -0.0109452093],
    [0.2257849117, 0.0201911288, -0.0108456958],
    [0.2114583372, 0.0933776496, 0.0221428966],
    [0.2166543290, 0.8807826507, 0.9680554467],
    [0.4950013702, -0.2515229039, 0.6679561979],
]
KNOWN_C9_PLATFORM = [0.0016583117, 0.3964556801, 1.0026262356, 1.2997972749, 1.7994624976]


def cross_ratio(a, b, c, d):
    return ((c - a) * (d - b)) / ((c - b) * (d - a))


def solve_case9_sides(values, rng):
    """Adjust (lambda, delta) until S1 = S2 = 0 with a generic root finder."""
    names = ("Psi1", "Upsilon1", "Psi2", "Upsilon2", "lambda", "delta", "gamma")

    def sides(x):
        v = dict(values, **{"lambda": x[0], "delta": x[1]})
        return list(cs.case9_conditions(*(v[n] for n in names)))

    for _ in range(20):
        x, info, ok, _ = fsolve(sides, rng.uniform(-2, 3, 2), full_output=True, xtol=1e-14)
        if ok == 1 and np.max(np.abs(sides(x))) < 1e-13:
            return dict(values, **{"lambda": x[0], "delta": x[1]})
    return None


def random_singular_values(case, planar, rng):
    """Random free parameters for ``case`` that satisfy its side conditions."""
    tpl = cs.template(case)
    values = {n: float(rng.uniform(-1.5, 1.5)) for n in tpl.free_unknowns(planar)}
    if case in (CaseId.C3b, CaseId.C8):
        lam, big_l, big_d = values["lambda"], values["Lambda"], values["Delta"]
        values["delta"] = -lam * (big_d - big_l * big_d) / (lam * (big_l - big_d) + big_l * big_d - big_l)
    if case is CaseId.C9:
        values = solve_case9_sides(values, rng)
    return values


# -- combinations ---------------------------------------------------------------


def test_combination_counts_match_expected():
    for case in cs.ALL_CASES:
        combos = cs.enumerate_combinations(case)
        assert len(combos) == EXPECTED_COMBINATIONS[case.value], case
        assert len(set(combos)) == len(combos)
        assert all(sorted(c) == [1, 2, 3, 4, 5] for c in combos)


def test_case0_combinations_are_unordered_pairs():
    pairs = {tuple(c[:2]) for c in cs.enumerate_combinations(CaseId.C0)}
    assert pairs == set(itertools.combinations(range(1, 6), 2))


def test_case5b_single_identity_combination():
    assert cs.enumerate_combinations(CaseId.C5b) == [(1, 2, 3, 4, 5)]


def test_equivalent_assignments_share_an_objective(spatial):
    # every raw permutation collapses onto a representative with the same closed-form value
    for case in cs.CLOSED_FORM_CASES:
        for perm in itertools.permutations(range(1, 6)):
            rep = cs.canonical_combination(case, perm)
            _, d_rep = cs.closed_form_minimizer(case, spatial, rep)
            s_raw, d_raw = cs.closed_form_minimizer(case, spatial, perm)
            assert d_raw == pytest.approx(d_rep, abs=1e-12)
            assert distance(spatial, s_raw.design) == pytest.approx(d_raw, abs=1e-15)


def test_case2_anchors_with_coincident_pedal_points(spatial):
    # M1 and M2 project onto the same point of the regression line through M1, M2, M4
    s, d = cs.closed_form_minimizer(CaseId.C2, spatial, (1, 2, 4, 3, 5))
    pedal = tls_line(spatial.base[[0, 1, 3]]).pedal_points
    assert s.base[[0, 1, 3]] == pytest.approx(pedal, abs=1e-12)
    assert d == pytest.approx(distance(spatial, s.design))


def test_case_parse_and_order():
    assert CaseId.parse("c3B") is CaseId.C3b
    assert CaseId.parse("9") is CaseId.C9
    assert CaseId.C4.previous() == cs.ALL_CASES[:5]
    with pytest.raises(cs.CaseError):
        CaseId.parse("10")


# -- closed forms ------------------------------------------------------------------


def test_case0_closed_form(spatial):
    s, d = cs.closed_form_minimizer(CaseId.C0, spatial, (1, 2))
    assert d == pytest.approx(0.1303805266, abs=1e-10)
    assert s.base[0] == pytest.approx([7 / 33, 0, 0])
    assert s.platform[:2] == pytest.approx([0.2, 0.2])


def test_case1_closed_form(spatial):
    s, d = cs.closed_form_minimizer(CaseId.C1, spatial, (1, 2, 3))
    assert s.base[0] == pytest.approx([22 / 99, 4 / 99, 0], abs=1e-15)
    assert d == pytest.approx(0.1001987618, abs=1e-10)


def test_case4_closed_form(spatial):
    s, d = cs.closed_form_minimizer(CaseId.C4, spatial, (2, 3, 4, 5))
    assert s.platform[1:] == pytest.approx([1.125] * 4)
    assert d == pytest.approx(0.3205464085, abs=1e-10)


def test_planar_closed_form_coordinates():
    design = planar_at(SAMPLE_T)
    s0, _ = cs.closed_form_minimizer(CaseId.C0, design, (2, 4))
    assert s0.base[1, :2] == pytest.approx([-1.25, 1.125], abs=1e-12)
    assert s0.base[3, :2] == pytest.approx([-1.25, 1.125], abs=1e-12)
    assert s0.platform[[1, 3]] == pytest.approx([2, 2])
    s1, _ = cs.closed_form_minimizer(CaseId.C1, design, (1, 2, 5))
    assert s1.base[0, :2] == pytest.approx([-0.07634, 1.84032], abs=1e-5)


def test_case2_closed_form_uses_regression_line(spatial):
    _, d = cs.closed_form_minimizer(CaseId.C2, spatial, (2, 3, 4))
    assert d == pytest.approx(0.2095878942, abs=1e-9)


@pytest.mark.parametrize("case", cs.CLOSED_FORM_CASES, ids=str)
def test_closed_forms_are_stationary_and_singular(case, spatial):
    for comb in cs.enumerate_combinations(case):
        s, d = cs.closed_form_minimizer(case, spatial, comb)
        problem = CaseProblem.create(case, s.combination, spatial)
        point = np.array([s.parameters[n] for n in problem.unknowns])
        grad = polysys.evaluate(polysys.problem_system(problem), point)
        assert np.max(np.abs(grad)) < 1e-10, (case, comb)
        assert cs.matches_case(case, s.base, s.platform)
        assert singularity_residual(s.design) < 1e-10


@given(st.permutations(range(1, 6)))
def test_case0_distance_invariant_under_leg_swap(perm):
    design = PentapodDesign(np.arange(15.0).reshape(5, 3) ** 0.5, [0, 1, 4, 9, 16])
    a, b = perm[0], perm[1]
    assert cs.closed_form_minimizer(CaseId.C0, design, (a, b))[1] == cs.closed_form_minimizer(CaseId.C0, design, (b, a))[1]


# -- side condition S -------------------------------------------------------------------


def test_side_condition_examples():
    assert cs.side_condition_S(2.0, 3.0, 2.0, 3.0) == 0.0
    assert cs.side_condition_S(Fraction(2), Fraction(3), Fraction(1, 2), Fraction(3, 7)) == 0
    lam, big_l, big_d = Fraction(3, 5), Fraction(2), Fraction(-1, 3)
    assert cs.side_condition_S(big_l, big_d, lam, lam) == lam * (big_l - big_d) * (lam - 1)


def test_side_condition_equal_ratios_factorization():
    big_l, big_d, lam = sympy.symbols("Lambda Delta lam")
    s = sympy.expand(cs.side_condition_S(big_l, big_d, lam, lam))
    assert sympy.factor(s - lam * (big_l - big_d) * (lam - 1)) == 0


def test_side_condition_matches_cross_ratio_on_random_tuples(rng):
    def rational():
        return Fraction(int(rng.integers(-60, 61)), int(rng.integers(1, 13)))

    checked = 0
    while checked < 1000:
        big_l, big_d, lam = rational(), rational(), rational()
        if len({big_l, big_d, Fraction(0), Fraction(1)}) < 4 or lam in (0, 1):
            continue
        denom = lam * (big_l - big_d) + big_l * big_d - big_l
        if denom == 0:
            continue
        on = -lam * (big_d - big_l * big_d) / denom
        off = on + rational() + Fraction(1, 997)
        for delta in (on, off):
            if delta in (0, 1, lam):
                continue
            same = cross_ratio(0, 1, lam, delta) == cross_ratio(0, 1, big_l, big_d)
            assert (cs.side_condition_S(big_l, big_d, lam, delta) == 0) == same
        checked += 1


# -- case 9 determinants ------------------------------------------------------------------


def test_case9_conditions_vanish_at_zero():
    assert cs.case9_conditions(0, 0, 0, 0, 0, 0, 0) == (0, 0)


def test_case9_conditions_match_literal_determinants(rng):
    for _ in range(20):
        args = [Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 7))) for _ in range(7)]
        m1, m2 = cs.case9_matrices(*args)
        exact = (sympy.Matrix(m1).det(), sympy.Matrix(m2).det())
        got = cs.case9_conditions(*args)
        assert [sympy.Rational(g.numerator, g.denominator) for g in got] == list(exact)
        floats = [float(a) for a in args]
        direct = [np.linalg.det(np.array(cs.case9_matrices(*floats)[k], float)) for k in range(2)]
        assert np.allclose(cs.case9_conditions(*floats), direct, rtol=1e-12, atol=1e-12)


def test_case9_conditions_vanish_for_repeated_row():
    # equal rows 4 and 5 need Psi, Upsilon and the ratios delta, gamma to agree
    assert cs.case9_conditions(0.3, 0.7, 0.3, 0.7, 0.2, 0.5, 0.5) == pytest.approx((0, 0), abs=1e-15)
    s1, s2 = cs.case9_conditions(0.3, 0.7, 0.3, 0.7, 0.2, 0.5, 0.9)
    assert abs(s1) > 1e-3 and abs(s2) > 1e-3


# -- embedding --------------------------------------------------------------------------


def test_embed_case2_endpoint(spatial):
    vals = {"x1": 0, "y1": 0, "z1": 0, "x2": 1, "y2": 2, "z2": 3, "r1": 0.5, "Lambda": 1.0}
    s = cs.embed(CaseId.C2, (1, 2, 3, 4, 5), vals, spatial)
    assert s.base[2] == pytest.approx(s.base[1])


def test_embed_case3b_side_condition(spatial):
    vals = {"x1": 0, "y1": 0, "z1": 0, "x2": 1, "y2": 1, "z2": 0, "r1": 0, "r2": 1,
            "Lambda": 2, "Delta": 3, "lambda": 0.5, "delta": 3 / 7}
    s = cs.embed(CaseId.C3b, (1, 2, 3, 4, 5), vals, spatial)
    p = s.platform
    # platform ratios recovered from the embedded design
    assert cs.side_condition_S(2, 3, (p[2] - p[0]) / (p[1] - p[0]), (p[3] - p[0]) / (p[1] - p[0])) == pytest.approx(0, abs=1e-15)
    assert singularity_residual(s.design) < 1e-10


def test_embed_case8_meeting_point_at_gamma_zero(spatial):
    vals = {"x1": 1, "y1": 0, "z1": 0, "x4": 0, "y4": 1, "z4": 0, "x5": 0, "y5": 0, "z5": 1, "r1": 0, "r4": 1,
            "Gamma": 0.0, "Lambda": 0.3, "Delta": 0.6, "lambda": 0.5, "delta": 0.2}
    s = cs.embed(CaseId.C8, (1, 2, 3, 4, 5), vals, spatial)
    # base points 1, 2, 3 lie on the line through M'_1 and the meeting point M'_4
    for k in (1, 2):
        assert np.linalg.norm(np.cross(s.base[k] - s.base[3], s.base[0] - s.base[3])) < 1e-15


def test_embed_rejects_wrong_parameter_count(spatial):
    with pytest.raises(cs.CaseError):
        cs.embed(CaseId.C1, (1, 2, 3, 4, 5), [0.0, 1.0], spatial, planar=False)


@pytest.mark.parametrize("case", cs.ALL_CASES, ids=str)
@pytest.mark.parametrize("planar", [False, True], ids=["spatial", "planar"])
def test_embed_round_trip_is_singular(case, planar, rng, spatial):
    design = spatial if not planar else PentapodDesign(np.c_[spatial.base[:, :2], np.zeros(5)], spatial.platform)
    combos = cs.enumerate_combinations(case)
    done = 0
    while done < 10:
        values = random_singular_values(case, planar, rng)
        if values is None:
            continue
        comb = combos[int(rng.integers(len(combos)))]
        s = cs.embed(case, comb, values, design, planar)
        assert singularity_residual(s.design) < 1e-8, (case, comb, values)
        if case is not CaseId.C9:
            assert cs.matches_case(case, s.base, s.platform)
        done += 1


# -- validity ------------------------------------------------------------------------------


def test_validity_rejects_case3b_design_with_coincident_legs(spatial):
    vals = {"x1": 0, "y1": 0, "z1": 0, "x2": 0, "y2": 0, "z2": 0, "r1": 0.5, "r2": 0.5,
            "Lambda": 2, "Delta": 3, "lambda": 0.5, "delta": 3 / 7}
    s = cs.embed(CaseId.C3b, (1, 2, 3, 4, 5), vals, spatial)
    assert cs.matches_case(CaseId.C0, s.base, s.platform)
    assert not cs.validity_filter(s)


def test_validity_rejects_case9_design_with_collinear_base(rng, spatial):
    values = None
    while values is None:
        values = random_singular_values(CaseId.C9, False, rng)
    values.update(Upsilon1=0.0, Upsilon2=0.0)
    values = solve_case9_sides(values, rng)
    s = cs.embed(CaseId.C9, (1, 2, 3, 4, 5), values, spatial)
    assert not cs.validity_filter(s)


def test_validity_accepts_generic_case9_design(spatial):
    known = PentapodDesign(KNOWN_C9_BASE, KNOWN_C9_PLATFORM)
    s = cs.SingularDesign(CaseId.C9, (1, 2, 3, 4, 5), known)
    assert singularity_residual(known) < 1e-8
    assert cs.validity_filter(s)
    assert distance(spatial, known) == pytest.approx(0.09758766523, abs=1e-4)
