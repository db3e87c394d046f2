import numpy as np
import pytest

from pentapod_asd import cases as cs
from pentapod_asd import polysys, solvers
from pentapod_asd.cases import CaseId, CaseProblem
from pentapod_asd.geometry import distance
from pentapod_asd.polynomial import PolyRing
from pentapod_asd.polysys import PolySystem
from pentapod_asd.solvers import SolveConfig

FAST = SolveConfig(multistart_count=64, descent_starts=2)


def test_newton_polish_solves_linear_system():
    ring = PolyRing(["x", "y"])
    x, y = ring.vars("x", "y")
    system = PolySystem(("x", "y"), (2 * x - y - 1, x + 3 * y - 11))
    point, res, ok = solvers.newton_polish(system, [100.0, -40.0])
    assert ok and res < 1e-12
    assert point == pytest.approx([2.0, 3.0], abs=1e-13)


def test_newton_polish_reports_failure_without_raising():
    ring = PolyRing(["x"])
    x = ring.var("x")
    system = PolySystem(("x",), (x * x + 1,))
    point, res, ok = solvers.newton_polish(system, [0.3], SolveConfig(newton_max_steps=8))
    assert not ok
    assert res > 1e-3


def test_newton_polish_recovers_perturbed_stationary_point(spatial, rng):
    design, _ = cs.closed_form_minimizer(CaseId.C0, spatial, (1, 2, 3, 4, 5))
    problem = CaseProblem.create(CaseId.C0, design.combination, spatial)
    system = polysys.problem_system(problem)
    exact = np.array([design.parameters[k] for k in problem.unknowns])
    point, res, ok = solvers.newton_polish(system, exact + 1e-3 * rng.normal(size=len(exact)))
    assert ok
    assert point == pytest.approx(exact, abs=1e-10)


def test_multistart_case4_returns_platform_mean(spatial):
    found = solvers.multistart_minimize(CaseProblem.create(CaseId.C4, (1, 2, 3, 4, 5), spatial), FAST)
    best = found.best()
    assert best.point[0] == pytest.approx(0.675, abs=1e-12)
    _, d = cs.closed_form_minimizer(CaseId.C4, spatial, (1, 2, 3, 4, 5))
    assert best.distance == pytest.approx(d, abs=1e-10)


@pytest.mark.parametrize("case", [CaseId.C0, CaseId.C1, CaseId.C2, CaseId.C5b, CaseId.C6], ids=str)
def test_multistart_reaches_closed_form(case, spatial):
    comb = cs.enumerate_combinations(case)[0]
    _, d = cs.closed_form_minimizer(case, spatial, comb)
    found = solvers.minimize_combination(case, comb, spatial, FAST)
    assert found.best().distance == pytest.approx(d, abs=1e-8)


def test_collinear_base_critical_points_follow_scatter_eigenvectors(spatial):
    # a line fit in space has one critical line per eigenvector of the scatter matrix
    centred = spatial.base - spatial.base.mean(axis=0)
    scatter = centred.T @ centred
    expected = sorted(np.sqrt((np.trace(scatter) - np.linalg.eigvalsh(scatter)) / 10))
    found = solvers.minimize_combination(CaseId.C5b, (1, 2, 3, 4, 5), spatial, FAST)
    distances = sorted({round(s.distance, 9) for s in found if s.kind == solvers.REAL and s.valid})
    assert distances == pytest.approx(expected, abs=1e-8)


def test_same_seed_gives_identical_solutions(spatial):
    problem = CaseProblem.create(CaseId.C3b, (1, 2, 3, 4, 5), spatial)
    a = solvers.multistart_minimize(problem, FAST)
    b = solvers.multistart_minimize(problem, FAST)
    assert solvers.dumps_solutions(a) == solvers.dumps_solutions(b)


def test_seeds_depend_on_seed(spatial):
    problem = CaseProblem.create(CaseId.C3b, (1, 2, 3, 4, 5), spatial)
    s0 = solvers.multistart_seeds(problem, FAST)
    s1 = solvers.multistart_seeds(problem, SolveConfig(multistart_count=64, seed=1))
    assert s0.shape == s1.shape
    assert not np.allclose(s0, s1)


def test_solution_text_round_trip(spatial):
    problem = CaseProblem.create(CaseId.C3a, (1, 2, 3, 4, 5), spatial)
    found = solvers.multistart_minimize(problem, FAST)
    text = solvers.dumps_solutions(found, CaseId.C3a, (1, 2, 3, 4, 5))
    back, tags = solvers.loads_solutions(text)
    assert back.variables == found.variables
    assert len(back) == len(found)
    assert tags[0] == (CaseId.C3a, (1, 2, 3, 4, 5))
    for s, t in zip(found, back):
        assert np.array_equal(s.point, t.point)
        assert t.distance == s.distance and t.kind == s.kind


def test_complex_solution_round_trip():
    sset = solvers.SolutionSet(("x", "y"), [solvers.Solution(np.array([1 + 2j, -0.5j]), 1e-14, solvers.COMPLEX)])
    back, _ = solvers.loads_solutions(solvers.dumps_solutions(sset))
    assert np.array_equal(back.solutions[0].point, sset.solutions[0].point)
    assert back.solutions[0].distance is None


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(newton_tol=0)
    with pytest.raises(ValueError):
        SolveConfig(multistart_count=0)


def test_chart_labelings_keep_the_leg_set():
    for case in cs.ALL_CASES:
        for comb in cs.enumerate_combinations(case)[:3]:
            charts = solvers.chart_labelings(case, comb)
            assert charts[0] == tuple(comb) or sorted(charts[0]) == sorted(comb)
            assert all(sorted(c) == sorted(comb) for c in charts)
            assert len(set(charts)) == len(charts)


# -- total degree and homotopy ----------------------------------------------------------


def test_total_degree_on_intersecting_circles():
    ring = PolyRing(["x", "y"])
    x, y = ring.vars("x", "y")
    eqs = [x * x + y * y - 4, (x - 1) * (x - 1) + y * y - 4]
    finite, prov = solvers.solve_total_degree(eqs, SolveConfig(), np.random.default_rng(3))
    pts = sorted((round(p[0].real, 10), round(p[1].real, 10)) for p in finite)
    assert pts == sorted([(0.5, round(np.sqrt(3.75), 10)), (0.5, -round(np.sqrt(3.75), 10))])
    assert prov["paths"] == 4
    assert prov["at_infinity"] == 2


def test_ab_initio_case2_planar_has_two_solutions():
    sset = solvers.ab_initio(CaseId.C2, True, SolveConfig(seed=1))
    assert len(sset.finite()) == 2
    assert sset.provenance["paths"] == int(np.prod(polysys.parametric_system(CaseId.C2, True).degrees()))


def test_parameter_homotopy_at_generic_data_returns_starts():
    config = SolveConfig(seed=2)
    starts = solvers.ab_initio(CaseId.C2, True, config)
    data = starts.provenance["data"]
    system = polysys.parametric_system(CaseId.C2, True)
    from pentapod_asd import kernels

    out, _, status, _ = kernels.track_batch(system.compiled(), starts.points().astype(complex), data, data, config.tracker)
    assert np.all(status == kernels.OK)
    assert out == pytest.approx(starts.points(), abs=1e-10)


def test_parameter_homotopy_rejects_empty_start(planar_template):
    empty = solvers.SolutionSet(("x",), [])
    with pytest.raises(ValueError):
        solvers.parameter_homotopy(CaseId.C2, (1, 2, 3, 4, 5), empty, [], planar_template)


@pytest.mark.parametrize(
    "case, comb, expected",
    [(CaseId.C2, (2, 3, 4, 1, 5), 0.2095878942), (CaseId.C3a, (3, 4, 1, 2, 5), 0.1188328328)],
    ids=["C2", "C3a"],
)
def test_parameter_homotopy_matches_multistart(case, comb, expected, spatial):
    config = SolveConfig(seed=1)
    starts = solvers.ab_initio(case, False, config)
    found = solvers.parameter_homotopy(case, comb, starts, starts.provenance["data"], spatial, config)
    best = found.best()
    assert best is not None
    assert best.distance == pytest.approx(expected, abs=1e-9)
    ms = solvers.minimize_combination(case, comb, spatial, SolveConfig(multistart_count=128))
    assert ms.best().distance == pytest.approx(best.distance, abs=1e-8)


# -- sampling oracle -------------------------------------------------------------------


@pytest.mark.parametrize("case", [CaseId.C0, CaseId.C6], ids=str)
def test_oracle_agrees_with_closed_form(case, spatial):
    comb = cs.enumerate_combinations(case)[0]
    _, d = cs.closed_form_minimizer(case, spatial, comb)
    problem = CaseProblem.create(case, comb, spatial)
    s, d_oracle = solvers.brute_force_oracle(problem, 20_000, SolveConfig(oracle_polish_cap=20))
    assert d_oracle == pytest.approx(d, abs=1e-8)
    assert distance(spatial, s.design) == pytest.approx(d_oracle, abs=1e-12)


@pytest.mark.parametrize("case", [CaseId.C3b, CaseId.C8], ids=str)
def test_oracle_is_an_upper_bound_for_multistart(case, spatial):
    comb = cs.enumerate_combinations(case)[0]
    problem = CaseProblem.create(case, comb, spatial)
    _, d_oracle = solvers.brute_force_oracle(problem, 10_000, SolveConfig(oracle_polish_cap=10))
    found = solvers.minimize_combination(case, comb, spatial, SolveConfig(multistart_count=128, descent_starts=4))
    assert found.best().distance <= d_oracle + 1e-9
