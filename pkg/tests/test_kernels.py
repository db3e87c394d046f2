import json
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from pentapod_asd import _accel, kernels, polysys, solvers
from pentapod_asd.cases import CaseId, CaseProblem
from pentapod_asd.polynomial import PolyRing
from pentapod_asd.polysys import PolySystem

# Evaluates a fixed workload and prints it as JSON, so both backends can be compared.
WORKLOAD = textwrap.dedent(
    """
    import json
    import numpy as np
    from pentapod_asd import _accel, kernels, polysys, solvers
    from pentapod_asd.cases import CaseId, CaseProblem
    from pentapod_asd.geometry import PentapodDesign
    from pentapod_asd.polynomial import PolyRing
    from pentapod_asd.polysys import PolySystem

    design = PentapodDesign({base!r}, {platform!r})
    problem = CaseProblem.create(CaseId.C9, (1, 2, 3, 4, 5), design)
    system = polysys.problem_system(problem)
    rng = np.random.default_rng(7)
    x = rng.normal(size=len(system.variables))
    f, j = kernels.eval_system_jacobian(system.compiled(), system.full_point(x))
    z = x + 1j * rng.normal(size=len(x))
    fc = kernels.eval_system(system.compiled(), system.full_point(z))
    seeds = solvers.multistart_seeds(problem, solvers.SolveConfig(multistart_count=24))
    out, res, status = kernels.newton_batch(system.compiled(), seeds, system.param_values, 1e-12, 50)

    ring = PolyRing(["x", "s"])
    xv, s = ring.vars("x", "s")
    hom = PolySystem(("x",), (xv * xv - 1 - s * 3,), ("s",))
    ends, h, st, steps = kernels.track_batch(hom.compiled(), np.array([[2.0], [-2.0]]), [1.0], [0.0], solvers.TrackerSettings())
    print(json.dumps({{
        "numba": _accel.USE_NUMBA,
        "f": f.tolist(), "j": j.tolist(),
        "fc": [[v.real, v.imag] for v in fc],
        "newton": out.tolist(), "status": status.tolist(),
        "ends": [[v.real, v.imag] for v in ends[:, 0]], "track_status": st.tolist(),
    }}))
    """
)


def run_workload(flag, spatial):
    code = WORKLOAD.format(base=spatial.base.tolist(), platform=spatial.platform.tolist())
    env = dict(os.environ, PENTAPOD_ASD_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True, timeout=600)
    return json.loads(out.stdout.strip().splitlines()[-1])


@pytest.mark.slow
def test_numpy_fallback_matches_numba_kernels(spatial):
    fast = run_workload("1", spatial)
    slow = run_workload("0", spatial)
    assert slow["numba"] is False
    assert fast["numba"] is _accel.NUMBA_AVAILABLE
    for key in ("f", "j", "fc", "ends"):
        assert np.allclose(fast[key], slow[key], rtol=1e-12, atol=1e-12), key
    assert fast["status"] == slow["status"]
    assert fast["track_status"] == slow["track_status"]
    ok = np.array(fast["status"]) == kernels.OK
    assert ok.any()
    assert np.allclose(np.array(fast["newton"])[ok], np.array(slow["newton"])[ok], rtol=1e-9, atol=1e-10)
    assert sorted(np.round(np.array(fast["ends"])[:, 0], 12)) == [-1.0, 1.0]


def test_switch_reads_environment():
    code = "from pentapod_asd import _accel; print(_accel.USE_NUMBA)"
    for flag, expect in (("0", "False"), ("off", "False")):
        out = subprocess.run([sys.executable, "-c", code], env=dict(os.environ, PENTAPOD_ASD_NUMBA=flag), capture_output=True, text=True, check=True)
        assert out.stdout.strip() == expect


# -- path tracking contracts ----------------------------------------------------------


def univariate(expr_builder):
    ring = PolyRing(["x"])
    return PolySystem(("x",), (expr_builder(ring.var("x")),))


def test_constant_path_returns_start():
    target = univariate(lambda x: x * x - 4)
    end, kind = solvers.track_path(target, target, [2.0 + 0j], 1.0)
    assert kind == "finite"
    assert end[0] == pytest.approx(2.0, abs=1e-12)


def test_square_root_paths_reach_both_roots():
    c = 3.0 + 1.0j
    start = univariate(lambda x: x * x - c)
    target = univariate(lambda x: x * x - 1)
    gamma = np.exp(0.7j)
    ends = []
    for root in (np.sqrt(c), -np.sqrt(c)):
        end, kind = solvers.track_path(start, target, [root], gamma)
        assert kind == "finite"
        ends.append(end[0])
    assert sorted(np.round(np.real(ends), 12)) == [-1.0, 1.0]
    assert np.abs(np.imag(ends)).max() < 1e-12


def test_path_to_infinity_is_classified():
    # x^2 - 1 deforms into the linear x - 1; the second root escapes
    start = univariate(lambda x: x * x - 1)
    target = univariate(lambda x: 0 * x * x + x - 1)
    kinds = {solvers.track_path(start, target, [r + 0j], np.exp(0.3j))[1] for r in (1.0, -1.0)}
    assert "finite" in kinds
    assert kinds & {solvers.AT_INFINITY, solvers.FAILED}


def test_track_path_rejects_mismatched_variables():
    a = univariate(lambda x: x - 1)
    ring = PolyRing(["y"])
    b = PolySystem(("y",), (ring.var("y") - 1,))
    with pytest.raises(ValueError):
        solvers.track_path(a, b, [1.0], 1.0)


def test_equation_order_does_not_change_endpoints(rng):
    ring = PolyRing(["x", "y"])
    x, y = ring.vars("x", "y")
    target = [x * x + y - 3, x * y - 1]
    start = [x * x - 1, y * y - 1]
    gamma = np.exp(1.1j)
    sys_a = (PolySystem(("x", "y"), tuple(start)), PolySystem(("x", "y"), tuple(target)))
    sys_b = (PolySystem(("x", "y"), tuple(start[::-1])), PolySystem(("x", "y"), tuple(target[::-1])))
    for p in ([1, 1], [1, -1], [-1, 1], [-1, -1]):
        ea, ka = solvers.track_path(*sys_a, np.array(p, complex), gamma)
        eb, kb = solvers.track_path(*sys_b, np.array(p, complex), gamma)
        assert ka == kb
        if ka == "finite":
            assert ea == pytest.approx(eb, abs=1e-10)


def test_newton_batch_statuses(spatial):
    p = CaseProblem.create(CaseId.C4, (1, 2, 3, 4, 5), spatial)
    system = polysys.problem_system(p)
    out, res, status = kernels.newton_batch(system.compiled(), np.array([[0.0], [5.0]]), system.param_values)
    assert list(status) == [kernels.OK, kernels.OK]
    assert out[:, 0] == pytest.approx([0.675, 0.675])


def test_eval_keeps_complex_coefficients():
    ring = PolyRing(["x"])
    system = PolySystem(("x",), (ring.var("x") - 1j,))
    assert kernels.eval_system(system.compiled(), np.array([1j]))[0] == 0
    assert kernels.eval_system(system.compiled(), np.array([1.0]))[0] == pytest.approx(1 - 1j)
