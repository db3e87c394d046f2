"""Root finding for the case KKT systems.

Backends:

* :func:`newton_polish` / :func:`multistart_minimize` - damped Newton on the
  real stationarity system from many seeds, plus a few constrained descents.
* :func:`track_path`, :func:`ab_initio`, :func:`parameter_homotopy` -
  predictor-corrector continuation over the complex numbers.
* :func:`brute_force_oracle` - feasible sampling followed by local descent;
  an independent upper bound for the minimizers found above.
"""
from __future__ import annotations

import hashlib
import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from . import cases as _cases
from . import kernels, polysys
from .cases import CaseId, CaseProblem, SingularDesign
from .geometry import GeometryError, distance_sq, min_enclosing_ball
from .polynomial import Polynomial, PolyRing
from .polysys import PolySystem

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrackerSettings:
    initial_step: float = 0.01
    min_step: float = 1e-30
    max_step: float = 0.05
    max_steps: int = 60000
    corrector_tol: float = 1e-10
    corrector_iterations: int = 3
    divergence_norm: float = 1e8
    final_tol: float = 1e-13
    endgame_start: float = 0.005

    def tightened(self) -> "TrackerSettings":
        return replace(self, initial_step=self.initial_step / 10, max_step=self.max_step / 5, corrector_tol=self.corrector_tol / 10)


@dataclass(frozen=True)
class SolveConfig:
    newton_tol: float = 1e-12
    newton_max_steps: int = 50
    real_threshold: float = 1e-8
    dedup_radius: float = 1e-8
    multistart_count: int = 512
    descent_starts: int = 8
    seed: int = 0
    tracker: TrackerSettings = field(default_factory=TrackerSettings)
    validity_tol: float = _cases.INCIDENCE_TOL
    generic_validity_tol: float = 1e-6
    # reject roots whose KKT Jacobian sigma_min / sigma_max is at or below this (0 keeps all)
    conditioning_tol: float = 0.0
    oracle_polish_cap: int = 200

    def __post_init__(self):
        for name in ("newton_tol", "real_threshold", "dedup_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.multistart_count < 1:
            raise ValueError("multistart_count must be at least 1")

    def rng(self, *salt) -> np.random.Generator:
        return np.random.default_rng([self.seed, *[_salt(s) for s in salt]])


def _salt(value) -> int:
    text = repr(value).encode()
    return int.from_bytes(hashlib.sha256(text).digest()[:4], "little")


REAL, COMPLEX, AT_INFINITY, FAILED = "real", "complex", "at-infinity", "failed"


@dataclass
class Solution:
    point: np.ndarray
    residual: float
    kind: str
    distance: float | None = None
    design: SingularDesign | None = None
    valid: bool | None = None
    # sigma_min / sigma_max of the KKT Jacobian; tiny values mark non-isolated roots
    conditioning: float | None = None


@dataclass
class SolutionSet:
    variables: tuple
    solutions: list
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def of_kind(self, kind: str) -> list:
        return [s for s in self.solutions if s.kind == kind]

    def finite(self) -> list:
        return [s for s in self.solutions if s.kind in (REAL, COMPLEX)]

    def best(self) -> Solution | None:
        ranked = [s for s in self.solutions if s.distance is not None and s.valid]
        return min(ranked, key=lambda s: s.distance) if ranked else None

    def points(self) -> np.ndarray:
        return np.array([s.point for s in self.solutions])


# ---------------------------------------------------------------------------
# Serialization


def dumps_solutions(sset: SolutionSet, case: CaseId | None = None, combination=None) -> str:
    """One solution per line: case, combination, D, flattened coordinates, residual."""
    case_txt = str(case) if case is not None else "-"
    comb = "".join(str(k) for k in combination) if combination is not None else "-"
    lines = ["# variables " + " ".join(sset.variables)]
    for s in sset.solutions:
        d = "nan" if s.distance is None else repr(float(s.distance))
        coords = " ".join(repr(complex(v)).strip("()") if np.iscomplexobj(s.point) else repr(float(v)) for v in s.point)
        lines.append(f"{case_txt} {comb} {d} {s.kind} {coords} {s.residual!r}")
    return "\n".join(lines) + "\n"


def loads_solutions(text: str) -> tuple[SolutionSet, list]:
    """Parse :func:`dumps_solutions` output; returns the set and per-line (case, combination)."""
    variables: tuple = ()
    sols, tags = [], []
    for line in text.splitlines():
        if line.startswith("# variables"):
            variables = tuple(line.split()[2:])
            continue
        if not line.strip():
            continue
        parts = line.split()
        case, comb, d, kind = parts[:4]
        coords = parts[4:-1]
        point = np.array([complex(c) if c.endswith("j") else float(c) for c in coords])
        if np.iscomplexobj(point) and not np.any(point.imag):
            point = point.real
        dist = None if d == "nan" else float(d)
        sols.append(Solution(point, float(parts[-1]), kind, dist))
        tags.append((None if case == "-" else CaseId.parse(case), None if comb == "-" else tuple(int(ch) for ch in comb)))
    return SolutionSet(variables, sols), tags


# ---------------------------------------------------------------------------
# Newton


class PolishFailed(RuntimeError):
    pass


def newton_polish(system: PolySystem, start, config: SolveConfig | None = None):
    """Damped Newton from ``start``. Returns ``(point, residual, ok)``; never raises on divergence."""
    config = config or SolveConfig()
    compiled = system.compiled()
    params = system.param_values if system.params else None
    out, res, status = kernels.newton_batch(compiled, np.asarray(start)[None], params, config.newton_tol, config.newton_max_steps)
    return out[0], float(res[0]), bool(status[0] == kernels.OK)


def _dedup(points: np.ndarray, radius: float) -> list[int]:
    keep: list[int] = []
    for i, p in enumerate(points):
        scale = 1.0 + np.linalg.norm(p)
        if all(np.linalg.norm(p - points[j]) > radius * scale for j in keep):
            keep.append(i)
    return keep


# ---------------------------------------------------------------------------
# Lifting the input design into a case parametrization


def _ratio(p, a, b, default=0.5) -> float:
    d = b - a
    n = float(d @ d)
    return float((p - a) @ d / n) if n > 1e-300 else default


def _scalar_ratio(p, a, b, default=0.5) -> float:
    return float((p - a) / (b - a)) if abs(b - a) > 1e-300 else default


def lift(problem: CaseProblem) -> dict:
    """Least-squares fit of the case unknowns to the input design."""
    case = problem.case
    dim = problem.dim
    idx = [k - 1 for k in problem.combination]
    base = np.asarray(problem.design.base)[idx][:, :dim]
    r = np.asarray(problem.design.platform)[idx]
    v: dict = {}

    def put(k, p):
        for c, x in zip("xyz", p):
            v[f"{c}{k}"] = float(x)

    C = CaseId
    if case in (C.C0, C.C1, C.C2, C.C4, C.C5b, C.C6):
        v.update(_cases.closed_form_values(case, problem.design, problem.combination, problem.planar))
    elif case is C.C3a:
        put(1, base[0])
        put(2, base[1])
        v["r1"] = float(r[:2].mean())
        v["Lambda"] = _ratio(base[2:4].mean(0), base[0], base[1])
    elif case is C.C3b:
        put(1, base[0])
        put(2, base[1])
        v["r1"], v["r2"] = float(r[0]), float(r[1])
        v["Lambda"] = _ratio(base[2], base[0], base[1])
        v["Delta"] = _ratio(base[3], base[0], base[1])
        v["lambda"] = _scalar_ratio(r[2], r[0], r[1])
        v["delta"] = _scalar_ratio(r[3], r[0], r[1])
    elif case is C.C5a:
        put(1, base[:2].mean(0))
        put(3, base[2])
        a = base[:2].mean(0)
        v["Gamma"] = _ratio(base[3], a, base[2])
        v["Phi"] = _ratio(base[4], a, base[2])
    elif case is C.C7:
        for k in (2, 3, 4):
            put(k, base[k - 1])
        v["r1"] = float(r[:2].mean())
        v["r4"] = float(r[3:].mean())
        v["Gamma"] = _ratio(base[0], base[2], base[1])
        v["Phi"] = _ratio(base[4], base[2], base[3])
    elif case is C.C8:
        put(1, base[0])
        put(4, base[3])
        put(5, base[4])
        v["r1"] = float(r[0])
        v["r4"] = float(r[3:].mean())
        centre = base[:3].mean(0)
        direction = np.linalg.svd(base[:3] - centre)[2][0]
        mat = np.stack([base[4] - base[3], -direction], 1)
        sol = np.linalg.lstsq(mat, centre - base[3], rcond=None)[0]
        v["Gamma"] = float(sol[0])
        meet = base[3] + sol[0] * (base[4] - base[3])
        v["Lambda"] = _ratio(base[1], meet, base[0])
        v["Delta"] = _ratio(base[2], meet, base[0])
        v["lambda"] = _scalar_ratio(r[1], v["r4"], r[0])
        v["delta"] = _scalar_ratio(r[2], v["r4"], r[0])
    elif case is C.C9:
        for k in (1, 2, 3):
            put(k, base[k - 1])
        v["r1"], v["r2"] = float(r[0]), float(r[1])
        frame = np.stack([base[1] - base[0], base[2] - base[0]], 1)
        for j, pos in ((1, 3), (2, 4)):
            coeff = np.linalg.lstsq(frame, base[pos] - base[0], rcond=None)[0]
            v[f"Psi{j}"], v[f"Upsilon{j}"] = float(coeff[0]), float(coeff[1])
        for name, pos in (("lambda", 2), ("delta", 3), ("gamma", 4)):
            v[name] = _scalar_ratio(r[pos], r[0], r[1])
    v.update(polysys.multipliers_least_squares(problem, v))
    return v


def _vector(problem: CaseProblem, values: Mapping) -> np.ndarray:
    return np.array([values.get(n, 0.0) for n in problem.unknowns], dtype=float)


def design_diameter(design) -> float:
    ball = min_enclosing_ball(design.base)
    spread = float(np.ptp(design.platform))
    return max(2.0 * ball.radius, spread, 1e-12)


# ---------------------------------------------------------------------------
# Seeds


def _unknown_kinds(problem: CaseProblem):
    """Per-unknown category: 'coord', 'plat', 'ratio' or 'mult'."""
    kinds = []
    for n in problem.unknowns:
        if n in problem.multipliers:
            kinds.append("mult")
        elif n[0] in "xyz" and n[1:].isdigit():
            kinds.append("coord")
        elif n[0] == "r" and n[1:].isdigit():
            kinds.append("plat")
        else:
            kinds.append("ratio")
    return kinds


def multistart_seeds(problem: CaseProblem, config: SolveConfig) -> np.ndarray:
    """Lifted input, Latin-hypercube perturbations at three scales, and uniform random seeds."""
    rng = config.rng("seeds", problem.case.value, problem.combination, problem.planar)
    base_vals = lift(problem)
    x0 = _vector(problem, base_vals)
    kinds = _unknown_kinds(problem)
    free = [i for i, k in enumerate(kinds) if k != "mult"]
    diam = design_diameter(problem.design)
    n_total = config.multistart_count
    seeds = [x0]
    n_lhs = max((n_total - 1) * 3 // 4, 0)
    per_scale = [n_lhs // 3 + (1 if i < n_lhs % 3 else 0) for i in range(3)]
    for frac, count in zip((0.01, 0.1, 0.5), per_scale):
        if count == 0:
            continue
        sampler = qmc.LatinHypercube(d=len(free), seed=rng)
        u = 2.0 * sampler.random(count) - 1.0
        for row in u:
            x = x0.copy()
            for j, i in enumerate(free):
                width = frac * (diam if kinds[i] in ("coord", "plat") else max(1.0, abs(x0[i])))
                x[i] += width * row[j]
            seeds.append(x)
    n_rand = n_total - len(seeds)
    centre = np.asarray(problem.design.base).mean(0)
    pmid = float(np.mean(problem.design.platform))
    coord_axis = {"x": 0, "y": 1, "z": 2}
    for _ in range(max(n_rand, 0)):
        x = x0.copy()
        for i in free:
            name = problem.unknowns[i]
            if kinds[i] == "coord":
                x[i] = centre[coord_axis[name[0]]] + rng.uniform(-diam, diam)
            elif kinds[i] == "plat":
                x[i] = pmid + rng.uniform(-diam, diam)
            else:
                x[i] = rng.uniform(-2.0, 3.0)
        seeds.append(x)
    seeds = np.array(seeds[:n_total])
    mults = [i for i, k in enumerate(kinds) if k == "mult"]
    if mults:
        for row in seeds:
            vals = dict(zip(problem.unknowns, row))
            lm = polysys.multipliers_least_squares(problem, vals)
            for i in mults:
                row[i] = lm[problem.unknowns[i]]
    return seeds


# ---------------------------------------------------------------------------
# Evaluating candidate points


def _local_system(problem: CaseProblem) -> PolySystem:
    return polysys.gradient_system(polysys.build_lagrangian(problem), problem.unknowns)


def assess(problem: CaseProblem, point, residual: float, config: SolveConfig, kind: str = REAL, system: PolySystem | None = None) -> Solution:
    """Embed a real stationary point, measure its distance and check validity.

    The KKT Jacobian conditioning is recorded. Non-isolated roots are kept by
    default: they are still valid singular designs and some tabulated minima
    lie on such critical curves.
    """
    cond = None
    if system is not None:
        sv = np.linalg.svd(polysys.jacobian(system, np.real(point)), compute_uv=False)
        cond = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
        if config.conditioning_tol > 0 and not cond > config.conditioning_tol:
            return Solution(np.asarray(point), residual, kind, None, None, False, cond)
    vals = dict(zip(problem.unknowns, np.real(point)))
    try:
        s = problem.embed({k: v for k, v in vals.items() if k not in problem.multipliers})
    except (_cases.CaseError, GeometryError):
        return Solution(np.asarray(point), residual, kind, None, None, False)
    dist = float(np.sqrt(distance_sq(problem.design, s.design)))
    valid = _cases.validity_filter(s, problem.case, config.validity_tol)
    return Solution(np.asarray(point), residual, kind, dist, s, valid, cond)


def multistart_minimize(problem: CaseProblem, config: SolveConfig | None = None, extra_seeds=None) -> SolutionSet:
    """Real valid stationary points of the case problem, sorted by distance.

    ``extra_seeds`` (rows in unknown order) are tried first; the sweep passes
    the solutions found at the previous parameter value.
    """
    config = config or SolveConfig()
    system = _local_system(problem)
    compiled = system.compiled()
    seeds = multistart_seeds(problem, config)
    if extra_seeds is not None and len(extra_seeds):
        seeds = np.vstack([np.asarray(extra_seeds, dtype=float).reshape(-1, seeds.shape[1]), seeds])
    pts, res, status = kernels.newton_batch(compiled, seeds, None, config.newton_tol, config.newton_max_steps)
    good = [i for i in range(len(pts)) if status[i] == kernels.OK and np.all(np.isfinite(pts[i]))]
    candidates = [pts[i] for i in good]
    residuals = [float(res[i]) for i in good]
    for x in _descent_starts(problem, seeds, config):
        p, r, ok = newton_polish(system, x, config)
        if ok:
            candidates.append(p)
            residuals.append(r)
    sols = _collect(problem, candidates, residuals, config, system)
    prov = {
        "backend": "multistart",
        "seeds": len(seeds),
        "newton_converged": len(good),
        "distinct": len(sols),
    }
    return SolutionSet(problem.unknowns, sols, prov)


def _collect(problem, candidates, residuals, config, system=None) -> list:
    if not candidates:
        return []
    arr = np.array(candidates)
    keep = _dedup(arr, config.dedup_radius)
    sols = [assess(problem, arr[i], residuals[i], config, system=system) for i in keep]
    sols = [s for s in sols if s.valid]
    sols.sort(key=lambda s: (s.distance, tuple(np.round(s.point, 12))))
    return sols


def _descent_starts(problem: CaseProblem, seeds: np.ndarray, config: SolveConfig):
    """Constrained local descents from the lowest-objective seeds."""
    if config.descent_starts <= 0:
        return []
    free = [i for i, n in enumerate(problem.unknowns) if n not in problem.multipliers]
    names = tuple(problem.unknowns[i] for i in free)
    obj = polysys._specialize(polysys.build_objective(problem), names, {})
    obj_sys = PolySystem(names, (obj,))
    grad_sys = polysys.gradient_system(obj, names)
    sides = [polysys._specialize(s, names, {}) for s in polysys.parametric_sides(problem.case, problem.planar)]
    side_sys = [PolySystem(names, (s,)) for s in sides]
    side_grad = [polysys.gradient_system(s, names) for s in sides]

    def f(x):
        return float(polysys.evaluate(obj_sys, x)[0])

    def g(x):
        return polysys.evaluate(grad_sys, x)

    cons = [
        {"type": "eq", "fun": (lambda x, s=s: float(polysys.evaluate(s, x)[0])), "jac": (lambda x, gs=gs: polysys.evaluate(gs, x)[None, :])}
        for s, gs in zip(side_sys, side_grad)
    ]
    scores = np.array([f(row[free]) + sum(abs(c["fun"](row[free])) for c in cons) for row in seeds])
    order = np.argsort(scores, kind="stable")[: config.descent_starts]
    starts = []
    for i in order:
        res = minimize(f, seeds[i][free], jac=g, constraints=cons, method="SLSQP", options={"maxiter": 500, "ftol": 1e-15})
        x = seeds[i].copy()
        x[free] = res.x
        vals = dict(zip(problem.unknowns, x))
        for k, v in polysys.multipliers_least_squares(problem, vals).items():
            x[problem.unknowns.index(k)] = v
        starts.append(x)
    return starts


WARM_KEEP = 4


def chart_labelings(case: CaseId, combination) -> list[tuple]:
    """Relabelings of one combination that parametrize the same singular family differently.

    Ratios and frame coefficients blow up when the chosen anchors degenerate,
    so descents that stall in one chart often succeed in another.
    """
    case = _cases.template(case).case
    c = tuple(combination)
    if case is CaseId.C3b:
        line = c[:4]
        return [a + tuple(k for k in line if k not in a) + c[4:] for a in itertools.combinations(line, 2)]
    if case is CaseId.C5a:
        tri = c[2:]
        return [c[:2] + tri[i:] + tri[:i] for i in range(3)]
    if case is CaseId.C7:
        return [a + c[2:3] + b for a in (c[:2], c[1::-1]) for b in (c[3:], c[:2:-1])]
    if case is CaseId.C8:
        tri = c[:3]
        return [tri[i:] + tri[:i] + c[3:] for i in range(3)]
    if case is CaseId.C9:
        out = []
        for pair in itertools.combinations(sorted(c), 2):
            out.append(tuple(k for k in sorted(c) if k not in pair) + pair)
        return out
    return [c]


def minimize_combination(
    case: CaseId, combination, design, config: SolveConfig | None = None, planar: bool | None = None, warm: dict | None = None
) -> SolutionSet:
    """Multistart over every chart of one combination; solutions are merged by embedded design.

    ``warm`` maps chart labels to seed rows and is refreshed in place with the
    best roots of each chart.
    """
    config = config or SolveConfig()
    sols, charts = [], []
    for labels in chart_labelings(case, combination):
        problem = CaseProblem.create(case, labels, design, planar)
        found = multistart_minimize(problem, config, None if warm is None else warm.get(labels))
        charts.append(found.provenance)
        sols.extend(found.solutions)
        if warm is not None:
            warm[labels] = np.array([s.point for s in found.solutions[:WARM_KEEP]])
    sols.sort(key=lambda s: s.distance)
    merged = []
    for s in sols:
        flat = np.concatenate([np.ravel(s.design.base), s.design.platform])
        if all(np.linalg.norm(flat - m[1]) > config.dedup_radius * (1 + np.linalg.norm(flat)) for m in merged):
            merged.append((s, flat))
    tpl = _cases.template(case)
    planar = design.is_planar() if planar is None else planar
    return SolutionSet(tpl.unknowns(planar), [m[0] for m in merged], {"backend": "multistart", "charts": charts})


# ---------------------------------------------------------------------------
# Homotopy construction


def _linear_homotopy(start: Sequence[Polynomial], target: Sequence[Polynomial], gamma: complex, names: Sequence[str]) -> PolySystem:
    """H(y, s) = s*gamma*start + (1 - s)*target with s as the single ring parameter."""
    ring = PolyRing(tuple(names) + ("__s",))
    s = ring.var("__s")
    eqs = []
    for g, f in zip(start, target):
        g2 = _into(g, ring)
        f2 = _into(f, ring)
        eqs.append(s * gamma * g2 + (1 - s) * f2)
    return PolySystem(tuple(names), tuple(eqs), ("__s",))


def _into(poly: Polynomial, ring: PolyRing) -> Polynomial:
    idx = [ring.index[n] for n in poly.ring.names]
    out = {}
    for e, c in poly.terms.items():
        ne = [0] * len(ring.names)
        for i, k in zip(idx, e):
            ne[i] = k
        out[tuple(ne)] = c
    return Polynomial(ring, out)


def track_path(start_sys: PolySystem, target_sys: PolySystem, start_point, gamma: complex, config: SolveConfig | None = None):
    """Follow H = h*gamma*start + (1-h)*target from h=1 to h=0.

    Returns ``(endpoint, kind)`` with kind one of finite/at-infinity/failed.
    """
    config = config or SolveConfig()
    if tuple(start_sys.variables) != tuple(target_sys.variables):
        raise ValueError("systems must share the variable list")
    start_eqs = _baked(start_sys)
    target_eqs = _baked(target_sys)
    hom = _linear_homotopy(start_eqs, target_eqs, complex(gamma), start_sys.variables)
    out, h, status, steps = kernels.track_batch(hom.compiled(), np.atleast_2d(start_point), [1.0], [0.0], config.tracker)
    kind = {kernels.OK: "finite", kernels.DIVERGED: AT_INFINITY}.get(int(status[0]), FAILED)
    return out[0], kind


def _baked(system: PolySystem) -> list[Polynomial]:
    if not system.params:
        return list(system.equations)
    sub = dict(zip(system.params, system.param_values))
    return [polysys._specialize(e, system.variables, sub) for e in system.equations]


def total_degree_start(degrees: Sequence[int], rng: np.random.Generator):
    """Start roots of y_i^d_i - y0^d_i on the random affine patch a . y = 1."""
    patch = rng.normal(size=len(degrees) + 1) + 1j * rng.normal(size=len(degrees) + 1)
    roots = [np.exp(2j * np.pi * np.arange(d) / d) for d in degrees]
    starts = []
    for combo in itertools.product(*roots):
        y = np.concatenate([[1.0], combo])
        starts.append(y / (patch @ y))
    return patch, np.array(starts)


def _homogenize(eqs: Sequence[Polynomial], names: Sequence[str]):
    """Projective versions of ``eqs`` in ring (h0, names...)."""
    ring = PolyRing(("h0",) + tuple(names))
    out = []
    for eq in eqs:
        d = eq.degree()
        terms = {}
        for e, c in eq.terms.items():
            terms[(d - sum(e),) + tuple(e)] = c
        out.append(Polynomial(ring, terms))
    return ring, out


def _heads_to_infinity(points, h_end, status, endgame_start, tol=1e-4):
    scale = np.maximum(1.0, np.abs(points).max(axis=1))
    return (status != kernels.OK) & (np.abs(h_end) < endgame_start) & (np.abs(points[:, 0]) < tol * scale)


def solve_total_degree(eqs: Sequence[Polynomial], config: SolveConfig, rng: np.random.Generator) -> tuple:
    """All finite solutions of a square system by a projective total-degree homotopy.

    Returns (finite points, provenance dict).
    """
    names = eqs[0].ring.names
    degrees = [e.degree() for e in eqs]
    ring, hom_eqs = _homogenize(eqs, names)
    patch, starts = total_degree_start(degrees, rng)
    gamma = np.exp(2j * np.pi * rng.uniform())
    y = ring.vars(*ring.names)
    start_eqs = [y[i + 1] ** d - y[0] ** d for i, d in enumerate(degrees)]
    patch_eq = sum((complex(a) * v for a, v in zip(patch, y)), ring.zero()) - 1
    hom = _linear_homotopy(start_eqs + [patch_eq * (1 / complex(gamma))], hom_eqs + [patch_eq], gamma, ring.names)
    compiled = hom.compiled()
    settings = config.tracker
    out, h_end, status, steps = kernels.track_batch(compiled, starts, [1.0], [0.0], settings)
    # paths that stall late with a vanishing homogenizing coordinate head to infinity
    lost = _heads_to_infinity(out, h_end, status, settings.endgame_start)
    failed = np.flatnonzero((status != kernels.OK) & ~lost & (np.abs(h_end) >= settings.endgame_start))
    if len(failed):
        retry, h2, st2, _ = kernels.track_batch(compiled, starts[failed], [1.0], [0.0], settings.tightened())
        lost2 = _heads_to_infinity(retry, h2, st2, settings.endgame_start)
        for k, i in enumerate(failed):
            if st2[k] == kernels.OK:
                out[i], status[i], h_end[i] = retry[k], kernels.OK, 0.0
            else:
                h_end[i] = h2[k]
            lost[i] = lost2[k]
    finite, infinite = [], int(lost.sum())
    for y_end, st in zip(out, status):
        if st != kernels.OK:
            continue
        if abs(y_end[0]) < 1e-8 * max(1.0, np.abs(y_end).max()):
            infinite += 1
            continue
        finite.append(y_end[1:] / y_end[0])
    # nonsingular endpoints never stall this close to h = 0
    late = np.abs(h_end) < settings.endgame_start
    prov = {
        "paths": len(starts),
        "path_failures": int(np.sum((status != kernels.OK) & ~lost & ~late)),
        "singular_endpoints": int(np.sum((status != kernels.OK) & ~lost & late)),
        "at_infinity": infinite,
        "mean_steps": float(np.mean(steps)),
    }
    return finite, prov


# ---------------------------------------------------------------------------
# Ab-initio and parameter homotopy


def generic_data(case: CaseId, planar: bool, rng: np.random.Generator) -> np.ndarray:
    # unit-modulus draws keep every coefficient O(1); complex normals sometimes land
    # near a discriminant and push roots into ill-conditioned territory
    n = len(_cases.data_names(planar))
    return np.exp(2j * np.pi * rng.uniform(size=n))


def _nonsingular(compiled, x, params, tol=1e-9) -> bool:
    z = np.concatenate([x, params]) if params is not None else x
    _, jac = kernels.eval_system_jacobian(compiled, z)
    s = np.linalg.svd(jac, compute_uv=False)
    return s[-1] > tol * max(1.0, s[0])


def _complex_design(case: CaseId, point, data, planar: bool, names):
    vals = dict(zip(names, point))
    base, plat = _cases.split_data(list(data), planar)
    new_base, new_plat = _cases.evaluate_template(case, vals, base, plat, 2 if planar else 3)
    return np.array(new_base, dtype=complex), np.array(new_plat, dtype=complex)


def ab_initio(case: CaseId, planar: bool, config: SolveConfig | None = None, data=None) -> SolutionSet:
    """Finite, nonsingular, valid solutions of the KKT system for random complex anchors."""
    config = config or SolveConfig()
    case = _cases.template(case).case
    rng = config.rng("ab-initio", case.value, planar)
    if data is None:
        data = generic_data(case, planar, rng)
    param_sys = polysys.parametric_system(case, planar).with_params(data)
    target = polysys.scale_coefficients(PolySystem(param_sys.variables, tuple(_baked(param_sys))))
    finite, prov = solve_total_degree(list(target.equations), config, rng)
    compiled = param_sys.compiled()
    sols = []
    polished = []
    for x in finite:
        out, res, st = kernels.newton_batch(compiled, x[None], data, config.newton_tol, config.newton_max_steps)
        if st[0] == kernels.OK:
            polished.append((out[0], float(res[0])))
    pts = np.array([p for p, _ in polished]) if polished else np.zeros((0, len(param_sys.variables)))
    keep = _dedup(pts, config.dedup_radius) if len(pts) else []
    n_singular = n_invalid = 0
    for i in keep:
        x, res = polished[i]
        if not _nonsingular(compiled, x, data):
            n_singular += 1
            continue
        base, plat = _complex_design(case, x, data, planar, param_sys.variables)
        if not _cases.configuration_valid(case, base, plat, config.generic_validity_tol):
            n_invalid += 1
            continue
        kind = REAL if np.abs(x.imag).max() < config.real_threshold else COMPLEX
        sols.append(Solution(x, res, kind))
    prov.update(
        backend="ab-initio",
        case=case.value,
        planar=planar,
        data=np.asarray(data),
        finite_endpoints=len(finite),
        distinct=len(keep),
        singular=n_singular,
        invalid=n_invalid,
    )
    return SolutionSet(param_sys.variables, sols, prov)


def parameter_homotopy(
    case: CaseId,
    combination,
    start_solutions: SolutionSet,
    generic_design_data,
    target_design,
    config: SolveConfig | None = None,
    planar: bool | None = None,
) -> SolutionSet:
    """Track ab-initio solutions from the generic complex anchors to the real target design."""
    config = config or SolveConfig()
    if len(start_solutions) == 0:
        raise ValueError("parameter homotopy needs start solutions")
    case = _cases.template(case).case
    problem = CaseProblem.create(case, combination, target_design, planar)
    system = polysys.parametric_system(case, problem.planar)
    compiled = system.compiled()
    p_start = np.asarray(generic_design_data, dtype=complex)
    p_target = problem.data().astype(complex)
    starts = np.array([s.point for s in start_solutions], dtype=complex)
    out, h, status, steps = kernels.track_batch(compiled, starts, p_start, p_target, config.tracker)
    failed = np.flatnonzero((status != kernels.OK) & (status != kernels.DIVERGED))
    retried = 0
    if len(failed):
        retried = len(failed)
        again, _, st2, _ = kernels.track_batch(compiled, starts[failed], p_start, p_target, config.tracker.tightened())
        for k, i in enumerate(failed):
            if st2[k] in (kernels.OK, kernels.DIVERGED):
                out[i], status[i] = again[k], st2[k]
    local = _local_system(problem)
    candidates, residuals, sols = [], [], []
    for x, st in zip(out, status):
        if st == kernels.DIVERGED:
            sols.append(Solution(x, float("nan"), AT_INFINITY))
            continue
        if st != kernels.OK:
            sols.append(Solution(x, float("nan"), FAILED))
            continue
        if np.abs(x.imag).max() >= config.real_threshold * max(1.0, np.abs(x).max()):
            sols.append(Solution(x, 0.0, COMPLEX))
            continue
        p, r, ok = newton_polish(local, x.real, config)
        if ok:
            candidates.append(p)
            residuals.append(r)
    real = _collect(problem, candidates, residuals, config, local)
    prov = {
        "backend": "parameter-homotopy",
        "paths": len(starts),
        "path_failures": int(np.sum((status != kernels.OK) & (status != kernels.DIVERGED))),
        "retried": retried,
        "at_infinity": int(np.sum(status == kernels.DIVERGED)),
    }
    return SolutionSet(problem.unknowns, real + sols, prov)


# ---------------------------------------------------------------------------
# Brute-force sampling oracle


def _solve_pair_bilinear(fn, rng_names, values, n):
    """Solve two equations bilinear in (delta, gamma) for delta, gamma; vectorized over samples."""
    corners = {}
    for a, b in ((0, 0), (1, 0), (0, 1), (1, 1)):
        vals = dict(values)
        vals["delta"] = np.full(n, float(a))
        vals["gamma"] = np.full(n, float(b))
        corners[(a, b)] = fn(vals)
    coeffs = []
    for k in range(2):
        c00 = corners[(0, 0)][k]
        c10 = corners[(1, 0)][k] - c00
        c01 = corners[(0, 1)][k] - c00
        c11 = corners[(1, 1)][k] - c00 - c10 - c01
        coeffs.append((c00, c10, c01, c11))
    (a1, b1, c1, d1), (a2, b2, c2, d2) = coeffs
    # gamma = -(a1 + b1 d)/(c1 + d1 d); substitute into eq 2
    q2 = b2 * d1 - d2 * b1
    q1 = a2 * d1 + b2 * c1 - c2 * b1 - d2 * a1
    q0 = a2 * c1 - c2 * a1
    disc = q1 * q1 - 4 * q2 * q0
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(np.abs(q2) > 1e-14, (-q1 + sq) / (2 * q2), -q0 / q1)
        gamma = -(a1 + b1 * delta) / (c1 + d1 * delta)
    ok &= np.isfinite(delta) & np.isfinite(gamma)
    return delta, gamma, ok


def _feasible_samples(problem: CaseProblem, n: int, rng: np.random.Generator, half_width: float):
    """Anchor coordinates jittered around the matching input anchors; ratios drawn wide."""
    names = problem.free_unknowns
    kinds = dict(zip(problem.unknowns, _unknown_kinds(problem)))
    base, plat = _cases.split_data(list(problem.data()), problem.planar)
    axis = {"x": 0, "y": 1, "z": 2}
    lifted = lift(problem)
    near = rng.random(n) < 0.5
    vals = {}
    for name in names:
        if kinds[name] == "coord":
            vals[name] = base[int(name[1:]) - 1][axis[name[0]]] + rng.uniform(-half_width, half_width, n)
        elif kinds[name] == "plat":
            vals[name] = plat[int(name[1:]) - 1] + rng.uniform(-half_width, half_width, n)
        else:
            centre = lifted.get(name, 0.5)
            local = centre + max(1.0, abs(centre)) * rng.uniform(-1.0, 1.0, n)
            vals[name] = np.where(near, local, rng.uniform(-3.0, 4.0, n))
    ok = np.ones(n, dtype=bool)
    if problem.case in (CaseId.C3b, CaseId.C8):
        lam, big_l, big_d = vals["lambda"], vals["Lambda"], vals["Delta"]
        denom = lam * (big_l - big_d) + big_l * big_d - big_l
        with np.errstate(divide="ignore", invalid="ignore"):
            vals["delta"] = -lam * (big_d - big_l * big_d) / denom
        ok &= np.isfinite(vals["delta"])
    elif problem.case is CaseId.C9:
        d, g, good = _solve_pair_bilinear(lambda v: _cases.case9_matrices_det(v), None, vals, n)
        vals["delta"], vals["gamma"] = d, g
        ok &= good
    return vals, ok


def brute_force_oracle(problem: CaseProblem, sample_count: int = 100_000, config: SolveConfig | None = None):
    """Best feasible design from random sampling plus local descent (an upper bound)."""
    config = config or SolveConfig()
    rng = config.rng("oracle", problem.case.value, problem.combination, problem.planar)
    names = problem.free_unknowns
    half = 0.5 * design_diameter(problem.design)
    data = problem.data()
    base, plat = _cases.split_data(list(data), problem.planar)
    best_vals, best_obj = [], []
    chunk = 50_000
    for start in range(0, sample_count, chunk):
        m = min(chunk, sample_count - start)
        vals, ok = _feasible_samples(problem, m, rng, half)
        obj = np.asarray(_cases.objective_value(problem.case, vals, base, plat, problem.dim), dtype=float)
        obj = np.where(ok & np.isfinite(obj), obj, np.inf)
        best_obj.append(obj)
        best_vals.append(np.stack([vals[k] for k in names], 1))
    obj = np.concatenate(best_obj)
    xs = np.concatenate(best_vals)
    n_polish = max(1, min(int(np.ceil(0.01 * sample_count)), config.oracle_polish_cap))
    order = np.argsort(obj, kind="stable")[:n_polish]

    def f(x):
        return float(_cases.objective_value(problem.case, dict(zip(names, x)), base, plat, problem.dim))

    cons = [
        {"type": "eq", "fun": (lambda x, k=k: float(_cases.side_conditions(problem.case, dict(zip(names, x)))[k]))}
        for k in range(len(problem.multipliers))
    ]
    best = (np.inf, None)
    for i in order:
        if not np.isfinite(obj[i]):
            continue
        res = minimize(f, xs[i], method="SLSQP" if cons else "BFGS", constraints=cons or (), options={"maxiter": 1000})
        x = res.x
        feas = all(abs(c["fun"](x)) < 1e-9 for c in cons)
        if not feas:
            x, val = xs[i], obj[i]
        else:
            val = f(x)
        if val < best[0]:
            s = problem.embed(dict(zip(names, x)))
            if _cases.validity_filter(s, problem.case, config.validity_tol, check_singular=False):
                best = (val, s)
    if best[1] is None:
        return None, float("inf")
    return best[1], float(np.sqrt(distance_sq(problem.design, best[1].design)))
