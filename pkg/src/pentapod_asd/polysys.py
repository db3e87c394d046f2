"""Case objectives, Lagrangians and their square stationarity systems.

Symbolic forms are built once per (case, planarity) with the input anchor
coordinates as extra ring variables, then specialized to numbers. The same
parametric system drives both local solving and parameter homotopies.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from . import cases as _cases
from .cases import CaseId, CaseProblem
from .polynomial import Polynomial, PolyRing


class PolySystemError(ValueError):
    pass


@dataclass(frozen=True)
class PolySystem:
    """Square (or rectangular) polynomial system.

    ``variables`` are the unknowns; ``params`` are ring variables held fixed at
    ``param_values`` during evaluation. ``scaling`` records the factor each
    equation was multiplied by, if any.
    """

    variables: tuple
    equations: tuple
    params: tuple = ()
    param_values: np.ndarray | None = None
    scaling: np.ndarray | None = None
    _compiled: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def ring(self) -> PolyRing:
        return self.equations[0].ring

    def __len__(self):
        return len(self.equations)

    @property
    def is_square(self) -> bool:
        return len(self.equations) == len(self.variables)

    def with_params(self, values) -> "PolySystem":
        values = np.asarray(values)
        if values.shape != (len(self.params),):
            raise PolySystemError(f"expected {len(self.params)} parameter values, got {values.shape}")
        # compiled forms take parameter values at evaluation time, so they are shared
        return replace(self, param_values=values, _compiled=self._compiled)

    def degrees(self) -> list[int]:
        """Total degree of each equation in the unknowns only."""
        return [eq.degree(self.variables) for eq in self.equations]

    def compiled(self):
        from .kernels import compile_system

        if "sys" not in self._compiled:
            self._compiled["sys"] = compile_system(self)
        return self._compiled["sys"]

    def full_point(self, point) -> np.ndarray:
        point = np.asarray(point)
        if point.shape != (len(self.variables),):
            raise PolySystemError(f"point has shape {point.shape}, system has {len(self.variables)} variables")
        if not self.params:
            return point
        if self.param_values is None:
            raise PolySystemError("system parameters have no values")
        dtype = np.result_type(point.dtype, np.asarray(self.param_values).dtype, float)
        return np.concatenate([point.astype(dtype), np.asarray(self.param_values, dtype=dtype)])

    def to_text(self) -> str:
        """One equation per line as ``coef*var^exp`` sums; parameters are substituted when set."""
        eqs = self.equations
        if self.params and self.param_values is not None:
            sub = dict(zip(self.params, (complex(v) if np.iscomplexobj(v) else float(v) for v in self.param_values)))
            eqs = [e.subs(sub) for e in eqs]
        header = "variables " + ", ".join(self.variables)
        return "\n".join([header] + [e.to_text() for e in eqs]) + "\n"


# ---------------------------------------------------------------------------
# Parametric forms (data anchors as ring variables)


@lru_cache(maxsize=None)
def _ring(case: CaseId, planar: bool) -> PolyRing:
    tpl = _cases.template(case)
    return PolyRing(tpl.unknowns(planar) + _cases.data_names(planar))


def _symbols(case: CaseId, planar: bool):
    ring = _ring(case, planar)
    tpl = _cases.template(case)
    values = {n: ring.var(n) for n in tpl.unknowns(planar)}
    data = [ring.var(n) for n in _cases.data_names(planar)]
    base, plat = _cases.split_data(data, planar)
    return ring, values, base, plat


@lru_cache(maxsize=None)
def parametric_objective(case: CaseId, planar: bool) -> Polynomial:
    ring, values, base, plat = _symbols(case, planar)
    return _cases.objective_value(case, values, base, plat, 2 if planar else 3)


@lru_cache(maxsize=None)
def parametric_lagrangian(case: CaseId, planar: bool) -> Polynomial:
    ring, values, _, _ = _symbols(case, planar)
    tpl = _cases.template(case)
    total = parametric_objective(case, planar)
    for mult, side in zip(tpl.multipliers, _cases.side_conditions(case, values)):
        total = total + values[mult] * side
    return total


@lru_cache(maxsize=None)
def parametric_system(case: CaseId, planar: bool) -> PolySystem:
    """Gradient of the Lagrangian in the case unknowns; data anchors stay symbolic."""
    case = _cases.template(case).case
    lag = parametric_lagrangian(case, planar)
    unknowns = _cases.template(case).unknowns(planar)
    eqs = tuple(lag.diff(u).map_coefficients(float) for u in unknowns)
    return PolySystem(unknowns, eqs, _cases.data_names(planar))


def parametric_sides(case: CaseId, planar: bool) -> list[Polynomial]:
    ring, values, _, _ = _symbols(case, planar)
    return _cases.side_conditions(case, values)


def _specialize(poly: Polynomial, keep: Sequence[str], values: Mapping[str, float]) -> Polynomial:
    """Substitute numbers for all variables not in ``keep`` and drop them from the ring."""
    ring = PolyRing(keep)
    idx = [poly.ring.index[n] for n in keep]
    sub = poly.subs(values)
    out: dict = {}
    for e, c in sub.terms.items():
        ne = tuple(e[i] for i in idx)
        out[ne] = out.get(ne, 0) + c
    return Polynomial(ring, out)


def _data_map(problem: CaseProblem) -> dict:
    return dict(zip(_cases.data_names(problem.planar), (float(v) for v in problem.data())))


# ---------------------------------------------------------------------------
# Public builders


def build_objective(problem: CaseProblem) -> Polynomial:
    """Reduced squared distance as a polynomial in the problem's non-multiplier unknowns."""
    poly = parametric_objective(problem.case, problem.planar)
    return _specialize(poly, problem.unknowns, _data_map(problem))


def build_lagrangian(problem: CaseProblem) -> Polynomial:
    """Objective plus multiplier-weighted side conditions (equals the objective if unconstrained)."""
    poly = parametric_lagrangian(problem.case, problem.planar)
    return _specialize(poly, problem.unknowns, _data_map(problem))


def gradient_system(lagrangian: Polynomial, variables: Sequence[str] | None = None) -> PolySystem:
    """One stationarity equation per unknown."""
    names = lagrangian.ring.names
    variables = tuple(variables) if variables is not None else names
    rest = tuple(n for n in names if n not in variables)
    if names[: len(variables)] != variables:
        lagrangian = _reorder(lagrangian, variables + rest)
    eqs = tuple(lagrangian.diff(v) for v in variables)
    return PolySystem(variables, eqs, rest)


def _reorder(poly: Polynomial, names: Sequence[str]) -> Polynomial:
    ring = PolyRing(names)
    idx = [poly.ring.index[n] for n in names]
    return Polynomial(ring, {tuple(e[i] for i in idx): c for e, c in poly.terms.items()})


def problem_system(problem: CaseProblem) -> PolySystem:
    """Parametric KKT system bound to the problem's data."""
    return parametric_system(problem.case, problem.planar).with_params(problem.data())


def scale_coefficients(system: PolySystem) -> PolySystem:
    """Divide each equation by its largest coefficient magnitude (parameters substituted first)."""
    factors = []
    eqs = []
    for eq in system.equations:
        m = _max_coefficient(eq, system)
        if m == 0:
            raise PolySystemError("cannot scale an identically zero equation")
        factors.append(1.0 / m)
        eqs.append(eq * (1.0 / m))
    prior = system.scaling if system.scaling is not None else np.ones(len(eqs))
    return replace(system, equations=tuple(eqs), scaling=prior * np.array(factors), _compiled={})


def _max_coefficient(eq: Polynomial, system: PolySystem) -> float:
    if system.params and system.param_values is not None:
        sub = dict(zip(system.params, system.param_values))
        eq = eq.subs(sub)
    return float(max((abs(complex(c)) for c in eq.terms.values()), default=0.0))


def evaluate(system: PolySystem, point) -> np.ndarray:
    from .kernels import eval_system

    return eval_system(system.compiled(), system.full_point(point))[: len(system.equations)]


def jacobian(system: PolySystem, point) -> np.ndarray:
    from .kernels import eval_system_jacobian

    _, jac = eval_system_jacobian(system.compiled(), system.full_point(point))
    return jac[:, : len(system.variables)]


# ---------------------------------------------------------------------------
# Helpers for solvers


def multipliers_least_squares(problem: CaseProblem, values: Mapping[str, float]) -> dict:
    """Multipliers minimizing the stationarity residual at fixed primal values."""
    mults = problem.multipliers
    if not mults:
        return {}
    system = problem_system(problem)
    names = problem.unknowns
    base = np.array([values.get(n, 0.0) if n not in mults else 0.0 for n in names], dtype=float)
    f0 = evaluate(system, base)
    cols = []
    for m in mults:
        pt = base.copy()
        pt[names.index(m)] = 1.0
        cols.append(evaluate(system, pt) - f0)
    a = np.stack(cols, 1)
    primal = [i for i, n in enumerate(names) if n not in mults]
    sol, *_ = np.linalg.lstsq(a[primal], -f0[primal], rcond=None)
    return dict(zip(mults, (float(x) for x in sol)))
