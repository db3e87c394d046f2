"""Per-case minimization, global aggregation, the M5 sweep and result export."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import cases as _cases
from . import polysys, solvers
from .cases import ALL_CASES, CLOSED_FORM_CASES, CaseId, CaseProblem, SingularDesign
from .geometry import (
    DEFAULT_B,
    DEFAULT_M5_STAR,
    PentapodDesign,
    conic_index,
    distance,
    enclosing_scale,
    rescale,
    sweep_point,
)
from .solvers import SolveConfig

log = logging.getLogger(__name__)

NO_MINIMIZER = "no finite minimizer found"
HOMOTOPY_CASES = (CaseId.C3a, CaseId.C3b, CaseId.C5a, CaseId.C7)
TIE_TOL = 1e-9
CROSS_CHECK_TOL = 1e-6
SCHEMA_VERSION = 1
# warm starts carry roots between neighbouring t, so a small cold multistart suffices
SWEEP_SOLVE = SolveConfig(multistart_count=48, descent_starts=4)


@dataclass(frozen=True)
class PipelineConfig:
    solve: SolveConfig = field(default_factory=SolveConfig)
    cases: tuple = ALL_CASES
    planar: bool | None = None
    rescale: bool = False
    homotopy: bool = True
    # total-degree path budget for an ab-initio run; larger systems fall back to multistart
    homotopy_path_budget: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "cases", tuple(_cases.template(c).case for c in self.cases))

    def with_seed(self, seed: int) -> "PipelineConfig":
        return replace(self, solve=replace(self.solve, seed=seed))


@dataclass
class CombinationEntry:
    combination: tuple
    distance: float | None
    minimizer: SingularDesign | None
    backend: str
    note: str | None = None


@dataclass
class CaseResult:
    case: CaseId
    distance: float | None
    combinations: tuple
    minimizer: SingularDesign | None
    table: list
    provenance: dict = field(default_factory=dict)
    flag: str | None = None

    @property
    def found(self) -> bool:
        return self.distance is not None


@dataclass
class GlobalResult:
    cases: dict
    distance: float | None
    winner: CaseId | None
    minimizer: SingularDesign | None
    rescale_factor: float
    planar: bool
    conic_index: float | None = None

    @property
    def flags(self) -> dict:
        return {c: r.flag for c, r in self.cases.items() if r.flag}


@dataclass
class SweepRow:
    t: float
    case_distances: dict
    distance: float | None
    winner: CaseId | None
    conic_index: float


# ---------------------------------------------------------------------------
# Similarity normalization


@dataclass(frozen=True)
class _Frame:
    """Maps a design to a centred unit-size copy and back."""

    base_shift: np.ndarray
    plat_shift: float
    factor: float

    @classmethod
    def of(cls, design: PentapodDesign) -> "_Frame":
        size = enclosing_scale(design)
        factor = 1.0 / size if size > 0 else 1.0
        return cls(design.base.mean(axis=0), float(design.platform.mean()), factor)

    def forward(self, design: PentapodDesign) -> PentapodDesign:
        return PentapodDesign((design.base - self.base_shift) * self.factor, (design.platform - self.plat_shift) * self.factor)

    def back(self, design: PentapodDesign) -> PentapodDesign:
        return PentapodDesign(design.base / self.factor + self.base_shift, design.platform / self.factor + self.plat_shift)

    def back_singular(self, s: SingularDesign | None) -> SingularDesign | None:
        if s is None:
            return None
        axis = {"x": 0, "y": 1, "z": 2}
        params = {}
        for k, v in s.parameters.items():
            if k[0] in axis and k[1:].isdigit():
                params[k] = v / self.factor + self.base_shift[axis[k[0]]]
            elif k[0] == "r" and k[1:].isdigit():
                params[k] = v / self.factor + self.plat_shift
            else:
                params[k] = v
        return SingularDesign(s.case, s.combination, self.back(s.design), params)


# ---------------------------------------------------------------------------
# Ab-initio cache

_AB_INITIO: dict = {}


def clear_ab_initio_cache() -> None:
    _AB_INITIO.clear()


def homotopy_paths(case: CaseId, planar: bool) -> int:
    """Number of total-degree paths the ab-initio run for ``case`` would track."""
    return int(np.prod(polysys.parametric_system(case, planar).degrees(), dtype=object))


def generic_solutions(case: CaseId, planar: bool, config: SolveConfig) -> solvers.SolutionSet:
    key = (case, planar, config.seed)
    if key not in _AB_INITIO:
        _AB_INITIO[key] = solvers.ab_initio(case, planar, config)
    return _AB_INITIO[key]


# ---------------------------------------------------------------------------
# Per-case minimization


def _closed_form_entries(case: CaseId, design: PentapodDesign, planar: bool, config: SolveConfig) -> list:
    entries = []
    for comb in _cases.enumerate_combinations(case):
        s, d = _cases.closed_form_minimizer(case, design, comb)
        if _cases.validity_filter(s, case, config.validity_tol):
            entries.append(CombinationEntry(comb, float(d), s, "closed-form"))
        else:
            entries.append(CombinationEntry(comb, None, None, "closed-form", "covered by an earlier case"))
    return entries


NON_ISOLATED = 1e-8


def _from_set(sset: solvers.SolutionSet):
    best = sset.best()
    return (best.distance, best.design, best.conditioning) if best else (None, None, None)


def _search_entries(case: CaseId, design: PentapodDesign, planar: bool, config: PipelineConfig, prov: dict, warm: dict | None) -> list:
    solve = config.solve
    starts = None
    if config.homotopy and case in HOMOTOPY_CASES:
        paths = homotopy_paths(case, planar)
        if paths <= config.homotopy_path_budget:
            starts = generic_solutions(case, planar, solve)
            prov["ab_initio"] = {k: v for k, v in starts.provenance.items() if k != "data"}
        else:
            prov["ab_initio"] = f"skipped: {paths} paths over budget {config.homotopy_path_budget}"
    entries = []
    for comb in _cases.enumerate_combinations(case):
        chart_warm = None if warm is None else warm.setdefault((case, comb), {})
        d_ms, s_ms, cond = _from_set(solvers.minimize_combination(case, comb, design, solve, planar, chart_warm))
        backend, d, s, note = "multistart", d_ms, s_ms, None
        if starts is not None and len(starts):
            d_ph, s_ph, _ = _from_set(solvers.parameter_homotopy(case, comb, starts, starts.provenance["data"], design, solve, planar))
            if d_ph is not None and d_ms is not None and abs(d_ph - d_ms) > CROSS_CHECK_TOL:
                note = f"backends disagree: homotopy {d_ph:.10g}, multistart {d_ms:.10g}"
                if d_ms < d_ph and cond is not None and cond < NON_ISOLATED:
                    note += " (multistart root is non-isolated, homotopy tracks isolated roots only)"
                level = logging.WARNING if d_ph < d_ms else logging.INFO
                log.log(level, "case %s combination %s: %s", case, comb, note)
            if d_ph is not None and (d is None or d_ph < d):
                backend, d, s = "parameter-homotopy", d_ph, s_ph
            elif d_ph is not None:
                backend = "multistart+parameter-homotopy"
        if s is not None:
            s = replace(s, combination=tuple(comb))
        entries.append(CombinationEntry(comb, d, s, backend, note))
    return entries


def min_over_case(design: PentapodDesign, case, config: PipelineConfig | None = None, warm: dict | None = None) -> CaseResult:
    """Smallest distance from ``design`` to the singular family of ``case`` over all combinations.

    ``warm`` carries multistart roots between calls on nearby designs.
    """
    config = config or PipelineConfig()
    case = _cases.template(case).case
    planar = design.is_planar() if config.planar is None else bool(config.planar)
    frame = _Frame.of(design)
    work = frame.forward(design)
    prov: dict = {"planar": planar}
    if case in CLOSED_FORM_CASES:
        entries = _closed_form_entries(case, work, planar, config.solve)
    else:
        entries = _search_entries(case, work, planar, config, prov, warm)
    for e in entries:
        if e.distance is not None:
            e.distance = e.distance / frame.factor
            e.minimizer = frame.back_singular(e.minimizer)
    found = [e for e in entries if e.distance is not None]
    if not found:
        return CaseResult(case, None, (), None, entries, prov, NO_MINIMIZER)
    best = min(e.distance for e in found)
    ties = [e for e in found if e.distance - best <= TIE_TOL * max(1.0, best)]
    ties.sort(key=lambda e: e.combination)
    winner = ties[0]
    return CaseResult(case, best, tuple(e.combination for e in ties), winner.minimizer, entries, prov)


def architecture_distance(design: PentapodDesign, config: PipelineConfig | None = None, b_point=None, warm: dict | None = None) -> GlobalResult:
    """Closest architecturally singular design over the configured cases."""
    config = config or PipelineConfig()
    factor = 1.0
    if config.rescale:
        design, factor = rescale(design)
        if b_point is not None:
            b_point = np.asarray(b_point, dtype=float) * factor
    planar = design.is_planar() if config.planar is None else bool(config.planar)
    run = replace(config, planar=planar)
    results = {case: min_over_case(design, case, run, warm) for case in config.cases}
    found = [r for r in results.values() if r.found]
    if found:
        best = min(found, key=lambda r: (r.distance, r.case.order))
        dist, winner, minimizer = best.distance, best.case, best.minimizer
    else:
        dist = winner = minimizer = None
    index = None
    if b_point is not None and planar:
        index = conic_index(design.base, b_point)
    return GlobalResult(results, dist, winner, minimizer, factor, planar, index)


def sweep_design(template: PentapodDesign, t: float, b_point=DEFAULT_B, m5_star=DEFAULT_M5_STAR) -> PentapodDesign:
    return template.with_base_point(4, sweep_point(t, b_point, m5_star))


def sweep(
    template: PentapodDesign,
    t_min: float = -2.0 * math.sqrt(2.0),
    t_max: float = 2.0 * math.sqrt(2.0),
    n: int = 45,
    config: PipelineConfig | None = None,
    b_point=DEFAULT_B,
    m5_star=DEFAULT_M5_STAR,
) -> list[SweepRow]:
    """Move M5 along the line through B and evaluate every case at ``n`` equidistant points."""
    if n < 2:
        raise ValueError("a sweep needs at least two points")
    if not t_min < t_max:
        raise ValueError("t_min must be smaller than t_max")
    config = replace(config or PipelineConfig(solve=SWEEP_SOLVE), rescale=True)
    rows = []
    warm: dict = {}
    for t in np.linspace(t_min, t_max, n):
        design = sweep_design(template, float(t), b_point, m5_star)
        result = architecture_distance(design, config, b_point, warm)
        rows.append(
            SweepRow(
                float(t),
                {c: r.distance for c, r in result.cases.items()},
                result.distance,
                result.winner,
                result.conic_index if result.conic_index is not None else conic_index(design.base, b_point),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Export


SWEEP_COLUMNS = ("t", "D_global", "case_winner") + tuple(f"D_c{c.value}" for c in ALL_CASES) + ("conic_index",)


def fmt(x) -> str:
    """Ten significant digits; empty for missing values."""
    if x is None:
        return ""
    return f"{float(x):.10g}"


def _num(x):
    return None if x is None else float(fmt(x))


def _design_json(design: PentapodDesign | None):
    if design is None:
        return None
    return {"base": [[_num(v) for v in row] for row in design.base], "platform": [_num(v) for v in design.platform]}


def _case_json(r: CaseResult) -> dict:
    return {
        "D": _num(r.distance),
        "combinations": [list(c) for c in r.combinations],
        "minimizer": _design_json(r.minimizer.design if r.minimizer else None),
        "flag": r.flag,
        "table": [
            {"combination": list(e.combination), "D": _num(e.distance), "backend": e.backend, "note": e.note}
            for e in r.table
        ],
    }


def _global_json(res: GlobalResult) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "kind": "distance",
        "D": _num(res.distance),
        "winner": None if res.winner is None else res.winner.value,
        "planar": res.planar,
        "rescale_factor": _num(res.rescale_factor),
        "conic_index": _num(res.conic_index),
        "minimizer": _design_json(res.minimizer.design if res.minimizer else None),
        "cases": {c.value: _case_json(r) for c, r in sorted(res.cases.items(), key=lambda kv: kv[0].order)},
    }


def _sweep_json(rows: Sequence[SweepRow]) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "kind": "sweep",
        "rows": [
            {
                "t": _num(r.t),
                "D": _num(r.distance),
                "winner": None if r.winner is None else r.winner.value,
                "cases": {c.value: _num(d) for c, d in sorted(r.case_distances.items(), key=lambda kv: kv[0].order)},
                "conic_index": _num(r.conic_index),
            }
            for r in rows
        ],
    }


def _sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        per_case = [fmt(r.case_distances.get(c)) for c in ALL_CASES]
        w.writerow([fmt(r.t), fmt(r.distance), "" if r.winner is None else r.winner.value, *per_case, fmt(r.conic_index)])
    return buf.getvalue()


def _global_csv(res: GlobalResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("case", "D", "combinations", "flag"))
    for c in ALL_CASES:
        r = res.cases.get(c)
        if r is None:
            continue
        combos = " ".join("".join(str(k) for k in comb) for comb in r.combinations)
        w.writerow((c.value, fmt(r.distance), combos, r.flag or ""))
    w.writerow(("global", fmt(res.distance), "" if res.winner is None else res.winner.value, ""))
    return buf.getvalue()


def export_results(result, fmt_name: str = "json") -> bytes:
    """Serialize a GlobalResult or a list of SweepRow as JSON or CSV."""
    if fmt_name not in ("json", "csv"):
        raise ValueError(f"unknown format {fmt_name!r}; use 'json' or 'csv'")
    is_sweep = isinstance(result, (list, tuple))
    if is_sweep and not all(isinstance(r, SweepRow) for r in result):
        raise TypeError("sweep export needs SweepRow items")
    if not is_sweep and not isinstance(result, GlobalResult):
        raise TypeError("expected a GlobalResult or a list of SweepRow")
    if fmt_name == "csv":
        text = _sweep_csv(result) if is_sweep else _global_csv(result)
    else:
        text = json.dumps(_sweep_json(result) if is_sweep else _global_json(result), indent=2) + "\n"
    return text.encode()


def coordinate_table(result: GlobalResult) -> str:
    """Base and platform coordinates of every case minimizer, one row per case."""
    lines = []
    for c in ALL_CASES:
        r = result.cases.get(c)
        if r is None or r.minimizer is None:
            continue
        dim = 2 if result.planar else 3
        pts = " ".join("(" + ", ".join(f"{v:.5f}" for v in p[:dim]) + ")" for p in r.minimizer.base)
        plat = " ".join(f"{v:.5f}" for v in r.minimizer.platform)
        lines.append(f"{c.value:>2} | {pts} | {plat}")
    return "\n".join(lines) + "\n"
