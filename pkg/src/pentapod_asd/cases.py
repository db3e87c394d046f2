"""The twelve families of architecturally singular linear pentapods.

Each case is a *template*: five template positions with prescribed
coincidences, collinearities and cross-ratio relations. A combination maps
template positions to physical legs (1-based). The same template code builds
numeric designs and symbolic polynomials, because it only uses ``+``, ``-``
and ``*`` on its inputs.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .geometry import PentapodDesign, distance_sq, singularity_residual, tls_line
from .polynomial import PolyRing, determinant

INCIDENCE_TOL = 1e-9
SINGULARITY_TOL = 1e-7


class CaseError(ValueError):
    """Case/parameter mismatch or unsupported request."""


class CaseId(enum.Enum):
    C0 = "0"
    C1 = "1"
    C2 = "2"
    C3a = "3a"
    C3b = "3b"
    C4 = "4"
    C5a = "5a"
    C5b = "5b"
    C6 = "6"
    C7 = "7"
    C8 = "8"
    C9 = "9"

    @property
    def order(self) -> int:
        return _ORDER[self]

    def previous(self) -> list["CaseId"]:
        return ALL_CASES[: self.order]

    @classmethod
    def parse(cls, text: str) -> "CaseId":
        key = str(text).strip().lower().lstrip("c")
        for c in cls:
            if c.value.lower() == key:
                return c
        raise CaseError(f"unknown case {text!r}")

    def __lt__(self, other):
        return self.order < other.order

    def __str__(self):
        return self.value


ALL_CASES = tuple(CaseId)
_ORDER = {c: i for i, c in enumerate(ALL_CASES)}
CLOSED_FORM_CASES = (CaseId.C0, CaseId.C1, CaseId.C2, CaseId.C4, CaseId.C5b, CaseId.C6)

Combination = tuple  # five distinct 1-based leg indices, one per template position


# ---------------------------------------------------------------------------
# Template arithmetic, generic over numbers and polynomials


def _anchor(values, k: int, dim: int):
    return tuple(values[f"{c}{k}"] for c in "xyz"[:dim])


def _lerp(a, b, t):
    return tuple(ai + t * (bi - ai) for ai, bi in zip(a, b))


def _plane(a, b, c, s, u):
    return tuple(ai + s * (bi - ai) + u * (ci - ai) for ai, bi, ci in zip(a, b, c))


def _lerp1(a, b, t):
    return a + t * (b - a)


def _build_c0(v, base, plat, dim):
    a = _anchor(v, 1, dim)
    r = v["r1"]
    return [a, a, base[2], base[3], base[4]], [r, r, plat[2], plat[3], plat[4]]


def _build_c1(v, base, plat, dim):
    a = _anchor(v, 1, dim)
    return [a, a, a, base[3], base[4]], list(plat)


def _build_c2(v, base, plat, dim):
    a, b = _anchor(v, 1, dim), _anchor(v, 2, dim)
    r = v["r1"]
    return [a, b, _lerp(a, b, v["Lambda"]), base[3], base[4]], [r, r, r, plat[3], plat[4]]


def _build_c3a(v, base, plat, dim):
    a, b = _anchor(v, 1, dim), _anchor(v, 2, dim)
    c = _lerp(a, b, v["Lambda"])
    r = v["r1"]
    return [a, b, c, c, base[4]], [r, r, plat[2], plat[3], plat[4]]


def _build_c3b(v, base, plat, dim):
    a, b = _anchor(v, 1, dim), _anchor(v, 2, dim)
    r1, r2 = v["r1"], v["r2"]
    return (
        [a, b, _lerp(a, b, v["Lambda"]), _lerp(a, b, v["Delta"]), base[4]],
        [r1, r2, _lerp1(r1, r2, v["lambda"]), _lerp1(r1, r2, v["delta"]), plat[4]],
    )


def _build_c4(v, base, plat, dim):
    r = v["r1"]
    return list(base), [r, r, r, r, plat[4]]


def _build_c5a(v, base, plat, dim):
    a, c = _anchor(v, 1, dim), _anchor(v, 3, dim)
    return [a, a, c, _lerp(a, c, v["Gamma"]), _lerp(a, c, v["Phi"])], list(plat)


def _build_c5b(v, base, plat, dim):
    a, b = _anchor(v, 1, dim), _anchor(v, 2, dim)
    pts = [a, b] + [_lerp(a, b, v[k]) for k in ("Lambda", "Delta", "Phi")]
    return pts, list(plat)


def _build_c6(v, base, plat, dim):
    q = _anchor(v, 4, dim)
    r = v["r1"]
    return [base[0], base[1], base[2], q, q], [r, r, r, plat[3], plat[4]]


def _build_c7(v, base, plat, dim):
    b, c, d = _anchor(v, 2, dim), _anchor(v, 3, dim), _anchor(v, 4, dim)
    r1, r4 = v["r1"], v["r4"]
    return (
        [_lerp(c, b, v["Gamma"]), b, c, d, _lerp(c, d, v["Phi"])],
        [r1, r1, plat[2], r4, r4],
    )


def _build_c8(v, base, plat, dim):
    a, p4, p5 = _anchor(v, 1, dim), _anchor(v, 4, dim), _anchor(v, 5, dim)
    meet = _lerp(p4, p5, v["Gamma"])
    r1, r4 = v["r1"], v["r4"]
    return (
        [a, _lerp(meet, a, v["Lambda"]), _lerp(meet, a, v["Delta"]), p4, p5],
        [r1, _lerp1(r4, r1, v["lambda"]), _lerp1(r4, r1, v["delta"]), r4, r4],
    )


def _build_c9(v, base, plat, dim):
    a, b, c = _anchor(v, 1, dim), _anchor(v, 2, dim), _anchor(v, 3, dim)
    r1, r2 = v["r1"], v["r2"]
    return (
        [a, b, c, _plane(a, b, c, v["Psi1"], v["Upsilon1"]), _plane(a, b, c, v["Psi2"], v["Upsilon2"])],
        [r1, r2] + [_lerp1(r1, r2, v[k]) for k in ("lambda", "delta", "gamma")],
    )


# ---------------------------------------------------------------------------
# Side conditions


def side_condition_S(Lambda, Delta, lam, delta):
    """Cross-ratio side condition shared by cases 3b and 8."""
    return lam * delta * (Lambda - Delta) + lam * (Delta - Lambda * Delta) + delta * (Lambda * Delta - Lambda)


def case9_matrices(Psi1, Upsilon1, Psi2, Upsilon2, lam, delta, gamma):
    """The two literal 5x5 matrices whose determinants encode the projectivity."""
    rows = [
        [1, 0, 0, 0],
        [1, 1, 0, 1],
        [1, 0, 1, 0],
        [1, Psi1, Upsilon1, Psi1 * delta],
        [1, Psi2, Upsilon2, Psi2 * gamma],
    ]
    last1 = [0, 1, lam, delta, gamma]
    last2 = [0, 0, lam, Upsilon1 * delta, Upsilon2 * gamma]
    m1 = [row + [x] for row, x in zip(rows, last1)]
    m2 = [row + [x] for row, x in zip(rows, last2)]
    return m1, m2


_CASE9_NAMES = ("Psi1", "Upsilon1", "Psi2", "Upsilon2", "lambda", "delta", "gamma")


@lru_cache(maxsize=None)
def case9_polynomials():
    """S1 and S2 expanded once with exact integer coefficients."""
    ring = PolyRing(_CASE9_NAMES)
    m1, m2 = case9_matrices(*ring.vars(*_CASE9_NAMES))
    return determinant(m1), determinant(m2)


def case9_conditions(Psi1, Upsilon1, Psi2, Upsilon2, lam, delta, gamma):
    """Values of S1 and S2 from the expanded polynomials."""
    point = (Psi1, Upsilon1, Psi2, Upsilon2, lam, delta, gamma)
    s1, s2 = case9_polynomials()
    return s1.evaluate(point), s2.evaluate(point)


def _sides_c3b(v):
    return [side_condition_S(v["Lambda"], v["Delta"], v["lambda"], v["delta"])]


def _sides_c9(v):
    return list(case9_matrices_det(v))


def case9_matrices_det(v):
    m1, m2 = case9_matrices(*(v[k] for k in _CASE9_NAMES))
    return determinant(m1), determinant(m2)


# ---------------------------------------------------------------------------
# Case table


@dataclass(frozen=True)
class CaseTemplate:
    case: CaseId
    anchors: tuple  # template positions with free base coordinates
    parameters: tuple
    multipliers: tuple
    groups: tuple  # template positions quotiented by sorting
    build: Callable
    sides: Callable | None = None
    swap_groups: bool = False  # the first and last group are interchangeable

    def unknowns(self, planar: bool) -> tuple:
        dim = 2 if planar else 3
        coords = tuple(f"{c}{k}" for k in self.anchors for c in "xyz"[:dim])
        return coords + self.parameters + self.multipliers

    def free_unknowns(self, planar: bool) -> tuple:
        n = len(self.multipliers)
        names = self.unknowns(planar)
        return names[: len(names) - n] if n else names


TEMPLATES = {
    CaseId.C0: CaseTemplate(CaseId.C0, (1,), ("r1",), (), ((0, 1), (2, 3, 4)), _build_c0),
    CaseId.C1: CaseTemplate(CaseId.C1, (1,), (), (), ((0, 1, 2), (3, 4)), _build_c1),
    CaseId.C2: CaseTemplate(CaseId.C2, (1, 2), ("r1", "Lambda"), (), ((0, 1, 2), (3, 4)), _build_c2),
    CaseId.C3a: CaseTemplate(CaseId.C3a, (1, 2), ("r1", "Lambda"), (), ((0, 1), (2, 3), (4,)), _build_c3a),
    CaseId.C3b: CaseTemplate(
        CaseId.C3b,
        (1, 2),
        ("r1", "r2", "Lambda", "Delta", "lambda", "delta"),
        ("mu",),
        ((0, 1, 2, 3), (4,)),
        _build_c3b,
        _sides_c3b,
    ),
    CaseId.C4: CaseTemplate(CaseId.C4, (), ("r1",), (), ((0, 1, 2, 3), (4,)), _build_c4),
    CaseId.C5a: CaseTemplate(CaseId.C5a, (1, 3), ("Gamma", "Phi"), (), ((0, 1), (2, 3, 4)), _build_c5a),
    CaseId.C5b: CaseTemplate(CaseId.C5b, (1, 2), ("Lambda", "Delta", "Phi"), (), ((0, 1, 2, 3, 4),), _build_c5b),
    CaseId.C6: CaseTemplate(CaseId.C6, (4,), ("r1",), (), ((0, 1, 2), (3, 4)), _build_c6),
    CaseId.C7: CaseTemplate(
        CaseId.C7, (2, 3, 4), ("r1", "r4", "Gamma", "Phi"), (), ((0, 1), (2,), (3, 4)), _build_c7, None, True
    ),
    CaseId.C8: CaseTemplate(
        CaseId.C8,
        (1, 4, 5),
        ("r1", "r4", "Gamma", "Lambda", "Delta", "lambda", "delta"),
        ("mu",),
        ((0, 1, 2), (3, 4)),
        _build_c8,
        _sides_c3b,
    ),
    CaseId.C9: CaseTemplate(
        CaseId.C9,
        (1, 2, 3),
        ("r1", "r2") + _CASE9_NAMES,
        ("mu1", "mu2"),
        ((0, 1, 2, 3, 4),),
        _build_c9,
        _sides_c9,
    ),
}


def template(case: CaseId) -> CaseTemplate:
    return TEMPLATES[CaseId.parse(case.value if isinstance(case, CaseId) else case)]


# ---------------------------------------------------------------------------
# Combinations


def canonical_combination(case: CaseId, legs: Sequence[int]) -> Combination:
    """Representative of ``legs`` under the template's position symmetries."""
    legs = tuple(int(x) for x in legs)
    if len(legs) != 5 or sorted(legs) != [1, 2, 3, 4, 5]:
        raise CaseError(f"combination must be a permutation of 1..5, got {legs}")
    tpl = template(case)
    parts = [tuple(sorted(legs[i] for i in g)) for g in tpl.groups]
    if tpl.swap_groups and parts[-1] < parts[0]:
        parts[0], parts[-1] = parts[-1], parts[0]
    return tuple(x for p in parts for x in p)


@lru_cache(maxsize=None)
def _combinations(case: CaseId) -> tuple:
    seen = {canonical_combination(case, p) for p in itertools.permutations(range(1, 6))}
    return tuple(sorted(seen))


def enumerate_combinations(case: CaseId) -> list[Combination]:
    return list(_combinations(template(case).case))


# ---------------------------------------------------------------------------
# Data binding


def data_names(planar: bool) -> tuple:
    coords = "XY" if planar else "XYZ"
    return tuple(f"{c}{k}" for c in coords for k in range(1, 6)) + tuple(f"R{k}" for k in range(1, 6))


def template_data(design: PentapodDesign, combination: Sequence[int], planar: bool) -> np.ndarray:
    """Input coordinates in template order, flattened like :func:`data_names`."""
    idx = [leg - 1 for leg in combination]
    base = np.asarray(design.base)[idx]
    plat = np.asarray(design.platform)[idx]
    dim = 2 if planar else 3
    return np.concatenate([base[:, k] for k in range(dim)] + [plat])


def split_data(values: Sequence, planar: bool):
    """Inverse of the flattening in :func:`template_data` (works for any element type)."""
    dim = 2 if planar else 3
    cols = [list(values[5 * k : 5 * k + 5]) for k in range(dim)]
    base = [tuple(cols[k][i] for k in range(dim)) for i in range(5)]
    plat = list(values[5 * dim : 5 * dim + 5])
    return base, plat


def evaluate_template(case: CaseId, values: Mapping, base, plat, dim: int):
    return template(case).build(values, base, plat, dim)


def objective_value(case: CaseId, values: Mapping, base, plat, dim: int):
    """Reduced squared distance, generic in the element type."""
    new_base, new_plat = evaluate_template(case, values, base, plat, dim)
    total = 0
    for p_new, p_old in zip(new_base, base):
        for a, b in zip(p_new, p_old):
            d = a - b
            total = total + d * d
    for a, b in zip(new_plat, plat):
        d = a - b
        total = total + d * d
    return total * Fraction(1, 10)


def side_conditions(case: CaseId, values: Mapping) -> list:
    tpl = template(case)
    return tpl.sides(values) if tpl.sides else []


# ---------------------------------------------------------------------------
# Singular designs and problems


@dataclass(frozen=True)
class SingularDesign:
    case: CaseId
    combination: Combination
    design: PentapodDesign
    parameters: dict = field(default_factory=dict, compare=False)

    @property
    def base(self):
        return self.design.base

    @property
    def platform(self):
        return self.design.platform


def _values_mapping(case: CaseId, values, planar: bool | None):
    tpl = template(case)
    if isinstance(values, Mapping):
        keys = set(values)
        if planar is None:
            planar = not any(k.startswith("z") for k in keys) and bool(tpl.anchors)
        need = set(tpl.free_unknowns(planar))
        missing = need - keys
        extra = keys - need - set(tpl.multipliers)
        if missing or extra:
            raise CaseError(
                f"case {case}: missing {sorted(missing)} unexpected {sorted(extra)}"
            )
        return {k: values[k] for k in need}, planar
    values = list(values)
    n3, n2 = len(tpl.free_unknowns(False)), len(tpl.free_unknowns(True))
    if planar is None:
        planar = len(values) == n2 and n2 != n3
    names = tpl.free_unknowns(planar)
    if len(values) not in (len(names), len(tpl.unknowns(planar))):
        raise CaseError(f"case {case} expects {len(names)} values, got {len(values)}")
    return dict(zip(names, values)), planar


def embed(case: CaseId, combination: Sequence[int], values, design: PentapodDesign, planar: bool | None = None) -> SingularDesign:
    """Build the singular design described by ``values`` (anchor coordinates and parameters)."""
    case = template(case).case
    combination = tuple(int(x) for x in combination)
    if sorted(combination) != [1, 2, 3, 4, 5]:
        raise CaseError(f"combination must be a permutation of 1..5, got {combination}")
    vals, planar = _values_mapping(case, values, planar)
    dim = 2 if planar else 3
    idx = [leg - 1 for leg in combination]
    base_t = [tuple(design.base[i][:dim]) for i in idx]
    plat_t = [design.platform[i] for i in idx]
    new_base, new_plat = evaluate_template(case, vals, base_t, plat_t, dim)
    base = np.array(design.base, dtype=float)
    plat = np.array(design.platform, dtype=float)
    for pos, leg in enumerate(idx):
        pt = [float(np.real(c)) for c in new_base[pos]]
        base[leg] = pt + ([0.0] if planar else [])
        plat[leg] = float(np.real(new_plat[pos]))
    return SingularDesign(case, combination, PentapodDesign(base, plat), {k: float(np.real(v)) for k, v in vals.items()})


@dataclass(frozen=True)
class CaseProblem:
    """A case and combination bound to an input design."""

    case: CaseId
    combination: Combination
    design: PentapodDesign
    planar: bool

    @classmethod
    def create(cls, case, combination, design, planar: bool | None = None):
        case = template(case).case
        if planar is None:
            planar = design.is_planar()
        return cls(case, tuple(combination), design, bool(planar))

    @property
    def template(self) -> CaseTemplate:
        return TEMPLATES[self.case]

    @property
    def unknowns(self) -> tuple:
        return self.template.unknowns(self.planar)

    @property
    def free_unknowns(self) -> tuple:
        return self.template.free_unknowns(self.planar)

    @property
    def multipliers(self) -> tuple:
        return self.template.multipliers

    @property
    def dim(self) -> int:
        return 2 if self.planar else 3

    def data(self) -> np.ndarray:
        return template_data(self.design, self.combination, self.planar)

    def embed(self, values) -> SingularDesign:
        return embed(self.case, self.combination, values, self.design, self.planar)

    def objective(self, values: Mapping):
        base, plat = split_data(self.data(), self.planar)
        return objective_value(self.case, values, base, plat, self.dim)

    def side_conditions(self, values: Mapping) -> list:
        return side_conditions(self.case, values)


# ---------------------------------------------------------------------------
# Closed forms


def _ratio(p, a, b) -> float:
    d = b - a
    n = float(d @ d)
    return float((p - a) @ d / n) if n > 0 else 0.0


def closed_form_values(case: CaseId, design: PentapodDesign, combination: Sequence[int], planar: bool = False) -> dict:
    """Unknown values of the geometric minimizer for the cases that have one."""
    case = template(case).case
    idx = [leg - 1 for leg in combination]
    dim = 2 if planar else 3
    base = np.asarray(design.base)[idx][:, :dim]
    plat = np.asarray(design.platform)[idx]

    def put(vals, k, p):
        for c, x in zip("xyz", p):
            vals[f"{c}{k}"] = float(x)

    vals: dict = {}
    if case is CaseId.C0:
        put(vals, 1, base[:2].mean(0))
        vals["r1"] = float(plat[:2].mean())
    elif case is CaseId.C1:
        put(vals, 1, base[:3].mean(0))
    elif case is CaseId.C2:
        pedal = _pedal(base[:3])
        put(vals, 1, pedal[0])
        put(vals, 2, pedal[1])
        vals["r1"] = float(plat[:3].mean())
        vals["Lambda"] = _ratio(pedal[2], pedal[0], pedal[1])
    elif case is CaseId.C4:
        vals["r1"] = float(plat[:4].mean())
    elif case is CaseId.C5b:
        pedal = _pedal(base)
        put(vals, 1, pedal[0])
        put(vals, 2, pedal[1])
        for k, name in zip((2, 3, 4), ("Lambda", "Delta", "Phi")):
            vals[name] = _ratio(pedal[k], pedal[0], pedal[1])
    elif case is CaseId.C6:
        put(vals, 4, base[3:].mean(0))
        vals["r1"] = float(plat[:3].mean())
    else:
        raise CaseError(f"case {case} has no closed-form minimizer")
    return vals


def _pedal(points: np.ndarray) -> np.ndarray:
    if np.ptp(points, axis=0).max() == 0.0:
        return points.copy()
    pts3 = np.zeros((len(points), 3))
    pts3[:, : points.shape[1]] = points
    return tls_line(pts3).pedal_points[:, : points.shape[1]]


def closed_form_minimizer(case: CaseId, design: PentapodDesign, combination: Sequence[int]):
    """Geometric minimizer and its distance for the combination."""
    case = template(case).case
    combination = canonical_combination(case, combination) if len(combination) == 5 else _complete(case, combination)
    if case in (CaseId.C2, CaseId.C5b):
        combination = _spread_anchors(design, combination, 3 if case is CaseId.C2 else 5)
    planar = False
    vals = closed_form_values(case, design, combination, planar)
    s = embed(case, combination, vals, design, planar)
    return s, float(np.sqrt(distance_sq(design, s.design)))


def _spread_anchors(design: PentapodDesign, combination: Combination, k: int) -> Combination:
    """Put the two farthest-apart pedal points of the first ``k`` legs in the anchor slots.

    Other points of a regression line are parametrized relative to the anchors,
    which fails when the anchors' pedal points coincide.
    """
    legs = list(combination[:k])
    pedal = _pedal(np.asarray(design.base)[[leg - 1 for leg in legs]])
    i, j = max(itertools.combinations(range(k), 2), key=lambda ij: float(np.sum((pedal[ij[0]] - pedal[ij[1]]) ** 2)))
    rest = [legs[m] for m in range(k) if m not in (i, j)]
    return tuple([legs[i], legs[j]] + rest) + tuple(combination[k:])


def _complete(case: CaseId, legs: Sequence[int]) -> Combination:
    """Extend a partial leg list (e.g. the two legs of case 0) to a canonical combination."""
    legs = [int(x) for x in legs]
    rest = [k for k in range(1, 6) if k not in legs]
    return canonical_combination(case, legs + rest)


# ---------------------------------------------------------------------------
# Incidence predicates and validity


def _scale(base: np.ndarray, plat: np.ndarray) -> float:
    b = base - base.mean(0)
    p = plat - plat.mean()
    return max(float(np.abs(b).max()), float(np.abs(p).max()), 1e-300)


def _same(a, b, tol) -> bool:
    return bool(np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol)


def _collinear(points: np.ndarray, tol: float) -> bool:
    q = points - points.mean(0)
    s = np.linalg.svd(q, compute_uv=False)
    return len(s) < 2 or s[1] <= tol


def _coplanar(points: np.ndarray, tol: float) -> bool:
    q = points - points.mean(0)
    s = np.linalg.svd(q, compute_uv=False)
    return len(s) < 3 or s[2] <= tol


def _line_coordinates(points: np.ndarray):
    """Affine coordinates along the best-fit line of collinear points."""
    q = points - points.mean(0)
    _, _, vh = np.linalg.svd(q)
    direction = vh[0]
    return q @ direction, points.mean(0), direction


def _projective(pairs, tol) -> bool:
    """Whether four (base, platform) homogeneous pairs are related by a projectivity.

    Each pair is ((s, w), (t, v)); the condition is the singularity of the
    bilinear-relation matrix.
    """
    rows = np.array([[s * t, s * v, w * t, w * v] for (s, w), (t, v) in pairs])
    sv = np.linalg.svd(rows, compute_uv=False)
    return sv[-1] <= tol * max(1.0, sv[0])


def _inc_c0(base, plat, tol):
    return any(
        _same(base[i], base[j], tol) and abs(plat[i] - plat[j]) <= tol
        for i, j in itertools.combinations(range(5), 2)
    )


def _inc_c1(base, plat, tol):
    return any(
        _same(base[i], base[j], tol) and _same(base[i], base[k], tol)
        for i, j, k in itertools.combinations(range(5), 3)
    )


def _inc_c2(base, plat, tol):
    for tri in itertools.combinations(range(5), 3):
        t = list(tri)
        if max(abs(plat[t] - plat[t[0]])) <= tol and _collinear(base[t], tol):
            return True
    return False


def _inc_c3a(base, plat, tol):
    for a, b in itertools.combinations(range(5), 2):
        if abs(plat[a] - plat[b]) > tol:
            continue
        for c, d in itertools.combinations([k for k in range(5) if k not in (a, b)], 2):
            if _same(base[c], base[d], tol) and _collinear(base[[a, b, c]], tol):
                return True
    return False


def _inc_c3b(base, plat, tol):
    for quad in itertools.combinations(range(5), 4):
        q = list(quad)
        if not _collinear(base[q], tol):
            continue
        s, _, _ = _line_coordinates(base[q])
        if _projective([((s[i], 1.0), (plat[k], 1.0)) for i, k in enumerate(q)], tol):
            return True
    return False


def _inc_c4(base, plat, tol):
    for quad in itertools.combinations(range(5), 4):
        q = list(quad)
        if max(abs(plat[q] - plat[q[0]])) <= tol:
            return True
    return False


def _inc_c5a(base, plat, tol):
    return _inc_c5b(base, plat, tol) and any(
        _same(base[i], base[j], tol) for i, j in itertools.combinations(range(5), 2)
    )


def _inc_c5b(base, plat, tol):
    return _collinear(base, tol)


def _inc_c6(base, plat, tol):
    for a, b in itertools.combinations(range(5), 2):
        tri = [k for k in range(5) if k not in (a, b)]
        if _same(base[a], base[b], tol) and max(abs(plat[tri] - plat[tri[0]])) <= tol:
            return True
    return False


def _inc_c7(base, plat, tol):
    for c in range(5):
        rest = [k for k in range(5) if k != c]
        for p in ((0, 1), (0, 2), (0, 3)):
            a = [rest[i] for i in p]
            b = [k for k in rest if k not in a]
            if (
                abs(plat[a[0]] - plat[a[1]]) <= tol
                and abs(plat[b[0]] - plat[b[1]]) <= tol
                and _collinear(base[a + [c]], tol)
                and _collinear(base[b + [c]], tol)
            ):
                return True
    return False


def _inc_c8(base, plat, tol):
    if not _coplanar(base, tol):
        return False
    for p, q in itertools.combinations(range(5), 2):
        if abs(plat[p] - plat[q]) > tol:
            continue
        tri = [k for k in range(5) if k not in (p, q)]
        if not _collinear(base[tri], tol):
            continue
        s, origin, direction = _line_coordinates(base[tri])
        d = base[q] - base[p]
        if np.max(np.abs(d)) <= tol:
            continue
        # intersection of the carrier line with the line through base[p], base[q]
        mat = np.stack([direction, -d], 1)
        sol, *_ = np.linalg.lstsq(mat, base[p] - origin, rcond=None)
        cross = np.cross(direction, d) if base.shape[1] == 3 else direction[0] * d[1] - direction[1] * d[0]
        if np.max(np.abs(cross)) <= tol * max(1.0, float(np.abs(d).max())):
            meet = (1.0, 0.0)  # parallel lines meet at infinity
        else:
            meet = (sol[0], 1.0)
        pairs = [((s[i], 1.0), (plat[k], 1.0)) for i, k in enumerate(tri)] + [(meet, (plat[p], 1.0))]
        if _projective(pairs, tol):
            return True
    return False


_INCIDENCE = {
    CaseId.C0: _inc_c0,
    CaseId.C1: _inc_c1,
    CaseId.C2: _inc_c2,
    CaseId.C3a: _inc_c3a,
    CaseId.C3b: _inc_c3b,
    CaseId.C4: _inc_c4,
    CaseId.C5a: _inc_c5a,
    CaseId.C5b: _inc_c5b,
    CaseId.C6: _inc_c6,
    CaseId.C7: _inc_c7,
    CaseId.C8: _inc_c8,
}


def matches_case(case: CaseId, base, platform, tol: float = INCIDENCE_TOL) -> bool:
    """Whether the (rescaled) design satisfies the defining incidences of ``case`` for some leg assignment."""
    base = np.asarray(base)
    plat = np.asarray(platform)
    scale = _scale(base, plat)
    return _INCIDENCE[case](base / scale, plat / scale, tol)


def _own_assumptions(case: CaseId, base, plat, tol) -> bool:
    if case is CaseId.C9:
        if any(abs(plat[i] - plat[j]) <= tol for i, j in itertools.combinations(range(5), 2)):
            return False
        if any(_collinear(base[list(t)], tol) for t in itertools.combinations(range(5), 3)):
            return False
    return True


def configuration_valid(case: CaseId, base, platform, tol: float = INCIDENCE_TOL) -> bool:
    """Validity check on raw (possibly complex) anchor arrays, without the pose test."""
    case = template(case).case
    base = np.asarray(base)
    plat = np.asarray(platform)
    scale = _scale(base, plat)
    b, p = base / scale, plat / scale
    if not _own_assumptions(case, b, p, tol):
        return False
    return not any(_INCIDENCE[prev](b, p, tol) for prev in case.previous())


def validity_filter(s: SingularDesign, case: CaseId | None = None, tol: float = INCIDENCE_TOL, check_singular: bool = True) -> bool:
    """True iff ``s`` is a genuine design of ``case`` not covered by any earlier case."""
    case = template(case if case is not None else s.case).case
    if not configuration_valid(case, s.base, s.platform, tol):
        return False
    if check_singular and singularity_residual(s.design) > SINGULARITY_TOL:
        return False
    return True
