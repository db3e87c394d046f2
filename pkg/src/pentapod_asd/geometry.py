"""Pentapod geometry: the design metric, coordinate maps, enclosing balls,
regression lines and the conic index used for comparison.

A linear pentapod is described by five base anchors ``M_i`` in the fixed
frame and five collinear platform anchors ``m_i = (r_i, 0, 0)`` in the moving
frame. Only the scalar ``r_i`` is stored for the platform.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

PLANAR_TOL = 1e-9
DEFAULT_B = (1.0, 1.0, 0.0)
DEFAULT_M5_STAR = (-1.0, -1.0, 0.0)


class GeometryError(ValueError):
    """Raised for inputs a geometric operation cannot handle."""


@dataclass(frozen=True, eq=False)
class PentapodDesign:
    """Five base points (5x3) and five platform coordinates (5,)."""

    base: np.ndarray
    platform: np.ndarray

    def __post_init__(self):
        base = np.array(self.base, dtype=float)
        platform = np.array(self.platform, dtype=float).reshape(-1)
        if base.shape != (5, 3):
            raise GeometryError("a pentapod needs exactly 5 base points with 3 coordinates")
        if platform.shape != (5,):
            raise GeometryError("a pentapod needs exactly 5 platform coordinates")
        if not (np.all(np.isfinite(base)) and np.all(np.isfinite(platform))):
            raise GeometryError("design coordinates must be finite")
        base.setflags(write=False)
        platform.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "platform", platform)

    def is_planar(self, tol: float = PLANAR_TOL) -> bool:
        """True when every base point has ``|z| < tol`` relative to the design size."""
        scale = enclosing_scale(self)
        return bool(np.all(np.abs(self.base[:, 2]) < tol * (scale if scale > 0 else 1.0)))

    def scaled(self, factor: float) -> "PentapodDesign":
        return PentapodDesign(self.base * factor, self.platform * factor)

    def permuted(self, perm: Sequence[int]) -> "PentapodDesign":
        """Return the design whose leg ``k`` is leg ``perm[k]`` of this one."""
        perm = list(perm)
        return PentapodDesign(self.base[perm], self.platform[perm])

    def with_base_point(self, index: int, point) -> "PentapodDesign":
        base = self.base.copy()
        base[index] = point
        return PentapodDesign(base, self.platform)

    def to_dict(self) -> dict:
        return {"base": self.base.tolist(), "platform": self.platform.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "PentapodDesign":
        return cls(data["base"], data["platform"])

    def __eq__(self, other):
        if not isinstance(other, PentapodDesign):
            return NotImplemented
        return bool(np.array_equal(self.base, other.base) and np.array_equal(self.platform, other.platform))

    def __repr__(self):
        return f"PentapodDesign(base={self.base.tolist()}, platform={self.platform.tolist()})"


class IsotropicPoint(NamedTuple):
    p: complex
    pbar: complex


class IsotropicDesign(NamedTuple):
    """Planar design with base points in isotropic coordinates."""

    p: np.ndarray
    pbar: np.ndarray
    platform: np.ndarray


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float


class TLSLine(NamedTuple):
    anchor: np.ndarray
    direction: np.ndarray
    pedal_points: np.ndarray
    residual: float


# -- metric -----------------------------------------------------------------


def distance_sq(a: PentapodDesign, b: PentapodDesign) -> float:
    """Squared extrinsic distance between two designs (mean over the ten anchors)."""
    return float((np.sum((a.base - b.base) ** 2) + np.sum((a.platform - b.platform) ** 2)) / 10.0)


def distance(a: PentapodDesign, b: PentapodDesign) -> float:
    return math.sqrt(distance_sq(a, b))


def to_isotropic(x, y) -> IsotropicPoint:
    return IsotropicPoint(x + 1j * y, x - 1j * y)


def from_isotropic(point: IsotropicPoint):
    p, pbar = point
    x = (p + pbar) / 2
    y = (p - pbar) / 2j
    if np.isrealobj(x) or (abs(np.imag(x)) == 0 and abs(np.imag(y)) == 0):
        return float(np.real(x)), float(np.real(y))
    return x, y


def design_to_isotropic(design: PentapodDesign, tol: float = PLANAR_TOL) -> IsotropicDesign:
    if not design.is_planar(tol):
        raise GeometryError("isotropic form requires planar base")
    x, y = design.base[:, 0], design.base[:, 1]
    return IsotropicDesign(x + 1j * y, x - 1j * y, design.platform.copy())


def distance_sq_isotropic(a, b) -> complex | float:
    """Squared distance evaluated in isotropic base coordinates.

    Accepts :class:`IsotropicDesign` or planar :class:`PentapodDesign` values.
    For real planar inputs the result is real and equals :func:`distance_sq`.
    """
    if isinstance(a, PentapodDesign):
        a = design_to_isotropic(a)
    if isinstance(b, PentapodDesign):
        b = design_to_isotropic(b)
    val = np.sum((a.p - b.p) * (a.pbar - b.pbar) + (a.platform - b.platform) ** 2) / 10.0
    if abs(val.imag) <= 1e-15 * max(1.0, abs(val.real)):
        return float(val.real)
    return complex(val)


# -- enclosing balls ----------------------------------------------------------


def _circumball(pts: np.ndarray):
    """Smallest ball with every point of ``pts`` (1-4 points) on its boundary."""
    k = len(pts)
    if k == 1:
        return pts[0].copy(), 0.0
    if k == 2:
        c = (pts[0] + pts[1]) / 2
        return c, float(np.linalg.norm(pts[0] - c))
    a = pts[0]
    if k == 3:
        u, v = pts[1] - a, pts[2] - a
        w = np.cross(u, v)
        ww = w @ w
        if ww <= 1e-28 * max(u @ u, v @ v, 1e-300) ** 2:
            return None
        c = a + (np.cross(w, u) * (v @ v) + np.cross(v, w) * (u @ u)) / (2 * ww)
        return c, float(np.linalg.norm(c - a))
    A = 2 * (pts[1:] - a)
    rhs = np.sum(pts[1:] ** 2, axis=1) - a @ a
    if abs(np.linalg.det(A)) <= 1e-14 * max(np.abs(A).max(), 1e-300) ** 3:
        return None
    c = np.linalg.solve(A, rhs)
    return c, float(np.linalg.norm(c - a))


def _contains(center, radius, pts, tol):
    return bool(np.all(np.linalg.norm(pts - center, axis=1) <= radius + tol))


def _welzl(pts: list, support: list):
    if not pts or len(support) == 4:
        if not support:
            return None
        return _circumball(np.array(support))
    p = pts[-1]
    ball = _welzl(pts[:-1], support)
    if ball is not None and np.linalg.norm(p - ball[0]) <= ball[1] * (1 + 1e-12) + 1e-15:
        return ball
    return _welzl(pts[:-1], support + [p])


def ball_from_support_subsets(points) -> Ball:
    """Exhaustive minimum ball: best circumball of a subset of size <= 4 containing all points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise GeometryError("cannot enclose an empty point set")
    spread = float(np.ptp(pts, axis=0).max())
    tol = 1e-10 * max(spread, 1e-300)
    best = None
    for k in range(1, min(4, len(pts)) + 1):
        for idx in itertools.combinations(range(len(pts)), k):
            cb = _circumball(pts[list(idx)])
            if cb is None:
                continue
            if _contains(cb[0], cb[1], pts, tol) and (best is None or cb[1] < best[1]):
                best = cb
    return Ball(best[0], best[1])


def min_enclosing_ball(points, seed: int = 0) -> Ball:
    """Smallest ball enclosing 1-5 points (Welzl with an exhaustive fallback)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise GeometryError("cannot enclose an empty point set")
    order = list(range(len(pts)))
    random.Random(seed).shuffle(order)
    ball = _welzl([pts[i] for i in order], [])
    spread = float(np.ptp(pts, axis=0).max())
    if ball is None or not _contains(ball[0], ball[1], pts, 1e-10 * max(spread, 1e-300)):
        if len(pts) > 5:
            raise GeometryError("degenerate point configuration")
        return ball_from_support_subsets(pts)
    return Ball(np.asarray(ball[0]), float(ball[1]))


def platform_radius(platform) -> float:
    r = np.asarray(platform, dtype=float)
    return float((r.max() - r.min()) / 2)


def enclosing_scale(design: PentapodDesign) -> float:
    """max(rho1, rho2): the larger of the base and platform enclosing radii."""
    return max(min_enclosing_ball(design.base).radius, platform_radius(design.platform))


def rescale(design: PentapodDesign) -> tuple[PentapodDesign, float]:
    """Scale the design so that max(rho1, rho2) = 1; returns (design, factor)."""
    scale = enclosing_scale(design)
    if not scale > 0.0:
        raise GeometryError("degenerate design, scale undefined")
    factor = 1.0 / scale
    return design.scaled(factor), factor


# -- regression line ----------------------------------------------------------


def tls_line(points) -> TLSLine:
    """Orthogonal-regression line through ``points`` with their pedal points."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise GeometryError("need at least two points")
    centroid = pts.mean(axis=0)
    q = pts - centroid
    scatter = q.T @ q
    evals, evecs = np.linalg.eigh(scatter)
    if evals[-1] <= 1e-30 * max(1.0, float(np.abs(pts).max()) ** 2):
        raise GeometryError("all points coincide, regression line undefined")
    v = evecs[:, -1]
    lead = np.flatnonzero(np.abs(v) > 1e-12)[0]
    if v[lead] < 0:
        v = -v
    pedal = centroid + np.outer(q @ v, v)
    residual = max(float(np.trace(scatter) - evals[-1]), 0.0)
    return TLSLine(centroid, v, pedal, residual)


# -- conic index and sweep ----------------------------------------------------


def conic_index(base, b_point, tol: float = PLANAR_TOL) -> float:
    """6x6 conic determinant of the pencil vertex and the five base points."""
    base = np.asarray(base, dtype=float).reshape(5, 3)
    b = np.asarray(b_point, dtype=float).reshape(-1)
    if b.shape == (2,):
        b = np.array([b[0], b[1], 0.0])
    pts = np.vstack([b, base])
    scale = max(float(np.abs(pts[:, :2]).max()), 1.0)
    if np.any(np.abs(pts[:, 2]) >= tol * scale):
        raise GeometryError("conic index requires a planar base and pencil vertex")
    x, y = pts[:, 0], pts[:, 1]
    rows = np.column_stack([x * x, x * y, y * y, x, y, np.ones(6)])
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(np.linalg.det(rows))


def sweep_point(t: float, b_point=DEFAULT_B, m5_star=DEFAULT_M5_STAR) -> np.ndarray:
    """Point at signed distance ``t`` from B along the direction M5* -> B."""
    b = np.asarray(b_point, dtype=float)
    m = np.asarray(m5_star, dtype=float)
    d = b - m
    n = np.linalg.norm(d)
    if n == 0.0:
        raise GeometryError("B and M5* must differ")
    return b + t * d / n


def certify_uncertainty(radii, d_value: float) -> bool:
    """True when every anchor uncertainty radius is strictly below ``d_value``."""
    if d_value < 0:
        raise GeometryError("distance must be nonnegative")
    radii = np.asarray(radii, dtype=float)
    return bool(np.max(radii) < d_value)


# -- independent singularity check -------------------------------------------


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def singularity_residual(design: PentapodDesign, n_poses: int = 8, seed: int = 0) -> float:
    """Largest relative smallest singular value of the leg Pluecker matrix over random poses.

    Architecturally singular designs have linearly dependent leg lines in every
    pose, so the value is at rounding level for them and O(1e-2) or more for
    typical regular designs.
    """
    scale = max(float(np.abs(design.base).max()), float(np.abs(design.platform).max()), 1e-300)
    base = design.base / scale
    r = design.platform / scale
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_poses):
        rot = _random_rotation(rng)
        trans = rng.normal(size=3)
        plat = trans + np.outer(r, rot[:, 0])
        d = plat - base
        lines = np.hstack([d, np.cross(base, d)])
        lines /= np.maximum(np.linalg.norm(d, axis=1), 1e-300)[:, None]
        s = np.linalg.svd(lines, compute_uv=False)
        worst = max(worst, float(s[-1] / s[0]))
    return worst
