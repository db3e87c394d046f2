"""Hot loops: sparse system evaluation, damped Newton, and path tracking.

Every system compiles into flat monomial arrays: a coefficient per term, the
term's factors as (variable, exponent) pairs, and the (row, col) slot the term
is added to. The residual uses column 0; the Jacobian uses one column per
variable. Kernels below are written once; ``_accumulate`` and ``_solve`` are
bound to either the numba loop versions or the numpy vectorized versions
depending on ``PENTAPOD_ASD_NUMBA``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import USE_NUMBA, njit

# status codes shared by Newton and the tracker
OK = 0
STEP_FAILURE = 1
MAX_STEPS = 2
DIVERGED = 3
SINGULAR = 4


# ---------------------------------------------------------------------------
# Compilation


@dataclass(frozen=True)
class Pack:
    """Flat monomial list scattered into a 2-D output."""

    coef: np.ndarray  # complex128
    coef_real: np.ndarray | None  # float64 copy when all coefficients are real
    term_ptr: np.ndarray
    fac_var: np.ndarray
    fac_exp: np.ndarray
    row: np.ndarray
    col: np.ndarray
    shape: tuple

    def arrays(self, real: bool):
        coef = self.coef_real if real else self.coef
        return coef, self.term_ptr, self.fac_var, self.fac_exp, self.row, self.col


def _pack(entries, shape) -> Pack:
    coefs, ptr, fv, fe, rows, cols = [], [0], [], [], [], []
    for r, c, poly in entries:
        for e, coef in poly.terms.items():
            nz = [(i, k) for i, k in enumerate(e) if k]
            if not nz:
                nz = [(0, 0)]
            for i, k in nz:
                fv.append(i)
                fe.append(k)
            ptr.append(len(fv))
            coefs.append(complex(coef))
            rows.append(r)
            cols.append(c)
    coef = np.array(coefs, dtype=np.complex128)
    real = coef.real.copy() if not np.any(coef.imag) else None
    as_int = lambda a: np.array(a, dtype=np.int64)
    return Pack(coef, real, as_int(ptr), as_int(fv), as_int(fe), as_int(rows), as_int(cols), shape)


@dataclass
class CompiledSystem:
    n_eq: int
    n_var: int
    n_total: int
    f: Pack
    jx: Pack
    _equations: tuple
    _jp: Pack | None = None

    @property
    def jp(self) -> Pack:
        """Jacobian block with respect to the parameters (built on first use)."""
        if self._jp is None:
            names = self._equations[0].ring.names
            entries = [
                (i, j, eq.diff(names[self.n_var + j]))
                for i, eq in enumerate(self._equations)
                for j in range(self.n_total - self.n_var)
            ]
            self._jp = _pack(entries, (self.n_eq, max(self.n_total - self.n_var, 1)))
        return self._jp

    @property
    def real(self) -> bool:
        return self.f.coef_real is not None and self.jx.coef_real is not None


def compile_system(system) -> CompiledSystem:
    eqs = system.equations
    names = eqs[0].ring.names
    n_var = len(system.variables)
    if tuple(names[:n_var]) != tuple(system.variables):
        raise ValueError("system variables must lead the ring ordering")
    f = _pack([(i, 0, eq) for i, eq in enumerate(eqs)], (len(eqs), 1))
    jx = _pack([(i, j, eq.diff(names[j])) for i, eq in enumerate(eqs) for j in range(n_var)], (len(eqs), n_var))
    return CompiledSystem(len(eqs), n_var, len(names), f, jx, tuple(eqs))


# ---------------------------------------------------------------------------
# Primitive kernels: two implementations each


def _accumulate_loops(z, coef, term_ptr, fac_var, fac_exp, row, col, out):
    for t in range(coef.shape[0]):
        m = coef[t]
        for k in range(term_ptr[t], term_ptr[t + 1]):
            base = z[fac_var[k]]
            for _ in range(fac_exp[k]):
                m = m * base
        out[row[t], col[t]] += m


def _accumulate_numpy(z, coef, term_ptr, fac_var, fac_exp, row, col, out):
    if coef.shape[0] == 0:
        return
    mono = np.multiply.reduceat(z[fac_var] ** fac_exp, term_ptr[:-1]) * coef
    np.add.at(out, (row, col), mono)


def _solve_loops(a, b):
    """Gaussian elimination with partial pivoting; returns (x, ok)."""
    n = a.shape[0]
    m = a.copy()
    x = b.copy()
    scale = 0.0
    for i in range(n):
        for j in range(n):
            v = abs(m[i, j])
            if v > scale:
                scale = v
    if scale == 0.0:
        return x, False
    for k in range(n):
        p = k
        best = abs(m[k, k])
        for i in range(k + 1, n):
            v = abs(m[i, k])
            if v > best:
                best = v
                p = i
        if best <= 1e-14 * scale:
            return x, False
        if p != k:
            for j in range(n):
                tmp = m[k, j]
                m[k, j] = m[p, j]
                m[p, j] = tmp
            tmp = x[k]
            x[k] = x[p]
            x[p] = tmp
        for i in range(k + 1, n):
            f = m[i, k] / m[k, k]
            if f != 0:
                for j in range(k + 1, n):
                    m[i, j] -= f * m[k, j]
                x[i] -= f * x[k]
    for k in range(n - 1, -1, -1):
        s = x[k]
        for j in range(k + 1, n):
            s -= m[k, j] * x[j]
        x[k] = s / m[k, k]
    return x, True


def _solve_numpy(a, b):
    scale = np.abs(a).max() if a.size else 0.0
    if scale == 0.0:
        return b.copy(), False
    try:
        lu_ok = np.linalg.cond(a) < 1e14
        if not lu_ok:
            return b.copy(), False
        return np.linalg.solve(a, b), True
    except np.linalg.LinAlgError:
        return b.copy(), False


if USE_NUMBA:
    _accumulate = njit(_accumulate_loops)
    _solve = njit(_solve_loops)
else:
    _accumulate = _accumulate_numpy
    _solve = _solve_numpy


# ---------------------------------------------------------------------------
# Composite kernels (single source; compiled when numba is on)


def _norm(v):
    s = 0.0
    for i in range(v.shape[0]):
        s += abs(v[i]) ** 2
    return np.sqrt(s)


def _residual(z, fp, n_eq, out):
    out[:, :] = 0
    _accumulate(z, fp[0], fp[1], fp[2], fp[3], fp[4], fp[5], out)
    return out[:, 0]


def _newton_one(x0, params, fp, jp, n_eq, tol, max_iter):
    n = x0.shape[0]
    z = np.empty(n + params.shape[0], dtype=x0.dtype)
    z[:n] = x0
    z[n:] = params
    fbuf = np.zeros((n_eq, 1), dtype=x0.dtype)
    jbuf = np.zeros((n_eq, n), dtype=x0.dtype)
    f = _residual(z, fp, n_eq, fbuf).copy()
    r = _norm(f)
    for it in range(max_iter):
        if r < tol:
            return z[:n].copy(), r, OK, it
        jbuf[:, :] = 0
        _accumulate(z, jp[0], jp[1], jp[2], jp[3], jp[4], jp[5], jbuf)
        dx, ok = _solve(jbuf, -f)
        if not ok:
            return z[:n].copy(), r, SINGULAR, it
        step = 1.0
        accepted = False
        xk = z[:n].copy()
        for _ in range(16):
            z[:n] = xk + step * dx
            ft = _residual(z, fp, n_eq, fbuf).copy()
            rt = _norm(ft)
            if rt < (1.0 - 1e-4 * step) * r or rt < tol:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            z[:n] = xk
            return z[:n].copy(), r, STEP_FAILURE, it
        f = ft
        r = rt
    status = OK if r < tol else MAX_STEPS
    return z[:n].copy(), r, status, max_iter


def _newton_batch(starts, params, fp, jp, n_eq, tol, max_iter):
    m, n = starts.shape
    out = np.empty_like(starts)
    res = np.empty(m)
    status = np.empty(m, dtype=np.int64)
    for i in range(m):
        x, r, s, _ = _newton_one(starts[i].copy(), params, fp, jp, n_eq, tol, max_iter)
        out[i] = x
        res[i] = r
        status[i] = s
    return out, res, status


def _eval_all(x, h, p_start, p_target, fp, jxp, jpp, n_eq, fbuf, jxbuf, jpbuf):
    n = x.shape[0]
    npar = p_start.shape[0]
    z = np.empty(n + npar, dtype=np.complex128)
    z[:n] = x
    for k in range(npar):
        z[n + k] = p_target[k] + h * (p_start[k] - p_target[k])
    fbuf[:, :] = 0
    jxbuf[:, :] = 0
    jpbuf[:, :] = 0
    _accumulate(z, fp[0], fp[1], fp[2], fp[3], fp[4], fp[5], fbuf)
    _accumulate(z, jxp[0], jxp[1], jxp[2], jxp[3], jxp[4], jxp[5], jxbuf)
    if npar > 0:
        _accumulate(z, jpp[0], jpp[1], jpp[2], jpp[3], jpp[4], jpp[5], jpbuf)


def _tangent(x, h, p_start, p_target, fp, jxp, jpp, n_eq, fbuf, jxbuf, jpbuf):
    _eval_all(x, h, p_start, p_target, fp, jxp, jpp, n_eq, fbuf, jxbuf, jpbuf)
    npar = p_start.shape[0]
    hh = np.zeros(n_eq, dtype=np.complex128)
    for i in range(n_eq):
        s = 0j
        for k in range(npar):
            s += jpbuf[i, k] * (p_start[k] - p_target[k])
        hh[i] = -s
    return _solve(jxbuf, hh)


def _correct(x, h, p_start, p_target, fp, jxp, jpp, n_eq, fbuf, jxbuf, jpbuf, tol, max_iter):
    y = x.copy()
    for _ in range(max_iter):
        _eval_all(y, h, p_start, p_target, fp, jxp, jpp, n_eq, fbuf, jxbuf, jpbuf)
        dx, ok = _solve(jxbuf, -fbuf[:, 0])
        if not ok:
            return y, False
        y = y + dx
        if _norm(dx) <= tol * (1.0 + _norm(y)):
            return y, True
    return y, False


def _track_one(
    x0, p_start, p_target, fp, jxp, jpp, n_eq,
    step0, min_step, max_step, max_steps, corr_tol, max_corr, div_norm, final_tol,
):
    n = x0.shape[0]
    npar = p_start.shape[0]
    fbuf = np.zeros((n_eq, 1), dtype=np.complex128)
    jxbuf = np.zeros((n_eq, n), dtype=np.complex128)
    jpbuf = np.zeros((n_eq, max(npar, 1)), dtype=np.complex128)
    x = x0.copy()
    h = 1.0
    dh = step0
    streak = 0
    steps = 0
    while h > 0.0:
        if steps >= max_steps:
            return x, h, MAX_STEPS, steps
        steps += 1
        s = dh if dh < h else h
        xc = x
        k1, ok1 = _tangent(x, h, p_start, p_target, fp, jxp, jpp, n_eq, fbuf, jxbuf, jpbuf)
        k2, ok2 = _tangent(x - 0.5 * s * k1, h - 0.5 * s, p_start, p_target, fp, jxp, jpp, n_eq, fbuf, jxbuf, jpbuf)
        k3, ok3 = _tangent(x - 0.5 * s * k2, h - 0.5 * s, p_start, p_target, fp, jxp, jpp, n_eq, fbuf, jxbuf, jpbuf)
        k4, ok4 = _tangent(x - s * k3, h - s, p_start, p_target, fp, jxp, jpp, n_eq, fbuf, jxbuf, jpbuf)
        ok = ok1 and ok2 and ok3 and ok4
        if ok:
            xp = x - (s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            xc, ok = _correct(xp, h - s, p_start, p_target, fp, jxp, jpp, n_eq, fbuf, jxbuf, jpbuf, corr_tol, max_corr)
            if ok and _norm(xc - xp) > 0.1 * (1.0 + _norm(xp)):
                ok = False
        if ok:
            x = xc
            h = h - s
            if h < 1e-15:
                h = 0.0
            streak += 1
            if streak >= 3:
                dh = min(2.0 * dh, max_step)
                streak = 0
            if _norm(x) > div_norm:
                return x, h, DIVERGED, steps
        else:
            dh *= 0.5
            streak = 0
            if dh < min_step:
                return x, h, STEP_FAILURE, steps
    y, ok = _correct(x, 0.0, p_start, p_target, fp, jxp, jpp, n_eq, fbuf, jxbuf, jpbuf, final_tol, 8)
    if ok:
        x = y
    return x, 0.0, OK, steps


def _track_batch(
    starts, p_start, p_target, fp, jxp, jpp, n_eq,
    step0, min_step, max_step, max_steps, corr_tol, max_corr, div_norm, final_tol,
):
    m, n = starts.shape
    out = np.empty_like(starts)
    hs = np.empty(m)
    status = np.empty(m, dtype=np.int64)
    steps = np.empty(m, dtype=np.int64)
    for i in range(m):
        x, h, s, k = _track_one(
            starts[i].copy(), p_start, p_target, fp, jxp, jpp, n_eq,
            step0, min_step, max_step, max_steps, corr_tol, max_corr, div_norm, final_tol,
        )
        out[i] = x
        hs[i] = h
        status[i] = s
        steps[i] = k
    return out, hs, status, steps


_norm = njit(_norm)
_residual = njit(_residual)
_newton_one = njit(_newton_one)
newton_batch_kernel = njit(_newton_batch)
_eval_all = njit(_eval_all)
_tangent = njit(_tangent)
_correct = njit(_correct)
_track_one = njit(_track_one)
track_batch_kernel = njit(_track_batch)


# ---------------------------------------------------------------------------
# Python-facing helpers


def _pick(pack: Pack, real: bool):
    if real and pack.coef_real is None:
        raise TypeError("complex coefficients need complex evaluation points")
    return pack.arrays(real)


def _is_real(compiled: CompiledSystem, z) -> bool:
    return not np.iscomplexobj(z) and compiled.real


def eval_system(compiled: CompiledSystem, z) -> np.ndarray:
    real = _is_real(compiled, z)
    z = np.ascontiguousarray(z, dtype=np.float64 if real else np.complex128)
    out = np.zeros((compiled.n_eq, 1), dtype=z.dtype)
    _accumulate(z, *_pick(compiled.f, real), out)
    return out[:, 0]


def eval_system_jacobian(compiled: CompiledSystem, z):
    real = _is_real(compiled, z)
    z = np.ascontiguousarray(z, dtype=np.float64 if real else np.complex128)
    f = np.zeros((compiled.n_eq, 1), dtype=z.dtype)
    j = np.zeros((compiled.n_eq, compiled.n_var), dtype=z.dtype)
    _accumulate(z, *_pick(compiled.f, real), f)
    _accumulate(z, *_pick(compiled.jx, real), j)
    return f[:, 0], j


def newton_batch(compiled: CompiledSystem, starts, params=None, tol: float = 1e-12, max_iter: int = 50):
    """Damped Newton from each row of ``starts``; real arithmetic when everything is real."""
    starts = np.atleast_2d(starts)
    params = np.zeros(0) if params is None else np.asarray(params)
    real = compiled.real and not np.iscomplexobj(starts) and not np.iscomplexobj(params)
    dtype = np.float64 if real else np.complex128
    return newton_batch_kernel(
        np.ascontiguousarray(starts, dtype=dtype),
        np.ascontiguousarray(params, dtype=dtype),
        _pick(compiled.f, real),
        _pick(compiled.jx, real),
        compiled.n_eq,
        float(tol),
        int(max_iter),
    )


def track_batch(compiled: CompiledSystem, starts, p_start, p_target, settings) -> tuple:
    """Track each start from h=1 (parameters ``p_start``) to h=0 (``p_target``)."""
    starts = np.ascontiguousarray(np.atleast_2d(starts), dtype=np.complex128)
    p_start = np.ascontiguousarray(p_start, dtype=np.complex128)
    p_target = np.ascontiguousarray(p_target, dtype=np.complex128)
    jp = compiled.jp if compiled.n_total > compiled.n_var else compiled.jx
    return track_batch_kernel(
        starts,
        p_start,
        p_target,
        compiled.f.arrays(False),
        compiled.jx.arrays(False),
        jp.arrays(False),
        compiled.n_eq,
        float(settings.initial_step),
        float(settings.min_step),
        float(settings.max_step),
        int(settings.max_steps),
        float(settings.corrector_tol),
        int(settings.corrector_iterations),
        float(settings.divergence_norm),
        float(settings.final_tol),
    )
