"""Pure-Python fallback kernels, used when the compiled extension is absent
(or forced via ``MAPCHAOS_BACKEND=python``).

Function-for-function mirror of ``mapchaos._core`` with the same arithmetic
ordering, so the two backends agree to the last bit on typical builds.
Roughly two orders of magnitude slower; fine for tests and small runs.
"""

from __future__ import annotations

import math

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_ENERGY = 2


def _map_rhs(y, c):
    x, yy, px, py, xa, pa, xb, pb = y
    wx2, wy2, c2, s2 = c[0], c[1], c[2], c[3]
    J, g = c[6], c[9]
    u = x + c[4]
    v = yy + c[5]
    xi = u * c2 + v * s2
    eta = -u * s2 + v * c2
    va = 0.5 * (wx2 * x * x + wy2 * yy * yy) + c[7]
    vb = 0.5 * (wx2 * xi * xi + wy2 * eta * eta) + c[8]
    na = 0.5 * (xa * xa + pa * pa) - g
    nb = 0.5 * (xb * xb + pb * pb) - g
    dbx = wx2 * xi * c2 - wy2 * eta * s2
    dby = wx2 * xi * s2 + wy2 * eta * c2
    return (
        px,
        py,
        -(wx2 * x) * na - dbx * nb,
        -(wy2 * yy) * na - dby * nb,
        va * pa + J * pb,
        -va * xa - J * xb,
        vb * pb + J * pa,
        -vb * xb - J * xa,
    )


def _map_energy(y, c):
    x, yy, px, py, xa, pa, xb, pb = y
    wx2, wy2, c2, s2 = c[0], c[1], c[2], c[3]
    g = c[9]
    u = x + c[4]
    v = yy + c[5]
    xi = u * c2 + v * s2
    eta = -u * s2 + v * c2
    va = 0.5 * (wx2 * x * x + wy2 * yy * yy) + c[7]
    vb = 0.5 * (wx2 * xi * xi + wy2 * eta * eta) + c[8]
    na = 0.5 * (xa * xa + pa * pa) - g
    nb = 0.5 * (xb * xb + pb * pb) - g
    return 0.5 * (px * px + py * py) + na * va + nb * vb + c[6] * (xa * xb + pa * pb)


def _ad_rhs(y, c):
    x, yy, px, py = y
    wx2, wy2, c2, s2, J = c[0], c[1], c[2], c[3], c[6]
    u = x + c[4]
    v = yy + c[5]
    xi = u * c2 + v * s2
    eta = -u * s2 + v * c2
    va = 0.5 * (wx2 * x * x + wy2 * yy * yy) + c[7]
    vb = 0.5 * (wx2 * xi * xi + wy2 * eta * eta) + c[8]
    dax = wx2 * x
    day = wy2 * yy
    dbx = wx2 * xi * c2 - wy2 * eta * s2
    dby = wx2 * xi * s2 + wy2 * eta * c2
    half_gap = 0.5 * (va - vb)
    fac = half_gap / math.sqrt(half_gap * half_gap + J * J)
    return (
        px,
        py,
        -(0.5 * (dax + dbx) - 0.5 * fac * (dax - dbx)),
        -(0.5 * (day + dby) - 0.5 * fac * (day - dby)),
    )


def _ad_energy(y, c):
    x, yy, px, py = y
    wx2, wy2, c2, s2, J = c[0], c[1], c[2], c[3], c[6]
    u = x + c[4]
    v = yy + c[5]
    xi = u * c2 + v * s2
    eta = -u * s2 + v * c2
    va = 0.5 * (wx2 * x * x + wy2 * yy * yy) + c[7]
    vb = 0.5 * (wx2 * xi * xi + wy2 * eta * eta) + c[8]
    half_gap = 0.5 * (va - vb)
    return 0.5 * (px * px + py * py) + 0.5 * (va + vb) - math.sqrt(half_gap * half_gap + J * J)


def _rk4(y, c, dt, rhs, dim):
    half = 0.5 * dt
    sixth = dt / 6.0
    k1 = rhs(y, c)
    k2 = rhs([y[i] + half * k1[i] for i in range(dim)], c)
    k3 = rhs([y[i] + half * k2[i] for i in range(dim)], c)
    k4 = rhs([y[i] + dt * k3[i] for i in range(dim)], c)
    return [y[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(dim)]


def rhs_mapping(y, coeffs, out):
    out[:] = _map_rhs([float(v) for v in y], [float(v) for v in coeffs])


def rhs_adiabatic(y, coeffs, out):
    out[:] = _ad_rhs([float(v) for v in y], [float(v) for v in coeffs])


def energy_mapping(y, coeffs):
    return _map_energy([float(v) for v in y], [float(v) for v in coeffs])


def energy_adiabatic(y, coeffs):
    return _ad_energy([float(v) for v in y], [float(v) for v in coeffs])


def _advance(y, dt, n_steps, coeffs, e_base, e_tol, check_every, rhs, energy, dim,
             stride=0, out=None):
    c = [float(v) for v in coeffs]
    state = [float(v) for v in y]
    scale = abs(e_base)
    if scale < 1.0:
        scale = 1.0
    if check_every < 1:
        check_every = 1
    nrows = 0 if out is None else out.shape[0]
    max_drift = 0.0
    status = STATUS_OK
    step = 0
    row = 0
    while step < n_steps:
        state = _rk4(state, c, dt, rhs, dim)
        step += 1
        if stride > 0 and step % stride == 0 and row < nrows:
            out[row, :] = state
            row += 1
        if step % check_every == 0 or step == n_steps:
            e = energy(state, c)
            if not math.isfinite(e):
                status = STATUS_NONFINITE
                break
            drift = abs(e - e_base) / scale
            if drift > max_drift:
                max_drift = drift
            if e_tol > 0.0 and drift > e_tol:
                status = STATUS_ENERGY
                break
    y[:] = state
    return status, step, max_drift


def advance_mapping(y, dt, n_steps, coeffs, e_base, e_tol, check_every):
    return _advance(y, dt, n_steps, coeffs, e_base, e_tol, check_every,
                    _map_rhs, _map_energy, 8)


def advance_adiabatic(y, dt, n_steps, coeffs, e_base, e_tol, check_every):
    return _advance(y, dt, n_steps, coeffs, e_base, e_tol, check_every,
                    _ad_rhs, _ad_energy, 4)


def record_mapping(y, dt, n_steps, coeffs, e_base, e_tol, check_every, stride, out):
    return _advance(y, dt, n_steps, coeffs, e_base, e_tol, check_every,
                    _map_rhs, _map_energy, 8, stride=stride, out=out)


def record_adiabatic(y, dt, n_steps, coeffs, e_base, e_tol, check_every, stride, out):
    return _advance(y, dt, n_steps, coeffs, e_base, e_tol, check_every,
                    _ad_rhs, _ad_energy, 4, stride=stride, out=out)
