# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 kernels for the mapping (8-D) and lower-adiabatic (4-D)
systems.

The coefficient vector ``c`` is produced by ``ModelParams.kernel_coeffs``:
(wx2, wy2, cos2t, sin2t, 2a*sin t, -2a*cos t, J, eps_a, eps_b, gamma).

``mapchaos._purepy`` implements the same functions with identical arithmetic
ordering; keep the two in sync.
"""

from libc.math cimport isfinite, sqrt, fabs

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_ENERGY = 2


cdef inline void _map_rhs(const double* y, const double* c, double* dy) noexcept nogil:
    cdef double x = y[0], yy = y[1], px = y[2], py = y[3]
    cdef double xa = y[4], pa = y[5], xb = y[6], pb = y[7]
    cdef double wx2 = c[0], wy2 = c[1], c2 = c[2], s2 = c[3]
    cdef double J = c[6], g = c[9]
    cdef double u = x + c[4]
    cdef double v = yy + c[5]
    cdef double xi = u * c2 + v * s2
    cdef double eta = -u * s2 + v * c2
    cdef double va = 0.5 * (wx2 * x * x + wy2 * yy * yy) + c[7]
    cdef double vb = 0.5 * (wx2 * xi * xi + wy2 * eta * eta) + c[8]
    cdef double na = 0.5 * (xa * xa + pa * pa) - g
    cdef double nb = 0.5 * (xb * xb + pb * pb) - g
    cdef double dbx = wx2 * xi * c2 - wy2 * eta * s2
    cdef double dby = wx2 * xi * s2 + wy2 * eta * c2
    dy[0] = px
    dy[1] = py
    dy[2] = -(wx2 * x) * na - dbx * nb
    dy[3] = -(wy2 * yy) * na - dby * nb
    dy[4] = va * pa + J * pb
    dy[5] = -va * xa - J * xb
    dy[6] = vb * pb + J * pa
    dy[7] = -vb * xb - J * xa


cdef inline double _map_energy(const double* y, const double* c) noexcept nogil:
    cdef double x = y[0], yy = y[1], px = y[2], py = y[3]
    cdef double xa = y[4], pa = y[5], xb = y[6], pb = y[7]
    cdef double wx2 = c[0], wy2 = c[1], c2 = c[2], s2 = c[3]
    cdef double g = c[9]
    cdef double u = x + c[4]
    cdef double v = yy + c[5]
    cdef double xi = u * c2 + v * s2
    cdef double eta = -u * s2 + v * c2
    cdef double va = 0.5 * (wx2 * x * x + wy2 * yy * yy) + c[7]
    cdef double vb = 0.5 * (wx2 * xi * xi + wy2 * eta * eta) + c[8]
    cdef double na = 0.5 * (xa * xa + pa * pa) - g
    cdef double nb = 0.5 * (xb * xb + pb * pb) - g
    return 0.5 * (px * px + py * py) + na * va + nb * vb + c[6] * (xa * xb + pa * pb)


cdef inline void _ad_rhs(const double* y, const double* c, double* dy) noexcept nogil:
    cdef double x = y[0], yy = y[1]
    cdef double wx2 = c[0], wy2 = c[1], c2 = c[2], s2 = c[3], J = c[6]
    cdef double u = x + c[4]
    cdef double v = yy + c[5]
    cdef double xi = u * c2 + v * s2
    cdef double eta = -u * s2 + v * c2
    cdef double va = 0.5 * (wx2 * x * x + wy2 * yy * yy) + c[7]
    cdef double vb = 0.5 * (wx2 * xi * xi + wy2 * eta * eta) + c[8]
    cdef double dax = wx2 * x
    cdef double day = wy2 * yy
    cdef double dbx = wx2 * xi * c2 - wy2 * eta * s2
    cdef double dby = wx2 * xi * s2 + wy2 * eta * c2
    cdef double half_gap = 0.5 * (va - vb)
    cdef double fac = half_gap / sqrt(half_gap * half_gap + J * J)
    dy[0] = y[2]
    dy[1] = y[3]
    dy[2] = -(0.5 * (dax + dbx) - 0.5 * fac * (dax - dbx))
    dy[3] = -(0.5 * (day + dby) - 0.5 * fac * (day - dby))


cdef inline double _ad_energy(const double* y, const double* c) noexcept nogil:
    cdef double x = y[0], yy = y[1]
    cdef double wx2 = c[0], wy2 = c[1], c2 = c[2], s2 = c[3], J = c[6]
    cdef double u = x + c[4]
    cdef double v = yy + c[5]
    cdef double xi = u * c2 + v * s2
    cdef double eta = -u * s2 + v * c2
    cdef double va = 0.5 * (wx2 * x * x + wy2 * yy * yy) + c[7]
    cdef double vb = 0.5 * (wx2 * xi * xi + wy2 * eta * eta) + c[8]
    cdef double half_gap = 0.5 * (va - vb)
    return 0.5 * (y[2] * y[2] + y[3] * y[3]) + 0.5 * (va + vb) - sqrt(half_gap * half_gap + J * J)


cdef inline void _rk4_map(double* y, const double* c, double dt) noexcept nogil:
    cdef double k1[8]
    cdef double k2[8]
    cdef double k3[8]
    cdef double k4[8]
    cdef double tmp[8]
    cdef int i
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    _map_rhs(y, c, k1)
    for i in range(8):
        tmp[i] = y[i] + half * k1[i]
    _map_rhs(tmp, c, k2)
    for i in range(8):
        tmp[i] = y[i] + half * k2[i]
    _map_rhs(tmp, c, k3)
    for i in range(8):
        tmp[i] = y[i] + dt * k3[i]
    _map_rhs(tmp, c, k4)
    for i in range(8):
        y[i] = y[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


cdef inline void _rk4_ad(double* y, const double* c, double dt) noexcept nogil:
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double tmp[4]
    cdef int i
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    _ad_rhs(y, c, k1)
    for i in range(4):
        tmp[i] = y[i] + half * k1[i]
    _ad_rhs(tmp, c, k2)
    for i in range(4):
        tmp[i] = y[i] + half * k2[i]
    _ad_rhs(tmp, c, k3)
    for i in range(4):
        tmp[i] = y[i] + dt * k3[i]
    _ad_rhs(tmp, c, k4)
    for i in range(4):
        y[i] = y[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def rhs_mapping(double[::1] y, double[::1] coeffs, double[::1] out):
    _map_rhs(&y[0], &coeffs[0], &out[0])


def rhs_adiabatic(double[::1] y, double[::1] coeffs, double[::1] out):
    _ad_rhs(&y[0], &coeffs[0], &out[0])


def energy_mapping(double[::1] y, double[::1] coeffs):
    return _map_energy(&y[0], &coeffs[0])


def energy_adiabatic(double[::1] y, double[::1] coeffs):
    return _ad_energy(&y[0], &coeffs[0])


def advance_mapping(double[::1] y, double dt, long n_steps, double[::1] coeffs,
                    double e_base, double e_tol, long check_every):
    """Advance the mapping state in place by ``n_steps`` RK4 steps.

    Energy (relative to ``e_base`` with a unit floor) and finiteness are
    checked every ``check_every`` steps and at the last step; ``e_tol <= 0``
    disables the drift abort but drift is still tracked.

    Returns ``(status, step, max_drift)`` where ``step`` is the number of
    completed steps (== n_steps on success).
    """
    cdef double* yp = &y[0]
    cdef const double* c = &coeffs[0]
    cdef double scale = fabs(e_base)
    cdef double max_drift = 0.0
    cdef double e, drift
    cdef long step = 0
    cdef int status = 0
    if scale < 1.0:
        scale = 1.0
    if check_every < 1:
        check_every = 1
    with nogil:
        while step < n_steps:
            _rk4_map(yp, c, dt)
            step += 1
            if step % check_every == 0 or step == n_steps:
                e = _map_energy(yp, c)
                if not isfinite(e):
                    status = 1
                    break
                drift = fabs(e - e_base) / scale
                if drift > max_drift:
                    max_drift = drift
                if e_tol > 0.0 and drift > e_tol:
                    status = 2
                    break
    return status, step, max_drift


def advance_adiabatic(double[::1] y, double dt, long n_steps, double[::1] coeffs,
                      double e_base, double e_tol, long check_every):
    cdef double* yp = &y[0]
    cdef const double* c = &coeffs[0]
    cdef double scale = fabs(e_base)
    cdef double max_drift = 0.0
    cdef double e, drift
    cdef long step = 0
    cdef int status = 0
    if scale < 1.0:
        scale = 1.0
    if check_every < 1:
        check_every = 1
    with nogil:
        while step < n_steps:
            _rk4_ad(yp, c, dt)
            step += 1
            if step % check_every == 0 or step == n_steps:
                e = _ad_energy(yp, c)
                if not isfinite(e):
                    status = 1
                    break
                drift = fabs(e - e_base) / scale
                if drift > max_drift:
                    max_drift = drift
                if e_tol > 0.0 and drift > e_tol:
                    status = 2
                    break
    return status, step, max_drift


def record_mapping(double[::1] y, double dt, long n_steps, double[::1] coeffs,
                   double e_base, double e_tol, long check_every, long stride,
                   double[:, ::1] out):
    """Like ``advance_mapping`` but stores the state after every ``stride``-th
    step into successive rows of ``out`` (which the caller sizes)."""
    cdef double* yp = &y[0]
    cdef const double* c = &coeffs[0]
    cdef double scale = fabs(e_base)
    cdef double max_drift = 0.0
    cdef double e, drift
    cdef long step = 0, row = 0, nrows = out.shape[0]
    cdef int status = 0
    cdef int i
    if scale < 1.0:
        scale = 1.0
    if check_every < 1:
        check_every = 1
    with nogil:
        while step < n_steps:
            _rk4_map(yp, c, dt)
            step += 1
            if stride > 0 and step % stride == 0 and row < nrows:
                for i in range(8):
                    out[row, i] = yp[i]
                row += 1
            if step % check_every == 0 or step == n_steps:
                e = _map_energy(yp, c)
                if not isfinite(e):
                    status = 1
                    break
                drift = fabs(e - e_base) / scale
                if drift > max_drift:
                    max_drift = drift
                if e_tol > 0.0 and drift > e_tol:
                    status = 2
                    break
    return status, step, max_drift


def record_adiabatic(double[::1] y, double dt, long n_steps, double[::1] coeffs,
                     double e_base, double e_tol, long check_every, long stride,
                     double[:, ::1] out):
    cdef double* yp = &y[0]
    cdef const double* c = &coeffs[0]
    cdef double scale = fabs(e_base)
    cdef double max_drift = 0.0
    cdef double e, drift
    cdef long step = 0, row = 0, nrows = out.shape[0]
    cdef int status = 0
    cdef int i
    if scale < 1.0:
        scale = 1.0
    if check_every < 1:
        check_every = 1
    with nogil:
        while step < n_steps:
            _rk4_ad(yp, c, dt)
            step += 1
            if stride > 0 and step % stride == 0 and row < nrows:
                for i in range(4):
                    out[row, i] = yp[i]
                row += 1
            if step % check_every == 0 or step == n_steps:
                e = _ad_energy(yp, c)
                if not isfinite(e):
                    status = 1
                    break
                drift = fabs(e - e_base) / scale
                if drift > max_drift:
                    max_drift = drift
                if e_tol > 0.0 and drift > e_tol:
                    status = 2
                    break
    return status, step, max_drift
