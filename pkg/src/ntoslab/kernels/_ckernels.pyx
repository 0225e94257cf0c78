# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels (see ``_pykernels`` for the reference)."""
import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc
from libc.math cimport atan2, cos, exp, fabs, hypot, log, sin, sqrt, M_PI, NAN

from ..errors import GapClosedError

cnp.import_array()

cdef double GAP_TOL = 1e-12
cdef long MAX_RESOLUTION = 1 << 20

STATUS_OK = 0
STATUS_GAP_CLOSED = 1
STATUS_UNRESOLVED = 2


cdef inline double complex _det_cs(double t1, double t2, double gamma, double c, double s) noexcept nogil:
    # ((t1+gamma) + t2 e^{-ik}) ((t1-gamma) + t2 e^{ik}) with real arithmetic
    cdef double x1 = t1 + gamma + t2 * c
    cdef double x2 = t1 - gamma + t2 * c
    cdef double y = t2 * s
    cdef double complex out
    out.real = x1 * x2 + y * y
    out.imag = x1 * y - y * x2
    return out


cdef int _winding_pass(double t1, double t2, double gamma, long m,
                       const double *cs, const double *sn, long *w) noexcept nogil:
    # Signed crossings of the negative real axis.  Valid only when every step
    # turns by less than pi/2, i.e. Re(cur * conj(prev)) > 0; returns 3 otherwise
    # so the caller refines.
    cdef long j, count = 0
    cdef double complex prev, cur
    cdef double x
    cdef double tol2 = GAP_TOL * GAP_TOL
    prev = _det_cs(t1, t2, gamma, cs[0], sn[0])
    if prev.real * prev.real + prev.imag * prev.imag < tol2:
        return 1
    for j in range(1, m + 1):
        cur = _det_cs(t1, t2, gamma, cs[j], sn[j])
        if cur.real * cur.real + cur.imag * cur.imag < tol2:
            return 1
        if cur.real * prev.real + cur.imag * prev.imag <= 0:
            return 3
        if (prev.imag >= 0) != (cur.imag >= 0):
            x = prev.real + (cur.real - prev.real) * prev.imag / (prev.imag - cur.imag)
            if x < 0:
                count += 1 if prev.imag >= 0 else -1
        prev = cur
    w[0] = count
    return 0


cdef int _winding(double t1, double t2, double gamma, long resolution,
                  const double *cs0, const double *sn0, long *w) noexcept nogil:
    cdef long m = resolution
    cdef long j
    cdef int st
    cdef double *cs
    cdef double *sn
    st = _winding_pass(t1, t2, gamma, m, cs0, sn0, w)
    if st != 3:
        return st
    m *= 2
    while m <= MAX_RESOLUTION:
        cs = <double *> malloc((m + 1) * sizeof(double))
        sn = <double *> malloc((m + 1) * sizeof(double))
        for j in range(m):
            cs[j] = cos(-M_PI + 2.0 * M_PI * j / m)
            sn[j] = sin(-M_PI + 2.0 * M_PI * j / m)
        cs[m] = cs[0]
        sn[m] = sn[0]
        st = _winding_pass(t1, t2, gamma, m, cs, sn, w)
        free(cs)
        free(sn)
        if st != 3:
            return st
        m *= 2
    return 2


cdef _contour_table(long m):
    # closed exactly: the last point repeats the first, so a start on the
    # negative real axis is counted consistently
    k = np.linspace(-np.pi, np.pi, m + 1)
    cs, sn = np.cos(k), np.sin(k)
    cs[m], sn[m] = cs[0], sn[0]
    return np.ascontiguousarray(cs), np.ascontiguousarray(sn)


def winding_number(double t1, double t2, double gamma, long resolution=256):
    cdef long w = 0
    cs_arr, sn_arr = _contour_table(resolution)
    cdef double[::1] cs = cs_arr, sn = sn_arr
    cdef int status = _winding(t1, t2, gamma, resolution, &cs[0], &sn[0], &w)
    if status == 1:
        raise GapClosedError(
            f"|det H(k)| < {GAP_TOL:g} on the contour for t1={t1}, t2={t2}, gamma={gamma}"
        )
    if status == 2:
        raise GapClosedError("phase steps stayed >= pi/2 up to the refinement cap")
    return w


def winding_grid(t1_axis, t2_axis, double gamma, long resolution=256):
    cdef double[::1] t1v = np.ascontiguousarray(t1_axis, dtype=np.float64)
    cdef double[::1] t2v = np.ascontiguousarray(t2_axis, dtype=np.float64)
    cdef Py_ssize_t n1 = t1v.shape[0], n2 = t2v.shape[0], i, j
    w_arr = np.zeros((n1, n2), dtype=np.int64)
    st_arr = np.zeros((n1, n2), dtype=np.uint8)
    cdef long long[:, ::1] w = w_arr
    cdef unsigned char[:, ::1] st = st_arr
    cdef long wij
    cdef int s
    cs_arr, sn_arr = _contour_table(resolution)
    cdef double[::1] cs = cs_arr, sn = sn_arr
    with nogil:
        for i in range(n1):
            for j in range(n2):
                wij = 0
                s = _winding(t1v[i], t2v[j], gamma, resolution, &cs[0], &sn[0], &wij)
                st[i, j] = s
                w[i, j] = wij if s == 0 else 0
    return w_arr, st_arr


def charpoly_real(double t1, double t2, double gamma, double lam_l, double lam_r,
                  long n, energies):
    """Evaluate the polynomial form of the consistency condition on real E."""
    cdef double[::1] e = np.ascontiguousarray(energies, dtype=np.float64)
    cdef Py_ssize_t m = e.shape[0], i
    cdef long k
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double a = t1 + gamma
    cdef double b = t1 - gamma
    cdef double p = b / a
    cdef double pn = p ** n
    cdef double sigma, s_prev, s_cur, tmp, ei
    with nogil:
        for i in range(m):
            ei = e[i]
            sigma = (ei * ei - a * b - t2 * t2) / (t2 * a)
            s_prev = 0.0
            s_cur = 1.0
            for k in range(n - 1):
                tmp = sigma * s_cur - p * s_prev
                s_prev = s_cur
                s_cur = tmp
            out[i] = p * (a * t2 * lam_l + ei * lam_l * lam_r * s_prev - ei * a * t2 * s_cur) \
                + a * t2 * lam_r * pn
    return out_arr


cdef inline double complex _csqrt(double complex z) noexcept nogil:
    cdef double r = hypot(z.real, z.imag)
    cdef double phi = atan2(z.imag, z.real)
    cdef double sr = sqrt(r)
    return sr * cos(0.5 * phi) + 1j * (sr * sin(0.5 * phi))


cdef inline double complex _cpow_real(double complex z, double mu) noexcept nogil:
    # principal branch z**mu
    cdef double r = hypot(z.real, z.imag)
    cdef double phi = atan2(z.imag, z.real)
    cdef double mag = exp(mu * log(r))
    return mag * cos(mu * phi) + 1j * (mag * sin(mu * phi))


def log_delta_grid(double t1, double t2, double gamma, double lam_l, n_axis, e_axis,
                   bint modulus=False):
    """ln|beta2^(N-2) - (beta2-beta1)(t1+gamma)lam_L / (E (t1-gamma))| on an (N, E) grid."""
    cdef double[::1] nv = np.ascontiguousarray(n_axis, dtype=np.float64)
    cdef double[::1] ev = np.ascontiguousarray(e_axis, dtype=np.float64)
    cdef Py_ssize_t nn = nv.shape[0], ne = ev.shape[0], i, j
    out_arr = np.empty((nn, ne), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double a = t1 + gamma
    cdef double b = t1 - gamma
    cdef double qa = t2 * a
    cdef double qc = t2 * b
    cdef double complex qb, s, q, r1, r2, beta1, beta2, rhs, lhs
    cdef double e, mu, rhs_abs, lb
    with nogil:
        for j in range(ne):
            e = ev[j]
            if e == 0.0:
                for i in range(nn):
                    out[i, j] = NAN
                continue
            qb = a * b + t2 * t2 - e * e
            s = _csqrt(qb * qb - 4.0 * qa * qc)
            if (qb.conjugate() * s).real < 0:
                s = -s
            q = -0.5 * (qb + s)
            r1 = q / qa
            r2 = qc / q
            if hypot(r1.real, r1.imag) > hypot(r2.real, r2.imag):
                beta1 = r2
                beta2 = r1
            else:
                beta1 = r1
                beta2 = r2
            rhs = (beta2 - beta1) * a * lam_l / (e * b)
            rhs_abs = hypot(rhs.real, rhs.imag)
            lb = log(hypot(beta2.real, beta2.imag))
            for i in range(nn):
                mu = nv[i] - 2.0
                if modulus:
                    out[i, j] = log(fabs(exp(mu * lb) - rhs_abs))
                else:
                    lhs = _cpow_real(beta2, mu) - rhs
                    out[i, j] = log(hypot(lhs.real, lhs.imag))
    return out_arr
