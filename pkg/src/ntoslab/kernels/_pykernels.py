"""Pure numpy implementation of the hot kernels.

Mirrors ``_ckernels.pyx`` function by function; used when the compiled
extension is unavailable and as the reference in the kernel tests.
"""
import math

import numpy as np

from ..errors import GapClosedError

GAP_TOL = 1e-12
MAX_RESOLUTION = 1 << 20

STATUS_OK = 0
STATUS_GAP_CLOSED = 1
STATUS_UNRESOLVED = 2


def _bloch_det(t1, t2, gamma, k):
    return ((t1 + gamma) + t2 * np.exp(-1j * k)) * ((t1 - gamma) + t2 * np.exp(1j * k))


def _winding_status(t1, t2, gamma, resolution):
    m = int(resolution)
    while m <= MAX_RESOLUTION:
        k = np.linspace(-np.pi, np.pi, m + 1)
        det = _bloch_det(t1, t2, gamma, k)
        if np.min(np.abs(det)) < GAP_TOL:
            return 0, STATUS_GAP_CLOSED
        steps = np.angle(det[1:] * np.conj(det[:-1]))
        if np.max(np.abs(steps)) < 0.5 * np.pi:
            return int(round(steps.sum() / (2.0 * np.pi))), STATUS_OK
        m *= 2
    return 0, STATUS_UNRESOLVED


def winding_number(t1, t2, gamma, resolution=256):
    w, status = _winding_status(t1, t2, gamma, resolution)
    if status == STATUS_GAP_CLOSED:
        raise GapClosedError(
            f"|det H(k)| < {GAP_TOL:g} on the contour for t1={t1}, t2={t2}, gamma={gamma}"
        )
    if status == STATUS_UNRESOLVED:
        raise GapClosedError("phase steps stayed >= pi/2 up to the refinement cap")
    return w


def winding_grid(t1_axis, t2_axis, gamma, resolution=256):
    t1_axis = np.asarray(t1_axis, dtype=float)
    t2_axis = np.asarray(t2_axis, dtype=float)
    w = np.zeros((t1_axis.size, t2_axis.size), dtype=np.int64)
    status = np.zeros_like(w, dtype=np.uint8)
    for i, t1 in enumerate(t1_axis):
        for j, t2 in enumerate(t2_axis):
            w[i, j], status[i, j] = _winding_status(t1, t2, gamma, resolution)
    return w, status


def charpoly_real(t1, t2, gamma, lam_l, lam_r, n, energies):
    """Evaluate the polynomial form of the consistency condition on real E."""
    e = np.asarray(energies, dtype=float)
    a = t1 + gamma
    b = t1 - gamma
    p = b / a
    sigma = (e * e - a * b - t2 * t2) / (t2 * a)
    s_prev = np.zeros_like(e)
    s_cur = np.ones_like(e)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n - 1):
            s_prev, s_cur = s_cur, sigma * s_cur - p * s_prev
        # s_prev = S_{n-1}, s_cur = S_n
        return p * (a * t2 * lam_l + e * lam_l * lam_r * s_prev - e * a * t2 * s_cur) + (
            a * t2 * lam_r * p**n
        )


def _sorted_betas(t1, t2, gamma, e):
    a = t1 + gamma
    b = t1 - gamma
    qa = t2 * a
    qb = a * b + t2 * t2 - e * e + 0j
    qc = t2 * b
    s = np.sqrt(qb * qb - 4.0 * qa * qc)
    s = np.where((np.conj(qb) * s).real < 0, -s, s)
    q = -0.5 * (qb + s)
    r1 = q / qa
    r2 = qc / q
    swap = np.abs(r1) > np.abs(r2)
    return np.where(swap, r2, r1), np.where(swap, r1, r2)


def log_delta_grid(t1, t2, gamma, lam_l, n_axis, e_axis, modulus=False):
    """ln|beta2^(N-2) - (beta2-beta1)(t1+gamma)lam_L / (E (t1-gamma))| on an (N, E) grid."""
    n_axis = np.asarray(n_axis, dtype=float)
    e_axis = np.asarray(e_axis, dtype=float)
    beta1, beta2 = _sorted_betas(t1, t2, gamma, e_axis)
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = (beta2 - beta1) * (t1 + gamma) * lam_l / (e_axis * (t1 - gamma))
        mu = (n_axis - 2.0)[:, None]
        if modulus:
            lhs = np.exp(mu * np.log(np.abs(beta2))[None, :])
            delta = np.abs(lhs - np.abs(rhs)[None, :])
        else:
            lhs = np.exp(mu * np.log(beta2)[None, :])
            delta = np.abs(lhs - rhs[None, :])
        out = np.log(delta)
    out[:, e_axis == 0.0] = math.nan
    return out
