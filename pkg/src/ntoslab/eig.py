"""Finite-chain spectra, E_min selection and the boundary consistency condition.

Dense spectra come from LAPACK (``numpy.linalg.eig``) and every eigenpair is
certified by its residual.  Very small E_min values, where double precision
loses meaning for a non-normal matrix, are instead taken from an
extended-precision root of the characteristic polynomial

    P(E) = p [a t2 lambda_L + E lambda_L lambda_R S_{N-1} - E a t2 S_N] + a t2 lambda_R p^N

with a = t1 + gamma, b = t1 - gamma, p = b/a and the Chebyshev-like sequence
S_0 = 0, S_1 = 1, S_{m+1} = sigma S_m - p S_{m-1}, sigma = (E^2 - ab - t2^2)/(t2 a).
P is the boundary consistency condition cleared of denominators; its roots are
exactly the eigenvalues of the (2N-1)-site Hamiltonian.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import kernels
from .errors import (
    DegenerateBetaError,
    IllConditionedWarning,
    NoRootError,
    PreconditionError,
    SolverFailureError,
)
from .model import (
    ChainParams,
    beta_exact,
    build_hamiltonian,
    check_size,
    chi_component,
    exp_g_complex,
)

MAX_DENSE_DIM = 1000
RESIDUAL_TOL = 1e-8
TIE_RTOL = 1e-12
PRECISION_FLOOR = 1e-10  # relative to ||H||_F
MP_PREC = 192  # bits
ROOT_SCAN_PER_DECADE = 16
ROOT_SCAN_MIN_EXP = -120  # smallest |E| probed is 10**ROOT_SCAN_MIN_EXP


@dataclass
class SpectrumRecord:
    N: int
    eigenvalues: np.ndarray
    e_min: complex
    e_min_source: str  # "dense_eig" or "consistency_root"
    max_residual: float
    norm_h: float = 0.0
    root_residual: float | None = None  # set when e_min comes from the root solver


@dataclass
class ConsistencyPoint:
    E: complex
    N: int
    D_full: complex
    D_trig: complex
    delta: float


# -- dense spectra ------------------------------------------------------------


def _inverse_iteration(h, e, v, steps=3):
    shift = e + 1e-14 * max(1.0, abs(e)) * (1 + 1j)
    m = h - shift * np.eye(h.shape[0])
    try:
        for _ in range(steps):
            v = np.linalg.solve(m, v)
            v /= np.linalg.norm(v)
    except np.linalg.LinAlgError:
        pass
    return v


def eig_certified(matrix):
    """Eigenvalues, unit eigenvectors and per-pair residuals ||Hv - Ev|| / ||H||_F."""
    h = np.asarray(matrix)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise PreconditionError("matrix must be square")
    if h.shape[0] > MAX_DENSE_DIM:
        raise PreconditionError(f"dense solver limited to dim <= {MAX_DENSE_DIM}")
    try:
        vals, vecs = np.linalg.eig(h)
    except np.linalg.LinAlgError as exc:
        raise SolverFailureError(f"eigenvalue iteration did not converge: {exc}") from exc
    norm = np.linalg.norm(h)
    scale = norm if norm > 0 else 1.0
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    res = np.linalg.norm(h @ vecs - vecs * vals, axis=0) / scale
    for j in np.flatnonzero(res >= RESIDUAL_TOL):
        v = _inverse_iteration(h, vals[j], vecs[:, j].astype(complex))
        r = np.linalg.norm(h @ v - vals[j] * v) / scale
        if r < res[j]:
            vecs[:, j], res[j] = v, r
    worst = float(res.max()) if res.size else 0.0
    if worst >= RESIDUAL_TOL:
        j = int(np.argmax(res))
        raise SolverFailureError(
            f"eigenpair residual {worst:.3e} >= {RESIDUAL_TOL:g} at E={vals[j]!r} (dim {h.shape[0]})"
        )
    return vals.astype(complex), vecs, res


def eig_dense(matrix):
    """All eigenvalues of a dense nonsymmetric matrix, residual-certified."""
    return eig_certified(matrix)[0]


def select_emin(eigenvalues) -> complex:
    """Smallest-modulus eigenvalue; near-ties prefer Im >= 0, then Re >= 0."""
    ev = np.asarray(eigenvalues, dtype=complex).ravel()
    if ev.size == 0:
        raise PreconditionError("empty eigenvalue list")
    mods = np.abs(ev)
    m = mods.min()
    tied = ev[mods <= m + TIE_RTOL * max(m, np.finfo(float).tiny)]
    key = sorted(tied, key=lambda z: (z.imag < 0, z.real < 0, abs(z), z.imag, z.real))
    return complex(key[0])


# -- consistency condition ----------------------------------------------------


def _betas_checked(params, e):
    pair = beta_exact(params, e)
    if pair.degenerate:
        raise DegenerateBetaError(f"beta1 ~= beta2 at E={e}; consistency condition is singular")
    return pair.beta1, pair.beta2


def _full_terms(params, n, e):
    a, t2 = params.a, params.t2
    lam_l, lam_r = params.lambda_l, params.lambda_r
    b1, b2 = _betas_checked(params, e)
    q1, q2 = t2 + b1 * a, t2 + b2 * a
    b1n, b2n = b1**n, b2**n
    # F = beta1 X1 Y2 - beta2 X2 Y1 expanded into its eight products
    terms = [
        b1 * q1 * lam_l * e * b2 * t2,
        -b1 * q1 * lam_l * b2n * q2 * lam_r,
        -b1 * e * b1n * a * e * b2 * t2,
        b1 * e * b1n * a * b2n * q2 * lam_r,
        -b2 * q2 * lam_l * e * b1 * t2,
        b2 * q2 * lam_l * b1n * q1 * lam_r,
        b2 * e * b2n * a * e * b1 * t2,
        -b2 * e * b2n * a * b1n * q1 * lam_r,
    ]
    x1 = q1 * lam_l - e * b1n * a
    x2 = q2 * lam_l - e * b2n * a
    y1 = e * b1 * t2 - b1n * q1 * lam_r
    y2 = e * b2 * t2 - b2n * q2 * lam_r
    return b1, b2, x1, x2, y1, y2, terms


def _trig_terms(params, n, e):
    a, t2 = params.a, params.t2
    lam_l, lam_r = params.lambda_l, params.lambda_r
    b1, b2 = _betas_checked(params, e)
    eg = exp_g_complex(params)
    if b1 == 0:
        raise DegenerateBetaError("beta1 = 0: theta undefined")
    theta = -1j * cmath.log(b2 / eg)
    den = e * e - lam_l * lam_r
    if den == 0:
        raise PreconditionError("E^2 = lambda_L lambda_R makes the trigonometric form singular")
    ll = lam_l * lam_r / den
    kappa = t2 / (eg * a) + eg * a / t2
    return [
        -e * (eg ** -(n - 1) * lam_l + eg ** (n - 1) * lam_r) / den * cmath.sin(theta),
        -ll * cmath.sin((n - 2) * theta),
        -kappa * ll * cmath.sin((n - 1) * theta),
        cmath.sin(n * theta),
    ]


def consistency_residual(params: ChainParams, n: int, energy, form: str = "full", normalize=True):
    """Boundary consistency condition evaluated at E.

    ``form="full"`` is the ratio form built from both non-Bloch factors,
    ``form="trig"`` the rewriting in terms of g and theta.  With ``normalize``
    the cross-multiplied full form (or the trig sum) is divided by its largest
    single term, which makes "close to zero" scale free.
    """
    n = check_size(n)
    e = complex(energy)
    if form == "full":
        b1, b2, x1, x2, y1, y2, terms = _full_terms(params, n, e)
        if normalize:
            scale = max(abs(t) for t in terms)
            return sum(terms) / scale if scale > 0 else 0j
        return b1 * x1 / (b2 * x2) - y1 / y2
    if form == "trig":
        terms = _trig_terms(params, n, e)
        if normalize:
            scale = max(abs(t) for t in terms)
            return sum(terms) / scale if scale > 0 else 0j
        return sum(terms)
    raise ValueError(f"unknown form {form!r}")


def trig_prefactor(params: ChainParams, n: int, energy):
    """Factor f with D_trig = f * D_full.

    f = beta2 X2 Y2 / (2i (t1+gamma) t2 e^{(N+2) g} (E^2 - lambda_L lambda_R)).
    """
    e = complex(energy)
    b1, b2, x1, x2, y1, y2, _ = _full_terms(params, n, e)
    eg = exp_g_complex(params)
    den = 2j * params.a * params.t2 * eg ** (n + 2) * (e * e - params.lambda_l * params.lambda_r)
    return b2 * x2 * y2 / den


# -- characteristic polynomial and extended-precision roots -------------------


def _mp_context(prec):
    ctx = mpmath.MPContext()
    ctx.prec = max(int(prec), 128)
    return ctx


def charpoly_terms_mp(params: ChainParams, n: int, energy, ctx):
    """The four terms of P(E) in the context ``ctx`` (real E)."""
    t1, t2, gamma = ctx.mpf(params.t1), ctx.mpf(params.t2), ctx.mpf(params.gamma)
    lam_l, lam_r = ctx.mpf(params.lambda_l), ctx.mpf(params.lambda_r)
    e = ctx.mpf(energy)
    a, b = t1 + gamma, t1 - gamma
    p = b / a
    sigma = (e * e - a * b - t2 * t2) / (t2 * a)
    s_prev, s_cur = ctx.zero, ctx.one
    for _ in range(n - 1):
        s_prev, s_cur = s_cur, sigma * s_cur - p * s_prev
    return (
        p * a * t2 * lam_l,
        p * e * lam_l * lam_r * s_prev,
        -p * e * a * t2 * s_cur,
        a * t2 * lam_r * p**n,
    )


def charpoly_mp(params: ChainParams, n: int, energy, ctx=None):
    ctx = ctx or _mp_context(MP_PREC)
    return ctx.fsum(charpoly_terms_mp(params, n, energy, ctx))


def charpoly(params: ChainParams, n: int, energies):
    """P(E) in double precision on an array of real energies (compiled kernel)."""
    return kernels.charpoly_real(
        params.t1, params.t2, params.gamma, params.lambda_l, params.lambda_r, int(n), energies
    )


def _scan_grid(search_radius):
    top = math.log10(search_radius)
    count = int(math.ceil((top - ROOT_SCAN_MIN_EXP) * ROOT_SCAN_PER_DECADE)) + 1
    return np.logspace(ROOT_SCAN_MIN_EXP, top, count)


def _first_bracket(f_sign, mags, side, values_at_zero_sign):
    """First sign change walking outward from 0 along ``side * mags``."""
    prev_x, prev_s = 0.0, values_at_zero_sign
    for x, s in zip(mags, f_sign):
        if s == 0:
            return side * x, side * x
        if s != prev_s:
            return side * prev_x, side * x
        prev_x, prev_s = x, s
    return None


@dataclass
class RootResult:
    E: float
    residual: float  # |P(E)| / largest term of P, in extended precision
    newton_step: float  # |P/P'| relative to |E|
    prec: int
    bracket: tuple = field(default=(0.0, 0.0))


def emin_root_certified(params: ChainParams, n: int, search_radius: float = 1e-3, prec: int = MP_PREC):
    """Real root of P(E) closest to 0, refined in extended precision."""
    n = check_size(n)
    if search_radius <= 0:
        raise PreconditionError("search_radius must be positive")
    ctx = _mp_context(prec)
    if params.lambda_l == 0 and params.lambda_r == 0:
        return RootResult(0.0, 0.0, 0.0, ctx.prec)

    def f(x):
        return charpoly_mp(params, n, x, ctx)

    s0 = int(ctx.sign(f(0)))
    if s0 == 0:
        return RootResult(0.0, 0.0, 0.0, ctx.prec)
    mags = _scan_grid(search_radius)
    brackets = []
    for side in (1.0, -1.0):
        vals = charpoly(params, n, side * mags)
        br = None
        rescan = not np.all(np.isfinite(vals))
        if not rescan:
            br = _first_bracket(np.sign(vals), mags, side, s0)
            if br is not None:
                lo_s = s0 if br[0] == 0 else int(ctx.sign(f(br[0])))
                hi_s = int(ctx.sign(f(br[1])))
                if lo_s == hi_s and br[0] != br[1]:
                    br, rescan = None, True  # double precision misjudged the sign
        if rescan:
            signs = [int(ctx.sign(f(side * x))) for x in mags]
            br = _first_bracket(signs, mags, side, s0)
        if br is not None:
            brackets.append(br)
    if not brackets:
        raise NoRootError(
            f"P(E) has no real sign change for 0 < |E| <= {search_radius:g} at N={n}"
        )
    brackets.sort(key=lambda br: abs(br[1]))
    lo, hi = brackets[0]
    if lo == hi:
        root = ctx.mpf(lo)
    else:
        lo_m, hi_m = ctx.mpf(lo), ctx.mpf(hi)
        try:
            root = ctx.findroot(f, (lo_m, hi_m), solver="anderson")
        except (ValueError, ZeroDivisionError):
            root = None
        if root is None or not (min(lo_m, hi_m) <= root <= max(lo_m, hi_m)):
            root = ctx.findroot(f, (lo_m, hi_m), solver="bisect")
    terms = charpoly_terms_mp(params, n, root, ctx)
    scale = max(abs(t) for t in terms)
    residual = float(abs(ctx.fsum(terms)) / scale) if scale else 0.0
    deriv = ctx.diff(f, root)
    step = float(abs(f(root) / deriv) / abs(root)) if deriv != 0 and root != 0 else 0.0
    return RootResult(float(root), residual, step, ctx.prec, (float(lo), float(hi)))


def emin_root(params: ChainParams, n: int, search_radius: float = 1e-3) -> complex:
    """Real E_min from the extended-precision root of P(E)."""
    return complex(emin_root_certified(params, n, search_radius).E)


# -- eigenvector reconstruction -----------------------------------------------


def reconstruct_eigenvector(params: ChainParams, n: int, energy) -> np.ndarray:
    """Unit eigenvector in the A1, B1, ..., A_N basis built from the two-beta ansatz."""
    n = check_size(n)
    e = complex(energy)
    cells = np.arange(1, n + 1)
    if e == 0:
        # zero mode on the A sublattice: (t1-gamma) psi_A(n) + t2 psi_A(n+1) = 0
        psi_a = (-params.b / params.t2) ** cells.astype(complex)
        psi_b = np.zeros(n - 1, dtype=complex)
    else:
        pair = beta_exact(params, e)
        b1, b2 = pair.beta1, pair.beta2
        if abs(b1 - b2) < 1e-6 * abs(b2):
            warnings.warn(f"nearly degenerate betas at E={e}; c is ill-conditioned", IllConditionedWarning)
        x1 = chi_component(params, e, b1)
        x2 = chi_component(params, e, b2)
        a, lam_r = params.a, params.lambda_r
        num = e * b1 - a * x1 * b1 - lam_r * b1**n
        den = a * x2 * b2 + lam_r * b2**n - e * b2
        if den == 0:
            raise PreconditionError("coefficient c is undefined at this E")
        c = num / den
        p1 = b1 ** cells.astype(float)
        p2 = b2 ** cells.astype(float)
        psi_a = p1 + c * p2
        psi_b = (x1 * p1 + c * x2 * p2)[: n - 1]
    psi = np.empty(2 * n - 1, dtype=complex)
    psi[0::2] = psi_a
    psi[1::2] = psi_b
    return psi / np.linalg.norm(psi)


def boundary_residuals(params: ChainParams, n: int, energy, psi):
    """Residuals of the two boundary rows (A1 and A_N) for a given state."""
    e = complex(energy)
    psi = np.asarray(psi, dtype=complex)
    psi_a, psi_b = psi[0::2], psi[1::2]
    r1 = params.a * psi_b[0] + params.lambda_r * psi_a[-1] - e * psi_a[0]
    r2 = params.t2 * psi_b[-1] + params.lambda_l * psi_a[0] - e * psi_a[-1]
    return r1, r2


# -- Delta map ----------------------------------------------------------------


@dataclass
class DeltaMap:
    n_axis: np.ndarray
    e_axis: np.ndarray
    log_delta: np.ndarray  # shape (len(n_axis), len(e_axis)); NaN in E = 0 columns
    modulus: bool


def _require_lt_branch(params):
    ba0 = abs(params.b / params.t2)
    bb0 = abs(params.t2 / params.a)
    if not (ba0 < 1 and bb0 < 1):
        raise PreconditionError("Delta map needs |beta1| < |beta2| < 1 at E = 0")


def delta_map(params: ChainParams, n_range, e_range, modulus=False) -> DeltaMap:
    """ln Delta(E, N) on a grid.

    ``modulus=False`` keeps the principal complex power of beta2, so only
    integer N can make Delta vanish when beta2 < 0.  ``modulus=True`` compares
    |beta2|^(N-2) with the modulus of the right-hand side, which gives the
    continuous valley used to locate the turning point.
    """
    _require_lt_branch(params)
    n_axis = np.asarray(n_range, dtype=float)
    e_axis = np.asarray(e_range, dtype=float)
    values = kernels.log_delta_grid(
        params.t1, params.t2, params.gamma, params.lambda_l, n_axis, e_axis, bool(modulus)
    )
    return DeltaMap(n_axis, e_axis, values, bool(modulus))


def delta_value(params: ChainParams, n, energy) -> float:
    pair = beta_exact(params, energy)
    e = complex(energy)
    rhs = (pair.beta2 - pair.beta1) * params.a * params.lambda_l / (e * params.b)
    return abs(pair.beta2 ** (n - 2) - rhs)


def delta_valley(dmap: DeltaMap):
    """N of the Delta minimum for every E column (NaN where the column is empty)."""
    vals = dmap.log_delta
    out = np.full(vals.shape[1], np.nan)
    for j in range(vals.shape[1]):
        col = vals[:, j]
        if np.all(np.isnan(col)):
            continue
        out[j] = dmap.n_axis[int(np.nanargmin(col))]
    return out


def delta_turning_point(dmap: DeltaMap):
    """(E, N) where the valley reaches its largest N, i.e. d mu / dE = 0.

    Only interior maxima are meaningful; a maximum on the edge of the E or N
    axis means the grid does not contain the turning point.
    """
    valley = delta_valley(dmap)
    pos = dmap.e_axis > 0
    idx = np.flatnonzero(pos & np.isfinite(valley))
    if idx.size == 0:
        raise PreconditionError("no positive-E columns in the map")
    j = idx[int(np.argmax(valley[idx]))]
    if j in (idx[0], idx[-1]) or valley[j] >= dmap.n_axis[-1]:
        raise PreconditionError("valley maximum lies on the edge of the grid")
    return float(dmap.e_axis[j]), float(valley[j])


def consistency_point(params: ChainParams, n: int, energy) -> ConsistencyPoint:
    e = complex(energy)
    d_full = consistency_residual(params, n, e, "full", normalize=False)
    d_trig = consistency_residual(params, n, e, "trig", normalize=False)
    try:
        dv = delta_value(params, n, e)
    except ZeroDivisionError:
        dv = math.nan
    return ConsistencyPoint(e, n, d_full, d_trig, dv)


# -- spectrum record ----------------------------------------------------------


def spectrum_record(params: ChainParams, n: int, floor: float = PRECISION_FLOOR) -> SpectrumRecord:
    """Dense spectrum of the N-cell chain with E_min replaced below the precision floor."""
    n = check_size(n)
    h = build_hamiltonian(params, n)
    vals, _, res = eig_certified(h)
    norm = float(np.linalg.norm(h))
    e_min = select_emin(vals)
    source = "dense_eig"
    if abs(e_min) <= floor * norm and (params.lambda_l != 0 or params.lambda_r != 0):
        try:
            root = emin_root_certified(params, n, search_radius=max(1e3 * floor * norm, 1e-6))
        except NoRootError:
            root = None
        if root is not None:
            k = int(np.argmin(np.abs(vals)))
            vals = vals.copy()
            vals[k] = root.E
            return SpectrumRecord(
                n, vals, complex(root.E), "consistency_root", float(res.max()), norm, root.residual
            )
    return SpectrumRecord(n, vals, e_min, source, float(res.max()), norm)
