"""Closed-form predictions: linear law, zero limit, saturation point, bulk curves."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryDegenerateError,
    FormulaDomainError,
    PreconditionError,
    SingularExpansionError,
)
from .model import ChainParams, TopologySigns, classify_topology, theta_of

INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class LinearLaw:
    slope: float
    intercept: float
    s_t: int
    s_g: int
    lambda_used: float

    def predict(self, n):
        """ln|E_min| at size N."""
        return self.slope * np.asarray(n, dtype=float) + self.intercept


@dataclass(frozen=True)
class SaturationPrediction:
    E_c: float
    N_c: float
    branch: str  # "beta_lt_1" or "beta_gt_1"
    lambert_arg: float
    form: str = "printed"


@dataclass
class BulkCurve:
    kind: str
    samples: np.ndarray  # complex energies, +E branch followed by -E branch
    parameter: np.ndarray  # k or theta for each sample of one branch


def topology_signs(params: ChainParams) -> TopologySigns:
    signs = classify_topology(params)
    if signs.s_g is None:
        raise FormulaDomainError("s_g is undefined for |t1| < |gamma|")
    return signs


def _red_line_term(params):
    """t1^2 - gamma^2 - t2^2, the quantity that vanishes on the red lines."""
    return params.t1**2 - params.gamma**2 - params.t2**2


def _law(params, s_t, s_g, lam):
    t1, t2, gamma = params.t1, params.t2, params.gamma
    d = _red_line_term(params)
    if d == 0:
        raise FormulaDomainError("t1^2 - gamma^2 - t2^2 = 0: the intercept diverges")
    if lam == 0:
        raise PreconditionError("the selected terminal coupling is zero")
    slope = s_t * math.log(abs(t2 / (t1 + s_t * s_g * gamma)))
    intercept = math.log(abs(lam)) + math.log(abs(d / (t2 * (t1 - s_g * gamma))))
    return LinearLaw(slope, intercept, s_t, s_g, lam)


def linear_law(params: ChainParams) -> LinearLaw:
    """Slope and intercept of ln|E_min| against N in the linear regime."""
    signs = topology_signs(params)
    lam = params.lambda_l if signs.lambda_selected == "L" else params.lambda_r
    return _law(params, signs.s_t, signs.s_g, lam)


def unidirectional_law(params: ChainParams, zeroed_side: str | None = None) -> LinearLaw:
    """Linear law when exactly one terminal coupling is present.

    The sign that selects the coupling becomes -1 when lambda_R is the zero one
    and +1 when lambda_L is, whatever the bulk skin direction.
    """
    zero_l, zero_r = params.lambda_l == 0, params.lambda_r == 0
    if zero_l == zero_r:
        raise PreconditionError("exactly one of lambda_L, lambda_R must be zero")
    side = "L" if zero_l else "R"
    if zeroed_side is not None and zeroed_side != side:
        raise PreconditionError(f"zeroed_side={zeroed_side!r} but lambda_{side} is the zero coupling")
    signs = topology_signs(params)
    s_g = +1 if side == "L" else -1
    lam = params.lambda_r if side == "L" else params.lambda_l
    return _law(params, signs.s_t, s_g, lam)


def beta_zero_moduli(params: ChainParams):
    """(|beta_a|, |beta_b|) at E = 0."""
    return abs(params.b / params.t2), abs(params.t2 / params.a)


def zero_limit_condition(params: ChainParams) -> bool:
    """True when |E_min| -> 0 as N grows (the two E = 0 factors straddle the unit circle)."""
    ma, mb = beta_zero_moduli(params)
    if ma == 1 or mb == 1:
        raise BoundaryDegenerateError("a non-Bloch factor has modulus exactly 1 at E = 0")
    return (ma < 1) != (mb < 1)


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function for real x >= -1/e."""
    x = float(x)
    if math.isnan(x):
        return math.nan
    if x < -INV_E:
        if x > -INV_E - 1e-15:
            return -1.0
        raise FormulaDomainError(f"lambert_w0 undefined for x = {x} < -1/e")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return math.inf
    # starting guesses
    if x > math.e:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    elif x < -0.25:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    else:
        w = x * (1.0 - x + 1.5 * x * x)
    if w == -1.0:
        return w
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


def _lt_branch(params):
    ma, mb = beta_zero_moduli(params)
    if ma < 1 and mb < 1:
        return "beta_lt_1"
    if ma > 1 and mb > 1:
        return "beta_gt_1"
    raise PreconditionError("saturation needs the point-gap topology (|beta_a|, |beta_b| on one side of 1)")


def _expansion_d(params):
    d = params.t1**2 - params.t2**2 - params.gamma**2
    if d == 0:
        raise SingularExpansionError("t1^2 - t2^2 - gamma^2 = 0: expansion is singular")
    return d


def _ln_slopes(params):
    """(beta_a0, beta_b0, d ln beta_a/dE^2, d ln beta_b/dE^2) at E = 0."""
    d = _expansion_d(params)
    return -params.b / params.t2, -params.t2 / params.a, -1.0 / d, 1.0 / d


def taylor_ln_beta2(params: ChainParams):
    """(b0, b2, c0) for the |beta1| < |beta2| < 1 branch.

    ln|beta2(E)| = b0 + b2 E^2 + O(E^4) and c0 lambda_L / E is the leading
    term of the right-hand side of the reduced consistency condition.
    """
    if _lt_branch(params) != "beta_lt_1":
        raise PreconditionError("taylor_ln_beta2 is defined on the |beta| < 1 branch")
    ba0, bb0, da, db = _ln_slopes(params)
    if abs(ba0) >= abs(bb0):
        b0, b2 = math.log(abs(ba0)), da
    else:
        b0, b2 = math.log(abs(bb0)), db
    c0 = abs(_expansion_d(params) / (params.t2 * params.b))
    return b0, b2, c0


def taylor_ln_beta1_gt(params: ChainParams):
    """Counterpart of :func:`taylor_ln_beta2` on the 1 < |beta1| < |beta2| branch.

    Returns (b0, b2, c0) for exp((b0 + b2 E^2) mu) = c0 lambda_R / E with
    mu = N - 1, so b0 = -ln|beta1(0)| and b2 = -d ln|beta1|/dE^2.
    """
    if _lt_branch(params) != "beta_gt_1":
        raise PreconditionError("defined on the |beta| > 1 branch")
    ba0, bb0, da, db = _ln_slopes(params)
    if abs(ba0) <= abs(bb0):
        beta1, beta2, slope1 = ba0, bb0, da
    else:
        beta1, beta2, slope1 = bb0, ba0, db
    c0 = abs(params.t2 * (beta2 - beta1) / params.b)
    return -math.log(abs(beta1)), -slope1, c0


def lambert_saturation(b0, b2, c):
    """Turning point (E_c, mu_c, arg) of exp((b0 + b2 E^2) mu) = c / E."""
    if b2 == 0 or c <= 0:
        raise FormulaDomainError("degenerate saturation coefficients")
    ratio = b0 / b2
    if ratio <= 0:
        raise FormulaDomainError(f"b0/b2 = {ratio:g} <= 0: no turning point")
    arg = ratio / (c * c * math.e)
    w = lambert_w0(arg)
    if w <= 0:
        raise FormulaDomainError(f"Lambert argument {arg:g} gives W <= 0")
    e_c = math.sqrt(ratio / w)
    mu_c = -1.0 / (2.0 * b2 * e_c * e_c)
    return e_c, mu_c, arg


def _printed_saturation(params, branch):
    t1, t2, gamma = params.t1, params.t2, params.gamma
    d = _expansion_d(params)
    s_t = topology_signs(params).s_t
    if branch == "beta_lt_1":
        lam = params.lambda_l
        log_term = math.log(abs(((s_t * gamma - t1) / t2) ** s_t))
        plus = t1**2 - t2**2 + gamma**2
        if plus == 0 or lam == 0:
            raise FormulaDomainError("Lambert argument has a zero denominator")
        arg = t2**2 * (t1 - gamma) ** 2 * abs(d) * log_term / (-math.e * plus**2 * lam**2)
        offset = 2.0
    else:
        lam = params.lambda_r
        if lam == 0:
            raise FormulaDomainError("Lambert argument has a zero denominator")
        log_term = math.log(abs(((s_t * gamma + t1) / t2) ** (-s_t)))
        arg = abs((t1**2 - gamma**2) ** 2 * log_term / (-math.e * d * lam**2))
        offset = 1.0
    if arg <= 0:
        raise FormulaDomainError(f"Lambert argument {arg:g} <= 0 after sign resolution")
    w = lambert_w0(arg)
    e_c = math.sqrt(abs(log_term) / (abs(1.0 / d) * w))
    n_c = offset + abs(d / (2.0 * e_c * e_c))
    return SaturationPrediction(e_c, n_c, branch, arg, "printed")


def saturation_prediction(params: ChainParams, form: str = "printed") -> SaturationPrediction:
    """Critical (E_c, N_c) at which |E_min| stops growing in the point-gap phase.

    ``form="printed"`` evaluates the published closed forms with every square
    root and Lambert argument taken in absolute value.  ``form="derived"``
    solves the turning-point problem from :func:`taylor_ln_beta2` (or its
    |beta| > 1 counterpart) with the exact E^2 coefficients of ln beta.
    """
    branch = _lt_branch(params)
    if form == "printed":
        return _printed_saturation(params, branch)
    if form != "derived":
        raise ValueError(f"unknown form {form!r}")
    if branch == "beta_lt_1":
        b0, b2, c0 = taylor_ln_beta2(params)
        lam, offset = params.lambda_l, 2.0
    else:
        b0, b2, c0 = taylor_ln_beta1_gt(params)
        lam, offset = params.lambda_r, 1.0
    if lam == 0:
        raise FormulaDomainError("selected terminal coupling is zero")
    e_c, mu_c, arg = lambert_saturation(b0, b2, c0 * abs(lam))
    return SaturationPrediction(e_c, offset + mu_c, branch, arg, "derived")


def pbc_energy_sq(params: ChainParams, k):
    k = np.asarray(k, dtype=float)
    return (params.a + params.t2 * np.exp(-1j * k)) * (params.b + params.t2 * np.exp(1j * k))


def bulk_curves(params: ChainParams, kind: str = "PBC", samples: int = 2048) -> BulkCurve:
    """Bulk spectrum of the homogeneous chain, periodic (PBC) or on the GBZ."""
    if samples < 16:
        raise PreconditionError("samples must be >= 16")
    phi = np.linspace(-np.pi, np.pi, int(samples), endpoint=False)
    if kind == "PBC":
        e2 = pbc_energy_sq(params, phi)
    elif kind == "GBZ":
        beta = cmath.sqrt(params.b / params.a) * np.exp(1j * phi)
        e2 = (params.a + params.t2 / beta) * (params.b + params.t2 * beta)
    else:
        raise ValueError(f"unknown curve kind {kind!r}")
    e = np.sqrt(e2.astype(complex))
    return BulkCurve(kind, np.concatenate([e, -e]), phi)


def curve_winding(values) -> int:
    """Winding number of a closed sampled curve around the origin."""
    z = np.asarray(values, dtype=complex)
    z = np.append(z, z[0])
    return int(round(np.angle(z[1:] / z[:-1]).sum() / (2 * np.pi)))


def pbc_encloses_origin(params: ChainParams, samples: int = 2048) -> bool:
    """Whether the periodic E^2(k) loop winds around E = 0."""
    phi = np.linspace(-np.pi, np.pi, int(samples), endpoint=False)
    return curve_winding(pbc_energy_sq(params, phi)) != 0


def appendix_identities(params: ChainParams):
    """Both sides of the two E = 0 identities that produce the linear law.

    Returns ((lhs1, rhs1), (lhs2, rhs2)) with
    lhs1 = exp(s_g g - i theta0),    rhs1 = (-t2/(t1 + s_t s_g gamma))^{s_t}
    lhs2 = exp(-s_g g) 2i sin theta0, rhs2 = -s_t (t1^2-gamma^2-t2^2)/(t2(t1 - s_g gamma))
    """
    signs = topology_signs(params)
    s_t, s_g, g = signs.s_t, signs.s_g, signs.g
    t1, t2, gamma = params.t1, params.t2, params.gamma
    theta0 = theta_of(params, 0.0)
    lhs1 = cmath.exp(s_g * g - 1j * theta0)
    rhs1 = (-t2 / (t1 + s_t * s_g * gamma)) ** s_t
    lhs2 = cmath.exp(-s_g * g) * 2j * cmath.sin(theta0)
    rhs2 = -s_t * _red_line_term(params) / (t2 * (t1 - s_g * gamma))
    return (lhs1, complex(rhs1)), (lhs2, complex(rhs2))
