"""Chain parameters, the finite-chain Hamiltonian and the non-Bloch algebra.

Basis ordering everywhere is A1, B1, A2, B2, ..., A_{N-1}, B_{N-1}, A_N, so the
matrix dimension is 2N - 1.  The terminal couplings sit in the two A-site
corners: ``H[A1, A_N] = lambda_R`` and ``H[A_N, A1] = lambda_L``.  With this
orientation the boundary rows read

    (t1 + gamma) psi_B(1) + lambda_R psi_A(N) = E psi_A(1)
    t2 psi_B(N-1)        + lambda_L psi_A(1) = E psi_A(N)

which is what the consistency condition in :mod:`ntoslab.eig` is built on.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import (
    BoundaryDegenerateError,
    DegenerateBetaWarning,
    DomainWarning,
    InvalidParamsError,
    InvalidSizeError,
    PoleError,
    PreconditionError,
    SingularExpansionError,
)

# relative threshold for the weak terminal-coupling assumption of the analytics
WEAK_COUPLING_RATIO = 1e-2
DEGENERATE_BETA_TOL = 1e-10
CHI_POLE_TOL = 1e-14


@dataclass(frozen=True)
class ChainParams:
    t1: float
    t2: float
    gamma: float
    lambda_l: float = 0.0
    lambda_r: float = 0.0

    def __post_init__(self):
        for name in ("t1", "t2", "gamma", "lambda_l", "lambda_r"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InvalidParamsError(f"{name} must be a real number, got {value!r}") from None
            if not math.isfinite(value):
                raise InvalidParamsError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if abs(self.t1) == abs(self.gamma):
            raise InvalidParamsError("|t1| == |gamma| makes (t1-gamma)/(t1+gamma) degenerate")

    @property
    def a(self):
        """Forward intra-cell hopping t1 + gamma."""
        return self.t1 + self.gamma

    @property
    def b(self):
        """Backward intra-cell hopping t1 - gamma."""
        return self.t1 - self.gamma

    def replace(self, **changes):
        data = asdict(self)
        data.update(changes)
        return ChainParams(**data)

    def as_dict(self):
        return asdict(self)

    def check_weak_coupling(self):
        """Raise unless both terminal couplings are small against the bulk hoppings."""
        scale = min(abs(self.a), abs(self.b), abs(self.t2))
        lam = max(abs(self.lambda_l), abs(self.lambda_r))
        if lam >= WEAK_COUPLING_RATIO * scale:
            raise PreconditionError(
                f"terminal coupling {lam:g} is not small against min(|t1+-gamma|, |t2|) = {scale:g}"
            )


def check_size(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidSizeError(f"N must be an integer, got {n!r}")
    if n < 2:
        raise InvalidSizeError(f"N must be >= 2, got {n}")
    return int(n)


def a_index(n):
    """Row of site A_n (1-based unit cell index)."""
    return 2 * (n - 1)


def b_index(n):
    return 2 * (n - 1) + 1


def build_hamiltonian(params: ChainParams, n: int) -> np.ndarray:
    """Dense (2N-1) x (2N-1) Hamiltonian of the terminal-coupled chain."""
    n = check_size(n)
    dim = 2 * n - 1
    h = np.zeros((dim, dim))
    cells = np.arange(n - 1)
    ai = 2 * cells
    bi = ai + 1
    h[ai, bi] = params.a
    h[bi, ai] = params.b
    h[ai + 2, bi] = params.t2
    h[bi, ai + 2] = params.t2
    h[0, dim - 1] += params.lambda_r
    h[dim - 1, 0] += params.lambda_l
    return h


def bloch_hamiltonian(params: ChainParams, beta) -> np.ndarray:
    """2x2 non-Bloch Hamiltonian H(beta) in the (A, B) basis."""
    beta = complex(beta)
    return np.array(
        [[0.0, params.a + params.t2 / beta], [params.b + params.t2 * beta, 0.0]],
        dtype=complex,
    )


def bloch_det(params: ChainParams, k):
    """((t1+gamma) + t2 e^{-ik}) ((t1-gamma) + t2 e^{ik}), i.e. E^2 on the unit circle."""
    k = np.asarray(k, dtype=float)
    return (params.a + params.t2 * np.exp(-1j * k)) * (params.b + params.t2 * np.exp(1j * k))


# -- topology -----------------------------------------------------------------


def inequality_winding(t1, t2, gamma):
    """Winding number from the argument-principle counting.

    The (t1-gamma) + t2 e^{ik} factor contributes +1 when |t1-gamma| < |t2|, the
    (t1+gamma) + t2 e^{-ik} factor contributes -1 when |t2| > |t1+gamma|.
    """
    if abs(t2) == abs(t1 + gamma) or abs(t2) == abs(t1 - gamma):
        raise BoundaryDegenerateError(f"|t2| == |t1 +- gamma| at t1={t1}, t2={t2}, gamma={gamma}")
    return int(abs(t1 - gamma) < abs(t2)) - int(abs(t2) > abs(t1 + gamma))


def winding_number(params: ChainParams, resolution: int = 256) -> int:
    """Winding of det H(k) around the origin, by phase accumulation over k in [-pi, pi]."""
    if resolution < 64:
        raise PreconditionError(f"resolution must be >= 64, got {resolution}")
    return kernels.winding_number(params.t1, params.t2, params.gamma, int(resolution))


@dataclass(frozen=True)
class TopologySigns:
    cls: str  # "PG" or "LG"
    W: int
    s_t: int
    s_g: int | None
    lambda_selected: str | None  # "L" or "R"
    g: float | None
    exp_g: float | None


def _sign(x, what):
    if x == 0:
        raise BoundaryDegenerateError(f"{what} is exactly zero; its sign is undefined")
    return 1 if x > 0 else -1


def growth_exponent(params: ChainParams):
    """g with exp(g) = sqrt((t1-gamma)/(t1+gamma)); warns and returns None when complex."""
    ratio = params.b / params.a
    if ratio <= 0:
        warnings.warn(
            f"|t1| < |gamma| (t1={params.t1}, gamma={params.gamma}): g is complex",
            DomainWarning,
            stacklevel=3,
        )
        return None
    return 0.5 * math.log(ratio)


def classify_topology(params: ChainParams) -> TopologySigns:
    t1, t2, gamma = params.t1, params.t2, params.gamma
    if t2 == 0 or params.a == 0:
        raise PreconditionError("classification needs t2 != 0 and t1 + gamma != 0")
    w = inequality_winding(t1, t2, gamma)
    s_t = _sign(abs(params.b / t2) - abs(t2 / params.a), "|(t1-gamma)/t2| - |t2/(t1+gamma)|")
    g = growth_exponent(params)
    if g is None:
        s_g = lam = exp_g = None
    else:
        s_g = _sign(g, "g")
        lam = "L" if s_g < 0 else "R"
        exp_g = math.exp(g)
    return TopologySigns(
        cls="PG" if w != 0 else "LG", W=w, s_t=s_t, s_g=s_g, lambda_selected=lam, g=g, exp_g=exp_g
    )


# -- non-Bloch factors --------------------------------------------------------


@dataclass(frozen=True)
class BetaPair:
    beta1: complex
    beta2: complex
    assignment: str  # "plus_is_small" or "minus_is_small"
    taylor_match: str  # "a_is_1" or "b_is_1"
    degenerate: bool = False


def beta_pm(params: ChainParams, energy):
    """The two roots in the closed form (beta_+, beta_-), principal square root."""
    t1, t2, gamma = params.t1, params.t2, params.gamma
    e = complex(energy)
    disc = (t1**2 - (e - t2) ** 2 - gamma**2) * (t1**2 - (e + t2) ** 2 - gamma**2)
    root = cmath.sqrt(disc)
    base = e * e - (t1**2 + t2**2 - gamma**2)
    den = 2 * t2 * params.a
    return (base + root) / den, (base - root) / den


def _quadratic_roots(params, e):
    qa = params.t2 * params.a
    qb = params.a * params.b + params.t2**2 - e * e
    qc = params.t2 * params.b
    s = cmath.sqrt(qb * qb - 4 * qa * qc)
    if (qb.conjugate() * s).real < 0:
        s = -s
    q = -0.5 * (qb + s)
    if q == 0:
        return 0j, 0j
    return q / qa, qc / q


def beta_exact(params: ChainParams, energy) -> BetaPair:
    """Both roots of t2(t1+g) b^2 + (t1^2-g^2+t2^2-E^2) b + t2(t1-g) = 0, |beta1| <= |beta2|."""
    if params.t2 * params.a == 0:
        raise PreconditionError("beta needs t2 (t1 + gamma) != 0")
    e = complex(energy)
    r1, r2 = _quadratic_roots(params, e)
    beta1, beta2 = (r1, r2) if abs(r1) <= abs(r2) else (r2, r1)
    plus, minus = beta_pm(params, e)
    assignment = "plus_is_small" if abs(plus - beta1) <= abs(minus - beta1) else "minus_is_small"
    ba0 = -params.b / params.t2
    bb0 = -params.t2 / params.a
    taylor_match = "a_is_1" if abs(ba0) <= abs(bb0) else "b_is_1"
    degenerate = abs(beta1 - beta2) < DEGENERATE_BETA_TOL * abs(beta2)
    if degenerate:
        warnings.warn(f"beta1 ~= beta2 at E={e}", DegenerateBetaWarning, stacklevel=2)
    return BetaPair(beta1, beta2, assignment, taylor_match, degenerate)


def beta_taylor(params: ChainParams, energy, form: str = "exact"):
    """Second-order expansion (beta_a, beta_b) of the two roots around E = 0.

    ``form="exact"`` uses the true E^2 coefficients
    d beta_a/dE^2 = (t1-gamma)/(t2 D) and d beta_b/dE^2 = -t2/((t1+gamma) D),
    D = t1^2 - t2^2 - gamma^2, so the remainder is O(E^4).  ``form="printed"``
    uses +-E^2/D, the literal published coefficients; those agree with the
    exact roots only to O(E^2).
    """
    t1, t2, gamma = params.t1, params.t2, params.gamma
    d = t1 * t1 - t2 * t2 - gamma * gamma
    if d == 0:
        raise SingularExpansionError("t1^2 - t2^2 - gamma^2 = 0: expansion is singular")
    e2 = complex(energy) ** 2
    ba0 = -params.b / t2
    bb0 = -t2 / params.a
    if form == "exact":
        return ba0 * (1 - e2 / d), bb0 * (1 + e2 / d)
    if form == "printed":
        return ba0 + e2 / d, bb0 - e2 / d
    raise ValueError(f"unknown form {form!r}")


def chi_component(params: ChainParams, energy, beta) -> complex:
    """B/A amplitude ratio of the H(beta) eigenvector with eigenvalue E."""
    beta = complex(beta)
    den = params.t2 + beta * params.a
    if abs(den) < CHI_POLE_TOL:
        raise PoleError(f"t2 + beta (t1 + gamma) vanishes at beta={beta}")
    return complex(energy) * beta / den


def exp_g_complex(params: ChainParams) -> complex:
    """sqrt(beta1 beta2) = sqrt((t1-gamma)/(t1+gamma)) on the principal branch."""
    return cmath.sqrt(params.b / params.a)


def theta_of(params: ChainParams, energy) -> complex:
    """theta with beta1 = e^g e^{-i theta}, beta2 = e^g e^{i theta}.

    Taken as -i log(beta2 e^{-g}) so that the reconstruction holds exactly and
    |e^{i theta}| >= 1 follows from |beta2| >= |beta1|.
    """
    pair = beta_exact(params, energy)
    if pair.beta1 == 0:
        raise PoleError("beta1 = 0: theta undefined")
    return -1j * cmath.log(pair.beta2 / exp_g_complex(params))
