"""Size sweeps, linear-regime fits, saturation detection, phase rasters, bulk convergence."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic, kernels
from .eig import PRECISION_FLOOR, SpectrumRecord, spectrum_record
from .errors import InsufficientDataError, NtosError, PreconditionError
from .model import ChainParams, classify_topology, inequality_winding

MAX_SWEEP_N = 200
FIT_MIN_POINTS = 6
FIT_IM_RTOL = 1e-6
FIT_E_FLOOR = 1e-12
FIT_E_CEIL = 1e-3
# the adjusted window also drops N below the decay length of the subleading
# boundary term, and caps |E| at a fraction of the predicted saturation energy
TRANSIENT_DECADES = 3.0
SATURATION_FRACTION = 0.1
SAT_IM_TOL = 0.01
STALL_FRACTION = 0.1
TUBE_HALF_WIDTH = 0.05
CURVE_SAMPLES = 2048

# mask codes for PhaseGrid
MASK_OK = 0
MASK_TUBE = 1
MASK_DOMAIN = 2  # |t1| <= |gamma| or t2 = 0
MASK_FORMULA = 3  # the closed form raised a domain error
MASK_NOT_APPLICABLE = 4  # e.g. saturation quantities in the line-gap phase
MASK_GAP = 5  # winding contour hit the gap


@dataclass
class SweepResult:
    params: ChainParams
    records: list  # SpectrumRecord or None where the solver failed
    predictions: np.ndarray
    errors: dict = field(default_factory=dict)
    floor: float = PRECISION_FLOOR

    @property
    def n(self):
        return np.array([r.N for r in self.records if r is not None])

    @property
    def e_min(self):
        return np.array([r.e_min for r in self.records if r is not None], dtype=complex)

    def record(self, n):
        for r in self.records:
            if r is not None and r.N == n:
                return r
        raise KeyError(n)


@dataclass
class FitResult:
    slope: float
    intercept: float
    window: tuple
    r2: float
    points_used: int
    rule: str = "adjusted"


@dataclass
class NumericSaturation:
    saturated: bool
    N_c_num: int | None
    E_c_num: float | None  # |E_min| at N_c_num - 1
    criterion: str  # "imaginary_onset", "growth_stall" or "none"
    E_at_onset: float | None = None  # |E_min| at N_c_num itself
    im_tol: float = SAT_IM_TOL


@dataclass
class PhaseGrid:
    t1_axis: np.ndarray
    t2_axis: np.ndarray
    quantity: str
    values: np.ndarray  # [i_t1, j_t2]; NaN where masked
    mask: np.ndarray  # uint8 codes, MASK_OK where values are meaningful
    meta: dict = field(default_factory=dict)


# -- sweeps -------------------------------------------------------------------


def predicted_law(params: ChainParams):
    """Linear law matching the coupling configuration, or None if undefined."""
    try:
        if (params.lambda_l == 0) != (params.lambda_r == 0):
            return analytic.unidirectional_law(params)
        return analytic.linear_law(params)
    except (NtosError, ZeroDivisionError):
        return None


def nsweep(params: ChainParams, n_min: int, n_max: int, floor: float = PRECISION_FLOOR) -> SweepResult:
    """Spectrum and E_min for every N in [n_min, n_max]."""
    if not (2 <= n_min < n_max <= MAX_SWEEP_N):
        raise PreconditionError(f"need 2 <= N_min < N_max <= {MAX_SWEEP_N}, got {n_min}, {n_max}")
    law = predicted_law(params)
    records, errors = [], {}
    for n in range(n_min, n_max + 1):
        try:
            records.append(spectrum_record(params, n, floor))
        except NtosError as exc:
            records.append(None)
            errors[n] = f"{type(exc).__name__}: {exc}"
    ns = np.arange(n_min, n_max + 1)
    pred = law.predict(ns) if law is not None else np.full(ns.shape, np.nan)
    return SweepResult(params, records, pred, errors, floor)


def transient_n(params: ChainParams) -> float:
    """Smallest N at which the subleading boundary term is below 10^-3 of the leading one."""
    signs = classify_topology(params)
    if signs.g is None or signs.g == 0:
        return 2.0
    return 1.0 + TRANSIENT_DECADES * math.log(10.0) / (2.0 * abs(signs.g))


def fit_upper_bound(params: ChainParams) -> float:
    """|E| ceiling of the adjusted fit window."""
    try:
        if classify_topology(params).cls == "PG":
            pred = analytic.saturation_prediction(params)
            return min(FIT_E_CEIL * 100, SATURATION_FRACTION * pred.E_c)
    except (NtosError, ZeroDivisionError):
        pass
    return FIT_E_CEIL


def fit_linear_regime(sweep: SweepResult, rule: str = "adjusted") -> FitResult:
    """Least-squares line through (N, ln|E_min|) over the qualifying points.

    ``rule="literal"`` keeps points with 1e-12 < |E_min| < 1e-3.  ``rule="adjusted"``
    keeps the 1e-12 floor but replaces the 1e-3 ceiling with
    0.1 E_c (predicted) in the point-gap phase and requires N past the
    transient set by g.
    """
    n = sweep.n
    e = sweep.e_min
    mod = np.abs(e)
    with np.errstate(divide="ignore", invalid="ignore"):
        real_ok = np.abs(e.imag) < FIT_IM_RTOL * mod
    if rule == "literal":
        keep = real_ok & (mod > FIT_E_FLOOR) & (mod < FIT_E_CEIL)
    elif rule == "adjusted":
        keep = real_ok & (mod > FIT_E_FLOOR) & (mod < fit_upper_bound(sweep.params))
        keep &= n >= transient_n(sweep.params)
    else:
        raise ValueError(f"unknown rule {rule!r}")
    if keep.sum() < FIT_MIN_POINTS:
        raise InsufficientDataError(
            f"only {int(keep.sum())} qualifying points, need {FIT_MIN_POINTS}"
        )
    x = n[keep].astype(float)
    y = np.log(mod[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(float(slope), float(intercept), (int(x[0]), int(x[-1])), r2, int(keep.sum()), rule)


def detect_saturation(sweep: SweepResult, im_tol: float = SAT_IM_TOL) -> NumericSaturation:
    """First N at which E_min acquires an imaginary part (growth stall as fallback)."""
    n = sweep.n
    e = sweep.e_min
    mod = np.abs(e)
    onset = np.flatnonzero(np.abs(e.imag) > im_tol * mod)
    if onset.size and onset[0] > 0:
        k = onset[0]
        return NumericSaturation(True, int(n[k]), float(mod[k - 1]), "imaginary_onset", float(mod[k]), im_tol)
    law = predicted_law(sweep.params)
    if law is not None and law.slope > 0:
        start = transient_n(sweep.params)
        logs = np.log(mod)
        for k in range(1, n.size):
            if n[k] < start or n[k] - n[k - 1] != 1:
                continue
            if logs[k] - logs[k - 1] < STALL_FRACTION * law.slope:
                return NumericSaturation(True, int(n[k]), float(mod[k - 1]), "growth_stall", float(mod[k]), im_tol)
    return NumericSaturation(False, None, None, "none", None, im_tol)


# -- phase rasters ------------------------------------------------------------


def parse_axis(spec):
    """(lo, hi, count) -> evenly spaced axis including both ends."""
    lo, hi, count = spec
    count = int(count)
    if count < 2:
        raise PreconditionError("an axis needs at least 2 points")
    return np.linspace(float(lo), float(hi), count)


def tube_distance(t1, t2, gamma, red_lines=True):
    """Distance (coupling units) to the nearest phase boundary or red line."""
    d = min(abs(abs(t2) - abs(t1 + gamma)), abs(abs(t2) - abs(t1 - gamma)))
    if red_lines:
        d = min(d, abs(abs(t1) - math.sqrt(t2 * t2 + gamma * gamma)))
        d = min(d, abs(abs(t2) - math.sqrt(t1 * t1 + gamma * gamma)))
    return d


PHASE_QUANTITIES = ("winding", "slope", "intercept", "N_c", "ln_E_c")


def _cell_value(quantity, params, sat_form):
    if quantity in ("slope", "intercept"):
        law = analytic.linear_law(params)
        return law.slope if quantity == "slope" else law.intercept
    if classify_topology(params).cls != "PG":
        return None
    pred = analytic.saturation_prediction(params, form=sat_form)
    return pred.N_c if quantity == "N_c" else math.log(pred.E_c)


def phase_grid(
    t1_range,
    t2_range,
    gamma: float,
    quantity: str,
    lambdas=(1e-5, 1e-5),
    tube: float = TUBE_HALF_WIDTH,
    resolution: int = 256,
    sat_form: str = "printed",
) -> PhaseGrid:
    """Evaluate one quantity cell by cell over a (t1, t2) raster."""
    if quantity not in PHASE_QUANTITIES:
        raise PreconditionError(f"quantity must be one of {PHASE_QUANTITIES}")
    t1_axis = parse_axis(t1_range)
    t2_axis = parse_axis(t2_range)
    if t1_axis.size * t2_axis.size > 512 * 512:
        raise PreconditionError("grid larger than 512 x 512")
    shape = (t1_axis.size, t2_axis.size)
    values = np.full(shape, np.nan)
    mask = np.zeros(shape, dtype=np.uint8)
    lam_l, lam_r = lambdas
    if quantity == "winding":
        w, status = kernels.winding_grid(t1_axis, t2_axis, gamma, resolution)
        for i, t1 in enumerate(t1_axis):
            for j, t2 in enumerate(t2_axis):
                if tube_distance(t1, t2, gamma, red_lines=False) < tube:
                    mask[i, j] = MASK_TUBE
                elif status[i, j] != kernels.STATUS_OK:
                    mask[i, j] = MASK_GAP
                else:
                    values[i, j] = w[i, j]
    else:
        for i, t1 in enumerate(t1_axis):
            for j, t2 in enumerate(t2_axis):
                if abs(t1) <= abs(gamma) or t2 == 0:
                    mask[i, j] = MASK_DOMAIN
                    continue
                if tube_distance(t1, t2, gamma) < tube:
                    mask[i, j] = MASK_TUBE
                    continue
                params = ChainParams(t1, t2, gamma, lam_l, lam_r)
                try:
                    v = _cell_value(quantity, params, sat_form)
                except (NtosError, ZeroDivisionError):
                    mask[i, j] = MASK_FORMULA
                    continue
                if v is None:
                    mask[i, j] = MASK_NOT_APPLICABLE
                else:
                    values[i, j] = v
    meta = {
        "gamma": float(gamma),
        "lambda_l": float(lam_l),
        "lambda_r": float(lam_r),
        "tube": float(tube),
        "resolution": int(resolution),
        "saturation_form": sat_form,
        "mask_codes": "0 ok,1 tube,2 domain,3 formula,4 not applicable,5 gap",
    }
    return PhaseGrid(t1_axis, t2_axis, quantity, values, mask, meta)


def winding_agreement(grid: PhaseGrid):
    """(matches, unmasked) comparing a winding raster with the inequality rule."""
    if grid.quantity != "winding":
        raise PreconditionError("needs a winding raster")
    gamma = grid.meta["gamma"]
    matches = total = 0
    for i, t1 in enumerate(grid.t1_axis):
        for j, t2 in enumerate(grid.t2_axis):
            if grid.mask[i, j] != MASK_OK:
                continue
            total += 1
            matches += int(grid.values[i, j] == inequality_winding(t1, t2, gamma))
    return matches, total


# -- bulk convergence ---------------------------------------------------------


def bulk_eigenvalues(record: SpectrumRecord):
    """Eigenvalues without E_min and, when complex, its conjugate partner."""
    ev = np.asarray(record.eigenvalues, dtype=complex)
    keep = np.ones(ev.size, dtype=bool)
    k = int(np.argmin(np.abs(ev - record.e_min)))
    keep[k] = False
    em = ev[k]
    if abs(em.imag) > 1e-12 * max(abs(em), 1e-300):
        d = np.abs(ev - np.conj(em))
        d[~keep] = np.inf
        keep[int(np.argmin(d))] = False
    return ev[keep]


def curve_distance(points, curve):
    """Directed max-min distance from ``points`` to the sampled ``curve``."""
    pts = np.asarray(points, dtype=complex)
    c = np.asarray(curve, dtype=complex)
    return float(np.max(np.min(np.abs(pts[:, None] - c[None, :]), axis=1)))


def bulk_convergence(params: ChainParams, n_list, target: str = "PBC", samples: int = CURVE_SAMPLES):
    """Directed distance of the bulk spectrum to the PBC or GBZ curve for each N."""
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise PreconditionError("N_list must be ascending")
    curve = analytic.bulk_curves(params, target, samples).samples
    out = []
    for n in n_list:
        rec = spectrum_record(params, n)
        out.append(curve_distance(bulk_eigenvalues(rec), curve))
    return out


# -- unidirectional comparison ------------------------------------------------


def unidirectional_comparison(t1, t2, gamma, lam, n_min=2, n_max=80):
    """Fitted and predicted slopes for lambda_R = 0 and for lambda_L = 0."""
    rows = []
    for zeroed, lams in (("R", (lam, 0.0)), ("L", (0.0, lam))):
        params = ChainParams(t1, t2, gamma, *lams)
        law = analytic.unidirectional_law(params, zeroed)
        sweep = nsweep(params, n_min, n_max)
        try:
            fit = fit_linear_regime(sweep)
            fitted, used = fit.slope, fit.points_used
        except InsufficientDataError:
            fitted, used = math.nan, 0
        rows.append({"zeroed_side": zeroed, "pred_slope": law.slope, "fit_slope": fitted, "points_used": used})
    return rows

