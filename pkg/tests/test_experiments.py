import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ntoslab import experiments
from ntoslab.errors import InsufficientDataError, PreconditionError
from ntoslab.model import ChainParams


@pytest.fixture(scope="module")
def fig_sweep():
    return experiments.nsweep(ChainParams(2.0, 1.5, 1.0, 1e-7, 1e-7), 2, 60)


def test_nsweep_bounds():
    p = ChainParams(2.0, 1.5, 1.0, 1e-7, 1e-7)
    with pytest.raises(PreconditionError):
        experiments.nsweep(p, 1, 10)
    with pytest.raises(PreconditionError):
        experiments.nsweep(p, 2, experiments.MAX_SWEEP_N + 1)


def test_sweep_records_and_prediction(fig_sweep):
    assert list(fig_sweep.n) == list(range(2, 61))
    assert not fig_sweep.errors
    assert fig_sweep.record(30).N == 30
    assert fig_sweep.predictions.shape == (59,)


def test_fit_matches_prediction(fig_sweep):
    fit = experiments.fit_linear_regime(fig_sweep)
    law = experiments.predicted_law(fig_sweep.params)
    assert_allclose(fit.slope, law.slope, rtol=0.02)
    assert fit.r2 > 0.999
    assert fit.window[0] >= experiments.transient_n(fig_sweep.params)


def test_detect_saturation(fig_sweep):
    sat = experiments.detect_saturation(fig_sweep)
    assert sat.saturated and sat.criterion == "imaginary_onset"
    assert sat.N_c_num == 38


def test_no_saturation_in_lg():
    sweep = experiments.nsweep(ChainParams(2.8, 1.5, 1.0, 1e-5, 1e-5), 2, 40)
    assert not experiments.detect_saturation(sweep).saturated


def test_literal_window_starves_at_large_lambda():
    sweep = experiments.nsweep(ChainParams(2.5, 2.8, 1.0, 1e-3, 1e-3), 2, 40)
    with pytest.raises(InsufficientDataError):
        experiments.fit_linear_regime(sweep, rule="literal")
    assert experiments.fit_linear_regime(sweep).points_used >= experiments.FIT_MIN_POINTS


def test_transient_n(pg_params):
    g = 0.5 * math.log(1.5 / 3.5)
    assert_allclose(experiments.transient_n(pg_params), 1 + 3 * math.log(10) / (2 * abs(g)))


def test_tube_distance():
    assert experiments.tube_distance(2.0, 3.0, 1.0) == 0.0
    assert_allclose(experiments.tube_distance(2.0, 2.5, 1.0, red_lines=False), 0.5)


def test_phase_grid_winding_agrees():
    grid = experiments.phase_grid((-4, 4, 41), (-4, 4, 41), 1.0, "winding")
    matches, total = experiments.winding_agreement(grid)
    assert total > 0 and matches == total
    assert set(np.unique(grid.mask)) <= {experiments.MASK_OK, experiments.MASK_TUBE, experiments.MASK_GAP}


def test_phase_grid_slope_masks():
    grid = experiments.phase_grid((-4, 4, 33), (-4, 4, 33), 1.0, "slope")
    ok = grid.mask == experiments.MASK_OK
    assert np.all(np.isfinite(grid.values[ok]))
    assert np.all(np.isnan(grid.values[~ok]))
    # |t1| <= |gamma| is outside the domain
    i = int(np.argmin(np.abs(grid.t1_axis)))
    assert np.all(grid.mask[i] == experiments.MASK_DOMAIN)


def test_phase_grid_rejects_unknown_quantity():
    with pytest.raises(PreconditionError):
        experiments.phase_grid((-1, 1, 3), (-1, 1, 3), 1.0, "entropy")


def test_bulk_eigenvalues_drop_emin(pg_params):
    from ntoslab.eig import spectrum_record

    rec = spectrum_record(pg_params, 8)
    bulk = experiments.bulk_eigenvalues(rec)
    assert bulk.size == rec.eigenvalues.size - 1
    assert rec.e_min not in bulk


def test_bulk_convergence_pbc_decreases():
    d = experiments.bulk_convergence(ChainParams(2.0, 1.5, 1.0, 1e-7, 1e-7), [20, 40, 60], "PBC", samples=1024)
    assert d[0] > d[1] > d[2]


def test_unidirectional_comparison():
    rows = experiments.unidirectional_comparison(2.5, 2.8, 1.0, 1e-5)
    by_side = {r["zeroed_side"]: r for r in rows}
    assert_allclose(by_side["R"]["fit_slope"], by_side["R"]["pred_slope"], rtol=0.02)
    assert_allclose(by_side["L"]["fit_slope"], by_side["L"]["pred_slope"], rtol=0.02)
    assert by_side["R"]["pred_slope"] > 0 > by_side["L"]["pred_slope"]


def test_lg_sweep_stays_real_and_shrinks():
    sweep = experiments.nsweep(ChainParams(1.5, 2.8, 1.0, 1e-7, 1e-7), 2, 60)
    mod = np.abs(sweep.e_min)
    assert np.all(sweep.e_min.imag == 0)
    assert np.all(np.diff(mod) < 0)
    assert not experiments.detect_saturation(sweep).saturated


def test_lg_never_saturates_down_to_floor():
    sweep = experiments.nsweep(ChainParams(2.8, 1.5, 1.0, 1e-3, 1e-3), 2, 120)
    assert not experiments.detect_saturation(sweep).saturated


def test_slope_sign_follows_phase():
    axis = (-4, 4, 41)
    slope = experiments.phase_grid(axis, axis, 1.0, "slope")
    wind = experiments.phase_grid(axis, axis, 1.0, "winding")
    ok = (slope.mask == experiments.MASK_OK) & (wind.mask == experiments.MASK_OK)
    assert np.all(slope.values[ok & (wind.values != 0)] > 0)
    assert np.all(slope.values[ok & (wind.values == 0)] < 0)


def test_only_left_coupling_tends_to_pbc():
    d = experiments.bulk_convergence(ChainParams(2.5, 2.8, 1.0, 1e-5, 0.0), [20, 40, 60], "PBC")
    assert d[0] > d[1] > d[2]
