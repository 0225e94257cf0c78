import numpy as np
import pytest
from numpy.testing import assert_allclose

from ntoslab import eig
from ntoslab.errors import NoRootError, PreconditionError
from ntoslab.model import ChainParams, build_hamiltonian


def test_dense_emin_matches_root(pg_params):
    rec = eig.spectrum_record(pg_params, 10)
    assert rec.e_min_source == "dense_eig"
    assert_allclose(rec.e_min.real, -2.5080272356557267e-05, rtol=1e-9)
    assert rec.max_residual < eig.RESIDUAL_TOL
    assert_allclose(eig.emin_root(pg_params, 10), rec.e_min.real, rtol=1e-9)


def test_below_floor_uses_certified_root(lg_params):
    rec = eig.spectrum_record(lg_params, 60)
    assert rec.e_min_source == "consistency_root"
    assert rec.root_residual < 1e-40
    assert_allclose(rec.e_min.real, -1.4291014734667032e-10, rtol=1e-10)


def test_root_far_below_double_floor():
    res = eig.emin_root_certified(ChainParams(2.8, 1.5, 1.0, 1e-9, 1e-9), 80)
    assert_allclose(res.E, -3.727675901211698e-16, rtol=1e-12)
    lo, hi = sorted(res.bracket)
    assert lo <= res.E <= hi


def test_no_root_in_tiny_bracket():
    with pytest.raises(NoRootError):
        eig.emin_root_certified(ChainParams(2.5, 2.8, 1.0, 1e-5, 1e-5), 10, search_radius=1e-9)


def test_select_emin_tie_break():
    vals = np.array([1e-3, -1e-3, 1e-3j, -1e-3j, 2.0])
    assert eig.select_emin(vals) == 1e-3


@pytest.mark.parametrize("n", [3, 6, 11])
def test_charpoly_proportional_to_determinant(pg_params, n):
    vals = np.linalg.eigvals(build_hamiltonian(pg_params, n))
    energies = np.array([0.3, 0.7, 1.1, 1.9])
    ratio = eig.charpoly(pg_params, n, energies) / np.prod(energies[:, None] - vals[None, :], axis=1).real
    assert_allclose(ratio, ratio[0], rtol=1e-9)


def test_charpoly_mp_agrees_with_double(pg_params):
    e = 0.37
    assert_allclose(float(eig.charpoly_mp(pg_params, 9, e)), eig.charpoly(pg_params, 9, [e])[0], rtol=1e-12)


def test_consistency_vanishes_at_eigenvalues(pg_params):
    n = 12
    vals = eig.eig_dense(build_hamiltonian(pg_params, n))
    for e in vals[np.abs(vals) < 1.0]:
        assert abs(eig.consistency_residual(pg_params, n, e, "full")) < 1e-9
        assert abs(eig.consistency_residual(pg_params, n, e, "trig")) < 1e-9


def test_trig_form_is_rescaled_full_form(lg_params):
    for e in (0.2 + 0.05j, 0.6 - 0.3j):
        full = eig.consistency_residual(lg_params, 9, e, "full", normalize=False)
        trig = eig.consistency_residual(lg_params, 9, e, "trig", normalize=False)
        assert_allclose(trig, eig.trig_prefactor(lg_params, 9, e) * full, rtol=1e-10)


def test_reconstructed_eigenvector_matches_dense(pg_params):
    n = 12
    h = build_hamiltonian(pg_params, n)
    vals, vecs = np.linalg.eig(h)
    k = int(np.argmin(np.abs(vals)))
    psi = eig.reconstruct_eigenvector(pg_params, n, vals[k])
    overlap = abs(np.vdot(psi, vecs[:, k])) / np.linalg.norm(vecs[:, k])
    assert_allclose(overlap, 1.0, atol=1e-8)
    r1, r2 = eig.boundary_residuals(pg_params, n, vals[k], psi)
    assert abs(r1) < 1e-10 and abs(r2) < 1e-10


def test_zero_mode_vector_at_vanishing_coupling():
    p = ChainParams(2.0, 1.5, 1.0)
    n = 8
    psi = eig.reconstruct_eigenvector(p, n, 0.0)
    h = build_hamiltonian(p, n)
    assert np.linalg.norm(h @ psi) < 1e-14
    assert np.all(psi[1::2] == 0)


def test_delta_turning_point_near_saturation(pg_params):
    dmap = eig.delta_map(pg_params, np.arange(2, 120, 0.25), np.linspace(-0.4, 0.4, 321), modulus=True)
    e_turn, n_turn = eig.delta_turning_point(dmap)
    assert_allclose(e_turn, 0.1425, atol=1e-9)
    assert_allclose(n_turn, 45.75, atol=1e-9)


def test_delta_map_requires_lt_branch(lg_params):
    with pytest.raises(PreconditionError):
        eig.delta_map(lg_params, [2, 3], [0.1])


def test_two_cell_spectrum():
    vals = np.sort_complex(eig.eig_dense(build_hamiltonian(ChainParams(2.0, 1.5, 1.0), 2)))
    assert_allclose(vals, [-np.sqrt(5.25), 0.0, np.sqrt(5.25)], atol=1e-14)


@pytest.mark.parametrize("n", [5, 17, 40])
def test_trace_zero_and_exact_zero_mode(n):
    h = build_hamiltonian(ChainParams(2.8, 1.5, 1.0), n)
    vals = eig.eig_dense(h)
    assert abs(vals.sum()) < 1e-10
    assert np.min(np.abs(vals)) < 1e-12 * np.linalg.norm(h)
    assert eig.emin_root(ChainParams(2.8, 1.5, 1.0), n) == 0


def test_select_emin_prefers_upper_half_plane():
    assert eig.select_emin(np.array([0.1 + 0.2j, 0.1 - 0.2j, 3.0])) == 0.1 + 0.2j
    assert eig.select_emin(np.array([0.0, 2.29, -2.29])) == 0.0


def test_consistency_far_from_spectrum(pg_params):
    assert abs(eig.consistency_residual(pg_params, 10, 0.05 + 0.4j)) > 1e-3
