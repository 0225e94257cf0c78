import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ntoslab.errors import (
    BoundaryDegenerateError,
    DegenerateBetaWarning,
    DomainWarning,
    InvalidParamsError,
    InvalidSizeError,
    PoleError,
)
from ntoslab.model import (
    ChainParams,
    a_index,
    b_index,
    beta_exact,
    beta_taylor,
    bloch_det,
    build_hamiltonian,
    check_size,
    chi_component,
    classify_topology,
    growth_exponent,
    inequality_winding,
    theta_of,
    winding_number,
)


def test_hamiltonian_small_chain_by_hand():
    p = ChainParams(2.0, 1.5, 1.0, 0.1, 0.3)
    a, b = 3.0, 1.0
    expected = np.array([
        [0, a, 0, 0, 0.3],
        [b, 0, 1.5, 0, 0],
        [0, 1.5, 0, a, 0],
        [0, 0, b, 0, 1.5],
        [0.1, 0, 0, 1.5, 0],
    ])
    assert_allclose(build_hamiltonian(p, 3), expected, atol=0)


def test_hamiltonian_shape_and_indices():
    h = build_hamiltonian(ChainParams(2.0, 1.5, 1.0), 7)
    assert h.shape == (13, 13)
    assert a_index(1) == 0 and b_index(1) == 1 and a_index(7) == 12


@pytest.mark.parametrize("n", [1, 0, -3, 2.5])
def test_check_size_rejects(n):
    with pytest.raises(InvalidSizeError):
        check_size(n)


def test_params_validation():
    with pytest.raises(InvalidParamsError):
        ChainParams(1.0, 2.0, 1.0)
    with pytest.raises(InvalidParamsError):
        ChainParams(math.nan, 2.0, 1.0)


def test_classification_examples(pg_params, lg_params):
    pg = classify_topology(pg_params)
    assert (pg.cls, pg.W, pg.s_t, pg.s_g) == ("PG", 1, -1, -1)
    lg = classify_topology(lg_params)
    assert (lg.cls, lg.W, lg.s_t) == ("LG", 0, 1)
    assert_allclose(pg.exp_g, math.sqrt(3 / 7), rtol=1e-15)


def test_inequality_boundary_raises():
    with pytest.raises(BoundaryDegenerateError):
        inequality_winding(2.0, 3.0, 1.0)


@pytest.mark.parametrize("t1,t2", [(2.5, 2.8), (2.8, 1.5), (-3.0, 1.2), (1.5, -2.9), (0.5, 3.0)])
def test_numeric_winding_matches_inequality(t1, t2):
    assert winding_number(ChainParams(t1, t2, 1.0)) == inequality_winding(t1, t2, 1.0)


def test_growth_exponent_outside_domain_warns():
    with pytest.warns(DomainWarning):
        assert growth_exponent(ChainParams(0.5, 2.0, 1.0)) is None


def test_bloch_det_closed_form():
    p = ChainParams(2.0, 1.5, 1.0)
    k = 0.7
    expected = (p.a + 1.5 * np.exp(-1j * k)) * (p.b + 1.5 * np.exp(1j * k))
    assert_allclose(bloch_det(p, k), expected, rtol=1e-14)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-3.5, 3.5), st.floats(0.3, 3.5), st.floats(-2.0, 2.0),
    st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False),
)
def test_beta_product_is_b_over_a(t1, t2, gamma, energy):
    if abs(abs(t1) - abs(gamma)) < 0.1:
        return
    p = ChainParams(t1, t2, gamma)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateBetaWarning)
        pair = beta_exact(p, energy)
    assert abs(pair.beta1) <= abs(pair.beta2)
    assert_allclose(pair.beta1 * pair.beta2, p.b / p.a, rtol=1e-12)


def test_beta_roots_solve_bulk_equation(pg_params):
    e = 0.3 + 0.1j
    pair = beta_exact(pg_params, e)
    a, b, t2 = pg_params.a, pg_params.b, pg_params.t2
    for beta in (pair.beta1, pair.beta2):
        lhs = (a + t2 / beta) * (b + t2 * beta)
        assert_allclose(lhs, e * e, rtol=1e-13)


def test_beta_taylor_exact_form_converges(pg_params):
    exact = beta_exact(pg_params, 0.1)
    approx = beta_taylor(pg_params, 0.1, form="exact")
    assert abs(approx[0] - exact.beta1) < 1e-4
    assert abs(approx[1] - exact.beta2) < 1e-4
    # error shrinks like E^4
    e1 = abs(beta_taylor(pg_params, 0.05)[0] - beta_exact(pg_params, 0.05).beta1)
    e2 = abs(beta_taylor(pg_params, 0.1)[0] - exact.beta1)
    assert 10 < e2 / e1 < 22


def test_beta_taylor_printed_value(pg_params):
    assert_allclose(beta_taylor(pg_params, 0.1, form="printed")[0].real, -0.5395752895752896, rtol=1e-12)


def test_theta_at_zero_energy():
    theta = theta_of(ChainParams(2.5, 2.8, 1.0), 0.0)
    assert_allclose(theta.real, math.pi, atol=1e-14)
    assert_allclose(theta.imag, -0.20050537887939257, rtol=1e-12)


def test_chi_pole():
    p = ChainParams(2.0, 1.5, 1.0)
    beta = -p.t2 / p.a
    with pytest.raises(PoleError):
        chi_component(p, 0.0, beta)


def test_two_cell_matrix():
    expected = [[0, 3, 0], [1, 0, 1.5], [0, 1.5, 0]]
    assert_allclose(build_hamiltonian(ChainParams(2.0, 1.5, 1.0), 2), expected, atol=0)
    assert build_hamiltonian(ChainParams(2.0, 1.5, 1.0, 0.2, 0.1), 10).shape == (19, 19)


@pytest.mark.parametrize(
    "args,cls,w,s_t,s_g",
    [
        ((2.0, 1.5, 1.0), "PG", 1, 1, -1),
        ((1.5, 2.8, 1.0), "LG", 0, None, None),
        ((2.5, 2.8, 1.0), "PG", 1, -1, -1),
        ((2.8, 1.5, 1.0), "LG", 0, 1, -1),
    ],
)
def test_classification_table(args, cls, w, s_t, s_g):
    signs = classify_topology(ChainParams(*args))
    assert (signs.cls, signs.W) == (cls, w)
    if s_t is not None:
        assert (signs.s_t, signs.s_g) == (s_t, s_g)


def test_no_winding_without_nonreciprocity():
    assert winding_number(ChainParams(2.0, 1.0, 0.0)) == 0


@pytest.mark.parametrize(
    "args,b1,b2",
    [((2.5, 2.8, 1.0), -1.5 / 2.8, -0.8), ((2.8, 1.5, 1.0), -1.5 / 3.8, -1.2)],
)
def test_beta_at_zero_energy(args, b1, b2):
    pair = beta_exact(ChainParams(*args), 0.0)
    assert_allclose([pair.beta1, pair.beta2], [b1, b2], rtol=1e-13)


def test_chi_is_eigenvector_ratio(pg_params):
    e = 0.1
    beta = beta_exact(pg_params, e).beta1
    chi = chi_component(pg_params, e, beta)
    assert chi_component(pg_params, 0.0, beta) == 0
    from ntoslab.model import bloch_hamiltonian

    v = np.array([1.0, chi])
    assert np.linalg.norm(bloch_hamiltonian(pg_params, beta) @ v - e * v) < 1e-13


def test_exp_minus_i_theta_at_zero():
    value = np.exp(-1j * theta_of(ChainParams(2.5, 2.8, 1.0), 0.0))
    assert_allclose(value, -(2.8 / math.sqrt(5.25)) ** -1, rtol=1e-12)
