import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semireg.errors import DomainError
from semireg.specfun import (
    AsymptoticCoefficients,
    bessel_i_crossover,
    bessel_j,
    gamma,
    hermite_function,
    hermite_function_table,
    laguerre_function,
    laguerre_function_table,
    log_modified_bessel_i,
    modified_bessel_i,
)


def test_gamma_known_values():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma(5.0) == pytest.approx(24.0, rel=1e-14)
    assert gamma(1.0) == pytest.approx(1.0, rel=1e-14)


def test_gamma_rejects_nonpositive():
    with pytest.raises(DomainError):
        gamma(0.0)
    with pytest.raises(DomainError):
        gamma(-1.5)


@given(st.floats(min_value=0.1, max_value=20.0))
def test_gamma_functional_equation(x):
    assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-12)


# ground state value, pi^(-1/4)
GROUND_AT_ZERO = 0.7511255444649425


def test_hermite_ground_state():
    assert hermite_function(0, 0.0) == pytest.approx(GROUND_AT_ZERO, abs=1e-15)
    # even function with Gaussian profile
    assert hermite_function(0, 1.3) == pytest.approx(
        GROUND_AT_ZERO * math.exp(-1.3 * 1.3 / 2.0), rel=1e-14
    )


def test_hermite_first_mode():
    # k=1 mode is sqrt(2) x times the ground state
    for x in (0.4, -1.1, 2.5):
        assert hermite_function(1, x) == pytest.approx(
            math.sqrt(2.0) * x * hermite_function(0, x), rel=1e-13
        )


def test_hermite_orthonormal_gram():
    # Gauss-Hermite nodes integrate products of the first 21 modes exactly
    nodes, weights = np.polynomial.hermite.hermgauss(64)
    table = hermite_function_table(20, nodes)  # (21, 64)
    rescaled = table * np.exp(nodes * nodes / 2.0)[None, :]
    gram = (rescaled * weights[None, :]) @ rescaled.T
    assert np.max(np.abs(gram - np.eye(21))) < 1e-9


def test_hermite_index_cap():
    from semireg.errors import CapabilityError

    with pytest.raises(CapabilityError):
        hermite_function_table(500, 0.0)
    # explicit cap override allows deep tables
    table = hermite_function_table(500, 0.0, index_cap=600)
    assert table.shape[0] == 501


def test_laguerre_ground_state_closed_form():
    # alpha=1/2: ground state is sqrt(2) sqrt(x) e^{-x^2/2}
    for x in (0.3, 1.0, 2.2):
        expect = math.sqrt(2.0) * math.sqrt(x) * math.exp(-x * x / 2.0)
        assert laguerre_function(0, 0.5, x) == pytest.approx(expect, rel=1e-13)


def test_laguerre_orthonormal_gram():
    import scipy.special

    alpha = 0.8
    nu = alpha - 0.5
    # substitution u = x^2 turns the weight into u^nu e^{-u}
    u, w = scipy.special.roots_genlaguerre(64, nu)
    x = np.sqrt(u)
    table = laguerre_function_table(20, alpha, x)
    # divide out x^alpha e^{-x^2/2} so only the polynomial part remains
    poly = table / (x[None, :] ** alpha * np.exp(-u[None, :] / 2.0))
    gram = 0.5 * (poly * w[None, :]) @ poly.T
    assert np.max(np.abs(gram - np.eye(21))) < 1e-9


def test_laguerre_positive_and_decaying():
    vals = laguerre_function_table(0, 1.3, np.array([0.5, 1.0, 6.0]))[0]
    assert np.all(vals > 0.0)
    assert vals[2] < vals[1]


HALF_I_RANGE = np.concatenate(
    [np.geomspace(0.01, 11.9, 40), np.geomspace(12.1, 50.0, 20)]
)


def test_modified_bessel_half_integer_closed_form():
    # I_{1/2}(z) = sqrt(2/(pi z)) sinh z across both evaluation regimes
    z = HALF_I_RANGE
    expect = np.sqrt(2.0 / (math.pi * z)) * np.sinh(z)
    got = modified_bessel_i(0.5, z)
    assert np.max(np.abs(got / expect - 1.0)) < 1e-9


def test_modified_bessel_three_halves_closed_form():
    z = HALF_I_RANGE
    expect = np.sqrt(2.0 / (math.pi * z)) * (np.cosh(z) - np.sinh(z) / z)
    got = modified_bessel_i(1.5, z)
    assert np.max(np.abs(got / expect - 1.0)) < 1e-9


def test_bessel_j_half_integer_closed_form():
    z = np.geomspace(0.01, 50.0, 60)
    expect = np.sqrt(2.0 / (math.pi * z)) * np.sin(z)
    got = bessel_j(0.5, z)
    assert np.max(np.abs(got - expect)) / np.max(np.abs(expect)) < 1e-9
    mask = np.abs(np.sin(z)) > 0.1
    assert np.max(np.abs(got[mask] / expect[mask] - 1.0)) < 1e-9


def test_bessel_j_rejects_low_order():
    with pytest.raises(DomainError):
        bessel_j(-0.7, 1.0)


def test_modified_bessel_small_z_series_regime():
    # ascending series: I_nu(z) ~ (z/2)^nu / Gamma(nu+1) * (1 + z^2/(4(nu+1)))
    nu = 0.8
    for z in (1e-3, 1e-2):
        lead = (z / 2.0) ** nu / gamma(nu + 1.0)
        expect = lead * (1.0 + z * z / (4.0 * (nu + 1.0)))
        assert modified_bessel_i(nu, z) == pytest.approx(expect, rel=1e-8)


def test_modified_bessel_large_z_asymptotic_regime():
    # leading asymptotic e^z/sqrt(2 pi z) with the first correction term,
    # normalized against (2z)^k
    nu = 0.8
    co = AsymptoticCoefficients.compute(nu, 3)
    for z in (60.0, 200.0):
        lead = math.exp(z) / math.sqrt(2.0 * math.pi * z)
        expect = lead * (1.0 - co.values[1] / (2.0 * z) + co.values[2] / (2.0 * z) ** 2)
        assert modified_bessel_i(nu, z) == pytest.approx(expect, rel=1e-6)


def test_asymptotic_coefficients_vanish_for_half_integer():
    co = AsymptoticCoefficients.compute(0.5, 4)
    assert co.values[0] == 1.0
    assert all(abs(v) < 1e-15 for v in co.values[1:])


def test_crossover_location():
    assert bessel_i_crossover(0.5) == 12.0
    assert bessel_i_crossover(4.0) == 32.0


def test_modified_bessel_scipy_cross_check():
    import scipy.special

    rng = np.random.default_rng(7)
    nu = rng.uniform(0.1, 3.0, 50)
    z = rng.uniform(0.05, 40.0, 50)
    for n, zz in zip(nu, z):
        assert modified_bessel_i(n, zz) == pytest.approx(
            float(scipy.special.iv(n, zz)), rel=1e-9
        )


def test_log_modified_bessel_consistency():
    nu = 1.3
    for z in (0.5, 5.0, 30.0):
        assert log_modified_bessel_i(nu, z) == pytest.approx(
            math.log(modified_bessel_i(nu, z)), abs=1e-11
        )


def test_log_modified_bessel_huge_argument():
    # far beyond floating-point overflow of I itself
    val = log_modified_bessel_i(0.9, 1.0e6)
    lead = 1.0e6 - 0.5 * math.log(2.0 * math.pi * 1.0e6)
    assert val == pytest.approx(lead, rel=1e-10)


@settings(max_examples=40)
@given(st.floats(min_value=0.1, max_value=3.0), st.floats(min_value=0.05, max_value=45.0))
def test_modified_bessel_positive(nu, z):
    assert modified_bessel_i(nu, z) > 0.0
