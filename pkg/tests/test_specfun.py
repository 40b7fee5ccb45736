import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from fermi_trap.exceptions import DomainError
from fermi_trap.lib.specfun import (
    bessel_i,
    dirichlet_kernel,
    edge_hypergeometric,
    exp_integral_e1_scaled,
    exp_integral_ei,
    oscillator_wavefunction,
    oscillator_wavefunctions,
)


def _hermite_function(n: int, x: np.ndarray) -> np.ndarray:
    norm = math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))
    return special.eval_hermite(n, x) * np.exp(-0.5 * x * x) / norm


def test_wavefunctions_match_hermite_functions():
    x = np.linspace(-6.0, 6.0, 241)
    psi = oscillator_wavefunctions(20, x)
    for n in range(21):
        np.testing.assert_allclose(psi[n], _hermite_function(n, x), rtol=1e-10, atol=1e-13)


def test_wavefunctions_are_orthonormal():
    x = np.linspace(-14.0, 14.0, 8001)
    psi = oscillator_wavefunctions(40, x)
    # the tails vanish at the ends, so the trapezoid rule is a plain sum
    overlaps = psi @ psi.T * (x[1] - x[0])
    np.testing.assert_allclose(overlaps, np.eye(41), atol=1e-10)


@pytest.mark.parametrize("n", [0, 1, 7, 30])
def test_wavefunction_parity(n):
    x = np.linspace(0.0, 8.0, 33)
    np.testing.assert_allclose(
        oscillator_wavefunction(n, -x), (-1) ** n * oscillator_wavefunction(n, x), atol=1e-15
    )


def test_high_wavefunctions_stay_finite():
    psi = oscillator_wavefunctions(400, np.array([0.0, 10.0, 30.0]))
    assert np.all(np.isfinite(psi))


def test_wavefunctions_are_bounded():
    psi = oscillator_wavefunctions(100, np.linspace(-25.0, 25.0, 5001))
    assert np.max(np.abs(psi)) <= 1.0


def test_wavefunction_scalar_input():
    assert oscillator_wavefunction(0, 0.0) == pytest.approx(math.pi**-0.25)


def test_wavefunctions_reject_negative_index():
    with pytest.raises(DomainError):
        oscillator_wavefunctions(-1, 0.0)


@given(
    st.integers(min_value=0, max_value=40),
    st.floats(min_value=-200.0, max_value=200.0, allow_nan=False),
)
def test_bessel_matches_scipy(p, x):
    assert bessel_i(p, x) == pytest.approx(special.iv(p, x), rel=1e-10, abs=1e-300)


def test_bessel_on_arrays_across_both_methods():
    x = np.linspace(-40.0, 40.0, 161)
    for p in (0, 1, 2, 5, 16):
        np.testing.assert_allclose(bessel_i(p, x), special.iv(p, x), rtol=1e-10, atol=1e-300)


def test_bessel_parity():
    assert bessel_i(3, -2.0) == pytest.approx(-bessel_i(3, 2.0))
    assert bessel_i(4, -2.0) == pytest.approx(bessel_i(4, 2.0))


def test_bessel_at_zero():
    assert bessel_i(0, 0.0) == 1.0
    assert bessel_i(2, 0.0) == 0.0


@pytest.mark.parametrize("p, x", [(-1, 1.0), (0, 200.5), (2, -300.0)])
def test_bessel_rejects_out_of_domain(p, x):
    with pytest.raises(DomainError):
        bessel_i(p, x)


@given(st.floats(min_value=-60.0, max_value=-1e-4))
def test_ei_matches_scipy(x):
    assert exp_integral_ei(x) == pytest.approx(special.expi(x), rel=1e-10)


@pytest.mark.parametrize("x", [1.999999, 2.0, 2.000001])
def test_ei_is_continuous_across_the_method_switch(x):
    assert exp_integral_ei(-x) == pytest.approx(special.expi(-x), rel=1e-12)


@given(st.floats(min_value=1e-4, max_value=600.0))
def test_scaled_e1_matches_scipy(x):
    assert exp_integral_e1_scaled(x) == pytest.approx(math.exp(x) * special.exp1(x), rel=1e-10)


def test_scaled_e1_large_argument():
    x = 1e6
    assert exp_integral_e1_scaled(x) == pytest.approx(1.0 / x * (1.0 - 1.0 / x), rel=1e-11)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_scaled_e1_rejects_non_positive_argument(x):
    with pytest.raises(DomainError):
        exp_integral_e1_scaled(x)


@pytest.mark.parametrize("x", [0.0, 1.0])
def test_ei_rejects_non_negative_argument(x):
    with pytest.raises(DomainError):
        exp_integral_ei(x)


@pytest.mark.parametrize("g, w", [(0.0, 5.0), (1.3, 0.0)])
def test_edge_hypergeometric_trivial_cases(g, w):
    assert edge_hypergeometric(g, w) == 1.0


@pytest.mark.parametrize("w", [0.01, 0.5, 3.0, 400.0, 1e6])
def test_edge_hypergeometric_arctan_case(w):
    root = math.sqrt(w)
    assert edge_hypergeometric(1.0, w) == pytest.approx(math.atan(root) / root, rel=1e-10)


@given(
    st.floats(min_value=0.05, max_value=4.0),
    st.floats(min_value=0.01, max_value=200.0),
)
def test_edge_hypergeometric_matches_gauss_function(g, w):
    assert edge_hypergeometric(g, w) == pytest.approx(special.hyp2f1(g, 0.5, 1.5, -w), rel=1e-8)


def test_edge_hypergeometric_decreases_with_g():
    values = [edge_hypergeometric(g, 50.0) for g in (0.5, 1.0, 1.5, 2.0)]
    assert values == sorted(values, reverse=True)


def test_edge_hypergeometric_rejects_negative_inputs():
    with pytest.raises(DomainError):
        edge_hypergeometric(-0.1, 1.0)
    with pytest.raises(DomainError):
        edge_hypergeometric(1.0, -1.0)


@pytest.mark.parametrize("m", [14, 15, 20, 37])
def test_dirichlet_kernel_above_edge_is_cosine_sum(m):
    s = np.linspace(0.01, 3.1, 57)
    expected = 0.5 + sum(np.cos(j * s) for j in range(1, m - 14 + 1))
    np.testing.assert_allclose(dirichlet_kernel(m, 14, s), expected, atol=1e-12)


@pytest.mark.parametrize("m", [0, 6, 13])
def test_dirichlet_kernel_below_edge_is_negative_cosine_sum(m):
    s = np.linspace(-3.1, -0.01, 57)
    expected = -(0.5 + sum(np.cos(j * s) for j in range(1, 14 - m)))
    np.testing.assert_allclose(dirichlet_kernel(m, 14, s), expected, atol=1e-12)


@pytest.mark.parametrize("m", [0, 13, 14, 60])
def test_dirichlet_kernel_is_continuous_at_zero(m):
    a = m + 0.5 - 14
    assert dirichlet_kernel(m, 14, 0.0) == pytest.approx(a)
    assert dirichlet_kernel(m, 14, 1e-9) == pytest.approx(a, rel=1e-12)
    # the Taylor branch and the direct quotient agree where both are accurate
    assert dirichlet_kernel(m, 14, 1.9e-6) == pytest.approx(
        math.sin(a * 1.9e-6) / (2.0 * math.sin(0.95e-6)), rel=1e-9
    )
