import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from ahlab.errors import DisentanglementSingular
from ahlab.oracles import expm_taylor, expm_traceless
from ahlab.site import (DOWN, X, Y, char_exponent, char_factor, dagger, disentangled_char_matrix,
                        disentangled_product, free_phase, heisenberg_sigma, identity,
                        log_char_factor, sigma3, sigma_minus, sigma_plus, site_energy_operator,
                        site_unitary)

angles = st.floats(-1.4, 1.4)
phases = st.floats(0.0, 2 * math.pi)
small = st.floats(-3.0, 3.0)


def comm(a, b):
    return a @ b - b @ a


@given(phases)
def test_su2_relations(phi):
    sp, sm, s3 = sigma_plus(phi), sigma_minus(phi), sigma3()
    assert np.allclose(comm(s3, sp), 2 * sp, atol=1e-14)
    assert np.allclose(comm(s3, sm), -2 * sm, atol=1e-14)
    assert np.allclose(comm(sm, sp), -s3, atol=1e-14)


def test_unitary_examples():
    assert np.allclose(site_unitary(0.0, 0.7), identity())
    sigma1 = np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.allclose(site_unitary(math.pi / 2, 0.0), -1j * sigma1, atol=1e-15)


@given(st.floats(-math.pi, math.pi), phases)
def test_unitary_matches_expm(a, phi):
    u = site_unitary(a, phi)
    ref = expm(-1j * a * (sigma_plus(phi) + sigma_minus(phi)))
    assert np.max(np.abs(u - ref)) <= 1e-12
    assert np.max(np.abs(dagger(u) @ u - identity())) <= 1e-12
    assert abs(abs(np.linalg.det(u)) - 1) <= 1e-12


@given(small, small, small, small)
def test_in_house_expm_oracles(a, b, c, d):
    m = np.array([[a, b + 1j * c], [d - 1j * c, -a]], dtype=complex)
    assert np.allclose(expm_traceless(m), expm(m), atol=1e-11, rtol=1e-11)
    assert np.allclose(expm_taylor(m), expm(m), atol=1e-11, rtol=1e-11)


@given(angles, phases)
def test_disentanglement(a, phi):
    left, mid, right = disentangled_product(a, phi)
    assert np.max(np.abs(left @ mid @ right - site_unitary(a, phi))) <= 1e-12


def test_disentanglement_examples():
    for m in disentangled_product(0.0, 0.4):
        assert np.allclose(m, identity())
    left, mid, right = disentangled_product(0.3, 1.2)
    assert np.allclose(left @ mid @ right, site_unitary(0.3, 1.2), atol=1e-12)
    with pytest.raises(DisentanglementSingular):
        disentangled_product(math.pi / 2, 0.0)


@pytest.mark.parametrize("kind,op", [("plus", sigma_plus()), ("minus", sigma_minus()),
                                     ("three", sigma3())])
@given(a=st.floats(-math.pi, math.pi), phi=phases, wt=st.floats(0.0, 30.0))
def test_heisenberg_closed_form(kind, op, a, phi, wt):
    w = free_phase(wt) @ site_unitary(a, phi)
    assert np.max(np.abs(heisenberg_sigma(kind, a, phi, wt) - dagger(w) @ op @ w)) <= 1e-12


def test_heisenberg_examples():
    assert np.allclose(heisenberg_sigma("three", 0.0, 0.3), sigma3())
    wt = 0.8
    assert np.allclose(heisenberg_sigma("plus", 0.0, 0.3, wt),
                       np.exp(1j * (0.3 + wt)) * sigma_plus(0.3))
    quarter = heisenberg_sigma("three", math.pi / 4, 0.3)
    assert np.allclose(quarter, -1j * (sigma_plus(0.3) - sigma_minus(0.3)), atol=1e-15)
    with pytest.raises(ValueError):
        heisenberg_sigma("four", 0.1)


@given(st.floats(-math.pi, math.pi), phases, st.floats(0.0, 30.0))
def test_phase_stripping(a, phi, wt):
    f, u = free_phase(wt), site_unitary(a, phi)
    for kind, op, op_x, sgn in (("plus", sigma_plus(), sigma_plus(phi), 1),
                                ("minus", sigma_minus(), sigma_minus(phi), -1)):
        strip = np.exp(-sgn * 1j * (phi + wt))
        # free evolution: the relation holds literally
        assert np.allclose(dagger(f) @ op @ f * strip, op_x, atol=1e-12)
        # interacting: the stripped operator is the interaction-picture conjugate
        assert np.allclose(heisenberg_sigma(kind, a, phi, wt) * strip,
                           dagger(u) @ op_x @ u, atol=1e-12)


@given(angles, phases, st.floats(0.1, 3.0))
def test_energy_operator_square(a, phi, hw):
    s = site_energy_operator(a, phi, hw)
    assert np.allclose(s @ s, hw ** 2 * math.sin(a) ** 2 * identity(), atol=1e-13)
    assert np.allclose(s, dagger(s))
    # one site in the down state: mean hw sin^2, variance hw^2 sin^2 cos^2
    mean = s[DOWN, DOWN].real
    assert mean == pytest.approx(hw * math.sin(a) ** 2, abs=1e-14)


def test_char_factor_examples():
    assert char_factor(0.0, 0.0) == 1.0
    assert char_factor(0.0, 0.7) == pytest.approx(math.exp(-0.7), rel=1e-15)
    assert char_factor(0.9, 0.0) == pytest.approx(math.cosh(0.9), rel=1e-15)
    assert Y(0.9, 0.0) == pytest.approx(-math.log(math.cosh(0.9)), rel=1e-14)


@given(small, small, phases)
def test_char_factor_oracles(c1, c3, phi):
    m = expm(char_exponent(c1, c3, phi))[DOWN, DOWN]
    f = char_factor(c1, c3)
    assert abs(m.imag) <= 1e-12 * abs(m)
    assert f == pytest.approx(m.real, rel=1e-12)
    assert math.exp(log_char_factor(c1, c3)) == pytest.approx(f, rel=1e-12)
    assert char_factor(-c1, c3) == pytest.approx(f, rel=1e-14)
    if abs(c1) > 1e-3:
        assert f == pytest.approx(math.exp(-Y(c1, c3 / c1)), rel=1e-12)


@given(st.floats(-1e-7, 1e-7), st.floats(-1e-7, 1e-7))
def test_char_factor_series_branch(c1, c3):
    mu2 = c1 * c1 + c3 * c3
    assert char_factor(c1, c3) == pytest.approx(1 - c3 + mu2 / 2, rel=1e-14)


def test_log_char_factor_large_arguments():
    # exp would overflow; log stays finite and matches mu + log((1 - r)/2) asymptotically
    c1, c3 = 300.0, -400.0
    mu = 500.0
    assert log_char_factor(c1, c3) == pytest.approx(mu + math.log(0.5 * (1 - c3 / mu)), rel=1e-14)
    assert math.isfinite(log_char_factor(1e-3, 800.0))


@given(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1))
def test_small_parameter_law(a, b):
    assert abs(Y(a, b) - (-a * a / 2 + a * b)) <= 2.0 * abs(a) ** 3 * (1 + abs(b) ** 3)


def test_xy_examples():
    assert X(0.0, 0.4) == 0.0 and Y(0.0, 0.4) == 0.0
    for a in (-1.5, 0.2, 3.0):
        assert X(a, 0.0) == pytest.approx(math.tanh(a), rel=1e-14)
        assert Y(a, 0.0) == pytest.approx(-math.log(math.cosh(a)), rel=1e-14)


@given(small, small)
def test_xy_ode(a, b):
    h = 1e-4
    x = X(a, b)
    dx = (X(a + h, b) - X(a - h, b)) / (2 * h)
    dy = (Y(a + h, b) - Y(a - h, b)) / (2 * h)
    assert abs(dx - (1 + 2 * b * x - x * x)) <= 1e-6
    assert abs(dy - (b - x)) <= 1e-6


@given(small.filter(lambda v: abs(v) > 1e-3), small, phases)
def test_full_disentanglement(a, b, phi):
    ref = expm(char_exponent(a, a * b, phi))
    out = disentangled_char_matrix(a, b, phi)
    assert np.max(np.abs(out - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_overflow_safe_xy():
    assert math.isfinite(X(400.0, 2.0)) and math.isfinite(Y(400.0, 2.0))
    assert math.isfinite(X(-400.0, 2.0)) and math.isfinite(Y(-400.0, -2.0))
