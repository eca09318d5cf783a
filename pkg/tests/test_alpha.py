import numpy as np
import pytest
from hypothesis import given, strategies as st

from ahlab.alpha import AlphaProfile, alpha, alpha_at, alpha_tilde
from ahlab.errors import SiteIndexOutOfRange
from ahlab.model import DiracDelta, Square

from conftest import chain

G = 0.1


def test_delta_examples():
    d = DiracDelta(G)
    assert alpha_at(d, 150.0, 0.0, 100.0) == 0.0
    assert alpha_at(d, 150.0, 0.0, 200.0) == pytest.approx(G)
    assert alpha_at(d, 150.0, 0.0, 150.0) == pytest.approx(G / 2)


def test_square_examples():
    s = Square(G, 2.0)
    assert alpha_at(s, 150.0, 0.0, 200.0) == pytest.approx(G)
    assert alpha_at(s, 150.0, 0.0, 150.0) == pytest.approx(0.05)
    assert alpha_at(s, 150.0, 0.0, 149.0) == 0.0


def test_alpha_tilde_and_indexing():
    p = chain(N=5, L=4.0)
    prof = AlphaProfile.from_params(p)
    assert alpha_tilde(prof, 1, 0.0) == 0.0
    assert alpha_tilde(prof, 2, 102.0) == pytest.approx(p.g)
    assert alpha_tilde(prof, 5, 102.0) == 0.0
    with pytest.raises(SiteIndexOutOfRange):
        alpha(prof, 0, 0.0, 1.0)
    with pytest.raises(SiteIndexOutOfRange):
        alpha(prof, 6, 0.0, 1.0)


positions = st.floats(-5.0, 5.0)
times = st.floats(0.0, 20.0)
widths = st.floats(0.01, 3.0)


@given(positions, times, widths)
def test_bounds(x, ct, w):
    for shape in (DiracDelta(G), Square(G, w)):
        a = alpha_at(shape, 3.0, x, ct)
        assert 0.0 <= a <= G * (1 + 1e-15)


@given(positions, times, times, widths)
def test_monotone_in_time(x, ct1, ct2, w):
    lo, hi = sorted((ct1, ct2))
    for shape in (DiracDelta(G), Square(G, w)):
        assert alpha_at(shape, 3.0, x, hi) >= alpha_at(shape, 3.0, x, lo)


@given(positions, times, widths)
def test_saturation(x, ct, w):
    xn = 3.0
    if ct > xn - x + w / 2 and x < xn - w / 2:
        assert alpha_at(Square(G, w), xn, x, ct) == pytest.approx(G, rel=1e-12)


@given(positions, times)
def test_narrow_square_tends_to_delta(x, ct):
    d, xn = 0.1, 3.0
    if abs(x + ct - xn) < 1e-5 or abs(x - xn) < 1e-5:
        return
    narrow = Square(G, 1e-6 * d)
    assert abs(alpha_at(narrow, xn, x, ct) - alpha_at(DiracDelta(G), xn, x, ct)) <= 1e-6 * G


def test_square_touching_window_is_zero():
    s = Square(G, 0.6)
    assert alpha_at(s, 150.0, 0.0, 150.0 - 0.3) == 0.0


def test_broadcasting():
    xs = np.linspace(100, 110, 11)
    out = alpha_at(DiracDelta(G), xs[:, None], 0.0, np.array([104.5, 200.0]))
    assert out.shape == (11, 2)
    assert out[:, 1].sum() == pytest.approx(11 * G)
    assert out[:, 0].sum() == pytest.approx(5 * G)
