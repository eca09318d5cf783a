import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ahlab.lab import (SweepPlan, border_study, fit_loglog, gaussianity_sweep, limit_branch,
                       limit_continuity, make_report, r_squared, run_sweep, wick_residual)
from ahlab.limits import LimitFormulas
from ahlab.model import SquarePacket

from conftest import chain

LADDER = (1000, 2000, 4000, 8000)


@given(st.floats(-3.0, 0.5), st.floats(-5.0, 5.0))
def test_fit_recovers_power_law(slope, logc):
    N = [100, 200, 400, 800, 1600]
    err = [math.exp(logc) * n ** slope for n in N]
    s, c, r = fit_loglog(N, err)
    assert s == pytest.approx(slope, abs=1e-9)
    assert c == pytest.approx(logc, abs=1e-8)
    assert r <= 1e-9


def test_fit_needs_four_points():
    with pytest.raises(ValueError):
        make_report("x", [1, 2, 3], [1.0, 0.5, 0.3])
    rep = make_report("x", [1, 2, 3, 4, 5], [9.0, 1.0, 0.5, 0.25, 0.125], drop_smallest=True)
    assert rep.dropped == [1] and rep.N == [2, 3, 4, 5]


def test_report_modes():
    N = [1, 2, 4, 8]
    band = make_report("b", N, [1 / n for n in N])
    assert band.passed and band.slope == pytest.approx(-1.0)
    slow = [n ** -0.99 for n in N]
    assert make_report("b", N, slow, mode="band").passed
    assert not make_report("b", N, slow, mode="at_most").passed
    assert make_report("b", N, [n ** -1.2 for n in N], mode="at_most").passed
    zero = make_report("z", N, [0.0] * 4)
    assert zero.passed and math.isnan(zero.slope)
    with pytest.raises(ValueError):
        make_report("b", N, slow, mode="sideways")


def test_plan_validation():
    base = chain()
    with pytest.raises(ValueError):
        SweepPlan(base, (2000, 1000, 4000, 8000))
    with pytest.raises(ValueError):
        SweepPlan(base, LADDER, observable="entropy")
    with pytest.raises(ValueError):
        SweepPlan(base, LADDER, "charfunc", (0.25, 0.5), betas=(0.1,))
    assert SweepPlan(base, LADDER, fractions=(0.25,)).times() == pytest.approx([125.0])


@pytest.mark.parametrize("observable", ["decay", "covariance", "mean_energy", "charfunc"])
def test_sweep_rates(observable):
    fractions = (0.2, 0.4, 0.6, 0.8) if observable == "charfunc" else (0.25, 0.5, 0.75)
    rep = run_sweep(SweepPlan(chain(), LADDER, observable, fractions))
    assert rep.passed, rep.to_dict()
    assert rep.slope == pytest.approx(-1.0, abs=0.1)
    assert rep.stamp["params"]["coupling"]["n_bar"] == 4.0
    assert len(rep.errors) == 4 and all(e > 0 for e in rep.errors)


def test_zero_coupling_sweep():
    rep = run_sweep(SweepPlan(chain(n_bar=0.0), LADDER, "covariance"))
    assert rep.errors == [0.0] * 4 and rep.passed


def test_sweep_is_reproducible():
    plan = SweepPlan(chain(), LADDER, "decay")
    assert run_sweep(plan).to_dict() == run_sweep(plan).to_dict()


def test_wick_residual_closed_form(quarter):
    # at equal times the residual is the fourth cumulant minus nothing else
    t = 125.0
    q = quarter.q
    got = wick_residual(quarter, [t] * 4)
    assert got.real == pytest.approx(-2 * q * q * (1 - q) * (1 - 3 * q) * 100, rel=1e-10)
    with pytest.raises(ValueError):
        wick_residual(quarter, [t] * 3)


def test_gaussianity_sweep():
    rep = gaussianity_sweep(SweepPlan(chain(), LADDER, "decay", (0.25, 0.5, 0.75, 0.9)))
    assert rep.kappa3.passed and rep.kappa4.passed
    assert rep.control_passed
    assert rep.wick.mode == "at_most"
    # |Wick residual| decays only just slower than 1/N at this n_bar
    assert -1.0 < rep.wick.slope < -0.98


def test_r_squared():
    x = np.linspace(0, 1, 11)
    assert r_squared(x ** 2, x ** 2) == 1.0
    assert r_squared(x, np.full_like(x, x.mean())) == pytest.approx(0.0)
    assert r_squared(np.ones(3), np.ones(3)) == 1.0


def test_branches_and_continuity():
    f = LimitFormulas(n_bar=4.0, L=100.0, x1=100.0, a=0.5, packet_kind="square")
    assert [limit_branch(f, t) for t in (99.0, 100.0, 150.0, 200.2, 201.0)] == \
        ["before", "entry", "interior", "exit", "after"]
    assert limit_continuity(f) <= 1e-8


def test_border_study():
    p = chain(N=10000, packet=SquarePacket(0.5))
    study = border_study(p, points_per_ramp=21, interior_points=5)
    assert study.entry_r2 >= 0.999
    # near saturation the O(1/N) offset n_bar - N sin^2 g dominates the exit-ramp spread
    assert study.branch_sup["exit"] <= 2e-3
    assert study.branch_sup["interior"] <= 1e-3
    assert study.continuity <= 1e-8
    assert study.rows[-1]["exact"] == pytest.approx(4.0 * p.q / p.g ** 2, rel=1e-9)
    with pytest.raises(ValueError):
        border_study(chain())
