import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ahlab.errors import OrderTooHigh, WrongPacketVariant
from ahlab.model import PointSource, SquarePacket, TruncatedGaussian
from ahlab.observables import (covariance_with_residue, cumulants_from_moments, decay_exponent,
                               mean_detector_energy, mean_momentum, moment_table,
                               moments_from_cumulants, ordered_correlation, ordered_moment,
                               passed_sites, propagator_factor, set_partitions,
                               sigma_covariance, single_time_cumulants, snap_times, subsets)
from ahlab.oracles import DenseChain, dense_packet_average
from ahlab.quadrature import node_weights

from conftest import chain

Q = math.sin(0.1) ** 2
T_QUARTER = 125.0  # 100 of the 400 sites passed


# -- combinatorics ----------------------------------------------------------


def test_bell_numbers():
    assert [len(set_partitions(tuple(range(k)))) for k in range(6)] == [1, 1, 2, 5, 15, 52]
    assert len(subsets(4)) == 15


@given(st.lists(st.floats(-2, 2), min_size=15, max_size=15))
def test_moment_cumulant_round_trip(values):
    mom = dict(zip(subsets(4), values))
    back = moments_from_cumulants(cumulants_from_moments(mom))
    for s in mom:
        assert back[s] == pytest.approx(mom[s], abs=1e-10)


def test_bernoulli_cumulants():
    # a 0/1 variable with P(1) = p: kappa2 = p(1-p), kappa3 = p(1-p)(1-2p)
    p = 0.3
    mom = {s: p for s in subsets(3)}
    kap = cumulants_from_moments(mom)
    assert kap[(0, 1)] == pytest.approx(p * (1 - p))
    assert kap[(0, 1, 2)] == pytest.approx(p * (1 - p) * (1 - 2 * p))


# -- point-source closed forms -------------------------------------------------


def test_propagator_reference(quarter):
    assert passed_sites(quarter, T_QUARTER) == 100
    assert propagator_factor(quarter, T_QUARTER) == pytest.approx(math.cos(0.1) ** 100, rel=1e-13)
    assert propagator_factor(quarter, 0.0) == 1.0
    assert decay_exponent(quarter, T_QUARTER) == pytest.approx(-100 * math.log(math.cos(0.1)),
                                                               rel=1e-13)


def test_energy_and_momentum_reference():
    p = chain(packet=PointSource(0.0, 10.0))
    assert mean_detector_energy(p, 0.0) == 0.0
    assert mean_detector_energy(p, T_QUARTER) == pytest.approx(100 * Q, rel=1e-13)
    assert mean_detector_energy(p, T_QUARTER) == pytest.approx(0.99667, abs=5e-6)
    assert mean_momentum(p, 0.0) == 10.0
    assert mean_momentum(p, T_QUARTER) == pytest.approx(9.00333, abs=5e-6)


def test_covariance_reference(quarter):
    assert sigma_covariance(quarter, T_QUARTER, T_QUARTER) == pytest.approx(100 * Q * (1 - Q),
                                                                            rel=1e-12)
    assert sigma_covariance(quarter, T_QUARTER, T_QUARTER) == pytest.approx(0.98674, abs=5e-6)
    assert ordered_correlation(quarter, 0.0, T_QUARTER) == 0.0
    assert sigma_covariance(quarter, 50.0, T_QUARTER) == 0.0


def test_cumulant_reference(quarter):
    kap = single_time_cumulants(quarter, T_QUARTER)
    assert kap[0] == 0.0
    assert kap[1] == pytest.approx(100 * Q * (1 - Q), rel=1e-12)
    assert kap[2] == pytest.approx(-2 * Q * Q * (1 - Q) * 100, rel=1e-10)
    assert kap[2] == pytest.approx(-0.01967, abs=5e-6)
    assert kap[3] == pytest.approx(-2 * Q * Q * (1 - Q) * (1 - 3 * Q) * 100, rel=1e-10)
    assert kap[3] == pytest.approx(-0.0190809492, abs=1e-10)


def test_zero_coupling_cumulants():
    p = chain(n_bar=0.0)
    assert single_time_cumulants(p, T_QUARTER) == [0.0, 0.0, 0.0, 0.0]


def test_cumulants_halve_with_N():
    k = [single_time_cumulants(chain(N=n), T_QUARTER) for n in (1000, 2000, 4000)]
    for a, b in zip(k, k[1:]):
        for j in (2, 3):
            assert b[j] / a[j] == pytest.approx(0.5, rel=0.05)


@given(st.floats(90.0, 210.0), st.floats(90.0, 210.0))
def test_min_structure(t1, t2):
    p = chain(N=120)
    t1, t2 = snap_times(p, [t1, t2])
    k = min(passed_sites(p, t1), passed_sites(p, t2))
    assert sigma_covariance(p, t1, t2) == pytest.approx(p.q * (1 - p.q) * k, rel=1e-12,
                                                        abs=1e-15)


def test_limit_agreement_within_q(quarter):
    limit = 4.0 / 100.0 * 25.0
    assert abs(sigma_covariance(quarter, T_QUARTER, T_QUARTER) / limit - 1) <= 2 * quarter.q


def test_packet_variant_and_order_errors(quarter):
    p = chain(packet=SquarePacket(0.5))
    with pytest.raises(WrongPacketVariant):
        propagator_factor(p, 120.0)
    with pytest.raises(WrongPacketVariant):
        decay_exponent(p, 120.0)
    with pytest.raises(OrderTooHigh):
        ordered_moment(quarter, [110.0] * 5)
    with pytest.raises(OrderTooHigh):
        single_time_cumulants(quarter, 110.0, 5)
    assert ordered_moment(quarter, [120.0]) == 0.0


def test_snap_times_moves_only_crossings():
    p = chain(N=101)  # sites at 100, 101, ..., 200
    out = snap_times(p, [110.0, 110.5])
    assert out[0] > 110.0 and out[0] - 110.0 < 1e-8
    assert out[1] == 110.5
    assert np.all(snap_times(chain(N=101, packet=SquarePacket(0.5)), [110.0]) == [110.0])


# -- general configurations ----------------------------------------------------

configs = st.sampled_from([
    dict(potential="delta", packet=PointSource(0.3)),
    dict(potential="square", width=2.0, packet=PointSource(0.0)),
    dict(potential="delta", packet=SquarePacket(0.5)),
    dict(potential="square", width=1.5, packet=TruncatedGaussian(0.5)),
])
probe = st.floats(95.0, 205.0)


@given(configs, probe, probe)
def test_hermiticity(cfg, t1, t2):
    p = chain(N=60, omega=1.7, **cfg)
    a = ordered_correlation(p, t1, t2)
    b = ordered_correlation(p, t2, t1)
    assert abs(a - b.conjugate()) <= 1e-10 * max(1.0, abs(a))


@given(configs, probe)
def test_variance_nonnegative_and_real(cfg, t):
    p = chain(N=60, omega=1.7, **cfg)
    re, im = covariance_with_residue(p, t, t)
    assert re >= -1e-14
    assert abs(im) <= 1e-12 * max(1.0, abs(re))


@given(configs, st.lists(probe, min_size=1, max_size=4))
def test_omega_zero_moments_vanish(cfg, times):
    p = chain(N=40, omega=0.0, **cfg)
    assert mean_detector_energy(p, times[0]) == 0.0
    table = moment_table(p, times)
    assert all(v == 0 for v in table.values())


def test_decay_independent_of_omega(quarter):
    for t in (105.3, 150.7, 230.0):
        assert propagator_factor(quarter.with_constants(omega=0.0), t) == \
            propagator_factor(quarter, t)


# -- dense 2^N oracle ------------------------------------------------------------


def small_chain(potential="delta", width=0.0, packet=None, omega=1.3):
    return chain(N=6, n_bar=3.0, x1=2.0, L=2.25, potential=potential, width=width,
                 packet=packet, omega=omega)


def dense_sigma(ch, times, means):
    op = np.eye(ch.dim, dtype=complex)
    for t, m in zip(times, means):
        op = op @ (ch.delta_HD(t) - m * np.eye(ch.dim))
    return ch.expect(op)


@pytest.mark.parametrize("potential,width", [("delta", 0.0), ("square", 0.6)])
@pytest.mark.parametrize("x0", [-0.35, 0.27])
def test_dense_point_source(potential, width, x0):
    p = small_chain(potential, width, PointSource(x0))
    ch = DenseChain(p, x0)
    times = [3.1, 4.4, 6.9, 5.3]
    means = [ch.expect(ch.delta_HD(t)).real for t in times]
    for t, m in zip(times, means):
        assert mean_detector_energy(p, t) == pytest.approx(m, abs=1e-12)
        assert propagator_factor(p, t) == pytest.approx(abs(ch.propagator_factor(t)), abs=1e-12)
    for k in (2, 3, 4):
        got = ordered_moment(p, times[:k])
        assert abs(got - dense_sigma(ch, times[:k], means[:k])) <= 1e-10


@pytest.mark.parametrize("potential,width,packet", [
    ("delta", 0.0, SquarePacket(0.3)),
    ("square", 0.6, TruncatedGaussian(0.3)),
])
def test_dense_packet(potential, width, packet):
    p = small_chain(potential, width, packet)
    times = [3.1, 4.4, 5.3]
    nodes, weights = node_weights(p, times, 16)
    means = [dense_packet_average(p, nodes, weights, lambda ch, t=t: ch.expect(ch.delta_HD(t)))
             for t in times]
    for t, m in zip(times, means):
        assert mean_detector_energy(p, t) == pytest.approx(m.real, abs=1e-10)
    dense3 = dense_packet_average(p, nodes, weights,
                                  lambda ch: dense_sigma(ch, times, [m.real for m in means]))
    assert abs(ordered_moment(p, times) - dense3) <= 1e-10
    dense2 = dense_packet_average(p, nodes, weights,
                                  lambda ch: ch.expect(ch.delta_HD(times[0]) @ ch.delta_HD(times[2])))
    assert abs(ordered_correlation(p, times[0], times[2]) - dense2) <= 1e-10


def test_momentum_bookkeeping():
    p = chain(N=60, packet=SquarePacket(0.4, 5.0))
    for t in (80.0, 130.2, 190.0, 260.0):
        assert mean_momentum(p, t) + mean_detector_energy(p, t) == pytest.approx(5.0, abs=1e-12)


def test_cumulant_orders_truncate(quarter):
    full = single_time_cumulants(quarter, T_QUARTER)
    for order in (1, 2, 3):
        part = single_time_cumulants(quarter, T_QUARTER, order)
        assert len(part) == order
        assert part == pytest.approx(full[:order], rel=1e-12)
