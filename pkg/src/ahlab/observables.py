"""Exact finite-N expectation values on |psi> (x) |all down>.

The detector energy operator splits into commuting per-site pieces
``Delta H_D(t) = sum_n s_n(t)`` and the spin state is a product, so for a fixed
starting point x of the particle the joint (order-preserving) cumulants of
Delta H_D at several times are sums of single-site cumulants.  Moments are
rebuilt from those cumulants by summing over set partitions and then averaged
over the packet with the panel quadrature.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import OrderTooHigh, WrongPacketVariant
from .model import ModelParams, PointSource
from .quadrature import DEFAULT_RULE, QuadratureRule, integrate, panel_blocks
from .site import DOWN, site_energy_operator

MAX_ORDER = 4


@lru_cache(maxsize=None)
def set_partitions(items: tuple) -> tuple:
    """All set partitions of ``items``; blocks keep the original order."""
    if not items:
        return ((),)
    first, rest = items[0], items[1:]
    out = []
    for part in set_partitions(rest):
        out.append(((first,),) + part)
        for i, block in enumerate(part):
            out.append(part[:i] + ((first,) + block,) + part[i + 1:])
    return tuple(out)


@lru_cache(maxsize=None)
def subsets(k: int) -> tuple:
    """Nonempty subsets of range(k) as increasing tuples, shortest first."""
    out = [()]
    for i in range(k):
        out += [s + (i,) for s in out]
    return tuple(sorted((s for s in out if s), key=lambda s: (len(s), s)))


def _mobius(nblocks: int) -> int:
    return (-1) ** (nblocks - 1) * math.factorial(nblocks - 1)


def site_moments(alphas: np.ndarray, phi, hbar_omega: float) -> dict:
    """Ordered single-site moments <down| s(t_i1) ... s(t_im) |down> for every subset.

    ``alphas`` has shape (k, ...); the result maps increasing index tuples to
    arrays of the trailing shape.
    """
    k = alphas.shape[0]
    ops = [site_energy_operator(alphas[i], phi, hbar_omega) for i in range(k)]
    bra = np.zeros(alphas.shape[1:] + (2,), dtype=complex)
    bra[..., DOWN] = 1.0
    rows = {(): bra}
    moments = {}
    for s in subsets(k):
        v = np.einsum("...a,...ab->...b", rows[s[:-1]], ops[s[-1]])
        rows[s] = v
        moments[s] = v[..., DOWN]
    return moments


def cumulants_from_moments(moments: dict) -> dict:
    out = {}
    for s in moments:
        acc = 0
        for part in set_partitions(s):
            term = _mobius(len(part))
            for block in part:
                term = term * moments[block]
            acc = acc + term
        out[s] = acc
    return out


def moments_from_cumulants(cumulants: dict) -> dict:
    out = {}
    for s in cumulants:
        acc = 0
        for part in set_partitions(s):
            term = 1
            for block in part:
                term = term * cumulants[block]
            acc = acc + term
        out[s] = acc
    return out


def _node_cumulants(params: ModelParams, blocks) -> tuple[np.ndarray, np.ndarray, dict]:
    """Joint cumulants of Delta H_D at every quadrature node (summed over sites)."""
    omega_c = params.constants.omega / params.constants.c
    hw = params.hbar_omega
    xs, ws, tables = [], [], []
    for b in blocks:
        phi = omega_c * b.x[None, :]
        kap = cumulants_from_moments(site_moments(b.alphas, phi, hw))
        tables.append({s: b.counts @ v for s, v in kap.items()})
        xs.append(b.x)
        ws.append(b.weight)
    keys = tables[0].keys()
    merged = {s: np.concatenate([t[s] for t in tables]) for s in keys}
    return np.concatenate(xs), np.concatenate(ws), merged


def _moment_vector(params: ModelParams, blocks, centered: bool) -> np.ndarray:
    _, w, kap = _node_cumulants(params, blocks)
    if centered:
        kap = dict(kap)
        for s in kap:
            if len(s) == 1:
                kap[s] = kap[s] - w @ kap[s]
    mom = moments_from_cumulants(kap)
    return np.array([w @ mom[s] for s in mom])


def moment_table(params: ModelParams, times: Sequence[float], centered: bool = True,
                 rule: QuadratureRule = DEFAULT_RULE) -> dict:
    """Ordered moments of Delta H_D (or of its centered version Sigma) for all sub-products.

    Keys are increasing index tuples into ``times``; the product is taken in
    the order the times are written.
    """
    times = [float(t) for t in times]
    if len(times) > MAX_ORDER:
        raise OrderTooHigh(f"moments beyond order {MAX_ORDER} are not supported")
    vec = integrate(params, times, lambda blocks: _moment_vector(params, blocks, centered), rule)
    return dict(zip(subsets(len(times)), np.atleast_1d(vec)))


# -- public observables -----------------------------------------------------


def _require_point(params: ModelParams) -> PointSource:
    if not isinstance(params.packet, PointSource):
        raise WrongPacketVariant("the propagator factor is defined for a point source")
    return params.packet


def decay_exponent(params: ModelParams, t: float) -> float:
    """-sum_n ln cos(alpha~_n(t)) for a point source; +inf once some cos vanishes."""
    _require_point(params)
    (block,) = panel_blocks(params, [t], 1)
    cos = np.cos(block.alphas[0, :, 0])
    if np.any(cos <= 0):
        return math.inf
    return -math.fsum(block.counts * np.log(cos))


def propagator_factor(params: ModelParams, t: float) -> float:
    """prod_n cos(alpha~_n(t)): the spin-vacuum amplitude multiplying delta(x - ct)."""
    _require_point(params)
    (block,) = panel_blocks(params, [t], 1)
    cos = np.cos(block.alphas[0, :, 0])
    if np.any(cos == 0):
        return 0.0
    sign = -1.0 if np.sum(block.counts[cos < 0]) % 2 else 1.0
    return sign * math.exp(math.fsum(block.counts * np.log(np.abs(cos))))


def mean_detector_energy(params: ModelParams, t: float,
                         rule: QuadratureRule = DEFAULT_RULE) -> float:
    """<Delta H_D(t)> = hbar omega * integral |psi|^2 sum_n sin^2 alpha_n(x, t)."""
    hw = params.hbar_omega

    def evaluate(blocks):
        return math.fsum(float(b.weight @ (hw * (b.counts @ np.sin(b.alphas[0]) ** 2)))
                         for b in blocks)

    return float(integrate(params, [t], evaluate, rule))


def mean_momentum(params: ModelParams, t: float, rule: QuadratureRule = DEFAULT_RULE) -> float:
    """<c p(t)> = c p0 - <Delta H_D(t)>.

    The remaining terms of the Heisenberg momentum carry (sigma_+(x) -/+ sigma_-(x))
    on a single site, whose diagonal element on the all-down state is zero.
    """
    cp0 = params.constants.c * params.packet.p0
    return cp0 - mean_detector_energy(params, t, rule)


def ordered_correlation(params: ModelParams, t1: float, t2: float,
                        rule: QuadratureRule = DEFAULT_RULE) -> complex:
    """<Delta H_D(t1) Delta H_D(t2)> in the written order."""
    return complex(moment_table(params, [t1, t2], centered=False, rule=rule)[(0, 1)])


def covariance_with_residue(params: ModelParams, t1: float, t2: float,
                            rule: QuadratureRule = DEFAULT_RULE) -> tuple[float, float]:
    """Real part and imaginary residue of <Sigma(t1) Sigma(t2)>."""
    v = complex(moment_table(params, [t1, t2], centered=True, rule=rule)[(0, 1)])
    return v.real, v.imag


def sigma_covariance(params: ModelParams, t1: float, t2: float,
                     rule: QuadratureRule = DEFAULT_RULE) -> float:
    re, _ = covariance_with_residue(params, t1, t2, rule)
    return re


def ordered_moment(params: ModelParams, times: Sequence[float],
                   rule: QuadratureRule = DEFAULT_RULE) -> complex:
    """<Sigma(t_1) ... Sigma(t_k)> in the written order, k <= 4."""
    k = len(times)
    if k > MAX_ORDER:
        raise OrderTooHigh(f"moments beyond order {MAX_ORDER} are not supported")
    if k == 0:
        return 1.0 + 0j
    return complex(moment_table(params, times, centered=True, rule=rule)[tuple(range(k))])


def single_time_cumulants(params: ModelParams, t: float, max_order: int = 4,
                          rule: QuadratureRule = DEFAULT_RULE) -> list[float]:
    """[kappa_1, ..., kappa_max] of Sigma(t); kappa_1 is 0 by construction."""
    if max_order > MAX_ORDER:
        raise OrderTooHigh(f"cumulants beyond order {MAX_ORDER} are not supported")
    table = moment_table(params, [t] * max_order, centered=True, rule=rule)
    m = [table[tuple(range(j))].real for j in range(1, max_order + 1)]
    kappas = [0.0] + m[1:3]
    if max_order == 4:
        kappas.append(m[3] - 3 * m[1] ** 2)
    return [float(v) for v in kappas]


def passed_sites(params: ModelParams, t: float) -> int:
    """Number of sites a point-source particle has fully passed at time t."""
    x0 = _require_point(params).x0
    xs = params.geometry.positions
    front = x0 + params.constants.c * t - params.potential.width / 2
    return int(np.searchsorted(xs, front, "left"))


def snap_times(params: ModelParams, times, rel_shift: float = 1e-9) -> np.ndarray:
    """Nudge probe times off exact delta-site crossings (point source only).

    A time with x0 + c t == x_n is moved forward by ``rel_shift * d / c`` so that
    results do not depend on the theta(0) = 1/2 convention.
    """
    times = np.array(times, dtype=float)
    if not isinstance(params.packet, PointSource) or params.potential.width > 0:
        return times
    xs = params.geometry.positions
    c = params.constants.c
    shift = rel_shift * params.geometry.d / c
    for i, t in enumerate(times):
        front = params.packet.x0 + c * t
        j = np.searchsorted(xs, front)
        near = [xs[k] for k in (j - 1, j) if 0 <= k < len(xs)]
        if any(abs(front - xn) <= 0.5 * rel_shift * params.geometry.d for xn in near):
            times[i] = t + shift
    return times
