"""Packet quadrature with panel splitting at site crossings.

For fixed probe times the per-site phases are piecewise smooth in the packet
coordinate x, with kinks where a site enters or leaves the potential window
(x = x_n - c t -/+ width/2).  The packet support is split at every kink and
each panel gets its own Gauss-Legendre rule.  Inside a panel no site changes
status, so sites sharing a phase history are grouped once per panel and carried
as (representative, multiplicity) rows; this keeps the cost independent of N
apart from the handful of sites sitting inside a potential window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from .alpha import alpha_at
from .model import ModelParams, PointSource, packet_density


@dataclass(frozen=True)
class QuadratureRule:
    order: int = 64
    rtol: float = 1e-10
    max_order: int = 1024


DEFAULT_RULE = QuadratureRule()


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


@dataclass
class PanelBlock:
    """Quadrature nodes of one panel and the grouped site phases there.

    ``alphas`` has shape (n_times, n_rows, n_nodes); row r stands for
    ``counts[r]`` sites with identical phase history.  ``weight`` already
    includes the packet density.
    """

    x: np.ndarray
    weight: np.ndarray
    alphas: np.ndarray
    counts: np.ndarray


def site_groups(xs: np.ndarray, x: float, fronts: np.ndarray, half_width: float):
    """Group sites by phase history for a particle starting at ``x``.

    ``fronts`` are the particle positions x + c t_i.  Returns representative
    site indices (0-based) and multiplicities.  Sites inside any potential
    window (or exactly on a delta site) are returned one per row.
    """
    N = len(xs)
    cuts = {0, N}
    windows = []
    for f in np.append(fronts, x):
        if half_width > 0:
            lo = int(np.searchsorted(xs, f - half_width, "right"))
            hi = int(np.searchsorted(xs, f + half_width, "left"))
        else:
            lo = int(np.searchsorted(xs, f, "left"))
            hi = int(np.searchsorted(xs, f, "right"))
        if hi > lo:
            windows.append((lo, hi))
        cuts.update((lo, hi))
    edges = sorted(cuts)
    reps, counts = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        if any(wlo <= lo and hi <= whi for wlo, whi in windows):
            reps.extend(range(lo, hi))
            counts.extend([1] * (hi - lo))
        else:
            reps.append(lo)
            counts.append(hi - lo)
    return np.asarray(reps, dtype=int), np.asarray(counts, dtype=float)


def kink_points(params: ModelParams, times, lo: float, hi: float) -> np.ndarray:
    xs = params.geometry.positions
    c = params.constants.c
    w = params.potential.width / 2
    shifts = [0.0] + [c * float(t) for t in np.atleast_1d(times)]
    found = []
    for ct in shifts:
        for sgn in ((-1.0, 1.0) if w > 0 else (0.0,)):
            # x = x_n - ct + sgn*w must fall in (lo, hi)
            i0 = np.searchsorted(xs, lo + ct - sgn * w, "right")
            i1 = np.searchsorted(xs, hi + ct - sgn * w, "left")
            found.append(xs[i0:i1] - ct + sgn * w)
    pts = np.unique(np.concatenate(found)) if found else np.empty(0)
    return pts[(pts > lo) & (pts < hi)]


def panel_blocks(params: ModelParams, times, order: int) -> Iterator[PanelBlock]:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    xs = params.geometry.positions
    c = params.constants.c
    w = params.potential.width / 2
    packet = params.packet
    ct = c * times[:, None, None]

    if isinstance(packet, PointSource):
        x = np.array([packet.x0])
        reps, counts = site_groups(xs, packet.x0, packet.x0 + c * times, w)
        alphas = alpha_at(params.potential, xs[reps][None, :, None], x[None, None, :], ct)
        yield PanelBlock(x, np.ones(1), alphas, counts)
        return

    lo, hi = packet.support
    edges = np.concatenate([[lo], kink_points(params, times, lo, hi), [hi]])
    gx, gw = gauss_legendre(order)
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        x = mid + half * gx
        weight = half * gw * packet_density(packet, x)
        reps, counts = site_groups(xs, mid, mid + c * times, w)
        alphas = alpha_at(params.potential, xs[reps][None, :, None], x[None, None, :], ct)
        yield PanelBlock(x, weight, alphas, counts)


def integrate(params: ModelParams, times, evaluate: Callable[[list[PanelBlock]], np.ndarray],
              rule: QuadratureRule = DEFAULT_RULE):
    """Run ``evaluate`` on the panel blocks, doubling the order until it settles.

    ``evaluate`` maps the list of blocks to a scalar or array; convergence is
    judged on its largest relative change.
    """
    if isinstance(params.packet, PointSource):
        return evaluate(list(panel_blocks(params, times, 1)))
    order = rule.order
    prev = np.asarray(evaluate(list(panel_blocks(params, times, order))))
    while True:
        order *= 2
        cur = np.asarray(evaluate(list(panel_blocks(params, times, order))))
        scale = max(float(np.max(np.abs(cur))), 1e-300)
        if np.max(np.abs(cur - prev)) <= rule.rtol * scale or order >= rule.max_order:
            return cur[()] if cur.ndim == 0 else cur
        prev = cur


def node_weights(params: ModelParams, times, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened (x, weight) nodes of the panel rule; handy for oracle comparisons."""
    blocks = list(panel_blocks(params, times, order))
    return (np.concatenate([b.x for b in blocks]), np.concatenate([b.weight for b in blocks]))


def total_mass(params: ModelParams, order: int = 64) -> float:
    """Integral of the packet density under the panel rule (1 up to rounding)."""
    if isinstance(params.packet, PointSource):
        return 1.0
    _, w = node_weights(params, [0.0], order)
    return math.fsum(w)
