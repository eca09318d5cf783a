"""Characteristic functional of Sigma(t) on a discrete probe grid.

For real weights beta_i at probe times t_i the functional is
``phi[beta] = <exp(sum_i beta_i Sigma(t_i))>``.  Given the starting point x it
factorizes over sites into ``<down| exp(c3 sigma3 + i c1 (sigma_+(x) - sigma_-(x))) |down>``
with c1, c3 linear in beta; everything is carried in log form and the packet
average is a weighted logsumexp.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import OrderTooHigh, StepTooLarge
from .limits import LimitFormulas, limit_kernel
from .model import ModelParams, PointSource
from .quadrature import DEFAULT_RULE, QuadratureRule, panel_blocks
from .site import log_char_factor

MAX_PROBES = 16


@dataclass(frozen=True)
class ProbeSpec:
    times: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        betas = tuple(float(b) for b in self.betas)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "betas", betas)
        if len(times) != len(betas):
            raise ValueError("times and betas must have the same length")
        if not 1 <= len(times) <= MAX_PROBES:
            raise ValueError(f"between 1 and {MAX_PROBES} probes are supported")
        if any(t < 0 or not math.isfinite(t) for t in times):
            raise ValueError("probe times must be finite and nonnegative")
        if any(b >= a for a, b in zip(times[1:], times[:-1])):
            raise ValueError("probe times must be strictly increasing")
        if not all(math.isfinite(b) for b in betas):
            raise ValueError("probe weights must be finite")


class CharEvaluator:
    """log phi as a function of the weights, for fixed probe times.

    The per-node phases are computed once; the quadrature order is settled on
    the means and on log phi at a pair of reference weights, then frozen so
    that repeated calls (finite differences) see one deterministic rule.
    Times need not be sorted or distinct.
    """

    def __init__(self, params: ModelParams, times: Sequence[float],
                 rule: QuadratureRule = DEFAULT_RULE):
        self.params = params
        self.times = np.asarray(times, dtype=float)
        if self.times.ndim != 1 or len(self.times) == 0:
            raise ValueError("need at least one probe time")
        self.hw = params.hbar_omega
        k = len(self.times)
        ref = np.full(k, 0.1 / max(self.hw, 1e-300))
        if isinstance(params.packet, PointSource):
            self._load(1)
            return
        order = rule.order
        self._load(order)
        prev = self._fingerprint(ref)
        while order < rule.max_order:
            order *= 2
            self._load(order)
            cur = self._fingerprint(ref)
            scale = max(float(np.max(np.abs(cur))), 1e-300)
            if np.max(np.abs(cur - prev)) <= rule.rtol * scale:
                break
            prev = cur

    def _load(self, order: int) -> None:
        blocks = list(panel_blocks(self.params, self.times, order))
        self.counts = [b.counts for b in blocks]
        self.sin2 = [np.sin(2 * b.alphas) for b in blocks]
        self.sq = [np.sin(b.alphas) ** 2 for b in blocks]
        self.weights = np.concatenate([b.weight for b in blocks])
        per_node = np.concatenate([np.einsum("r,krm->km", c, s) for c, s in
                                   zip(self.counts, self.sq)], axis=1)
        self.means = self.hw * (per_node @ self.weights)

    def _fingerprint(self, ref: np.ndarray) -> np.ndarray:
        return np.concatenate([self.means, [self(ref), self(-ref)]])

    def __call__(self, betas) -> float:
        betas = np.asarray(betas, dtype=float)
        logs = []
        for counts, s2, sq in zip(self.counts, self.sin2, self.sq):
            c1 = -0.5 * self.hw * np.tensordot(betas, s2, axes=1)
            c3 = -self.hw * np.tensordot(betas, sq, axes=1)
            logs.append(counts @ log_char_factor(c1, c3))
        s = np.concatenate(logs)
        return float(logsumexp(s, b=self.weights) - betas @ self.means)


class GaussianEvaluator:
    """log of the Gaussian limit functional, (1/2) beta.K.beta."""

    def __init__(self, params: ModelParams, times: Sequence[float]):
        self.kernel = gaussian_kernel(params, times)

    def __call__(self, betas) -> float:
        betas = np.asarray(betas, dtype=float)
        return float(0.5 * betas @ self.kernel @ betas)


def gaussian_kernel(params: ModelParams, times: Sequence[float]) -> np.ndarray:
    """K_ij = (hbar omega)^2 (c n_bar / L) min(tau_i, tau_j), tau = t - x1/c, clamped to the array."""
    return limit_kernel(LimitFormulas.from_params(params), times)


def log_char_function(params: ModelParams, probe: ProbeSpec,
                      rule: QuadratureRule = DEFAULT_RULE) -> float:
    return CharEvaluator(params, probe.times, rule)(probe.betas)


def char_function(params: ModelParams, probe: ProbeSpec,
                  rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Exact finite-N phi[beta] (positive)."""
    return math.exp(log_char_function(params, probe, rule))


def log_gaussian_limit_char(params: ModelParams, probe: ProbeSpec) -> float:
    return GaussianEvaluator(params, probe.times)(probe.betas)


def gaussian_limit_char(params: ModelParams, probe: ProbeSpec) -> float:
    """exp((1/2) sum_ij beta_i K_ij beta_j)."""
    return math.exp(log_gaussian_limit_char(params, probe))


# -- cumulants by finite differences ------------------------------------------

# central stencils (offsets, coefficients) for the m-th derivative, error O(h^2)
_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def default_base_step(order: int) -> float:
    return 1e-3 if order <= 2 else 1e-1


def step_sizes(scales: Sequence[float], base: float) -> np.ndarray:
    """h_i = base / sqrt(K_ii + eps); eps keeps probes with K_ii = 0 finite."""
    diag = np.asarray(scales, dtype=float)
    top = float(np.max(diag)) if diag.size else 0.0
    eps = 1e-3 * top if top > 0 else 1.0
    return base / np.sqrt(diag + eps)


def _mixed_derivative(log_char: Callable, n: int, index: tuple, h: np.ndarray) -> float:
    dirs = sorted(set(index))
    mult = [index.count(j) for j in dirs]
    grids = [list(zip(*_STENCILS[m])) for m in mult]
    terms = []
    for combo in itertools.product(*grids):
        beta = np.zeros(n)
        coef = 1.0
        for j, (off, cf) in zip(dirs, combo):
            beta[j] = off * h[j]
            coef *= cf
        terms.append(coef * log_char(beta))
    total = math.fsum(terms)
    denom = 1.0
    for j, m in zip(dirs, mult):
        denom *= h[j] ** m
    return total / denom


def mixed_cumulant(log_char: Callable, n: int, index: Sequence[int],
                   scales: Sequence[float] | None = None, base: float | None = None,
                   rtol: float = 1e-6, atol: float | None = None) -> float:
    """Joint cumulant d^k log phi / d beta_{i1} ... d beta_{ik} at beta = 0.

    Two Richardson-extrapolated estimates (from h, h/2 and h/2, h/4) are
    compared; if they disagree by more than 10 * rtol relative (and more than
    ``atol``) :class:`StepTooLarge` is raised.
    """
    index = tuple(sorted(int(i) for i in index))
    order = len(index)
    if order > 4:
        raise OrderTooHigh("cumulants beyond order 4 are not supported")
    if order == 0:
        return 0.0
    base = default_base_step(order) if base is None else base
    atol = (1e-8 if order > 2 else 1e-10) if atol is None else atol
    h = step_sizes(np.ones(n) if scales is None else scales, base)
    d = [_mixed_derivative(log_char, n, index, h / 2 ** j) for j in range(3)]
    r1 = (4 * d[1] - d[0]) / 3
    r2 = (4 * d[2] - d[1]) / 3
    err = abs(r2 - r1)
    if err > 10 * rtol * abs(r2) and err > atol:
        raise StepTooLarge(f"Richardson estimates {r1:.12g} and {r2:.12g} disagree "
                           f"for index {index}")
    return r2


def cumulants_from_char(log_char: Callable, n: int, order: int,
                        scales: Sequence[float] | None = None, base: float | None = None,
                        rtol: float = 1e-6, atol: float | None = None) -> dict:
    """All joint cumulants of a given order over n probe directions.

    Keys are nondecreasing index tuples, e.g. (0, 0) for the variance at the
    first probe and (0, 1) for the covariance of the first two.
    """
    if order > 4:
        raise OrderTooHigh("cumulants beyond order 4 are not supported")
    return {idx: mixed_cumulant(log_char, n, idx, scales, base, rtol, atol)
            for idx in itertools.combinations_with_replacement(range(n), order)}
