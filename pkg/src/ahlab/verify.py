"""Identity suite: every closed form checked against an independent computation.

Each check returns a :class:`CheckResult` with its worst residual.  The
``corrupt`` hook flips the sign of the closed-form side of one named check so
that the harness can prove a broken identity is caught.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .alpha import alpha_at
from .errors import ValidityWarning
from .model import (
    ArrayGeometry,
    CouplingFamily,
    PhysicalConstants,
    PointSource,
    SquarePacket,
    make_params,
)
from .observables import mean_detector_energy, ordered_correlation, propagator_factor
from .oracles import DenseChain, expm_taylor, expm_traceless
from .quadrature import QuadratureRule, node_weights
from .site import (
    X,
    Y,
    char_exponent,
    char_factor,
    dagger,
    disentangled_char_matrix,
    disentangled_product,
    free_phase,
    heisenberg_sigma,
    identity,
    log_char_factor,
    sigma3,
    sigma_minus,
    sigma_plus,
    site_energy_operator,
    site_unitary,
)


@dataclass
class CheckResult:
    name: str
    residual: float
    tol: float
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: residual {self.residual:.3e} (tol {self.tol:.0e})"


def _maxabs(a) -> float:
    return float(np.max(np.abs(a)))


def _comm(a, b):
    return a @ b - b @ a


class _Sampler:
    def __init__(self, seed: int, n: int):
        self.rng = np.random.default_rng(seed)
        self.n = n

    def uniform(self, lo, hi):
        return self.rng.uniform(lo, hi, self.n)


# -- single-site identities ---------------------------------------------------


def check_su2(s: _Sampler, sign: float) -> float:
    phi = s.uniform(0, 2 * np.pi)
    sp, sm, s3 = sigma_plus(phi), sigma_minus(phi), sigma3()
    r1 = _comm(s3, sp) - sign * 2 * sp
    r2 = _comm(s3, sm) + 2 * sm
    r3 = _comm(sm, sp) + s3
    return max(_maxabs(r1), _maxabs(r2), _maxabs(r3))


def check_disentanglement(s: _Sampler, sign: float) -> float:
    alpha, phi = s.uniform(-1.4, 1.4), s.uniform(0, 2 * np.pi)
    worst = 0.0
    for a, p in zip(alpha, phi):
        left, mid, right = disentangled_product(float(a), float(p))
        worst = max(worst, _maxabs(sign * (left @ mid @ right) - site_unitary(a, p)))
    return worst


def _heisenberg(kind: str):
    op = {"plus": sigma_plus(), "minus": sigma_minus(), "three": sigma3()}[kind]

    def check(s: _Sampler, sign: float) -> float:
        alpha, phi, wt = s.uniform(-np.pi, np.pi), s.uniform(0, 2 * np.pi), s.uniform(0, 20)
        w = free_phase(wt) @ site_unitary(alpha, phi)
        conj = dagger(w) @ op @ w
        return _maxabs(sign * heisenberg_sigma(kind, alpha, phi, wt) - conj)

    return check


def check_phase_stripping(s: _Sampler, sign: float) -> float:
    """sigma_pm(t) exp(-/+ i omega (x + ct)/c) = sigma_pm(x), in two readings.

    Under the free evolution the relation is literal.  With the interaction on,
    stripping the same phase from the closed form leaves U^dagger sigma_pm(x) U.
    """
    alpha, phi, wt = s.uniform(-np.pi, np.pi), s.uniform(0, 2 * np.pi), s.uniform(0, 20)
    f = free_phase(wt)
    u = site_unitary(alpha, phi)
    worst = 0.0
    for kind, op, op_x, sgn in (("plus", sigma_plus(), sigma_plus(phi), 1),
                                ("minus", sigma_minus(), sigma_minus(phi), -1)):
        strip = np.exp(-sgn * 1j * (phi + wt))[:, None, None]
        free = dagger(f) @ op @ f
        worst = max(worst, _maxabs(sign * free * strip - op_x))
        full = heisenberg_sigma(kind, alpha, phi, wt) * strip
        worst = max(worst, _maxabs(sign * full - dagger(u) @ op_x @ u))
    return worst


def check_unitary_expm(s: _Sampler, sign: float) -> float:
    alpha, phi = s.uniform(-np.pi, np.pi), s.uniform(0, 2 * np.pi)
    worst = 0.0
    for a, p in zip(alpha, phi):
        gen = -1j * a * (sigma_plus(p) + sigma_minus(p))
        u = sign * site_unitary(a, p)
        worst = max(worst, _maxabs(u - expm_traceless(gen)), _maxabs(u - expm_taylor(gen)))
        worst = max(worst, _maxabs(dagger(u) @ u - identity()))
    return worst


def check_char_factor(s: _Sampler, sign: float) -> float:
    """Closed form, exp(-Y) and two matrix exponentials agree (relative)."""
    c1, c3, phi = s.uniform(-2, 2), s.uniform(-2, 2), s.uniform(0, 2 * np.pi)
    f = sign * char_factor(c1, c3)
    via_y = np.exp(-Y(c1, c3 / c1))
    worst = _maxabs((f - via_y) / via_y)
    worst = max(worst, _maxabs((np.exp(log_char_factor(c1, c3)) - via_y) / via_y))
    for k in range(len(c1)):
        m = char_exponent(c1[k], c3[k], phi[k])
        ref = expm_traceless(m)
        worst = max(worst, abs(f[k] - ref[1, 1].real) / abs(ref[1, 1]),
                    abs(ref[1, 1].imag) / abs(ref[1, 1]),
                    abs(expm_taylor(m)[1, 1] - ref[1, 1]) / abs(ref[1, 1]))
        dis = disentangled_char_matrix(c1[k], c3[k] / c1[k], phi[k])
        worst = max(worst, _maxabs(sign * dis - ref) / _maxabs(ref))
    return worst


def check_xy_ode(s: _Sampler, sign: float, h: float = 1e-4) -> float:
    """Central-difference residuals of dX/da = 1 + 2bX - X^2 and dY/da = b - X."""
    a, b = s.uniform(-2, 2), s.uniform(-2, 2)
    x = sign * X(a, b)
    dx = (X(a + h, b) - X(a - h, b)) / (2 * h)
    dy = (Y(a + h, b) - Y(a - h, b)) / (2 * h)
    r1 = dx - (1 + 2 * b * x - x * x)
    r2 = dy - (b - x)
    at0 = max(_maxabs(X(0.0, b)), _maxabs(Y(0.0, b)))
    return max(_maxabs(r1), _maxabs(r2), at0)


def check_energy_square(s: _Sampler, sign: float) -> float:
    """s(t)^2 = (hbar omega)^2 sin^2(alpha) I on one site."""
    alpha, phi, hw = s.uniform(-np.pi, np.pi), s.uniform(0, 2 * np.pi), s.uniform(0.1, 3)
    op = site_energy_operator(alpha, phi, hw[:, None, None])
    sq = op @ op
    target = (hw ** 2 * np.sin(alpha) ** 2)[:, None, None] * identity()
    return _maxabs(sign * sq - target)


# -- dense 2^N oracle ---------------------------------------------------------


def _dense_cases(N: int):
    consts = PhysicalConstants(hbar=1.0, c=1.0, omega=1.3)
    geo = ArrayGeometry(x1=2.0, d=0.45, N=N)
    fam = CouplingFamily(n_bar=3.0)
    return [make_params(consts, geo, fam, "delta"), make_params(consts, geo, fam, "square", 0.6)]


def _with_source(params, x0: float):
    return make_params(params.constants, params.geometry, params.coupling,
                       "delta" if params.potential.width == 0 else "square",
                       params.potential.width, PointSource(x0=x0))


def check_dense(s: _Sampler, sign: float, N: int = 8) -> float:
    """Factorized engine against full 2^N evolution, pointwise in the start x."""
    worst = 0.0
    times = (3.1, 4.4, 6.9)
    for base in _dense_cases(N):
        for x0 in (-0.35, 0.0, 0.27):
            p = _with_source(base, x0)
            dense = DenseChain(p, x0)
            for t in times:
                worst = max(worst, abs(sign * propagator_factor(p, t) - dense.propagator_factor(t)))
                worst = max(worst, abs(mean_detector_energy(p, t)
                                       - dense.expect(dense.delta_HD(t)).real))
            for t1, t2 in ((times[0], times[1]), (times[2], times[0]), (times[1], times[1])):
                ref = dense.expect(dense.delta_HD(t1) @ dense.delta_HD(t2))
                worst = max(worst, abs(ordered_correlation(p, t1, t2) - ref))
    return worst


def check_dense_packet(s: _Sampler, sign: float, N: int = 6) -> float:
    """Packet-averaged mean energy: dense chain on the panel nodes vs the engine."""
    consts = PhysicalConstants(omega=0.7)
    geo = ArrayGeometry(x1=2.0, d=0.45, N=N)
    p = make_params(consts, geo, CouplingFamily(2.5), "delta", 0.0, SquarePacket(0.3))
    t = 3.3
    xs, ws = node_weights(p, [t], 8)
    chains = [DenseChain(p, x) for x in xs]
    dense = sum(w * ch.expect(ch.delta_HD(t)).real for ch, w in zip(chains, ws))
    return abs(sign * mean_detector_energy(p, t, QuadratureRule(order=8)) - dense)


def _dense_blocks(p, x0: float, t1: float, t2: float, rng):
    xs = p.geometry.positions
    dense = DenseChain(p, x0)
    a1 = alpha_at(p.potential, xs, x0, p.constants.c * t1)
    a2 = alpha_at(p.potential, xs, x0, p.constants.c * t2)
    return dense, {
        "s31": dense.site_sum(np.sin(a1) ** 2, "s3"),
        "s32": dense.site_sum(np.sin(a2) ** 2, "s3"),
        "j1": dense.site_sum(np.sin(2 * a1), "J"),
        "j2": dense.site_sum(np.sin(2 * a2), "J"),
        "k": dense.site_sum(rng.uniform(-1, 1, p.geometry.N), "K"),
    }


def check_vanishing_terms(s: _Sampler, sign: float, N: int = 8) -> float:
    """Single-site off-diagonal sums and the sigma3 x J cross terms vanish on all-down."""
    worst = 0.0
    for base in _dense_cases(N):
        p = _with_source(base, -0.2)
        dense, b = _dense_blocks(p, -0.2, 3.4, 5.2, s.rng)
        terms = (dense.expect(b["j2"]), dense.expect(b["k"]),
                 dense.expect(b["s31"] @ b["j2"]), dense.expect(b["j1"] @ b["s32"]))
        if sign < 0:
            # sabotage: count the sigma3 term, which does not vanish, as a "vanishing" one
            terms += (dense.expect(b["s31"]),)
        worst = max(worst, max(abs(v) for v in terms))
    return worst


def check_correlation_split(s: _Sampler, sign: float, N: int = 8) -> float:
    """What survives is the full answer.

    Delta H_D(t) = -hw (S3 + (i/2) J) as an operator, and
    <DH(t1) DH(t2)> = hw^2 <S3(t1) S3(t2)> + (i hw/2)^2 <J(t1) J(t2)>.
    """
    worst = 0.0
    t1, t2 = 3.4, 5.2
    for base in _dense_cases(N):
        p = _with_source(base, -0.2)
        hw = p.hbar_omega
        dense, b = _dense_blocks(p, -0.2, t1, t2, s.rng)
        full = dense.expect(dense.delta_HD(t1) @ dense.delta_HD(t2))
        kept = hw ** 2 * dense.expect(b["s31"] @ b["s32"]) \
            + (0.5j * hw) ** 2 * dense.expect(b["j1"] @ b["j2"])
        worst = max(worst, abs(sign * kept - full))
        op = -hw * (b["s32"] + 0.5j * b["j2"])
        worst = max(worst, _maxabs(op - dense.delta_HD(t2)))
    return worst


CHECKS: dict[str, tuple[Callable, float]] = {
    "su2_relations": (check_su2, 1e-14),
    "disentanglement": (check_disentanglement, 1e-12),
    "heisenberg_plus": (_heisenberg("plus"), 1e-12),
    "heisenberg_minus": (_heisenberg("minus"), 1e-12),
    "heisenberg_three": (_heisenberg("three"), 1e-12),
    "phase_stripping": (check_phase_stripping, 1e-12),
    "unitary_vs_expm": (check_unitary_expm, 1e-12),
    "char_factor_oracles": (check_char_factor, 1e-10),
    "xy_ode_residuals": (check_xy_ode, 1e-6),
    "energy_square": (check_energy_square, 1e-12),
    "dense_point_oracle": (check_dense, 1e-10),
    "dense_packet_oracle": (check_dense_packet, 1e-10),
    "vanishing_terms": (check_vanishing_terms, 1e-12),
    "correlation_split": (check_correlation_split, 1e-10),
}


def run_identity_suite(seed: int = 0, samples: int = 1000, corrupt: str | None = None,
                       only: tuple[str, ...] | None = None) -> list[CheckResult]:
    """Run every check (or those in ``only``); ``corrupt`` names a check to sabotage."""
    if corrupt is not None and corrupt not in CHECKS:
        raise KeyError(f"unknown check {corrupt!r}")
    results = []
    for k, (name, (fn, tol)) in enumerate(CHECKS.items()):
        if only is not None and name not in only:
            continue
        sampler = _Sampler(seed + 7919 * k, samples)
        sign = -1.0 if name == corrupt else 1.0
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            # the packet oracle runs deliberately small geometries
            warnings.simplefilter("ignore", ValidityWarning)
            res = float(fn(sampler, sign))
        if math.isnan(res):
            res = math.inf
        results.append(CheckResult(name, res, tol, time.perf_counter() - t0))
    return results


def first_failure(results: list[CheckResult]) -> CheckResult | None:
    return next((r for r in results if not r.passed), None)
