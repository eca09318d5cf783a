"""Closed-form N -> infinity formulas for the weak-coupling macroscopic limit.

In that limit site sums become integrals over [x1, x_N] with density n_bar/L,
so the decay exponent, mean energy and covariance of the fluctuation process
Sigma(t) are piecewise polynomials in c*t.  The finite-width potential adds
corrections of order Omega, collected by :func:`appendix_covariance`; a time
rescaling ``t = lam * tbar`` shrinks them by 1/lam.

Step functions at branch boundaries use theta(0) = 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BorderUndefinedForPacket, OutsideValidityWindow
from .model import ModelParams, PointSource, SquarePacket


def _theta(x: float) -> float:
    return 1.0 if x > 0 else (0.5 if x == 0 else 0.0)


@dataclass(frozen=True)
class LimitFormulas:
    """Geometry and scales read by the limit evaluators."""

    n_bar: float
    L: float
    x1: float
    hbar_omega: float = 1.0
    c: float = 1.0
    a: float = 0.0
    width: float = 0.0
    packet_kind: str = "point"

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"array length must be positive, got {self.L}")
        if not self.n_bar >= 0:
            raise ValueError(f"n_bar must be nonnegative, got {self.n_bar}")

    @property
    def xN(self) -> float:
        return self.x1 + self.L

    @property
    def density(self) -> float:
        """Flips per unit length, n_bar / L."""
        return self.n_bar / self.L

    @classmethod
    def from_params(cls, params: ModelParams) -> "LimitFormulas":
        pk = params.packet
        kind = ("point" if isinstance(pk, PointSource)
                else "square" if isinstance(pk, SquarePacket) else "gaussian")
        return cls(n_bar=params.coupling.n_bar, L=params.L, x1=params.geometry.x1,
                   hbar_omega=params.hbar_omega, c=params.constants.c, a=pk.a,
                   width=params.potential.width, packet_kind=kind)


# -- delta potential --------------------------------------------------------


def limit_decay_exponent(f: LimitFormulas, t: float) -> float:
    """(n_bar/2L)[(ct - x1) theta(x_N - ct) theta(ct - x1) + L theta(ct - x_N)]."""
    ct = f.c * t
    inside = (ct - f.x1) * _theta(f.xN - ct) * _theta(ct - f.x1)
    return f.n_bar / (2 * f.L) * (inside + f.L * _theta(ct - f.xN))


def limit_mean_energy(f: LimitFormulas, t: float) -> float:
    """Mean detector energy with the entry and exit ramps of a square packet.

    A point source has no ramps (a = 0) and gets the plain piecewise-linear
    curve; other packets raise :class:`BorderUndefinedForPacket`.
    """
    if f.packet_kind not in ("square", "point"):
        raise BorderUndefinedForPacket(
            f"border branches are only known for the square packet, not {f.packet_kind!r}")
    ct, a, x1, xN = f.c * t, f.a, f.x1, f.xN
    k = f.hbar_omega * f.density
    if a == 0:
        return k * min(max(ct - x1, 0.0), f.L)
    if ct <= x1 - a:
        return 0.0
    if ct <= x1 + a:
        return k * (ct - x1 + a) ** 2 / (4 * a)
    if ct < xN - a:
        return k * (ct - x1)
    if ct <= xN + a:
        return k * (f.L - (xN + a - ct) ** 2 / (4 * a))
    return k * f.L


def limit_mean_energy_interior(f: LimitFormulas, t: float) -> float:
    """hbar omega (n_bar/L)(ct - x1); valid for any packet away from the borders."""
    return f.hbar_omega * f.density * (f.c * t - f.x1)


def _check_inside(f: LimitFormulas, *times: float) -> None:
    for t in times:
        if not (f.x1 < f.c * t < f.xN):
            raise OutsideValidityWindow(
                f"ct = {f.c * t:g} outside the array interior ({f.x1:g}, {f.xN:g})")


def limit_covariance(f: LimitFormulas, t1: float, t2: float) -> float:
    """(hbar omega)^2 (n_bar/L)(c min(t1, t2) - x1), the Wiener kernel."""
    _check_inside(f, t1, t2)
    return f.hbar_omega ** 2 * f.density * (f.c * min(t1, t2) - f.x1)


def limit_kernel(f: LimitFormulas, times) -> np.ndarray:
    """Gram matrix of :func:`limit_covariance` with tau clamped to [0, L/c].

    Entries for probes before the array are 0 (Sigma vanishes there) and
    probes past the last site saturate at the full array length.
    """
    tau = np.clip(f.c * np.asarray(times, dtype=float) - f.x1, 0.0, f.L)
    return f.hbar_omega ** 2 * f.density * np.minimum.outer(tau, tau)


# -- finite-width potential ---------------------------------------------------


def h(t: float, width: float, c: float = 1.0) -> float:
    """h(t, Omega) = (ct + Omega)((ct + Omega)^2 - 6 Omega^2) / (6 Omega^2)."""
    u = c * t + width
    return u * (u * u - 6 * width * width) / (6 * width * width)


def _check_appendix_window(f: LimitFormulas, *times: float) -> None:
    lo = f.x1 + f.width / 2 + f.a
    hi = f.xN - f.width / 2 - f.a
    for t in times:
        ct = f.c * t
        if not (lo < ct < hi):
            raise OutsideValidityWindow(
                f"ct = {ct:g} outside the window ({lo:g}, {hi:g}) with the packet inside")
        if not ct > f.width:
            raise OutsideValidityWindow(f"ct = {ct:g} must exceed the potential width")


def appendix_mean_energy(f: LimitFormulas, t: float) -> float:
    """hbar omega (n_bar/L)(ct - Omega/6 - x1) for a packet fully inside the array."""
    _check_appendix_window(f, t)
    return f.hbar_omega * f.density * (f.c * t - f.width / 6 - f.x1)


def _finite_width_branches(ct1: float, ct2: float, x1: float, width: float, c: float) -> float:
    """Bracket of the four-branch covariance, in length units."""
    dt = (ct2 - ct1) / c
    w = width / c
    if width == 0:
        return min(ct1, ct2) - x1
    return (_theta(dt - w) * (ct1 - x1)
            + _theta(dt) * _theta(w - dt) * (ct2 - width - x1 - h(-dt, width, c))
            + _theta(-dt) * _theta(w + dt) * (ct1 - width - x1 - h(dt, width, c))
            + _theta(-dt - w) * (ct2 - x1))


def appendix_covariance(f: LimitFormulas, t1: float, t2: float) -> float:
    """Covariance of Sigma for a square potential of width Omega.

    Far apart in time (|t2 - t1| > Omega/c) this is the Wiener kernel; closer
    than that the overlap of the two potential windows lowers it, down to
    ct - Omega/6 - x1 at equal times.  The branches are taken literally,
    including their t1/t2 roles.
    """
    _check_appendix_window(f, t1, t2)
    bracket = _finite_width_branches(f.c * t1, f.c * t2, f.x1, f.width, f.c)
    return f.hbar_omega ** 2 * f.density * bracket


@dataclass(frozen=True)
class ScaledFrame:
    """Macroscopic frame ``t = lam * tbar``.

    ``barred`` holds the barred geometry (x1bar, Lbar and the packet size in
    barred units); the potential width stays microscopic, so in the barred
    frame it appears as Omega/lam.
    """

    barred: LimitFormulas
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"scale factor must be positive, got {self.lam}")

    def unscaled(self) -> LimitFormulas:
        """The same experiment in microscopic units: (x1, L, a) = lam * barred."""
        b = self.barred
        return replace(b, x1=self.lam * b.x1, L=self.lam * b.L, a=self.lam * b.a)

    def effective(self) -> LimitFormulas:
        """Barred geometry with the potential width shrunk to Omega/lam."""
        return replace(self.barred, width=self.barred.width / self.lam)


def scaled_covariance(frame: ScaledFrame, tb1: float, tb2: float) -> float:
    """Covariance of W(tbar) = Sigma(lam * tbar) written in barred variables."""
    return appendix_covariance(frame.effective(), tb1, tb2)


def wiener_deviation(frame: ScaledFrame, grid) -> float:
    """sup over the barred grid (diagonal included) of |scaled covariance - Wiener kernel|."""
    f = frame.effective()
    worst = 0.0
    for tb1 in grid:
        for tb2 in grid:
            wiener = f.hbar_omega ** 2 * f.density * (f.c * min(tb1, tb2) - f.x1)
            worst = max(worst, abs(scaled_covariance(frame, tb1, tb2) - wiener))
    return worst


def is_inside_window(f: LimitFormulas, t: float) -> bool:
    return f.x1 < f.c * t < f.xN


def decay_limit_factor(f: LimitFormulas, t: float) -> float:
    return math.exp(-limit_decay_exponent(f, t))
