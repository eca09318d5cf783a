"""Physical configuration of the spin-array detector and the incoming particle.

The bare coupling ``g = V0*Omega/(hbar*c)`` is the fundamental parameter.  A
coupling family fixes ``g**2 * N = n_bar`` so that the expected number of spin
flips stays finite as the array grows; the single-site flip probability is
``sin(g)**2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, Union

import numpy as np
from scipy.special import erf

from .errors import (
    ConfigError,
    CouplingOutOfRange,
    NonPositiveGeometry,
    PacketOverlapsArray,
    ValidityWarning,
)

# warn when the packet is not small against x1 or L
SCALE_RATIO_WARN = 0.01


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    c: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ConfigError(f"hbar must be positive, got {self.hbar}")
        if not self.c > 0:
            raise ConfigError(f"c must be positive, got {self.c}")
        if not self.omega >= 0:
            raise ConfigError(f"omega must be nonnegative, got {self.omega}")

    @property
    def hbar_omega(self) -> float:
        return self.hbar * self.omega


@dataclass(frozen=True)
class ArrayGeometry:
    """Equally spaced sites ``x_n = x1 + (n-1)*d`` for ``n = 1..N``."""

    x1: float
    d: float
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N}")
        if not self.x1 > 0:
            raise NonPositiveGeometry(f"x1 must be positive, got {self.x1}")
        if not self.d > 0:
            raise NonPositiveGeometry(f"d must be positive, got {self.d}")

    @classmethod
    def spanning(cls, x1: float, L: float, N: int) -> "ArrayGeometry":
        """Geometry with N sites covering ``[x1, x1 + L]``; used for N-sweeps at fixed L."""
        d = L / (N - 1) if N > 1 else 1.0
        return cls(x1=x1, d=d, N=N)

    @cached_property
    def positions(self) -> np.ndarray:
        xs = self.x1 + self.d * np.arange(self.N, dtype=float)
        xs.flags.writeable = False
        return xs

    @property
    def L(self) -> float:
        return (self.N - 1) * self.d

    @property
    def xN(self) -> float:
        return self.x1 + self.L


@dataclass(frozen=True)
class CouplingFamily:
    n_bar: float

    def __post_init__(self):
        if not (math.isfinite(self.n_bar) and self.n_bar >= 0):
            raise ConfigError(f"n_bar must be finite and nonnegative, got {self.n_bar}")

    def g(self, N: int) -> float:
        return math.sqrt(self.n_bar / N)

    def q_exact(self, N: int) -> float:
        return math.sin(self.g(N)) ** 2


# -- potential shapes -------------------------------------------------------


@dataclass(frozen=True)
class DiracDelta:
    g: float

    width = 0.0

    def __post_init__(self):
        if not self.g >= 0:
            raise ConfigError(f"coupling g must be nonnegative, got {self.g}")


@dataclass(frozen=True)
class Square:
    g: float
    width: float

    def __post_init__(self):
        if not self.g >= 0:
            raise ConfigError(f"coupling g must be nonnegative, got {self.g}")
        if not self.width > 0:
            raise ConfigError(f"square potential width must be positive, got {self.width}")


PotentialShape = Union[DiracDelta, Square]


# -- wave packets -----------------------------------------------------------


@dataclass(frozen=True)
class PointSource:
    x0: float = 0.0
    p0: float = 0.0

    @property
    def a(self) -> float:
        return 0.0

    @property
    def support(self) -> tuple[float, float]:
        return (self.x0, self.x0)


@dataclass(frozen=True)
class SquarePacket:
    a: float
    p0: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigError(f"packet half-width must be positive, got {self.a}")

    @property
    def support(self) -> tuple[float, float]:
        return (-self.a, self.a)


@dataclass(frozen=True)
class TruncatedGaussian:
    """|psi|^2 is a normal density of standard deviation ``a`` cut at ``|x| = a``
    and renormalized on ``[-a, a]``."""

    a: float
    p0: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigError(f"packet width must be positive, got {self.a}")

    @property
    def support(self) -> tuple[float, float]:
        return (-self.a, self.a)


WavePacket = Union[PointSource, SquarePacket, TruncatedGaussian]


def packet_density(packet: WavePacket, x):
    """Probability density |psi(x)|^2 of a spread-out packet.

    PointSource has no density; asking for one is a TypeError.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(packet, SquarePacket):
        return np.where(np.abs(x) <= packet.a, 1.0 / (2.0 * packet.a), 0.0)
    if isinstance(packet, TruncatedGaussian):
        a = packet.a
        norm = erf(1.0 / math.sqrt(2.0))
        rho = np.exp(-0.5 * (x / a) ** 2) / (math.sqrt(2.0 * math.pi) * a * norm)
        return np.where(np.abs(x) <= a, rho, 0.0)
    raise TypeError(f"{type(packet).__name__} has no density")


# -- full parameter set -----------------------------------------------------


@dataclass(frozen=True)
class ModelParams:
    constants: PhysicalConstants
    geometry: ArrayGeometry
    coupling: CouplingFamily
    potential: PotentialShape
    packet: WavePacket
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def g(self) -> float:
        return self.potential.g

    @property
    def q(self) -> float:
        return math.sin(self.potential.g) ** 2

    @property
    def L(self) -> float:
        return self.geometry.L

    @property
    def zeta(self) -> float:
        return self.packet.a / self.L if self.L > 0 else math.inf

    @property
    def hbar_omega(self) -> float:
        return self.constants.hbar_omega

    def with_N(self, N: int) -> "ModelParams":
        """Same family at a different N, keeping x1 and the array length L fixed."""
        geo = ArrayGeometry.spanning(self.geometry.x1, self.geometry.L, N)
        return make_params(self.constants, geo, self.coupling, _potential_kind(self.potential),
                           self.potential.width, self.packet)

    def with_constants(self, **kw) -> "ModelParams":
        c = self.constants
        consts = PhysicalConstants(**{"hbar": c.hbar, "c": c.c, "omega": c.omega, **kw})
        return make_params(consts, self.geometry, self.coupling, _potential_kind(self.potential),
                           self.potential.width, self.packet)

    def to_dict(self) -> dict[str, Any]:
        """Resolved configuration, in the config-file layout plus derived values."""
        pot = self.potential
        pk = self.packet
        packet: dict[str, Any] = {"kind": _packet_kind(pk), "p0": pk.p0}
        if isinstance(pk, PointSource):
            packet["x0"] = pk.x0
        else:
            packet["a"] = pk.a
        return {
            "constants": {"hbar": self.constants.hbar, "c": self.constants.c,
                          "omega": self.constants.omega},
            "geometry": {"x1": self.geometry.x1, "d": self.geometry.d, "N": self.geometry.N},
            "coupling": {"n_bar": self.coupling.n_bar},
            "potential": {"kind": _potential_kind(pot), "width": pot.width},
            "packet": packet,
            "derived": {"g": self.g, "g2": self.g ** 2, "q_exact": self.q, "L": self.L,
                        "xN": self.geometry.xN, "zeta": self.zeta},
        }


def _potential_kind(pot) -> str:
    return "delta" if isinstance(pot, DiracDelta) else "square"


def _packet_kind(pk) -> str:
    return {PointSource: "point", SquarePacket: "square", TruncatedGaussian: "gaussian"}[type(pk)]


def make_params(constants: PhysicalConstants, geometry: ArrayGeometry, coupling: CouplingFamily,
                potential_kind: str = "delta", width: float = 0.0,
                packet: WavePacket | None = None) -> ModelParams:
    """Validate and assemble a ModelParams; the coupling g is derived from the family."""
    N = geometry.N
    if coupling.n_bar / N > (math.pi / 2) ** 2:
        raise CouplingOutOfRange(
            f"n_bar/N = {coupling.n_bar / N:g} puts g beyond pi/2 (principal branch)")
    g = coupling.g(N)
    if potential_kind == "delta":
        potential: PotentialShape = DiracDelta(g)
    elif potential_kind == "square":
        potential = Square(g, width)
    else:
        raise ConfigError(f"unknown potential kind {potential_kind!r}")
    packet = PointSource() if packet is None else packet

    lo, hi = packet.support
    half = potential.width / 2
    if hi >= geometry.x1 - half and lo <= geometry.xN + half:
        raise PacketOverlapsArray(
            f"packet support [{lo:g}, {hi:g}] meets the array [{geometry.x1 - half:g}, "
            f"{geometry.xN + half:g}]")

    notes = []
    a = packet.a
    if a / geometry.x1 > SCALE_RATIO_WARN:
        notes.append(f"a/x1 = {a / geometry.x1:.3g} exceeds {SCALE_RATIO_WARN}")
    if a > 0 and (geometry.L == 0 or a / geometry.L > SCALE_RATIO_WARN):
        notes.append(f"a/L = {a / geometry.L if geometry.L else math.inf:.3g} "
                     f"exceeds {SCALE_RATIO_WARN}")
    for note in notes:
        warnings.warn(note, ValidityWarning, stacklevel=3)
    return ModelParams(constants, geometry, coupling, potential, packet, tuple(notes))


def _finite(section: str, key: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{section}.{key} must be finite, got {value!r}")
    return v


def build_params(raw: Mapping[str, Any]) -> ModelParams:
    """Build validated parameters from a config mapping.

    Expected layout (missing sections fall back to defaults)::

        {"constants": {"hbar", "c", "omega"},
         "geometry": {"x1", "d", "N"},
         "coupling": {"n_bar"},
         "potential": {"kind": "delta"|"square", "width"},
         "packet": {"kind": "point"|"square"|"gaussian", "a", "p0", "x0"}}
    """
    cs = dict(raw.get("constants", {}))
    constants = PhysicalConstants(**{k: _finite("constants", k, v) for k, v in cs.items()})

    geo = raw["geometry"]
    N = geo["N"]
    if isinstance(N, float) and N.is_integer():
        N = int(N)
    if not isinstance(N, int) or isinstance(N, bool):
        raise ConfigError(f"geometry.N must be an integer, got {N!r}")
    geometry = ArrayGeometry(_finite("geometry", "x1", geo["x1"]),
                             _finite("geometry", "d", geo["d"]), N)

    coupling = CouplingFamily(_finite("coupling", "n_bar", raw["coupling"]["n_bar"]))

    pot = raw.get("potential", {"kind": "delta"})
    kind = pot.get("kind", "delta")
    width = _finite("potential", "width", pot.get("width", 0.0))

    pk = raw.get("packet", {"kind": "point"})
    pkind = pk.get("kind", "point")
    p0 = _finite("packet", "p0", pk.get("p0", 0.0))
    if pkind == "point":
        packet: WavePacket = PointSource(_finite("packet", "x0", pk.get("x0", 0.0)), p0)
    elif pkind == "square":
        packet = SquarePacket(_finite("packet", "a", pk["a"]), p0)
    elif pkind == "gaussian":
        packet = TruncatedGaussian(_finite("packet", "a", pk["a"]), p0)
    else:
        raise ConfigError(f"unknown packet kind {pkind!r}")
    return make_params(constants, geometry, coupling, kind, width, packet)
