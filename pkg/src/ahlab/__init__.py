"""Exact finite-N laboratory for the modified Coleman-Hepp spin-array detector.

A relativistic particle crosses a line of N spin-1/2 sites, flipping each with
probability sin(g)^2 and depositing hbar*omega per flip.  The package computes
the resulting observables exactly at finite N and compares them with their
weak-coupling macroscopic limit, where the detector-energy fluctuation becomes
a Wiener process.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    ArrayGeometry,
    CouplingFamily,
    DiracDelta,
    ModelParams,
    PhysicalConstants,
    PointSource,
    Square,
    SquarePacket,
    TruncatedGaussian,
    build_params,
    make_params,
    packet_density,
)

__all__ = [
    "__version__",
    "ArrayGeometry",
    "CouplingFamily",
    "DiracDelta",
    "ModelParams",
    "PhysicalConstants",
    "PointSource",
    "Square",
    "SquarePacket",
    "TruncatedGaussian",
    "build_params",
    "make_params",
    "packet_density",
]
