"""Interaction phase accumulated by one site while the particle moves along x + ct.

alpha_n(x, t) = (1/hbar) * integral_0^t V(x + c t' - x_n) dt'
             = g * (fraction of the potential's area swept between x - x_n and x + ct - x_n)

For the delta potential the fraction is a product of step functions with the
convention theta(0) = 1/2; for the square potential it is the clamped overlap
of the swept interval with [-width/2, width/2].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SiteIndexOutOfRange
from .model import ArrayGeometry, DiracDelta, ModelParams, PotentialShape


def alpha_at(shape: PotentialShape, xn, x, ct):
    """Vectorized phase for sites at positions ``xn``; broadcasts all arguments."""
    xn = np.asarray(xn, dtype=float)
    x = np.asarray(x, dtype=float)
    ct = np.asarray(ct, dtype=float)
    if isinstance(shape, DiracDelta):
        return shape.g * np.heaviside(x + ct - xn, 0.5) * np.heaviside(xn - x, 0.5)
    w = shape.width / 2
    swept = np.minimum(w, x + ct - xn) - np.maximum(x - xn, -w)
    return (shape.g / shape.width) * np.maximum(swept, 0.0)


@dataclass(frozen=True)
class AlphaProfile:
    shape: PotentialShape
    geometry: ArrayGeometry
    c: float = 1.0

    @classmethod
    def from_params(cls, params: ModelParams) -> "AlphaProfile":
        return cls(params.potential, params.geometry, params.constants.c)

    def site_positions(self, n) -> np.ndarray:
        n = np.asarray(n)
        if np.any(n < 1) or np.any(n > self.geometry.N):
            raise SiteIndexOutOfRange(f"site index outside 1..{self.geometry.N}")
        return self.geometry.positions[n.astype(int) - 1]


def alpha(profile: AlphaProfile, n, x, t):
    """Phase of site ``n`` (1-based) for a particle that started at ``x``, at time ``t >= 0``."""
    xn = profile.site_positions(n)
    out = alpha_at(profile.shape, xn, x, profile.c * np.asarray(t, dtype=float))
    return out[()] if out.ndim == 0 else out


def alpha_tilde(profile: AlphaProfile, n, t):
    """Phase for a particle emitted at the origin; the factor entering the propagator."""
    return alpha(profile, n, 0.0, t)
