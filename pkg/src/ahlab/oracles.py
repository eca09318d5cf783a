"""Independent reference computations used to validate the exact engine.

Nothing here is used on the production path.  The 2x2 exponentials are two
unrelated algorithms; the dense chain works on the full 2**N spin space with
the particle position treated as the classical ray x + ct.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from .alpha import alpha_at
from .model import DiracDelta, ModelParams
from .site import sigma3, sigma_minus, sigma_plus


def expm_traceless(m: np.ndarray) -> np.ndarray:
    """exp(M) for a 2x2 matrix via M0^2 = mu^2 I on the traceless part M0."""
    m = np.asarray(m, dtype=complex)
    tr = np.trace(m) / 2
    m0 = m - tr * np.eye(2)
    mu = np.sqrt(-np.linalg.det(m0) + 0j)
    if abs(mu) < 1e-6:
        mu2 = mu * mu
        ch = 1 + mu2 / 2 + mu2 * mu2 / 24
        shc = 1 + mu2 / 6 + mu2 * mu2 / 120
    else:
        ch, shc = np.cosh(mu), np.sinh(mu) / mu
    return np.exp(tr) * (ch * np.eye(2) + shc * m0)


def expm_taylor(m: np.ndarray, terms: int = 13) -> np.ndarray:
    """exp(M) by scaling and squaring with a truncated Taylor series."""
    m = np.asarray(m, dtype=complex)
    norm = np.abs(m).sum(axis=1).max()
    k = max(0, int(math.ceil(math.log2(norm))) + 4) if norm > 0 else 0
    a = m / 2.0 ** k
    out = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for j in range(1, terms + 1):
        term = term @ a / j
        out = out + term
    for _ in range(k):
        out = out @ out
    return out


class DenseChain:
    """Full tensor-product spin chain for N <= 10 sites, ground state all down.

    The delta potential is propagated as a time-ordered sequence of kicks in the
    Schroedinger picture (free evolution under H_D between site crossings); the
    square potential uses the exponential of the summed interaction-picture
    generator.  Both are independent of the per-site factorization.
    """

    def __init__(self, params: ModelParams, x: float):
        n = params.geometry.N
        if n > 10:
            raise ValueError("dense oracle limited to N <= 10")
        self.params = params
        self.x = float(x)
        self.n = n
        self.dim = 2 ** n
        c = params.constants.c
        self.phi = params.constants.omega * self.x / c
        self.s3 = [self._embed(sigma3(), k) for k in range(n)]
        self.sp = [self._embed(sigma_plus(0.0), k) for k in range(n)]
        self.sm = [self._embed(sigma_minus(0.0), k) for k in range(n)]
        hw = params.hbar_omega
        self.H_D = 0.5 * hw * sum(np.eye(self.dim) + s for s in self.s3)
        self.ground = np.zeros(self.dim, dtype=complex)
        self.ground[-1] = 1.0  # |down ... down>
        self._cache: dict[float, np.ndarray] = {}

    def _embed(self, op: np.ndarray, k: int) -> np.ndarray:
        mats = [np.eye(2, dtype=complex)] * self.n
        mats[k] = op
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    def _free(self, t: float) -> np.ndarray:
        consts = self.params.constants
        # H_D is diagonal
        return np.diag(np.exp(-1j * np.diag(self.H_D).real * t / consts.hbar))

    def evolution(self, t: float) -> np.ndarray:
        """exp(-i H t / hbar) restricted to the spin space along the ray starting at x."""
        t = float(t)
        if t not in self._cache:
            self._cache[t] = self._evolution(t)
        return self._cache[t]

    def _evolution(self, t: float) -> np.ndarray:
        p = self.params
        c, omega = p.constants.c, p.constants.omega
        xs = p.geometry.positions
        if isinstance(p.potential, DiracDelta):
            g = p.potential.g
            u = np.eye(self.dim, dtype=complex)
            now = 0.0
            hits = sorted((float((xn - self.x) / c), k) for k, xn in enumerate(xs)
                          if self.x < xn and xn - self.x <= c * t)
            for t_hit, k in hits:
                u = self._free(t_hit - now) @ u
                now = t_hit
                # the phase is taken at the current particle position x_n; a kick on
                # one site is the embedding of its own 2x2 exponential
                ph = omega * xs[k] / c
                gen = sigma_plus(0.0) * np.exp(-1j * ph) + sigma_minus(0.0) * np.exp(1j * ph)
                u = self._embed(expm(-1j * g * gen), k) @ u
            return self._free(t - now) @ u
        alphas = alpha_at(p.potential, xs, self.x, c * t)
        gen = sum(a * (self.sp[k] * np.exp(-1j * self.phi) + self.sm[k] * np.exp(1j * self.phi))
                  for k, a in enumerate(alphas))
        return self._free(t) @ expm(-1j * gen)

    def delta_HD(self, t: float) -> np.ndarray:
        u = self.evolution(t)
        return u.conj().T @ self.H_D @ u - self.H_D

    def expect(self, op: np.ndarray) -> complex:
        return complex(self.ground.conj() @ op @ self.ground)

    def propagator_factor(self, t: float) -> complex:
        return self.expect(self.evolution(t))

    def site_sum(self, coeffs, which: str) -> np.ndarray:
        """sum_n coeffs[n] * O_n for O in s3, J = sigma_+(x) - sigma_-(x), K = sigma_+(x) + sigma_-(x)."""
        ph = self.phi
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k, cf in enumerate(coeffs):
            if which == "s3":
                op = self.s3[k]
            elif which == "J":
                op = self.sp[k] * np.exp(-1j * ph) - self.sm[k] * np.exp(1j * ph)
            elif which == "K":
                op = self.sp[k] * np.exp(-1j * ph) + self.sm[k] * np.exp(1j * ph)
            else:
                raise ValueError(which)
            out = out + cf * op
        return out


def dense_packet_average(params: ModelParams, nodes, weights, fn):
    """sum_j w_j fn(DenseChain(params, x_j)) for a quadrature over the packet."""
    return sum(w * fn(DenseChain(params, x)) for x, w in zip(nodes, weights))
