"""Exact 2x2 algebra on a single spin site.

Basis ordering is (up, down); ``sigma_plus`` raises down to up.  The
phase-dressed ladder operators are ``sigma_pm(x) = sigma_pm * exp(-/+ i phi)``
with ``phi = omega * x / c``.  Matrices are plain complex numpy arrays; all
constructors broadcast over leading axes of their scalar arguments.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DisentanglementSingular

UP, DOWN = 0, 1

# series switch for cosh(mu) - (c3/mu) sinh(mu) near mu = 0
_SERIES_MU = 1e-6
# series switch for Y near a = 0, in units of z = 2 a sqrt(b^2 + 1)
_SERIES_Z = 1e-4
# cos(alpha) below this counts as zero for the disentangled form
_COS_FLOOR = 1e-12


def identity() -> np.ndarray:
    return np.eye(2, dtype=complex)


def sigma3() -> np.ndarray:
    return np.array([[1, 0], [0, -1]], dtype=complex)


def _stack(a, b, c, d) -> np.ndarray:
    a, b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a, b, c, d)))
    return np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)


def sigma_plus(phi=0.0) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    z = np.zeros_like(phi)
    return _stack(z, np.exp(-1j * phi), z, z)


def sigma_minus(phi=0.0) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    z = np.zeros_like(phi)
    return _stack(z, z, np.exp(1j * phi), z)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def site_unitary(alpha, phi=0.0) -> np.ndarray:
    """exp[-i alpha (sigma_+(x) + sigma_-(x))], using (sigma_+(x) + sigma_-(x))^2 = 1."""
    alpha = np.asarray(alpha, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ca, sa = np.cos(alpha), np.sin(alpha)
    return _stack(ca, -1j * sa * np.exp(-1j * phi), -1j * sa * np.exp(1j * phi), ca)


def free_phase(ct_phase) -> np.ndarray:
    """exp(-i H_D t / hbar) for one site, with ct_phase = omega * t."""
    ct_phase = np.asarray(ct_phase, dtype=float)
    z = np.zeros_like(ct_phase)
    return _stack(np.exp(-1j * ct_phase), z, z, np.ones_like(ct_phase))


def disentangled_product(alpha: float, phi: float = 0.0):
    """The three factors exp(-i tan a s+(x)), exp(-ln cos a s3), exp(-i tan a s-(x)).

    Their ordered product equals ``site_unitary(alpha, phi)``.  Needs cos(alpha) > 0.
    """
    ca = math.cos(alpha)
    if ca <= _COS_FLOOR:
        raise DisentanglementSingular(f"cos(alpha) = {ca:g} <= 0 at alpha = {alpha:g}")
    ta = math.tan(alpha)
    left = identity() - 1j * ta * sigma_plus(phi)
    middle = np.diag([1 / ca, ca]).astype(complex)
    right = identity() - 1j * ta * sigma_minus(phi)
    return left, middle, right


def heisenberg_sigma(kind: str, alpha, phi=0.0, ct_phase=0.0) -> np.ndarray:
    """Closed-form Heisenberg-picture sigma_kind(t) for one site, kind in plus/minus/three.

    ``alpha`` is the accumulated phase alpha_n(x, t), ``phi = omega x / c`` and
    ``ct_phase = omega t``.
    """
    alpha = np.asarray(alpha, dtype=float)
    c2, s2 = np.cos(alpha) ** 2, np.sin(alpha) ** 2
    sin2 = np.sin(2 * alpha)[..., None, None]
    sp, sm, s3 = sigma_plus(phi), sigma_minus(phi), sigma3()
    if kind == "three":
        return s3 * np.cos(2 * alpha)[..., None, None] - 1j * (sp - sm) * sin2
    phase = np.exp(1j * (np.asarray(phi) + np.asarray(ct_phase)))[..., None, None]
    if kind == "plus":
        return phase * (sp * c2[..., None, None] - 0.5j * s3 * sin2 + sm * s2[..., None, None])
    if kind == "minus":
        return np.conj(phase) * (sm * c2[..., None, None] + 0.5j * s3 * sin2
                                 + sp * s2[..., None, None])
    raise ValueError(f"unknown kind {kind!r}")


def site_energy_operator(alpha, phi=0.0, hbar_omega=1.0) -> np.ndarray:
    """Energy gained by one site up to time t:
    -hbar*omega [sigma3 sin^2(alpha) + (i/2)(sigma_+(x) - sigma_-(x)) sin(2 alpha)]."""
    alpha = np.asarray(alpha, dtype=float)
    sq = np.sin(alpha) ** 2
    s2a = np.sin(2 * alpha)
    e = np.exp(1j * np.asarray(phi, dtype=float))
    # sigma3*sq + (i/2) s2a (sigma_+ e^{-i phi} - sigma_- e^{i phi})
    return -hbar_omega * _stack(sq, 0.5j * s2a / e, -0.5j * s2a * e, -sq)


# -- characteristic factor and its disentangled form ---------------------


def char_factor(c1, c3):
    """<down| exp(c3 sigma3 + i c1 (sigma_+(x) - sigma_-(x))) |down>
    = cosh(mu) - (c3/mu) sinh(mu), mu = sqrt(c1^2 + c3^2)."""
    c1 = np.asarray(c1, dtype=float)
    c3 = np.asarray(c3, dtype=float)
    mu2 = c1 * c1 + c3 * c3
    mu = np.sqrt(mu2)
    small = mu < _SERIES_MU
    safe = np.where(small, 1.0, mu)
    exact = np.cosh(mu) - (c3 / safe) * np.sinh(mu)
    series = 1.0 - c3 + mu2 / 2 - c3 * mu2 / 6 + mu2 * mu2 / 24
    out = np.where(small, series, exact)
    return out[()] if out.ndim == 0 else out


def log_char_factor(c1, c3):
    """Overflow-safe log of :func:`char_factor`.

    With r = c3/mu the factor is e^mu (1-r)/2 + e^-mu (1+r)/2; the term (1-r)
    is formed as c1^2 / (mu (mu + c3)) to keep precision when c1 is small.
    """
    c1 = np.asarray(c1, dtype=float)
    c3 = np.asarray(c3, dtype=float)
    mu2 = c1 * c1 + c3 * c3
    mu = np.sqrt(mu2)
    # below mu = 1 the factor stays in [e^-1, e] and log1p(f - 1) is well conditioned
    small = mu < 1.0
    safe = np.where(small, 1.0, mu)
    one_minus_r = np.where(c3 > 0, c1 * c1 / (safe * (safe + np.abs(c3))), 1.0 - c3 / safe)
    one_plus_r = np.where(c3 < 0, c1 * c1 / (safe * (safe + np.abs(c3))), 1.0 + c3 / safe)
    big = safe + np.log(0.5 * one_minus_r + 0.5 * one_plus_r * np.exp(-2 * safe))
    # f - 1 = 2 sinh(mu/2)^2 - c3 sinh(mu)/mu, accurate near mu = 0
    m = np.minimum(mu, 1.0)
    sinhc = np.where(mu2 < 1e-12, 1.0 + mu2 / 6, np.sinh(m) / np.where(m == 0, 1.0, m))
    fm1 = 2 * np.sinh(m / 2) ** 2 - c3 * sinhc
    with np.errstate(invalid="ignore"):
        # the unused branch may be NaN; np.where discards it
        out = np.where(small, np.log1p(np.where(small, fm1, 0.0)), big)
    return out[()] if out.ndim == 0 else out


def _sqrt_terms(b):
    b = np.asarray(b, dtype=float)
    s = np.sqrt(b * b + 1.0)
    # s - b and s + b without cancellation; (s - b)(s + b) = 1
    s_minus = np.where(b > 0, 1.0 / (s + np.abs(b)), s - b)
    s_plus = np.where(b < 0, 1.0 / (s + np.abs(b)), s + b)
    return s, s_minus, s_plus


def X(a, b):
    """Solution of dX/da = 1 + 2bX - X^2 with X(0, b) = 0."""
    a = np.asarray(a, dtype=float)
    s, sm, sp = _sqrt_terms(b)
    z = 2 * a * s
    # rescale by exp(-z) when z > 0 so nothing overflows
    pos = z > 0
    e = np.exp(-np.abs(z))
    num = np.where(pos, -np.expm1(-np.abs(z)), np.expm1(np.minimum(z, 0.0)))
    den = np.where(pos, sp * e + sm, sp + sm * np.exp(np.minimum(z, 0.0)))
    out = num / den
    return out[()] if out.ndim == 0 else out


def Y(a, b):
    """Y(a, b) = a s + ln[2s / ((s + b) + (s - b) e^{2as})], s = sqrt(b^2 + 1)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s, sm, sp = _sqrt_terms(b)
    z = 2 * a * s
    pos = z > 0
    with np.errstate(over="ignore", invalid="ignore"):
        # bracket / 2s = 1 + u, rescaled by exp(-z) when z > 0
        u = np.where(pos, sp * np.expm1(-np.abs(z)), sm * np.expm1(np.minimum(z, 0.0))) / (2 * s)
        direct = np.log(np.where(pos, sp * np.exp(-np.abs(z)) + sm,
                                 sp + sm * np.exp(np.minimum(z, 0.0))) / (2 * s))
        log_bracket = np.where(np.abs(u) < 0.5, np.log1p(u), direct)
        out = np.where(pos, -a * s, a * s) - log_bracket
    # a s and the log cancel to first order near a = 0; use the Taylor series there
    series = a * b - a * a / 2 - b * a ** 3 / 3 - (4 * b * b - 2) * a ** 4 / 24
    out = np.where(np.abs(z) < _SERIES_Z, series, out)
    return out[()] if out.ndim == 0 else out


def disentangled_char_matrix(a: float, b: float, phi: float = 0.0) -> np.ndarray:
    """exp(i X s+(x)) exp(Y s3) exp(-i X s-(x)) built from the closed-form X, Y."""
    x, y = float(X(a, b)), float(Y(a, b))
    left = identity() + 1j * x * sigma_plus(phi)
    middle = np.diag([math.exp(y), math.exp(-y)]).astype(complex)
    right = identity() - 1j * x * sigma_minus(phi)
    return left @ middle @ right


def char_exponent(c1, c3, phi=0.0) -> np.ndarray:
    """The matrix c3 sigma3 + i c1 (sigma_+(x) - sigma_-(x))."""
    return (np.asarray(c3)[..., None, None] * sigma3()
            + 1j * np.asarray(c1)[..., None, None] * (sigma_plus(phi) - sigma_minus(phi)))
