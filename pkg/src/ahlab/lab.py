"""N-sweeps at fixed n_bar: exact finite-N observables against their limits.

Probe times are given as fractions f of the array, ``c t = x1 + f L``.  With
x1 and L fixed and ``d = L/(N-1)``, a fraction with integer f*N lands strictly
between sites and a point source has passed exactly f*N of them, so the only
N-dependence left in the errors is the O(1/N) physics being measured.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .charfunc import CharEvaluator, GaussianEvaluator, cumulants_from_char, gaussian_kernel
from .limits import (
    LimitFormulas,
    limit_covariance,
    limit_decay_exponent,
    limit_mean_energy,
    limit_mean_energy_interior,
)
from .model import ModelParams, SquarePacket
from .observables import (
    decay_exponent,
    mean_detector_energy,
    moment_table,
    sigma_covariance,
    single_time_cumulants,
)

OBSERVABLES = ("decay", "covariance", "mean_energy", "charfunc")
DEFAULT_LADDER = (1000, 2000, 4000, 8000)
MIN_FIT_POINTS = 4


@dataclass(frozen=True)
class SweepPlan:
    base: ModelParams
    N_values: tuple[int, ...] = DEFAULT_LADDER
    observable: str = "decay"
    fractions: tuple[float, ...] = (0.25, 0.5, 0.75)
    betas: tuple[float, ...] | None = None
    drop_smallest: bool = False
    expected_slope: float = -1.0
    slope_tol: float = 0.1

    def __post_init__(self):
        if self.observable not in OBSERVABLES:
            raise ValueError(f"unknown observable {self.observable!r}; pick from {OBSERVABLES}")
        ns = list(self.N_values)
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("N ladder must be strictly increasing")
        if self.betas is not None and len(self.betas) != len(self.fractions):
            raise ValueError("one weight per probe fraction is needed")

    def times(self) -> list[float]:
        geo, c = self.base.geometry, self.base.constants.c
        x0 = getattr(self.base.packet, "x0", 0.0)
        return [(geo.x1 + f * geo.L - x0) / c for f in self.fractions]


@dataclass
class ConvergenceReport:
    label: str
    N: list[int]
    errors: list[float]
    slope: float
    intercept: float
    residual: float
    expected_slope: float
    slope_tol: float
    mode: str
    passed: bool
    dropped: list[int] = field(default_factory=list)
    stamp: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def fit_loglog(N: Sequence[int], errors: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line through (log N, log err); returns slope, intercept, rms residual."""
    if len(N) < MIN_FIT_POINTS:
        raise ValueError(f"a rate fit needs at least {MIN_FIT_POINTS} points, got {len(N)}")
    x = np.log(np.asarray(N, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), float(intercept), resid


def make_report(label: str, N: Sequence[int], errors: Sequence[float], expected: float = -1.0,
                tol: float = 0.1, mode: str = "band", drop_smallest: bool = False,
                stamp: dict | None = None) -> ConvergenceReport:
    """Fit a rate and judge it.

    ``mode="band"`` passes when |slope - expected| <= tol, ``mode="at_most"``
    when slope <= expected.  Identically zero errors (nothing to converge)
    pass with a NaN slope.
    """
    N, errors = list(N), [float(e) for e in errors]
    dropped = []
    if drop_smallest:
        dropped = [N[0]]
        N, errors = N[1:], errors[1:]
    if len(N) < MIN_FIT_POINTS:
        raise ValueError(f"a rate fit needs at least {MIN_FIT_POINTS} points, got {len(N)}")
    if all(e == 0 for e in errors):
        return ConvergenceReport(label, N, errors, math.nan, math.nan, 0.0, expected, tol, mode,
                                 True, dropped, stamp or {})
    slope, intercept, resid = fit_loglog(N, errors)
    if mode == "band":
        ok = abs(slope - expected) <= tol
    elif mode == "at_most":
        ok = slope <= expected
    else:
        raise ValueError(f"unknown fit mode {mode!r}")
    return ConvergenceReport(label, N, errors, slope, intercept, resid, expected, tol, mode, ok,
                             dropped, stamp or {})


def _stamp(plan: SweepPlan, **extra) -> dict:
    return {"version": __version__, "params": plan.base.to_dict(),
            "N_values": list(plan.N_values), "fractions": list(plan.fractions),
            "times": plan.times(), "betas": None if plan.betas is None else list(plan.betas),
            **extra}


def _rel(exact: float, limit: float) -> float:
    if limit == 0:
        return abs(exact)
    return abs(exact / limit - 1.0)


def sweep_error(params: ModelParams, plan: SweepPlan) -> float:
    """Sup-over-grid error of one observable at one N."""
    f = LimitFormulas.from_params(params)
    times = plan.times()
    obs = plan.observable
    if params.coupling.n_bar == 0:
        return 0.0
    if obs == "decay":
        return max(_rel(decay_exponent(params, t), limit_decay_exponent(f, t)) for t in times)
    if obs == "mean_energy":
        return max(_rel(mean_detector_energy(params, t), limit_mean_energy_interior(f, t))
                   for t in times)
    if obs == "covariance":
        return max(_rel(sigma_covariance(params, t1, t2), limit_covariance(f, t1, t2))
                   for i, t1 in enumerate(times) for t2 in times[i:])
    betas = np.asarray(plan.betas if plan.betas is not None else [0.25] * len(times))
    exact = CharEvaluator(params, times)(betas)
    gauss = GaussianEvaluator(params, times)(betas)
    return abs(exact - gauss)


def run_sweep(plan: SweepPlan) -> ConvergenceReport:
    errors = [sweep_error(plan.base.with_N(n), plan) for n in plan.N_values]
    return make_report(plan.observable, plan.N_values, errors, plan.expected_slope,
                       plan.slope_tol, "band", plan.drop_smallest, _stamp(plan))


# -- Gaussianity ----------------------------------------------------------------


@dataclass
class GaussianityReport:
    kappa3: ConvergenceReport
    kappa4: ConvergenceReport
    wick: ConvergenceReport
    control_max: float
    control_tol: float

    @property
    def control_passed(self) -> bool:
        return self.control_max <= self.control_tol

    def to_dict(self) -> dict:
        return {"kappa3": self.kappa3.to_dict(), "kappa4": self.kappa4.to_dict(),
                "wick": self.wick.to_dict(), "control_max": self.control_max,
                "control_tol": self.control_tol, "control_passed": self.control_passed}


def wick_residual(params: ModelParams, times: Sequence[float]) -> complex:
    """m4 - (sum of the three pairings of ordered two-point functions), order as written."""
    if len(times) != 4:
        raise ValueError("the Wick residual needs exactly four times")
    m = moment_table(params, times, centered=True)
    pairs = (m[(0, 1)] * m[(2, 3)] + m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)])
    return complex(m[(0, 1, 2, 3)] - pairs)


def gaussian_control(params: ModelParams, times: Sequence[float]) -> float:
    """Largest |third or fourth cumulant| of the Gaussian limit through the finite-difference route."""
    ev = GaussianEvaluator(params, times)
    scales = np.diag(gaussian_kernel(params, times))
    worst = 0.0
    for order in (3, 4):
        vals = cumulants_from_char(ev, len(times), order, scales=scales)
        worst = max(worst, max(abs(v) for v in vals.values()))
    return worst


def gaussianity_sweep(plan: SweepPlan, wick_mode: str = "at_most",
                      control_tol: float = 1e-8) -> GaussianityReport:
    """|kappa3|, |kappa4| at the first probe and the four-time Wick residual, per N.

    The Wick residual needs four probe fractions; with fewer the first one is
    repeated.
    """
    times = plan.times()
    t0 = times[0]
    wick_times = (times + [times[-1]] * 4)[:4] if len(times) < 4 else times[:4]
    k3, k4, wk = [], [], []
    for n in plan.N_values:
        p = plan.base.with_N(n)
        kap = single_time_cumulants(p, t0, 4)
        k3.append(abs(kap[2]))
        k4.append(abs(kap[3]))
        wk.append(abs(wick_residual(p, wick_times)))
    stamp = _stamp(plan, wick_times=wick_times)
    args = (plan.expected_slope, plan.slope_tol)
    return GaussianityReport(
        make_report("kappa3", plan.N_values, k3, *args, "band", plan.drop_smallest, stamp),
        make_report("kappa4", plan.N_values, k4, *args, "band", plan.drop_smallest, stamp),
        make_report("wick", plan.N_values, wk, *args, wick_mode, plan.drop_smallest, stamp),
        gaussian_control(plan.base.with_N(plan.N_values[-1]), times), control_tol)


# -- border effects ---------------------------------------------------------------


def r_squared(data: np.ndarray, model: np.ndarray) -> float:
    """1 - SS_res/SS_tot of data against a parameter-free model curve."""
    data, model = np.asarray(data), np.asarray(model)
    ss_tot = float(np.sum((data - data.mean()) ** 2))
    ss_res = float(np.sum((data - model) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else -math.inf)


@dataclass
class BorderStudy:
    rows: list[dict]
    branch_sup: dict
    entry_r2: float
    exit_r2: float
    continuity: float
    saturation: float
    stamp: dict

    def to_dict(self) -> dict:
        return asdict(self)


def limit_branch(f: LimitFormulas, t: float) -> str:
    ct = f.c * t
    if ct <= f.x1 - f.a:
        return "before"
    if ct <= f.x1 + f.a:
        return "entry"
    if ct < f.xN - f.a:
        return "interior"
    if ct <= f.xN + f.a:
        return "exit"
    return "after"


def limit_continuity(f: LimitFormulas, delta: float = 1e-9) -> float:
    """Largest jump of the piecewise mean-energy limit across its four branch points."""
    worst = 0.0
    for b in (f.x1 - f.a, f.x1 + f.a, f.xN - f.a, f.xN + f.a):
        lo = limit_mean_energy(f, (b - delta) / f.c)
        hi = limit_mean_energy(f, (b + delta) / f.c)
        worst = max(worst, abs(hi - lo))
    return worst


def border_study(params: ModelParams, points_per_ramp: int = 41,
                 interior_points: int = 9) -> BorderStudy:
    """Exact mean energy across both borders for a square packet, against the limit branches."""
    if not isinstance(params.packet, SquarePacket):
        raise ValueError("the border study needs a square packet")
    f = LimitFormulas.from_params(params)
    c, a = f.c, f.a
    entry = np.linspace(f.x1 - a, f.x1 + a, points_per_ramp) / c
    exit_ = np.linspace(f.xN - a, f.xN + a, points_per_ramp) / c
    interior = np.linspace(f.x1 + 2 * a, f.xN - 2 * a, interior_points) / c
    before = np.array([f.x1 - 2 * a]) / c
    after = np.array([f.xN + 2 * a]) / c
    rows = []
    for t in np.concatenate([before, entry, interior, exit_, after]):
        ex = mean_detector_energy(params, float(t))
        lim = limit_mean_energy(f, float(t))
        rows.append({"t": float(t), "branch": limit_branch(f, float(t)), "exact": ex,
                     "limit": lim, "abs_err": abs(ex - lim)})
    sup: dict = {}
    for r in rows:
        sup[r["branch"]] = max(sup.get(r["branch"], 0.0), r["abs_err"])
    n_entry = len(entry)
    ent = rows[1:1 + n_entry]
    ext = rows[1 + n_entry + interior_points:1 + 2 * n_entry + interior_points]
    entry_r2 = r_squared([r["exact"] for r in ent], [r["limit"] for r in ent])
    exit_r2 = r_squared([r["exact"] for r in ext], [r["limit"] for r in ext])
    stamp = {"version": __version__, "params": params.to_dict()}
    return BorderStudy(rows, sup, entry_r2, exit_r2, limit_continuity(f), rows[-1]["exact"],
                       stamp)
