"""Command-line interface: ``ahlab <subcommand> [--config cfg.json] [--out dir] ...``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 validity-window violation (unless ``--allow-border`` turns those into
flagged rows).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .config import load_config
from .errors import AhlabError, ConfigError, OutsideValidityWindow, ValidityWarning
from .model import ModelParams, PointSource, SquarePacket, build_params

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_WINDOW = 0, 1, 2, 3


# -- output -----------------------------------------------------------------------


def _cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


class Output:
    def __init__(self, args: argparse.Namespace, params: ModelParams | None, config: dict):
        self.args = args
        self.params = params
        self.config = config

    def header(self) -> dict:
        return {"tool": "ahlab", "version": __version__,
                "params": self.params.to_dict() if self.params else None,
                "run": self.config.get("run", {})}

    def write(self, name: str, columns: Sequence[str], rows: Sequence[Sequence[Any]],
              meta: dict | None = None) -> None:
        head = self.header()
        if meta:
            head["meta"] = meta
        if self.args.format == "json":
            doc = dict(head, columns=list(columns),
                       rows=[dict(zip(columns, r)) for r in rows])
            text = json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n"
        else:
            lines = [f"# {json.dumps(_jsonable({k: v}), sort_keys=True)}" for k, v in head.items()]
            lines.append(",".join(columns))
            lines += [",".join(_cell(v) for v in r) for r in rows]
            text = "\n".join(lines) + "\n"
        if self.args.out:
            out = Path(self.args.out)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"{name}.{self.args.format}"
            path.write_text(text)
            print(f"wrote {path}")
        else:
            sys.stdout.write(text)


# -- helpers ----------------------------------------------------------------------


def _grid(spec, default: np.ndarray) -> np.ndarray:
    if spec is None:
        return default
    if isinstance(spec, dict):
        return np.linspace(spec["start"], spec["stop"], spec["num"])
    return np.asarray(spec, dtype=float)


def _times(params: ModelParams, run: dict, default: np.ndarray) -> np.ndarray:
    from .observables import snap_times

    ts = _grid(run.get("times"), default)
    if np.any(ts < 0):
        raise ConfigError("probe times must be nonnegative")
    return snap_times(params, ts) if run.get("snap", True) else ts


def _inside_default(params: ModelParams, num: int = 10) -> np.ndarray:
    g, c = params.geometry, params.constants.c
    return (g.x1 + g.L * np.linspace(0.1, 0.9, num)) / c


def _span_default(params: ModelParams, num: int = 41) -> np.ndarray:
    g, c = params.geometry, params.constants.c
    return np.linspace(0.0, (g.xN + 0.2 * g.L) / c, num)


def _map(args, fn: Callable, items) -> list:
    items = list(items)
    if args.threads and args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _guarded(args, fn: Callable, *a) -> tuple[float, bool]:
    """Evaluate a limit formula; outside its window either flag the row or abort."""
    try:
        return fn(*a), False
    except OutsideValidityWindow:
        if args.allow_border:
            return math.nan, True
        raise


# -- commands -----------------------------------------------------------------------


def cmd_decay(args, params, cfg, out: Output) -> int:
    from .limits import LimitFormulas, limit_decay_exponent
    from .observables import propagator_factor

    f = LimitFormulas.from_params(params)
    ts = _times(params, cfg.get("run", {}), _span_default(params))
    exact = _map(args, lambda t: propagator_factor(params, t), ts)
    rows = []
    for t, ex in zip(ts, exact):
        lim = math.exp(-limit_decay_exponent(f, t))
        rows.append((t, ex, lim, abs(ex / lim - 1.0)))
    out.write("decay", ("t", "exact", "limit", "rel_err"), rows)
    return EXIT_OK


def cmd_energy(args, params, cfg, out: Output) -> int:
    from .limits import LimitFormulas, limit_mean_energy, limit_mean_energy_interior
    from .observables import mean_detector_energy

    f = LimitFormulas.from_params(params)
    border_known = f.packet_kind in ("point", "square")
    ts = _times(params, cfg.get("run", {}), _span_default(params))
    exact = _map(args, lambda t: mean_detector_energy(params, t), ts)
    cp0 = params.constants.c * params.packet.p0
    rows = []
    for t, ex in zip(ts, exact):
        lim = limit_mean_energy(f, t) if border_known else limit_mean_energy_interior(f, t)
        rows.append((t, ex, lim, abs(ex - lim), cp0 - ex, not border_known))
    out.write("energy", ("t", "exact", "limit", "abs_err", "momentum", "border_not_modeled"),
              rows)
    return EXIT_OK


def cmd_covariance(args, params, cfg, out: Output) -> int:
    from .limits import LimitFormulas, limit_covariance
    from .observables import covariance_with_residue

    f = LimitFormulas.from_params(params)
    ts = _times(params, cfg.get("run", {}), _inside_default(params))
    pairs = [(i, j) for i in range(len(ts)) for j in range(len(ts))]
    vals = _map(args, lambda ij: covariance_with_residue(params, ts[ij[0]], ts[ij[1]]), pairs)
    n = len(ts)
    exact = np.array([v[0] for v in vals]).reshape(n, n)
    residue = max(abs(v[1]) for v in vals)
    limit = np.empty((n, n))
    flagged = 0
    for i, j in pairs:
        limit[i, j], bad = _guarded(args, limit_covariance, f, ts[i], ts[j])
        flagged += bad
    cols = ["kind", "t"] + [f"t={_cell(t)}" for t in ts]
    rows = [["exact", t] + list(exact[i]) for i, t in enumerate(ts)]
    rows += [["limit", t] + list(limit[i]) for i, t in enumerate(ts)]
    out.write("covariance", cols, rows,
              {"max_imag_residue": residue, "flagged_limit_entries": flagged})
    return EXIT_OK


def cmd_cumulants(args, params, cfg, out: Output) -> int:
    from .charfunc import CharEvaluator, mixed_cumulant, gaussian_kernel
    from .observables import single_time_cumulants

    run = cfg.get("run", {})
    order = run.get("max_order", 4)
    ts = _times(params, run, _inside_default(params, 5))

    def one(t):
        kap = single_time_cumulants(params, t, order)
        ev = CharEvaluator(params, [t])
        k2c = mixed_cumulant(ev, 1, (0, 0), scales=np.diag(gaussian_kernel(params, [t])))
        return kap, k2c

    rows = []
    for t, (kap, k2c) in zip(ts, _map(args, one, ts)):
        kap = kap + [math.nan] * (4 - len(kap))
        k2 = kap[1] if order >= 2 else math.nan
        rows.append((t, *kap[1:], k2c, abs(k2c - k2)))
    out.write("cumulants", ("t", "kappa2", "kappa3", "kappa4", "kappa2_char", "route_gap"), rows)
    return EXIT_OK


def cmd_charfunc(args, params, cfg, out: Output) -> int:
    from .charfunc import CharEvaluator, GaussianEvaluator, ProbeSpec

    run = cfg.get("run", {})
    ts = _times(params, run, _inside_default(params, 4))
    betas = np.asarray(run.get("betas", [0.25] * len(ts)), dtype=float)
    if len(betas) != len(ts):
        raise ConfigError("run.betas needs one weight per probe time")
    ProbeSpec(tuple(ts), tuple(betas))
    scales = run.get("beta_scales", [0.0, 0.25, 0.5, 1.0, 2.0])
    ev, ga = CharEvaluator(params, ts), GaussianEvaluator(params, ts)
    rows = []
    for s in scales:
        le, lg = ev(s * betas), ga(s * betas)
        rows.append((s, le, lg, abs(le - lg)))
    out.write("charfunc", ("beta_scale", "log_phi_exact", "log_phi_gauss", "abs_gap"), rows,
              {"times": list(ts), "betas": list(betas)})
    return EXIT_OK


def cmd_appendix(args, params, cfg, out: Output) -> int:
    from .limits import LimitFormulas, appendix_covariance, appendix_mean_energy
    from .observables import mean_detector_energy, sigma_covariance

    if params.potential.width <= 0:
        raise ConfigError("the appendix command needs potential.kind = 'square' with a width")
    f = LimitFormulas.from_params(params)
    ts = _times(params, cfg.get("run", {}), _inside_default(params, 9))
    exact = _map(args, lambda t: (mean_detector_energy(params, t),
                                  sigma_covariance(params, t, t)), ts)
    rows = []
    for t, (em, ev) in zip(ts, exact):
        am, bad1 = _guarded(args, appendix_mean_energy, f, t)
        av, bad2 = _guarded(args, appendix_covariance, f, t, t)
        rows.append((t, em, am, abs(em - am), ev, av, abs(ev - av), bad1 or bad2))
    out.write("appendix", ("t", "exact_mean", "appendix_mean", "mean_err", "exact_var",
                           "appendix_var", "var_err", "outside_window"), rows)
    return EXIT_OK


def cmd_scale(args, params, cfg, out: Output) -> int:
    from .limits import LimitFormulas, ScaledFrame, wiener_deviation

    run = cfg.get("run", {})
    barred = LimitFormulas.from_params(params)
    if barred.width <= 0:
        raise ConfigError("the scale command needs a square potential with a width")
    grid = _grid(run.get("times"), _inside_default(params, 9))
    lams = run.get("lambdas", [1.0, 2.0, 4.0, 8.0])
    devs = [wiener_deviation(ScaledFrame(barred, lam), grid) for lam in lams]
    rows = [(lam, d, i == 0 or d < devs[i - 1]) for i, (lam, d) in enumerate(zip(lams, devs))]
    out.write("scale", ("lambda", "wiener_deviation", "decreasing"), rows,
              {"barred_grid": list(grid)})
    return EXIT_OK


def cmd_sweep(args, params, cfg, out: Output) -> int:
    from .lab import DEFAULT_LADDER, SweepPlan, border_study, gaussianity_sweep, run_sweep

    run = cfg.get("run", {})
    obs = run.get("observable", "decay")
    if obs == "border":
        study = border_study(params)
        rows = [(r["t"], r["branch"], r["exact"], r["limit"], r["abs_err"]) for r in study.rows]
        out.write("sweep_border", ("t", "branch", "exact", "limit", "abs_err"), rows,
                  {"entry_r2": study.entry_r2, "exit_r2": study.exit_r2,
                   "continuity": study.continuity, "branch_sup": study.branch_sup})
        return EXIT_OK
    fractions = tuple(run.get("fractions", (0.25, 0.5, 0.75) if obs != "charfunc"
                              else (0.2, 0.4, 0.6, 0.8)))
    betas = tuple(run["betas"]) if "betas" in run else None
    plan = SweepPlan(params, tuple(run.get("N_values", DEFAULT_LADDER)),
                     "decay" if obs == "gaussianity" else obs, fractions, betas,
                     run.get("drop_smallest", False))
    if obs == "gaussianity":
        g = gaussianity_sweep(plan)
        rows = [(n, a, b, c) for n, a, b, c in zip(g.kappa3.N, g.kappa3.errors,
                                                   g.kappa4.errors, g.wick.errors)]
        meta = {k: {"slope": r.slope, "residual": r.residual, "passed": r.passed,
                    "mode": r.mode, "dropped": r.dropped}
                for k, r in (("kappa3", g.kappa3), ("kappa4", g.kappa4), ("wick", g.wick))}
        meta["gaussian_control_max"] = g.control_max
        out.write("sweep_gaussianity", ("N", "abs_kappa3", "abs_kappa4", "wick_residual"),
                  rows, meta)
        return EXIT_OK
    rep = run_sweep(plan)
    rows = list(zip(rep.N, rep.errors))
    out.write(f"sweep_{obs}", ("N", "error"), rows,
              {"slope": rep.slope, "intercept": rep.intercept, "residual": rep.residual,
               "expected_slope": rep.expected_slope, "slope_tol": rep.slope_tol,
               "passed": rep.passed, "dropped": rep.dropped, "fractions": list(fractions)})
    return EXIT_OK


def cmd_verify(args, params, cfg, out: Output) -> int:
    from .verify import first_failure, run_identity_suite

    samples = cfg.get("run", {}).get("samples", 1000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        results = run_identity_suite(seed=args.seed, samples=samples, corrupt=args.corrupt)
    for r in results:
        print(r.line())
    if args.out:
        out.write("verify", ("check", "residual", "tol", "passed"),
                  [(r.name, r.residual, r.tol, r.passed) for r in results], {"seed": args.seed})
    bad = first_failure(results)
    if bad is not None:
        print(f"verification failed: {bad.name} residual {bad.residual:.3e} "
              f"exceeds {bad.tol:.0e}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_reproduce_all(args, params, cfg, out: Output) -> int:
    from .acceptance import run_all

    results = run_all()
    for r in results:
        print(r.line())
    if args.out:
        out.write("acceptance", ("criterion", "title", "passed", "summary", "seconds"),
                  [(r.number, r.title, r.passed, r.summary, r.seconds) for r in results])
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "decay": (cmd_decay, "propagator factor vs exponential limit"),
    "energy": (cmd_energy, "mean detector energy vs linear dissipation with borders"),
    "covariance": (cmd_covariance, "two-time covariance matrix vs Wiener kernel"),
    "cumulants": (cmd_cumulants, "single-time cumulants, two routes for kappa2"),
    "charfunc": (cmd_charfunc, "log characteristic function, exact vs Gaussian"),
    "appendix": (cmd_appendix, "finite-width potential mean and variance"),
    "scale": (cmd_scale, "deviation from the Wiener kernel under time rescaling"),
    "sweep": (cmd_sweep, "N-sweep with fitted convergence rate"),
    "verify": (cmd_verify, "run the operator-identity and oracle suite"),
    "reproduce-all": (cmd_reproduce_all, "run every acceptance criterion"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ahlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ahlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config (built-in default when omitted)")
        p.add_argument("--out", help="output directory (stdout when omitted)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--threads", type=int, default=1, help="worker cap for per-time loops")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--allow-border", action="store_true",
                       help="flag rows outside a validity window instead of exiting")
        p.add_argument("--corrupt", default=None, help=argparse.SUPPRESS)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fn, _ = COMMANDS[args.command]
    try:
        cfg = load_config(args.config)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ValidityWarning)
            params = build_params(cfg)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return fn(args, params, cfg, Output(args, params, cfg))
    except OutsideValidityWindow as exc:
        print(f"validity window: {exc}", file=sys.stderr)
        return EXIT_WINDOW
    except (ConfigError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AhlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
