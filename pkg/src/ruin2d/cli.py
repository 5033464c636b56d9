"""Command-line front end.

One subcommand per invocation; every run emits a single result record
(JSON by default, CSV with ``--format csv``) echoing all effective
parameters, so any output line is reproducible from itself.  ``sweep``
evaluates a Cartesian product of comma-separated parameter lists and
always emits CSV, one row per grid point, with per-row errors recorded in
an ``error`` column instead of aborting the run.
"""

from __future__ import annotations

import csv
import io
import math
import sys
import time
from dataclasses import dataclass
from itertools import product
from typing import Callable, Optional, Sequence

from . import __version__
from .bivariate import (
    BivariateBRM,
    asym_approx,
    classify_regime,
    crude_upper_bound,
    early_window_bound,
    prop1_bounds,
    q_exponent,
    ruin_time_limit_cdf,
)
from .errors import (
    DegenerateDrift,
    DegenerateIS,
    EmptySample,
    InvalidInput,
    MissingConstant,
    NonConvergence,
    RegimeError,
)
from .levy import (
    BrownianModel,
    GammaModel,
    PerturbedGammaModel,
    StableModel,
    TwoLineBarrier,
    psi_levy,
)
from .montecarlo import (
    SimConfig,
    default_tilt,
    ks_statistic,
    sample_ruin_time,
    simulate_levy_psi,
    simulate_one_dim,
    simulate_psi,
)
from .numerics import QuadratureSpec
from .single import SinglePortfolio, ruin_finite, ruin_infinite
from .tail_constant import estimate_I_T, extrapolate_C

_REQUIRED = object()


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # "float" | "int" | "str"
    default: object = _REQUIRED
    choices: Optional[Sequence[str]] = None


class UsageError(Exception):
    pass


def _convert(p: Param, raw: str):
    try:
        if p.kind == "float":
            return float(raw)
        if p.kind == "int":
            return int(raw)
    except ValueError:
        raise UsageError(f"--{p.name} expects a {p.kind}, got {raw!r}")
    if p.choices is not None and raw not in p.choices:
        raise UsageError(
            f"--{p.name} must be one of {', '.join(p.choices)}; got {raw!r}"
        )
    return raw


_MC_FLAGS = [
    Param("paths", "int", 100_000),
    Param("steps", "int", 4096),
    Param("seed", "int", 0),
    Param("workers", "int", 1),
]

_TOL_FLAGS = [
    Param("abs-tol", "float", 1e-8),
    Param("rel-tol", "float", 1e-7),
]

_LEVY_MODEL_FLAGS = [
    Param("model", "str", "gamma",
          choices=("brownian", "gamma", "stable", "pgamma")),
    Param("lam", "float", 1.0),
    Param("alpha", "float", 1.5),
    Param("sigma", "float", 1.0),
    Param("sign", "str", "positive", choices=("positive", "negative")),
]


def _levy_model(g):
    name = g["model"]
    if name == "brownian":
        return BrownianModel(sign=g["sign"])
    if name == "gamma":
        return GammaModel(lam=g["lam"])
    if name == "stable":
        return StableModel(alpha=g["alpha"])
    return PerturbedGammaModel(lam=g["lam"], sigma=g["sigma"])


def _brm(g):
    u = g["u"]
    v = g.get("v")
    if v is None:
        v = g["a"] * u
    a_eff = g["a"] if u <= 0.0 else min(v / u, 1.0)
    return BivariateBRM(c1=g["c1"], c2=g["c2"], rho=g["rho"],
                        a=a_eff, u=u), v


def _sim_config(g, **extra) -> SimConfig:
    return SimConfig(n_paths=g["paths"], n_steps=g["steps"],
                     seed=g["seed"], workers=g["workers"], **extra)


def _parse_tilt(g, m, v, window_end=1.0):
    raw = g["tilt"]
    if raw == "none":
        return None
    if raw == "auto":
        return default_tilt(m, v=v, window_end=window_end)
    try:
        t1, t2 = (float(s) for s in raw.split(","))
    except ValueError:
        raise UsageError("--tilt expects 'none', 'auto' or 't1,t2'")
    return (t1, t2)


def _run_brm1(g):
    p = SinglePortfolio(c=g["c"], sigma=g["sigma"], u=g["u"], T=g["T"])
    value = ruin_infinite(p) if p.infinite_horizon else ruin_finite(p)
    return {"value": value, "method": "closed-form"}


def _run_brm2_bounds(g):
    m, v = _brm(g)
    lo, hi = prop1_bounds(m, v=v)
    return {"value": lo, "bounds": (lo, hi), "method": "sharp-tail-bounds"}


def _run_brm2_asym(g):
    m, _ = _brm(g)
    c_hat = g.get("C-hat")
    value = asym_approx(m, C_hat=c_hat)
    return {"value": value,
            "method": f"asym({classify_regime(m.a, m.rho).value})"}


def _run_brm2_crude(g):
    m, _ = _brm(g)
    return {"value": crude_upper_bound(m), "method": "marginal-min"}


def _run_brm2_early(g):
    m, _ = _brm(g)
    b = early_window_bound(m, g["T-window"])
    return {"value": b.bound,
            "method": f"early-window(valid={b.valid})"}


def _run_brm2_ruintime_cdf(g):
    return {"value": ruin_time_limit_cdf(g["x"], g["a"], g["rho"]),
            "method": f"limit-exponential(rate={q_exponent(g['a'], g['rho']) / 2.0:g})"}


def _run_constant(g):
    cfg = _sim_config(g)
    if g.get("T") is not None:
        est = estimate_I_T(g["a"], g["rho"], g["T"], cfg)
    else:
        est = extrapolate_C(g["a"], g["rho"], cfg)
    return {"value": est.value, "stderr": est.stderr, "seed": est.seed,
            "method": f"lattice-mc(T={est.T_used:g})"}


def _run_levy(g):
    model = _levy_model(g)
    bar = TwoLineBarrier(c1=g["c1"], c2=g["c2"], x=g["x"], y=g["y"],
                         T=g["T"])
    spec = QuadratureSpec(abs_tol=g["abs-tol"], rel_tol=g["rel-tol"])
    value = psi_levy(model, bar, spec)
    return {"value": value,
            "method": f"levy-exact(case={bar.case},{model.spectral_sign})"}


def _run_mc_psi2d(g):
    m, v = _brm(g)
    tilt = _parse_tilt(g, m, v, g["window-end"])
    cfg = _sim_config(g, is_drift=tilt, window_end=g["window-end"])
    est = simulate_psi(m, cfg, v=v)
    return {"value": est.value, "stderr": est.stderr,
            "ci": (est.ci_low, est.ci_high), "seed": g["seed"],
            "method": est.method}


def _run_mc_psi1d(g):
    p = SinglePortfolio(c=g["c"], sigma=g["sigma"], u=g["u"], T=g["T"])
    cfg = _sim_config(g)
    est = simulate_one_dim(p, cfg, bridge=g["bridge"] != "off")
    return {"value": est.value, "stderr": est.stderr,
            "ci": (est.ci_low, est.ci_high), "seed": g["seed"],
            "method": est.method}


def _run_mc_levy(g):
    model = _levy_model(g)
    bar = TwoLineBarrier(c1=g["c1"], c2=g["c2"], x=g["x"], y=g["y"],
                         T=g["T"])
    cfg = _sim_config(g)
    est = simulate_levy_psi(model, bar, cfg)
    return {"value": est.value, "stderr": est.stderr,
            "ci": (est.ci_low, est.ci_high), "seed": g["seed"],
            "method": est.method}


def _run_mc_ruintime(g):
    m, v = _brm(g)
    tilt = _parse_tilt(g, m, v)
    cfg = _sim_config(g, is_drift=tilt)
    sample = sample_ruin_time(m, cfg)
    ks = ks_statistic(
        sample, lambda x: ruin_time_limit_cdf(x, m.a, m.rho))
    return {"value": ks, "seed": g["seed"],
            "method": f"{sample.method};ks-vs-limit(n={sample.values.size})"}


_BRM2_COMMON = [
    Param("c1", "float"), Param("c2", "float"), Param("rho", "float"),
    Param("a", "float", 1.0), Param("u", "float"),
    Param("v", "float", None),
]

COMMANDS = {
    ("brm1",): (
        [Param("c", "float"), Param("sigma", "float", 1.0),
         Param("u", "float"), Param("T", "float", 1.0)],
        _run_brm1),
    ("brm2", "bounds"): (_BRM2_COMMON, _run_brm2_bounds),
    ("brm2", "asym"): (_BRM2_COMMON + [Param("C-hat", "float", None)],
                       _run_brm2_asym),
    ("brm2", "crude"): (_BRM2_COMMON, _run_brm2_crude),
    ("brm2", "early-bound"): (_BRM2_COMMON + [Param("T-window", "float")],
                              _run_brm2_early),
    ("brm2", "ruintime-cdf"): (
        [Param("a", "float"), Param("rho", "float"), Param("x", "float")],
        _run_brm2_ruintime_cdf),
    ("constant",): (
        [Param("a", "float"), Param("rho", "float"),
         Param("T", "float", None),
         Param("paths", "int", 4096), Param("steps", "int", 4096),
         Param("seed", "int", 0), Param("workers", "int", 1)],
        _run_constant),
    ("levy",): (
        _LEVY_MODEL_FLAGS
        + [Param("c1", "float"), Param("c2", "float"),
           Param("x", "float"), Param("y", "float"),
           Param("T", "float", 1.0)] + _TOL_FLAGS,
        _run_levy),
    ("mc", "psi2d"): (
        _BRM2_COMMON + _MC_FLAGS
        + [Param("tilt", "str", "none"),
           Param("window-end", "float", 1.0)],
        _run_mc_psi2d),
    ("mc", "psi1d"): (
        [Param("c", "float"), Param("sigma", "float", 1.0),
         Param("u", "float"), Param("T", "float", 1.0)]
        + _MC_FLAGS + [Param("bridge", "str", "on",
                             choices=("on", "off"))],
        _run_mc_psi1d),
    ("mc", "levy"): (
        _LEVY_MODEL_FLAGS
        + [Param("c1", "float"), Param("c2", "float"),
           Param("x", "float"), Param("y", "float"),
           Param("T", "float", 1.0)] + _MC_FLAGS,
        _run_mc_levy),
    ("mc", "ruintime"): (
        _BRM2_COMMON + _MC_FLAGS + [Param("tilt", "str", "auto")],
        _run_mc_ruintime),
}

_GLOBAL_FLAGS = {"format", "out"}


def _grammar() -> str:
    lines = ["usage: ruin2d <command> [--flag value ...]", "", "commands:"]
    for path, (params, _) in COMMANDS.items():
        flags = " ".join(
            f"--{p.name} X" if p.default is _REQUIRED else f"[--{p.name} X]"
            for p in params)
        lines.append(f"  {' '.join(path)} {flags}")
    lines.append("  sweep <command> ...   (comma-separated value lists)")
    lines.append("")
    lines.append("global flags: --format {json|csv}  --out PATH")
    return "\n".join(lines)


def _match_command(argv):
    for path in sorted(COMMANDS, key=len, reverse=True):
        if tuple(argv[:len(path)]) == path:
            return path, argv[len(path):]
    raise UsageError(f"unknown command: {' '.join(argv) or '(none)'}")


def _parse_flags(args):
    """Raw flag map; values kept as strings."""
    raw = {}
    i = 0
    while i < len(args):
        tok = args[i]
        if not tok.startswith("--"):
            raise UsageError(f"expected a --flag, got {tok!r}")
        name = tok[2:]
        if i + 1 >= len(args):
            raise UsageError(f"--{name} is missing a value")
        if name in raw:
            raise UsageError(f"--{name} given twice")
        raw[name] = args[i + 1]
        i += 2
    return raw


def _bind(params, raw):
    """Convert raw strings against the declaration; materialize defaults."""
    known = {p.name for p in params}
    for name in raw:
        if name not in known and name not in _GLOBAL_FLAGS:
            raise UsageError(f"unknown flag --{name}")
    g = {}
    for p in params:
        if p.name in raw:
            g[p.name] = _convert(p, raw[p.name])
        elif p.default is _REQUIRED:
            raise UsageError(f"missing required flag --{p.name}")
        else:
            g[p.name] = p.default
    return g


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _json_scalar(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, str):
        return '"' + x.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(x, float) and not math.isfinite(x):
        return '"' + _fmt(x) + '"'
    return _fmt(x)


def _json_record(record) -> str:
    parts = []
    for key, val in record:
        if isinstance(val, dict):
            inner = ", ".join(f"{_json_scalar(k)}: {_json_scalar(v)}"
                              for k, v in val.items())
            parts.append(f'"{key}": {{{inner}}}')
        elif isinstance(val, tuple):
            inner = ", ".join(_json_scalar(v) for v in val)
            parts.append(f'"{key}": [{inner}]')
        else:
            parts.append(f'"{key}": {_json_scalar(val)}')
    return "{" + ", ".join(parts) + "}"


def _record(path, g, result, elapsed_ms) -> list:
    return [
        ("command", " ".join(path)),
        ("params", g),
        ("value", float(result["value"])),
        ("stderr", result.get("stderr")),
        ("ci", result.get("ci")),
        ("bounds", result.get("bounds")),
        ("method", result["method"]),
        ("seed", result.get("seed")),
        ("tool_version", __version__),
        ("elapsed_ms", elapsed_ms),
    ]


def _csv_record(record) -> str:
    head, row = [], []
    for key, val in record:
        if isinstance(val, dict):
            for k, v in val.items():
                head.append(k)
                row.append("" if v is None else _fmt(v))
        elif isinstance(val, tuple):
            for suffix, v in zip(("low", "high"), val):
                head.append(f"{key}_{suffix}")
                row.append(_fmt(v))
        elif val is None:
            head.append(key)
            row.append("")
        else:
            head.append(key)
            row.append(_fmt(val))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    w.writerow(row)
    return buf.getvalue().rstrip("\n")


def _emit(text, out_path):
    sys.stdout.write(text + "\n")
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _run_single(path, raw):
    params, fn = COMMANDS[path]
    g = _bind(params, raw)
    start = time.monotonic()
    result = fn(g)
    elapsed_ms = int((time.monotonic() - start) * 1000)
    return _record(path, g, result, elapsed_ms)


def _run_sweep(argv):
    path, rest = _match_command(argv)
    raw = _parse_flags(rest)
    params, fn = COMMANDS[path]
    known = {p.name for p in params}
    for name in raw:
        if name not in known and name not in _GLOBAL_FLAGS:
            raise UsageError(f"unknown flag --{name}")
    # Cartesian product over comma lists, in parameter declaration order
    axes = []
    for p in params:
        if p.name in raw:
            axes.append([(p, tok) for tok in raw[p.name].split(",")])
        elif p.default is _REQUIRED:
            raise UsageError(f"missing required flag --{p.name}")
        else:
            axes.append([(p, None)])
    rows = []
    header = [p.name for p in params] + [
        "value", "stderr", "ci_low", "ci_high",
        "bound_lower", "bound_upper", "method", "seed", "error"]
    for combo in product(*axes):
        g = {}
        for p, tok in combo:
            g[p.name] = p.default if tok is None else _convert(p, tok)
        row = [_fmt(g[p.name]) if g[p.name] is not None else ""
               for p in params]
        try:
            result = fn(g)
            ci = result.get("ci") or ("", "")
            bounds = result.get("bounds") or ("", "")
            row += [_fmt(float(result["value"])),
                    "" if result.get("stderr") is None
                    else _fmt(result["stderr"]),
                    _fmt(ci[0]) if ci[0] != "" else "",
                    _fmt(ci[1]) if ci[1] != "" else "",
                    _fmt(bounds[0]) if bounds[0] != "" else "",
                    _fmt(bounds[1]) if bounds[1] != "" else "",
                    result["method"],
                    "" if result.get("seed") is None
                    else _fmt(result["seed"]),
                    ""]
        except (InvalidInput, RegimeError, MissingConstant,
                DegenerateDrift, NonConvergence, DegenerateIS,
                EmptySample) as exc:
            row += ["", "", "", "", "", "", "", "",
                    f"{type(exc).__name__}: {exc}"]
        rows.append(row)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().rstrip("\n")


def run(argv) -> int:
    """Entry point; returns the process exit code."""
    try:
        if not argv:
            raise UsageError("no command given")
        if argv[0] == "sweep":
            # global flags may trail the swept command's flags
            raw_tail = _parse_flags_tolerant(argv[1:])
            raw_tail.pop("format", None)  # sweeps are always CSV
            out_path = raw_tail.pop("out", None)
            text = _run_sweep(raw_tail.pop("__argv__"))
            _emit(text, out_path)
            return 0
        path, rest = _match_command(argv)
        raw = _parse_flags(rest)
        fmt = raw.pop("format", "json")
        if fmt not in ("json", "csv"):
            raise UsageError("--format must be json or csv")
        out_path = raw.pop("out", None)
        record = _run_single(path, raw)
        text = (_json_record(record) if fmt == "json"
                else _csv_record(record))
        _emit(text, out_path)
        return 0
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n\n{_grammar()}\n")
        return 64
    except (InvalidInput, RegimeError, MissingConstant, DegenerateDrift,
            EmptySample) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1
    except (NonConvergence, DegenerateIS) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


def _parse_flags_tolerant(args):
    """Split a sweep invocation into command words and its flag map,
    extracting the global flags."""
    words = []
    i = 0
    while i < len(args) and not args[i].startswith("--"):
        words.append(args[i])
        i += 1
    raw = _parse_flags(args[i:])
    out = {"__argv__": words + [t for pair in
                                ((f"--{k}", v) for k, v in raw.items()
                                 if k not in _GLOBAL_FLAGS)
                                for t in pair]}
    for k in _GLOBAL_FLAGS:
        if k in raw:
            out[k] = raw[k]
    return out


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
