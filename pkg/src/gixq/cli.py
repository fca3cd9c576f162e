"""Command-line front end.

    gixq solve    --config CFG [--out PATH] [--format csv|json]
    gixq simulate --config CFG [--out PATH] [--format csv|json] [--seed N]
    gixq compare  --config CFG [--out PATH] [--format csv|json] [--seed N]
    gixq sweep    --config CFG [--out PATH] [--format csv|json]

Exit codes: 0 success, 1 configuration error, 2 unstable model,
3 numerical degeneracy, 4 simulation/analytic comparison failed.
Log verbosity comes from ``GIXQ_LOG_LEVEL`` (default WARNING).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .charroots import stability_check
from .config import RunConfig, load_config, params_to_dict
from .errors import ConfigError, GixqError, StabilityError
from .simulator import compare, simulate
from .solver import solve

log = logging.getLogger("gixq")

EXIT_COMPARE_FAIL = 4

TABLE_COLUMNS = ("n", "p_pre", "p_arb", "ratio")
SWEEP_COLUMNS = ("param", "series", "L", "L_pre", "p0", "rb")


def _fixed(x, prec):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    return float(f"{x:.{prec}f}")


def _sig(x):
    return float(f"{x:.12g}")


def _complex_list(z):
    return [[_sig(v.real), _sig(v.imag)] for v in np.asarray(z)]


def _csv_text(columns, rows, prec):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(
            "" if v is None else (f"{v:.{prec}f}" if isinstance(v, float) else v) for v in row
        )
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _ratio(pre):
    pre = np.asarray(pre, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(pre[:-1] > 0, pre[1:] / pre[:-1], np.nan)
    return [None if math.isnan(x) else float(x) for x in r]


# --------------------------------------------------------------------------- solve


def solve_artifact(cfg: RunConfig, fmt: str) -> str:
    dist = solve(cfg.params)
    prec = cfg.precision
    n_max = cfg.truncation if cfg.truncation is not None else dist.truncation(cfg.pmf_cutoff)
    n = np.arange(n_max + 2)
    pre = dist.prearrival_pmf(n)
    arb = dist.arbitrary_pmf(n[:-1])
    ratio = _ratio(pre)
    rows = [
        (int(k), float(pre[k]), float(arb[k]), None if ratio[k] is None else float(ratio[k]))
        for k in range(n_max + 1)
    ]
    l_pre, l_arb = dist.means()
    mass_pre, mass_arb = dist.total_mass()
    rep = stability_check(cfg.params)
    summary = {
        "model": params_to_dict(cfg.params),
        "case": dist.case,
        "stability": {"stable": rep.stable, "condition": rep.condition_used, "rho": _sig(rep.rho)},
        "p0_pre": _fixed(float(pre[0]), prec),
        "p0_arb": _fixed(dist.p0_arbitrary, prec),
        "L_pre": _fixed(l_pre, prec),
        "L_arb": _fixed(l_arb, prec),
        "rb": _fixed(dist.decay_rate, prec),
        "mass_pre": _fixed(mass_pre, prec),
        "mass_arb": _fixed(mass_arb, prec),
        "roots": _complex_list(dist.roots),
        "constants": _complex_list(dist.constants),
        "root_residual": _sig(dist.solution.roots.residual_max),
        "constant_residual": _sig(dist.solution.residual),
        "condition": _sig(dist.solution.condition),
        "truncation": int(n_max),
    }
    log.info(
        "p0_pre=%.8f p0_arb=%.8f L_pre=%.8f L_arb=%.8f rb=%.8f",
        pre[0], dist.p0_arbitrary, l_pre, l_arb, dist.decay_rate,
    )
    if fmt == "csv":
        return _csv_text(TABLE_COLUMNS, rows, prec)
    return _json_text(
        {
            "summary": summary,
            "rows": [dict(zip(TABLE_COLUMNS, (r[0],) + tuple(_fixed(v, prec) for v in r[1:]))) for r in rows],
        }
    )


# --------------------------------------------------------------------------- simulate


def _sim_rows(sim):
    pre, arb = sim.prearrival_pmf, sim.timeavg_pmf
    se_pre, se_arb = sim.standard_errors["prearrival"], sim.standard_errors["timeavg"]
    ratio = _ratio(np.append(pre, 0.0))
    return [
        (
            k,
            float(pre[k]),
            float(arb[k]),
            ratio[k],
            None if math.isnan(se_pre[k]) else float(se_pre[k]),
            None if math.isnan(se_arb[k]) else float(se_arb[k]),
        )
        for k in range(len(pre))
    ]


SIM_COLUMNS = TABLE_COLUMNS + ("se_pre", "se_arb")


def _sim_summary(sim, prec):
    se = sim.standard_errors
    nan_free = lambda x: None if math.isnan(x) else _sig(x)  # noqa: E731
    cfg = sim.config
    return {
        "model": params_to_dict(sim.params),
        "sim": {
            "batch_arrivals_target": int(cfg.batch_arrivals_target),
            "warmup_fraction": cfg.warmup_fraction,
            "seed": int(cfg.seed),
            "replications": int(cfg.replications),
            "priority": list(cfg.priority),
        },
        "mean_pre": _fixed(sim.mean_pre, prec),
        "mean_arb": _fixed(sim.mean_arb, prec),
        "se_mean_pre": nan_free(se["mean_pre"]),
        "se_mean_arb": nan_free(se["mean_arb"]),
        "event_counts": sim.event_counts,
    }


def simulate_artifact(cfg: RunConfig, fmt: str, seed=None, backend=None) -> str:
    sim = simulate(cfg.sim_config(seed), backend or cfg.backend)
    prec = cfg.precision
    rows = _sim_rows(sim)
    if fmt == "csv":
        return _csv_text(SIM_COLUMNS, rows, prec)
    return _json_text(
        {
            "summary": _sim_summary(sim, prec),
            "rows": [dict(zip(SIM_COLUMNS, (r[0],) + tuple(_fixed(v, prec) for v in r[1:]))) for r in rows],
        }
    )


# --------------------------------------------------------------------------- compare

COMPARE_COLUMNS = ("n", "p_pre_sim", "p_pre", "z_pre", "p_arb_sim", "p_arb", "z_arb")


def compare_artifact(cfg: RunConfig, fmt: str, seed=None, backend=None):
    dist = solve(cfg.params)
    sim = simulate(cfg.sim_config(seed), backend or cfg.backend)
    report = compare(dist, sim)
    prec = cfg.precision
    n = np.arange(len(sim.prearrival_pmf))
    ref_pre, ref_arb = dist.prearrival_pmf(n), dist.arbitrary_pmf(n)
    fin = lambda x: None if math.isnan(x) else float(x)  # noqa: E731
    rows = [
        (
            int(k),
            float(sim.prearrival_pmf[k]),
            float(ref_pre[k]),
            fin(report.z_prearrival[k]),
            float(sim.timeavg_pmf[k]),
            float(ref_arb[k]),
            fin(report.z_timeavg[k]),
        )
        for k in n
    ]
    log.log(
        logging.INFO if report.passed else logging.WARNING,
        "compare: %s (TV pre %.5f, TV arb %.5f)",
        "PASS" if report.passed else "FAIL", report.tv_prearrival, report.tv_timeavg,
    )
    if fmt == "csv":
        text = _csv_text(COMPARE_COLUMNS, rows, prec)
    else:
        d = report.as_dict()
        d["sim"] = _sim_summary(sim, prec)
        d["rows"] = [
            dict(zip(COMPARE_COLUMNS, (r[0],) + tuple(_fixed(v, prec) for v in r[1:]))) for r in rows
        ]
        text = _json_text(d)
    return text, report


# --------------------------------------------------------------------------- sweep


def sweep_rows(cfg: RunConfig):
    if cfg.sweep is None:
        raise ConfigError("config has no sweep block")
    rows = []
    for label, value, params in cfg.sweep.points():
        rep = stability_check(params)
        if not rep.stable:
            raise StabilityError(
                f"sweep point {cfg.sweep.param}={value:g} (series {label}) is unstable: "
                f"{rep.condition_text} violated"
            )
        dist = solve(params)
        l_pre, l_arb = dist.means()
        rows.append((float(value), label, l_arb, l_pre, dist.p0_arbitrary, dist.decay_rate))
    return rows


def sweep_artifact(cfg: RunConfig, fmt: str) -> str:
    rows = sweep_rows(cfg)
    prec = cfg.precision
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for value, label, *rest in rows:
            w.writerow([f"{value:g}", label] + [f"{v:.{prec}f}" for v in rest])
        return buf.getvalue()
    return _json_text(
        [
            dict(zip(SWEEP_COLUMNS, (value, label) + tuple(_fixed(v, prec) for v in rest)))
            for value, label, *rest in rows
        ]
    )


# --------------------------------------------------------------------------- main


def _parser():
    p = argparse.ArgumentParser(prog="gixq", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve", "simulate", "compare", "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="YAML run configuration")
        sp.add_argument("--out", help="output path (default: output.path or stdout)")
        sp.add_argument("--format", choices=("csv", "json"), help="overrides output.format")
        if name in ("simulate", "compare"):
            sp.add_argument("--seed", type=int, help="overrides sim.seed")
            sp.add_argument("--backend", choices=("compiled", "python"), help="simulation kernel")
    return p


def _setup_logging():
    level = os.environ.get("GIXQ_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        fmt = args.format or cfg.output_format
        out = args.out or cfg.output_path
        if args.command == "solve":
            _emit(solve_artifact(cfg, fmt), out)
        elif args.command == "simulate":
            _emit(simulate_artifact(cfg, fmt, args.seed, args.backend), out)
        elif args.command == "compare":
            text, report = compare_artifact(cfg, fmt, args.seed, args.backend)
            _emit(text, out)
            if not report.passed:
                return EXIT_COMPARE_FAIL
        else:
            _emit(sweep_artifact(cfg, fmt), out)
    except GixqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


def main(argv=None):
    _setup_logging()
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
