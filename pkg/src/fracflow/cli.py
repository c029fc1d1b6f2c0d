"""Command line entry point: ``fracflow {curvature,symbol,simulate,verify}``.

Exit status: 0 success, 1 usage error, 2 blow-up, 3 verification failure,
4 simulation finished without a certified decay fit.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import kernel
from .config import RunConfig, initial_field, parse_config
from .flow import STATUS_BLOWUP, STATUS_NOT_CONVERGED, simulate
from .symbol import symbol_direct, symbol_polar
from .torus import write_snapshot
from .verify import SUITE, VerifyConfig, run_all

EXIT_OK, EXIT_USAGE, EXIT_BLOWUP, EXIT_VERIFY, EXIT_NOT_CONVERGED = 0, 1, 2, 3, 4

log = logging.getLogger("fracflow")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key = value file")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--dim", type=int, choices=(1, 2))
    p.add_argument("--grid", type=int, help="points per axis (even)")
    p.add_argument("--cells", type=int, help="lattice cells M per side")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--threads", type=int, help="worker cap (fallback: FRACFLOW_THREADS)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = _Parser(prog="fracflow", description="Nonlocal mean curvature flow of periodic graphs.")
    sub = top.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("curvature", parents=[common], help="evaluate H_alpha on a field")
    c.add_argument("--u0", help="field spec or snapshot file")
    c.add_argument("--form", choices=("gradient", "pv", "both"), default="both")

    s = sub.add_parser("symbol", parents=[common], help="tabulate the frozen-slope symbol")
    s.add_argument("--slope", default=None, help="a or a1,a2")
    s.add_argument("--band", type=int, default=16)
    s.add_argument("--method", choices=("direct", "polar", "both"), default="both")

    r = sub.add_parser("simulate", parents=[common], help="run the flow")
    r.add_argument("--u0")
    r.add_argument("--dt", type=float)
    r.add_argument("--t-end", dest="t_end", type=float)
    r.add_argument("--scheme", choices=("imex_cn", "explicit_rk2"))
    r.add_argument("--sigma", type=float)
    r.add_argument("--snapshot-every", dest="snapshot_every", type=int)

    v = sub.add_parser("verify", parents=[common], help="run the property checks")
    v.add_argument("--suite", default="all", help="all or one of: " + ", ".join(SUITE))
    v.add_argument("--json", dest="json_path")
    return top


_CONFIG_KEYS = ("alpha", "beta", "gamma", "dim", "grid", "cells", "seed", "out_dir", "threads",
                "u0", "dt", "t_end", "scheme", "sigma", "snapshot_every")


def _config(args) -> RunConfig:
    over = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    cfg = parse_config(args.config, over)
    kernel.set_threads(cfg.threads or None)
    cfg.write_resolved()
    if cfg.nonconforming:
        log.warning("holder exponents (alpha, beta, gamma) = %s are nonconforming", cfg.holder_metadata)
    return cfg


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def cmd_curvature(args, cfg: RunConfig) -> int:
    u = initial_field(cfg.u0, cfg.grid, cfg.seed)
    forms = ["gradient", "pv"] if args.form == "both" else [args.form]
    cols = {f: kernel.h_alpha(u, cfg.params, cfg.scheme, form=f).values.reshape(-1) for f in forms}
    x = cfg.grid.nodes().reshape(-1, cfg.grid.dim)
    xh = [f"x{j}" for j in range(cfg.grid.dim)]
    _write_csv(cfg.out_dir / "curvature.csv", xh + ["u"] + [f"H_{f}" for f in forms],
               (list(xi) + [ui] + [cols[f][i] for f in forms]
                for i, (xi, ui) in enumerate(zip(x, u.values.reshape(-1)))))
    summary = {"tail_bound": kernel.tail_bound(u, cfg.params, cfg.scheme)}
    if len(forms) == 2:
        summary["max_form_difference"] = float(np.max(np.abs(cols["gradient"] - cols["pv"])))
    (cfg.out_dir / "curvature.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    return EXIT_OK


def _slope(text: str | None, dim: int) -> tuple:
    if text is None:
        return (0.0,) * dim
    a = tuple(float(x) for x in text.split(","))
    if len(a) != dim:
        raise UsageError(f"slope needs {dim} components")
    return a


def cmd_symbol(args, cfg: RunConfig) -> int:
    a = _slope(args.slope, cfg.grid.dim)
    alpha = cfg.params.alpha
    if cfg.grid.dim == 1:
        ks = [(k,) for k in range(1, args.band + 1)]
    else:
        r = range(-args.band, args.band + 1)
        ks = [(i, j) for i in r for j in r if 0 < i * i + j * j <= args.band ** 2]
    methods = ["direct", "polar"] if args.method == "both" else [args.method]
    vals = {}
    karr = np.array(ks, float)
    if "polar" in methods:
        vals["polar"] = symbol_polar(karr, alpha, a)
    if "direct" in methods:
        vals["direct"] = np.array([symbol_direct(k, alpha, a) for k in ks])
    header = [f"k{j}" for j in range(cfg.grid.dim)] + [f"m_{m}" for m in methods]
    _write_csv(cfg.out_dir / "symbol.csv", header,
               (list(k) + [vals[m][i] for m in methods] for i, k in enumerate(ks)))
    if len(methods) == 2:
        rel = float(np.max(np.abs(vals["direct"] - vals["polar"]) / np.abs(vals["polar"])))
        print(json.dumps({"max_relative_difference": rel, "modes": len(ks)}))
    return EXIT_OK


def cmd_simulate(args, cfg: RunConfig) -> int:
    u0 = initial_field(cfg.u0, cfg.grid, cfg.seed)
    if cfg.stepper.over_budget:
        log.warning("dt = %g exceeds the explicit stability budget %g", cfg.stepper.dt, cfg.stepper.budget)
    trace = simulate(u0, cfg.stepper, cfg.params, cfg.scheme)
    _write_csv(cfg.out_dir / "trace.csv", trace.header(), trace.rows())
    for i, (t, f) in enumerate(trace.snapshots):
        write_snapshot(cfg.out_dir / f"snapshot_{i:05d}.txt", f, cfg.params.alpha, t)
    summary = {"status": trace.status, "steps": len(trace.times) - 1, "t_final": float(trace.times[-1]),
               "c_limit": trace.c_limit, "fit": trace.fit, "dt": cfg.stepper.dt,
               "stability_budget": cfg.stepper.budget, "over_budget": cfg.stepper.over_budget,
               "besov_final": float(trace.besov[-1])}
    (cfg.out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    if trace.status == STATUS_BLOWUP:
        return EXIT_BLOWUP
    if trace.status == STATUS_NOT_CONVERGED:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    p = cfg.params
    vcfg = (VerifyConfig(alpha=p.alpha, seed=cfg.seed) if p.dim == 1
            else VerifyConfig.reduced_2d(alpha=p.alpha, seed=cfg.seed))
    if args.suite != "all" and args.suite not in SUITE:
        raise UsageError(f"unknown suite {args.suite!r}")
    reports, summary = run_all(vcfg, args.suite, progress=lambda r: print(r.line(), flush=True))
    out = Path(args.json_path) if args.json_path else cfg.out_dir / "verify.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(summary["checks"], indent=2, default=float) + "\n")
    return EXIT_OK if summary["ok"] else EXIT_VERIFY


COMMANDS = {"curvature": cmd_curvature, "symbol": cmd_symbol, "simulate": cmd_simulate,
            "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command not in COMMANDS:
            raise UsageError(parser.format_usage().strip())
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
