"""Command line entry point: ``bamoes run | report | sweep | synth``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import os
import sys

import numpy as np

from .config import MethodSpec, load_config
from .report import emit_reports, read_results_csv, summaries, write_ranks_json, write_text, cd_svg
from .runner import load_series, run_benchmark, run_cell

log = logging.getLogger("bamoes")

SWEEP_C = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
SWEEP_L = (0.25, 0.5, 1.0, 2.0)


def cmd_run(args):
    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.out is not None:
        overrides["out"] = args.out
    config = dataclasses.replace(config, **overrides)
    table = run_benchmark(config)
    paths = emit_reports(table, config.out, config.cd_alpha)
    n_ok = sum(r.ok for r in table.rows)
    print(f"{n_ok}/{len(table.rows)} cells ok; wrote {len(paths)} files to {config.out}")
    return 0


def cmd_report(args):
    table = read_results_csv(args.results)
    out = args.out or os.path.dirname(os.path.abspath(args.results))
    os.makedirs(out, exist_ok=True)
    summ = summaries(table, args.cd_alpha)
    write_ranks_json(summ, os.path.join(out, "ranks.json"))
    for metric, s in summ.items():
        if s.n_series:
            write_text(os.path.join(out, f"cd_{metric}.svg"), cd_svg(s))
    for metric, s in summ.items():
        ranks = ", ".join(f"{m}={r:.3f}" for m, r in sorted(s.mean_ranks.items(), key=lambda kv: kv[1]))
        print(f"{metric}: {ranks}")
    return 0


def cmd_sweep(args):
    """Miscalibration area of BAMOES over a grid of C and L = fraction * N."""
    config = load_config(args.config)
    template = next((m for m in config.methods if m.ue_type == "surrogate"), None)
    base = template.base if template else "ols"
    ue = dict(template.ue) if template else {"type": "surrogate"}
    if args.epochs is not None:
        ue["epochs"] = args.epochs
    out = args.out or config.out
    os.makedirs(out, exist_ok=True)
    rows = []
    for s in load_series(config):
        for C in SWEEP_C:
            for frac in SWEEP_L:
                n_train = len(s) if len(s) <= 200 else max(2 * s.lag_k, 200)
                n_rows = n_train - s.horizon_h - 2 * s.lag_k
                L = max(int(round(frac * n_rows)), 1)
                spec = MethodSpec(f"bamoes_C{C}_L{frac}", base,
                                  dict(ue, variant="BAMOES", C=C, L=L), standardize=base == "ols")
                r = run_cell(s, spec, config.seed)
                rows.append((s.id, C, frac, L, r.miscal_area if r.ok else float("nan"), r.status))
    path = os.path.join(out, "sweep.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("series_id", "C", "L_fraction", "L", "miscal_area", "status"))
        for sid, C, frac, L, area, status in rows:
            w.writerow([sid, repr(C), repr(frac), L, repr(area) if np.isfinite(area) else "", status])
    print(f"wrote {len(rows)} sweep points to {path}")
    return 0


def cmd_synth(args):
    from ..synthetic import mixture_suite, write_csv
    suite = mixture_suite(args.seed, args.count)
    write_csv(suite, args.csv, args.metadata)
    print(f"wrote {len(suite)} series to {args.csv}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="bamoes", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a benchmark grid from a YAML config")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.add_argument("--jobs", type=int)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="recompute ranks and CD diagrams from results.csv")
    rep.add_argument("results")
    rep.add_argument("--out")
    rep.add_argument("--cd-alpha", type=float, default=0.05)
    rep.set_defaults(func=cmd_report)

    sw = sub.add_parser("sweep", help="miscalibration area over C x L for BAMOES")
    sw.add_argument("config")
    sw.add_argument("--out")
    sw.add_argument("--epochs", type=int)
    sw.set_defaults(func=cmd_sweep)

    sy = sub.add_parser("synth", help="write the seeded synthetic series suite as CSV")
    sy.add_argument("csv")
    sy.add_argument("--metadata")
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--count", type=int, default=10)
    sy.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
