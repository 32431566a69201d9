"""Report files: results.csv, ranks.json, coverage.csv and SVG plots.

All output is a pure function of the results, so re-running a benchmark
with the same seed reproduces every file byte for byte.
"""
from __future__ import annotations

import csv
import json
import math
import os
import re
from xml.sax.saxutils import escape

from ..metrics import LEVELS
from .ranking import summarize
from .runner import METRICS, CellResult, ResultsTable

RESULT_COLUMNS = ("series_id", "method", "rmse", "miscal_area", "rmsce", "ence", "status")


def _fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else ""


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name)


def write_results_csv(table: ResultsTable, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in table.rows:
            w.writerow([r.series_id, r.method] + [_fmt(getattr(r, m)) for m in METRICS] + [r.status])


def read_results_csv(path) -> ResultsTable:
    rows, series, methods = [], [], []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RESULT_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for rec in reader:
            vals = {m: float(rec[m]) if rec[m] else float("nan") for m in METRICS}
            rows.append(CellResult(rec["series_id"], rec["method"], status=rec["status"], **vals))
            if rec["series_id"] not in series:
                series.append(rec["series_id"])
            if rec["method"] not in methods:
                methods.append(rec["method"])
    return ResultsTable(tuple(rows), tuple(series), tuple(methods))


def write_coverage_csv(table: ResultsTable, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("series_id", "method", "alpha", "coverage"))
        for r in table.rows:
            for a, c in r.interval_coverage:
                w.writerow([r.series_id, r.method, repr(a), repr(c)])


def summaries(table: ResultsTable, alpha_sig=0.05, metrics=METRICS) -> dict:
    return {m: summarize(table, m, alpha_sig) for m in metrics}


def ranks_document(summ: dict) -> dict:
    doc = {}
    for metric, s in summ.items():
        doc[metric] = {
            "mean_ranks": {m: (r if math.isfinite(r) else None) for m, r in s.mean_ranks.items()},
            "cliques": [list(c) for c in s.cliques],
            "friedman": {"statistic": s.friedman_statistic, "p_value": s.friedman_p},
            "n_series": s.n_series,
            "n_dropped": s.n_dropped,
        }
    return doc


def write_ranks_json(summ: dict, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(ranks_document(summ), fh, indent=2)
        fh.write("\n")


def calibration_svg(levels, observed, title) -> str:
    size, pad = 320, 40
    span = size - 2 * pad

    def xy(p, q):
        return f"{pad + p * span:.2f},{size - pad - q * span:.2f}"

    pts = [xy(0.0, 0.0)] + [xy(p, q) for p, q in zip(levels, observed)] + [xy(1.0, 1.0)]
    return "\n".join([
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="{pad}" y="{pad}" width="{span}" height="{span}" fill="none" stroke="#888"/>',
        f'<polygon points="{" ".join(pts + [xy(1.0, 1.0), xy(0.0, 0.0)])}" fill="#1f77b4" '
        'fill-opacity="0.15" stroke="none"/>',
        f'<line x1="{pad}" y1="{size - pad}" x2="{size - pad}" y2="{pad}" stroke="#444" '
        'stroke-dasharray="4,3"/>',
        f'<polyline points="{" ".join(pts)}" fill="none" stroke="#1f77b4" stroke-width="2"/>',
        f'<text x="{size / 2}" y="{pad / 2}" text-anchor="middle" font-size="12">{escape(title)}</text>',
        f'<text x="{size / 2}" y="{size - 8}" text-anchor="middle" font-size="11">expected quantile</text>',
        f'<text x="12" y="{size / 2}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 12 {size / 2})">observed proportion</text>',
        "</svg>",
        "",
    ])


def cd_svg(summary) -> str:
    """Mean-rank axis with one label per method and a bar per clique."""
    methods = [m for m in summary.methods if math.isfinite(summary.mean_ranks.get(m, math.nan))]
    k = max(len(summary.methods), 2)
    width, left, right, axis_y = 560, 150, 150, 60
    span = width - left - right
    order = sorted(methods, key=lambda m: (summary.mean_ranks[m], m))
    height = axis_y + 40 + 22 * (len(order) + len(summary.cliques))

    def x(rank):
        return left + (rank - 1) / (k - 1) * span

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">'
        f'{escape(summary.metric)} (Friedman p={summary.friedman_p:.3g})</text>',
        f'<line x1="{left}" y1="{axis_y}" x2="{left + span}" y2="{axis_y}" stroke="#000"/>',
    ]
    for r in range(1, k + 1):
        out.append(f'<line x1="{x(r):.2f}" y1="{axis_y - 5}" x2="{x(r):.2f}" y2="{axis_y}" stroke="#000"/>')
        out.append(f'<text x="{x(r):.2f}" y="{axis_y - 9}" text-anchor="middle" font-size="11">{r}</text>')
    half = (len(order) + 1) // 2
    for i, m in enumerate(order):
        r = summary.mean_ranks[m]
        y = axis_y + 30 + 22 * (i if i < half else len(order) - 1 - i)
        lx, anchor = (left - 10, "end") if i < half else (left + span + 10, "start")
        out.append(f'<polyline points="{x(r):.2f},{axis_y} {x(r):.2f},{y} {lx},{y}" fill="none" stroke="#333"/>')
        out.append(f'<text x="{lx + (-4 if anchor == "end" else 4)}" y="{y + 4}" text-anchor="{anchor}" '
                   f'font-size="11">{escape(m)} ({r:.3f})</text>')
    y = axis_y + 30 + 22 * half + 8
    for clique in summary.cliques:
        ranks = [summary.mean_ranks[m] for m in clique if m in methods]
        if len(ranks) < 2:
            continue
        out.append(f'<line x1="{x(min(ranks)) - 3:.2f}" y1="{y}" x2="{x(max(ranks)) + 3:.2f}" y2="{y}" '
                   'stroke="#000" stroke-width="4"/>')
        y += 10
    out += ["</svg>", ""]
    return "\n".join(out)


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def emit_reports(table: ResultsTable, outdir, alpha_sig=0.05, summ=None) -> list:
    """Write every report file into ``outdir``; returns the written paths."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    path = os.path.join(outdir, "results.csv")
    write_results_csv(table, path)
    written.append(path)
    if not table.rows:
        return written
    summ = summaries(table, alpha_sig) if summ is None else summ
    path = os.path.join(outdir, "ranks.json")
    write_ranks_json(summ, path)
    written.append(path)
    if any(r.interval_coverage for r in table.rows):
        path = os.path.join(outdir, "coverage.csv")
        write_coverage_csv(table, path)
        written.append(path)
    for r in table.rows:
        if r.ok and r.observed_coverage:
            path = os.path.join(outdir, f"calibration_{_safe(r.series_id)}_{_safe(r.method)}.svg")
            write_text(path, calibration_svg(LEVELS, r.observed_coverage,
                                              f"{r.series_id} / {r.method}  area={r.miscal_area:.4f}"))
            written.append(path)
    for metric, s in summ.items():
        if s.n_series:
            path = os.path.join(outdir, f"cd_{metric}.svg")
            write_text(path, cd_svg(s))
            written.append(path)
    return written
