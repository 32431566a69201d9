"""Mean ranks, the Friedman test and Wilcoxon-Holm cliques for CD diagrams."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.stats import chi2, rankdata, wilcoxon

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankSummary:
    metric: str
    methods: tuple
    mean_ranks: dict
    friedman_statistic: float
    friedman_p: float
    pairwise_p: dict  # (method_a, method_b) -> p-value, a < b lexicographically
    rejected: frozenset
    cliques: tuple
    n_series: int
    n_dropped: int


def metric_matrix(table, metric):
    """Series x method matrix of ``metric`` with incomplete series dropped.

    A series on which any method failed (or produced a non-finite value) is
    removed for every method, keeping ranks comparable.
    """
    kept, rows = [], []
    for sid in table.series_ids:
        row = [table.value(sid, m, metric) for m in table.methods]
        if all(np.isfinite(row)):
            kept.append(sid)
            rows.append(row)
    dropped = len(table.series_ids) - len(kept)
    if dropped:
        log.info("%s: %d series dropped from ranking because of failed cells", metric, dropped)
    values = np.array(rows, dtype=float).reshape(len(kept), len(table.methods))
    return tuple(kept), values, dropped


def rank_matrix(values) -> np.ndarray:
    """Ascending per-row ranks (1 = best), ties get the average rank."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values.copy()
    return np.vstack([rankdata(row, method="average") for row in values])


def mean_ranks(values) -> np.ndarray:
    r = rank_matrix(values)
    return r.mean(axis=0) if r.shape[0] else np.full(r.shape[1], np.nan)


def rank_methods(table, metric) -> dict:
    _, values, _ = metric_matrix(table, metric)
    return dict(zip(table.methods, mean_ranks(values).tolist()))


def friedman_test(ranks):
    """Friedman chi-square from an ``n_series x k_methods`` rank matrix.

    ``chi2 = 12 n / (k (k + 1)) * (sum_j R_j**2 - k (k + 1)**2 / 4)`` with
    ``R_j`` the mean rank of method j; p from the chi-square(k - 1) tail.
    No tie correction. For k = 2 it orders the methods like a sign test.
    """
    ranks = np.asarray(ranks, dtype=float)
    n = ranks.shape[0]
    k = ranks.shape[1] if ranks.ndim == 2 else 0
    if n == 0 or k < 2:
        return 0.0, 1.0
    R = ranks.mean(axis=0)
    stat = 12.0 * n / (k * (k + 1)) * (np.sum(R * R) - k * (k + 1) ** 2 / 4.0)
    stat = max(float(stat), 0.0)
    return stat, float(chi2.sf(stat, k - 1))


def wilcoxon_p(a, b) -> float:
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    if d.size == 0 or np.all(d == 0):
        return 1.0
    return float(wilcoxon(a, b, zero_method="wilcox", alternative="two-sided").pvalue)


def holm_reject(pvalues: dict, alpha: float) -> frozenset:
    """Keys rejected by Holm's step-down procedure at family-wise level ``alpha``."""
    ordered = sorted(pvalues.items(), key=lambda kv: (kv[1], kv[0]))
    m = len(ordered)
    rejected = set()
    for i, (key, p) in enumerate(ordered):
        if p > alpha / (m - i):
            break
        rejected.add(key)
    return frozenset(rejected)


def cliques_from_rejections(methods, rejected) -> tuple:
    """Maximal sets of methods with no significantly different pair."""
    g = nx.Graph()
    g.add_nodes_from(methods)
    for a, b in itertools.combinations(sorted(methods), 2):
        if (a, b) not in rejected:
            g.add_edge(a, b)
    cliques = sorted(tuple(sorted(c)) for c in nx.find_cliques(g))
    return tuple(cliques)


def pairwise_wilcoxon(values, methods) -> dict:
    values = np.asarray(values, dtype=float)
    col = {m: values[:, i] for i, m in enumerate(methods)}
    return {(a, b): wilcoxon_p(col[a], col[b]) for a, b in itertools.combinations(sorted(methods), 2)}


def wilcoxon_holm_cliques(values, methods, alpha_sig=0.05):
    """Pairwise Wilcoxon signed-rank tests, Holm correction, then cliques.

    ``values`` is a series x method matrix (or a ResultsTable plus metric via
    :func:`summarize`). Returns ``(cliques, pairwise_p, rejected)``.
    """
    pvals = pairwise_wilcoxon(values, methods)
    rejected = holm_reject(pvals, alpha_sig)
    return cliques_from_rejections(methods, rejected), pvals, rejected


def summarize(table, metric, alpha_sig=0.05) -> RankSummary:
    """Mean ranks plus the CD procedure: Friedman gate, then Wilcoxon-Holm."""
    kept, values, dropped = metric_matrix(table, metric)
    methods = tuple(table.methods)
    ranks = rank_matrix(values)
    mr = ranks.mean(axis=0) if len(kept) else np.full(len(methods), np.nan)
    stat, p = friedman_test(ranks)
    pvals = pairwise_wilcoxon(values, methods) if len(kept) else {}
    rejected = holm_reject(pvals, alpha_sig) if p < alpha_sig else frozenset()
    return RankSummary(metric, methods, dict(zip(methods, mr.tolist())), stat, p, pvals,
                       rejected, cliques_from_rejections(methods, rejected), len(kept), dropped)
