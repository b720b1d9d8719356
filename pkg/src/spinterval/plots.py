"""SVG charts for benchmark reports.

Figures are built on :class:`matplotlib.figure.Figure` directly, so no
pyplot state or interactive backend is involved.  Text is stored as paths
and the SVG metadata date and id salt are fixed, which keeps the output
byte-stable across runs.
"""

from __future__ import annotations

import os
from collections import defaultdict
from typing import Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .samples import Method

__all__ = ["efficiency_figure", "bias_variance_figure", "coverage_figure", "write_all"]

_RC = {"svg.fonttype": "path", "svg.hashsalt": "spinterval"}


def _save(fig: Figure, path: str) -> str:
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def efficiency_figure(reports) -> Figure:
    """Summed-endpoint efficiency against n, one line per method."""
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    by_method = defaultdict(list)
    for rep in sorted(reports, key=lambda r: r.cell.n):
        for method in rep.cell.methods:
            if method is Method.EMPIRICAL_SHORTEST:
                continue
            st = rep[method]
            by_method[method].append((rep.cell.n, st.efficiency, st.efficiency_se))
    for method, pts in by_method.items():
        n, eff, se = map(np.asarray, zip(*pts))
        ax.errorbar(n, eff, yerr=2 * np.nan_to_num(se), marker="o", capsize=3, label=method.value)
    ax.axhline(1.0, color="grey", lw=0.8, ls="--")
    ax.set_xlabel("n")
    ax.set_ylabel("efficiency vs empirical shortest")
    if by_method:
        ax.legend()
    return fig


def bias_variance_figure(report) -> Figure:
    """Stacked squared bias and variance per method and endpoint."""
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    labels, bias2, var = [], [], []
    for method in report.cell.methods:
        st = report[method]
        for which in ("lower", "upper"):
            ep = st.endpoint(which)
            labels.append(f"{method.value}\n{which}")
            bias2.append(ep.bias**2)
            var.append(ep.variance)
    x = np.arange(len(labels))
    ax.bar(x, bias2, label="bias$^2$")
    ax.bar(x, var, bottom=bias2, label="variance")
    ax.set_xticks(x, labels, fontsize=7)
    ax.set_ylabel("mean squared error")
    ax.set_title(report.cell_id)
    ax.legend()
    return fig


def coverage_figure(report) -> Figure:
    """Histogram of per-replicate exact coverage for each method."""
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    cov = report.coverage
    finite = cov[np.isfinite(cov)]
    lo = min(finite.min(), 1 - report.cell.alpha) if finite.size else 0.0
    hi = max(finite.max(), 1 - report.cell.alpha) if finite.size else 1.0
    bins = np.linspace(lo, hi if hi > lo else lo + 1e-6, 31)
    for k, method in enumerate(report.cell.methods):
        c = cov[:, k]
        ax.hist(c[np.isfinite(c)], bins=bins, histtype="step", label=method.value)
    ax.axvline(1 - report.cell.alpha, color="grey", lw=0.8, ls="--")
    ax.set_xlabel("coverage F(u) - F(l)")
    ax.set_ylabel("replications")
    ax.set_title(report.cell_id)
    ax.legend()
    return fig


def _group_id(rep) -> str:
    c = rep.cell
    parts = [c.dist.name, f"a{c.alpha:g}"]
    if c.lower_bound is not None:
        parts.append(f"lb{c.lower_bound:g}")
    if c.upper_bound is not None:
        parts.append(f"ub{c.upper_bound:g}")
    return "-".join(parts)


def write_all(reports: Sequence, outdir) -> list[str]:
    """Write every chart for ``reports`` into ``outdir``; returns the paths.

    Efficiency charts group cells sharing a distribution and alpha, so
    they are named by that group rather than by a single cell.
    """
    reports = list(reports)
    if not reports:
        return []
    os.makedirs(outdir, exist_ok=True)
    paths = []
    groups = defaultdict(list)
    for rep in reports:
        groups[_group_id(rep)].append(rep)
    for gid, reps in groups.items():
        if any(Method.EMPIRICAL_SHORTEST in r.cell.methods for r in reps):
            paths.append(_save(efficiency_figure(reps), os.path.join(outdir, f"efficiency-{gid}.svg")))
    for rep in reports:
        paths.append(_save(bias_variance_figure(rep), os.path.join(outdir, f"biasvar-{rep.cell_id}.svg")))
        paths.append(_save(coverage_figure(rep), os.path.join(outdir, f"coverage-{rep.cell_id}.svg")))
    return paths
