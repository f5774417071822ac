"""Background selection, global summaries and per-row waterfall exports (CSV and SVG)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from html import escape

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata


def select_background(X, n: int = 100, seed=None) -> np.ndarray:
    """Row indices of ``n`` spread-out representatives by greedy max-min distance.

    The first row is drawn with ``seed``; each next row is the one farthest
    from those already chosen (lowest index on ties). All rows are returned
    when ``n >= len(X)``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] <= n:
        return np.arange(X.shape[0])
    first = int(np.random.default_rng(seed).integers(X.shape[0]))
    chosen = [first]
    nearest = cdist(X, X[[first]]).ravel()
    for _ in range(n - 1):
        nxt = int(np.argmax(nearest))
        chosen.append(nxt)
        nearest = np.minimum(nearest, cdist(X, X[[nxt]]).ravel())
    return np.array(chosen)


@dataclass(frozen=True)
class ShapSummary:
    features: tuple
    mean_abs_phi: np.ndarray
    rank: np.ndarray  # 1 = most influential; equal values share the best rank
    phi: np.ndarray  # (N, D)
    values: np.ndarray  # (N, D)

    def pairs(self):
        """``(row, feature, feature_value, phi)`` for every row and feature."""
        n, d = self.phi.shape
        for i in range(n):
            for j in range(d):
                yield i, self.features[j], float(self.values[i, j]), float(self.phi[i, j])

    def write_csv(self, path, extra: dict | None = None) -> None:
        extra = extra or {}
        order = np.lexsort((np.arange(len(self.features)), self.rank))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", "mean_abs_phi", "rank", *extra])
            for j in order:
                w.writerow([self.features[j], repr(float(self.mean_abs_phi[j])), int(self.rank[j]), *extra.values()])

    def write_pairs_csv(self, path, row_ids=None, extra: dict | None = None) -> None:
        """``row_ids`` maps explained-row position to the table row number."""
        extra = extra or {}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["row", "feature", "feature_value", "phi", *extra])
            for i, name, val, phi in self.pairs():
                rid = i if row_ids is None else row_ids[i]
                w.writerow([rid, name, repr(val), repr(phi), *extra.values()])


def summary_stats(attributions, feature_names) -> ShapSummary:
    """Rank features by mean ``|phi|`` over the explained rows."""
    if len(attributions) == 0:
        raise ValueError("no attributions to summarise")
    phi = np.vstack([a.phi for a in attributions])
    values = np.vstack([a.x for a in attributions])
    mean_abs = np.abs(phi).mean(axis=0)
    rank = rankdata(-mean_abs, method="min").astype(int)
    return ShapSummary(tuple(feature_names), mean_abs, rank, phi, values)


@dataclass(frozen=True)
class WaterfallRow:
    rank: int
    feature: str
    value: float
    phi: float
    running_sum: float


def waterfall_export(attribution, feature_names, top_n: int = 10) -> list:
    """Top ``top_n`` features by ``|phi|`` then an ``other`` bucket; running sums go from base to f(x)."""
    phi = attribution.phi
    order = np.argsort(-np.abs(phi), kind="stable")
    rows, running = [], attribution.base_value
    for r, j in enumerate(order[:top_n], start=1):
        running += phi[j]
        rows.append(WaterfallRow(r, feature_names[j], float(attribution.x[j]), float(phi[j]), float(running)))
    rest = order[top_n:]
    if rest.size:
        running += phi[rest].sum()
        rows.append(WaterfallRow(len(rows) + 1, "other", float("nan"), float(phi[rest].sum()), float(running)))
    return rows


def write_waterfall_csv(rows, path, base_value: float, extra: dict | None = None) -> None:
    """Rank 0 carries the base value; the last running sum is f(x)."""
    extra = extra or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "feature", "value", "phi", "running_sum", *extra])
        w.writerow([0, "base_value", "", "", repr(float(base_value)), *extra.values()])
        for row in rows:
            value = "" if np.isnan(row.value) else repr(row.value)
            w.writerow([row.rank, row.feature, value, repr(row.phi), repr(row.running_sum), *extra.values()])


# -- static SVG renderings -----------------------------------------------------

_W, _ROW, _LEFT = 640, 22, 220


def _svg(height, body) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{height}" '
        f'font-family="sans-serif" font-size="11">\n{body}</svg>\n'
    )


def summary_svg(summary: ShapSummary, top_n: int = 20) -> str:
    """Horizontal bar chart of mean |phi| for the top features."""
    order = np.lexsort((np.arange(len(summary.features)), summary.rank))[:top_n]
    peak = max(float(summary.mean_abs_phi.max()), 1e-300)
    parts = []
    for r, j in enumerate(order):
        y = 10 + r * _ROW
        width = (_W - _LEFT - 20) * summary.mean_abs_phi[j] / peak
        parts.append(f'<text x="{_LEFT - 6}" y="{y + 14}" text-anchor="end">{escape(summary.features[j])}</text>')
        parts.append(f'<rect x="{_LEFT}" y="{y + 3}" width="{width:.2f}" height="{_ROW - 6}" fill="#4477aa"/>')
    return _svg(20 + len(order) * _ROW, "\n".join(parts) + "\n")


def waterfall_svg(rows, base_value: float) -> str:
    """Waterfall of contributions from the base value to the model output (decision-score axis)."""
    levels = [base_value] + [r.running_sum for r in rows]
    lo, hi = min(levels), max(levels)
    span = hi - lo if hi > lo else 1.0
    sx = lambda v: _LEFT + (v - lo) / span * (_W - _LEFT - 20)  # noqa: E731
    parts = []
    prev = base_value
    for r, row in enumerate(rows):
        y = 10 + r * _ROW
        x0, x1 = sorted((sx(prev), sx(row.running_sum)))
        colour = "#cc3311" if row.phi > 0 else "#0077bb"
        parts.append(f'<text x="{_LEFT - 6}" y="{y + 14}" text-anchor="end">{escape(row.feature)}</text>')
        parts.append(
            f'<rect x="{x0:.2f}" y="{y + 3}" width="{max(x1 - x0, 0.5):.2f}" height="{_ROW - 6}" fill="{colour}"/>'
        )
        prev = row.running_sum
    foot = 10 + len(rows) * _ROW
    parts.append(f'<text x="{_LEFT}" y="{foot + 14}">base {base_value:.4g} to f(x) {prev:.4g} (decision score)</text>')
    return _svg(foot + 24, "\n".join(parts) + "\n")
