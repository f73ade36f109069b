"""Report figures: render per-replicate metrics next to a result CSV.

Figures are written as PNG siblings of the CSV (``<stem>_metrics.png`` and
``<stem>_hist.png``) so a run directory holds the table, the JSON summary,
and the plots together.  Rendering is headless (Agg backend).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["HEADLINE", "render_report"]

# The single metric a quick look should land on, per experiment kind.
HEADLINE: dict[str, str] = {
    "points": "mean_x",
    "rgg-connectivity": "C1_frac",
    "giant": "C1_frac",
    "c1-scan": "C1",
    "web": "coverage",
    "mixed-perc": "frac_mixed",
    "gw": "q_mc",
    "brw": "population",
    "bounds": "r_star",
}


def _numeric_columns(rows: list[dict]) -> list[str]:
    if not rows:
        return []
    cols = []
    for name, value in rows[0].items():
        if name in ("rep", "seed"):
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            continue
        cols.append(name)
    return cols


def _stem(csv_path: str) -> str:
    return csv_path[: -len(".csv")] if csv_path.endswith(".csv") else csv_path


def render_report(kind: str, rows: list[dict], csv_path: str) -> list[str]:
    """Render the metric figures for `rows` next to `csv_path`.

    Returns the list of files written.  `rows` should be the replicate rows
    only (no aggregate rows); sweeps pass the concatenated replicates.
    """
    cols = _numeric_columns(rows)
    if not cols:
        return []
    written = []
    reps = range(len(rows))

    ncols = min(3, len(cols))
    nrows = (len(cols) + ncols - 1) // ncols
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.0 * ncols, 2.6 * nrows), squeeze=False
    )
    for ax, name in zip(axes.flat, cols):
        ax.plot(reps, [row[name] for row in rows], marker="o", markersize=3, lw=0.8)
        ax.set_title(name, fontsize=9)
        ax.tick_params(labelsize=7)
    for ax in axes.flat[len(cols):]:
        ax.axis("off")
    fig.suptitle(f"{kind}: metrics per replicate", fontsize=11)
    fig.tight_layout(rect=(0, 0, 1, 0.96))
    metrics_path = _stem(csv_path) + "_metrics.png"
    fig.savefig(metrics_path, dpi=120)
    plt.close(fig)
    written.append(metrics_path)

    headline = HEADLINE.get(kind)
    if headline in rows[0]:
        values = [row[headline] for row in rows]
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        ax.hist(values, bins=min(30, max(5, len(values) // 2 + 1)), edgecolor="black")
        ax.set_xlabel(headline)
        ax.set_ylabel("replicates")
        ax.set_title(f"{kind}: {headline} distribution", fontsize=11)
        fig.tight_layout()
        hist_path = _stem(csv_path) + "_hist.png"
        fig.savefig(hist_path, dpi=120)
        plt.close(fig)
        written.append(hist_path)
    return written
