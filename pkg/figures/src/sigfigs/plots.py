"""Render curves, histograms, and the persistence heatmap from bundle CSVs."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


class FigureError(ValueError):
    """Raised when an input CSV is missing, empty, or lacks needed columns."""


LABELS = ("aligned", "successful_misunderstanding", "unconverged")
HISTOGRAM_METRICS = ("success", "intent_met", "suc_mis")
METRIC_TITLES = {
    "success": "positive-reward share",
    "intent_met": "intent met",
    "suc_mis": "successful misunderstandings",
}


def _read_rows(path: str | Path, required: list[str]) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise FigureError(f"{path}: no such file")
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise FigureError(f"{path}: empty file")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise FigureError(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise FigureError(f"{path}: no data rows")
    return rows


def plot_curves(aggregate_csv: str | Path, out_path: str | Path) -> Path:
    """Reward and vocabulary against episodes, one line per experiment.

    Phase-2 checkpoints continue on a global episode axis; a dashed vertical
    line marks the phase boundary.
    """
    rows = _read_rows(
        aggregate_csv,
        ["experiment", "phase", "episode", "reward_mean", "reward_sd",
         "vocabulary_mean", "vocabulary_sd"],
    )
    series: dict[str, list[dict]] = defaultdict(list)
    for row in rows:
        series[row["experiment"]].append(row)
    boundaries = {
        name: max(int(r["episode"]) for r in rs if int(r["phase"]) == 1)
        for name, rs in series.items()
    }

    fig, (ax_reward, ax_vocab) = plt.subplots(1, 2, figsize=(11, 4))
    for name, rs in series.items():
        boundary = boundaries[name]
        xs, rewards, r_sd, vocab, v_sd = [], [], [], [], []
        for row in sorted(rs, key=lambda r: (int(r["phase"]), int(r["episode"]))):
            episode = int(row["episode"])
            xs.append(episode if int(row["phase"]) == 1 else boundary + episode)
            rewards.append(float(row["reward_mean"]))
            r_sd.append(float(row["reward_sd"]))
            vocab.append(float(row["vocabulary_mean"]))
            v_sd.append(float(row["vocabulary_sd"]))
        for ax, ys, sds in ((ax_reward, rewards, r_sd), (ax_vocab, vocab, v_sd)):
            line, = ax.plot(xs, ys, marker="o", markersize=3, label=name)
            ax.fill_between(
                xs,
                [y - s for y, s in zip(ys, sds)],
                [y + s for y, s in zip(ys, sds)],
                color=line.get_color(),
                alpha=0.15,
                linewidth=0,
            )
            ax.axvline(boundary, linestyle="--", color="grey", linewidth=1)
    ax_reward.set_xlabel("episode")
    ax_reward.set_ylabel("average reward")
    ax_reward.set_title("Reward")
    ax_vocab.set_xlabel("episode")
    ax_vocab.set_ylabel("average vocabulary size")
    ax_vocab.set_title("Vocabulary")
    ax_reward.legend(fontsize=8)
    fig.tight_layout()
    out = Path(out_path)
    fig.savefig(out)
    plt.close(fig)
    return out


def plot_histograms(histogram_csv: str | Path, out_path: str | Path) -> Path:
    """Ten-bin bar charts per metric for each phase end."""
    rows = _read_rows(histogram_csv, ["metric", "phase", "bin_low", "bin_high", "count"])
    table: dict[tuple[int, str], list[tuple[float, int]]] = defaultdict(list)
    for row in rows:
        table[(int(row["phase"]), row["metric"])].append(
            (float(row["bin_low"]), int(row["count"]))
        )
    metrics = [m for m in HISTOGRAM_METRICS if any(key[1] == m for key in table)]
    if not metrics:
        raise FigureError(f"{histogram_csv}: no recognised metrics")
    phases = sorted({key[0] for key in table})

    fig, axes = plt.subplots(
        len(phases), len(metrics), figsize=(3.4 * len(metrics), 2.8 * len(phases)),
        squeeze=False,
    )
    for i, phase in enumerate(phases):
        for j, metric in enumerate(metrics):
            ax = axes[i][j]
            bins = sorted(table.get((phase, metric), []))
            xs = [low + 0.05 for low, _ in bins]
            counts = [c for _, c in bins]
            ax.bar(xs, counts, width=0.09, edgecolor="black", linewidth=0.4)
            ax.set_xlim(0, 1)
            ax.set_xticks([0, 0.5, 1])
            ax.set_title(f"phase {phase}: {METRIC_TITLES.get(metric, metric)}", fontsize=9)
            if j == 0:
                ax.set_ylabel("runs")
    fig.tight_layout()
    out = Path(out_path)
    fig.savefig(out)
    plt.close(fig)
    return out


def plot_crosstab(crosstab_csv: str | Path, out_path: str | Path) -> Path:
    """Heatmap of phase-1 label against phase-2 label counts."""
    rows = _read_rows(crosstab_csv, ["phase1_label", "phase2_label", "count"])
    counts = {(r["phase1_label"], r["phase2_label"]): int(r["count"]) for r in rows}
    grid = [[counts.get((a, b), 0) for b in LABELS] for a in LABELS]

    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    image = ax.imshow(grid, cmap="Blues")
    short = [label.replace("successful_misunderstanding", "suc. mis.") for label in LABELS]
    ax.set_xticks(range(len(LABELS)), short, rotation=20, ha="right")
    ax.set_yticks(range(len(LABELS)), short)
    ax.set_xlabel("phase-2 label")
    ax.set_ylabel("phase-1 label")
    peak = max(max(row) for row in grid) or 1
    for i in range(len(LABELS)):
        for j in range(len(LABELS)):
            colour = "white" if grid[i][j] > 0.6 * peak else "black"
            ax.text(j, i, str(grid[i][j]), ha="center", va="center", color=colour)
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    out = Path(out_path)
    fig.savefig(out)
    plt.close(fig)
    return out
