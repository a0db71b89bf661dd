"""CSV artifacts and the printed summary table for experiment batches.

Every number shown in the printed summary also appears in the CSV bundle, and
the bundle is a pure function of (config, seed, repetitions): fixed column
order, fixed 4-decimal formatting, '\n' line endings.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .experiment import (
    BatchSummary,
    Checkpoint,
    ExperimentConfig,
    HISTOGRAM_METRICS,
    METRIC_FIELDS,
    RunTrace,
)
from .game import EpisodeRecord
from .metrics import ALIGNED, SUCCESSFUL_MISUNDERSTANDING, UNCONVERGED, histogram, histogram_edges

LABELS = (ALIGNED, SUCCESSFUL_MISUNDERSTANDING, UNCONVERGED)

AGGREGATE_CSV = "aggregate.csv"
RUNS_CSV = "runs.csv"
HISTOGRAM_CSV = "histograms.csv"
CROSSTAB_CSV = "crosstab.csv"
TRACE_CSV = "trace.csv"


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def _writer(path: Path):
    handle = path.open("w", newline="")
    return handle, csv.writer(handle, lineterminator="\n")


def write_bundle(
    summary: BatchSummary,
    out_dir: str | Path,
    trace: Optional[Sequence[EpisodeRecord]] = None,
) -> list[Path]:
    """Write the CSV artifacts; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        _write_aggregate(summary, out / AGGREGATE_CSV),
        _write_runs(summary, out / RUNS_CSV),
        write_histogram_csv(summary.histograms, out / HISTOGRAM_CSV),
        write_crosstab_csv(summary.crosstab, out / CROSSTAB_CSV),
    ]
    if trace is not None:
        written.append(_write_trace(summary.config, trace, out / TRACE_CSV))
    return written


def _write_aggregate(summary: BatchSummary, path: Path) -> Path:
    grouped = summary.config.phase1.groups is not None
    fields = METRIC_FIELDS + (("group_alignment",) if grouped else ())
    header = ["experiment", "phase", "episode"]
    for name in fields:
        header += [f"{name}_mean", f"{name}_sd"]
    handle, writer = _writer(path)
    with handle:
        writer.writerow(header)
        for stat in summary.checkpoint_stats:
            row = [summary.config.name, stat.phase, stat.episode]
            for name in fields:
                row += [_fmt(stat.means[name]), _fmt(stat.sds[name])]
            writer.writerow(row)
    return path


def _run_row(run: RunTrace, grouped: bool) -> list:
    row: list = [run.rep_index, run.matrix_tag]
    for phase, label in ((1, run.phase1_label), (2, run.phase2_label)):
        end = run.phase_end(phase)
        row += [
            _fmt(end.reward),
            _fmt(end.success),
            _fmt(end.vocabulary),
            _fmt(end.alignment),
            _fmt(end.intent_met),
            _fmt(end.suc_mis),
            label,
        ]
    if grouped:
        row += [_fmt(run.phase_end(1).group_alignment), _fmt(run.phase_end(2).group_alignment)]
    return row


RUNS_BASE_HEADER = ["rep", "matrix"] + [
    f"p{phase}_{col}"
    for phase in (1, 2)
    for col in ("reward", "success", "vocabulary", "alignment", "intent_met", "suc_mis", "label")
]


def _write_runs(summary: BatchSummary, path: Path) -> Path:
    grouped = summary.config.phase1.groups is not None
    header = RUNS_BASE_HEADER + (["p1_group_alignment", "p2_group_alignment"] if grouped else [])
    handle, writer = _writer(path)
    with handle:
        writer.writerow(header)
        for run in summary.runs:
            writer.writerow(_run_row(run, grouped))
    return path


def write_histogram_csv(histograms: dict[tuple[int, str], list[int]], path: Path) -> Path:
    handle, writer = _writer(path)
    edges = histogram_edges()
    with handle:
        writer.writerow(["metric", "phase", "bin_low", "bin_high", "count"])
        for phase in (1, 2):
            for metric in HISTOGRAM_METRICS:
                counts = histograms[(phase, metric)]
                for (low, high), count in zip(edges, counts):
                    writer.writerow([metric, phase, f"{low:.1f}", f"{high:.1f}", count])
    return path


def write_crosstab_csv(crosstab: dict[tuple[str, str], int], path: Path) -> Path:
    handle, writer = _writer(path)
    with handle:
        writer.writerow(["phase1_label", "phase2_label", "count"])
        for first in LABELS:
            for second in LABELS:
                writer.writerow([first, second, crosstab.get((first, second), 0)])
    return path


def _write_trace(config: ExperimentConfig, trace: Sequence[EpisodeRecord], path: Path) -> Path:
    boundary = config.phase1.episodes
    handle, writer = _writer(path)
    with handle:
        writer.writerow(
            ["episode", "phase", "sender", "receiver", "state", "signal", "minted",
             "action", "reward", "intent_met"]
        )
        for rec in trace:
            phase = 1 if rec.episode_index <= boundary else 2
            writer.writerow(
                [rec.episode_index, phase, rec.sender, rec.receiver, rec.state,
                 f"{rec.signal[0]}:{rec.signal[1]}", int(rec.minted), rec.action,
                 _fmt(rec.reward), int(rec.intent_met)]
            )
    return path


# --------------------------------------------------------------------------
# printed summary


def format_summary(summary: BatchSummary) -> str:
    config = summary.config
    agents1 = config.phase1.num_agents
    agents2 = agents1 + (1 if config.intervention == "population_increase" else 0)
    lines = [
        f"Experiment '{config.name}': {config.repetitions} repetitions, "
        f"master seed {config.master_seed}",
        f"Intervention after phase 1: {config.intervention}",
        "",
        f"{'Episodes':<12}{'Reward':<15}{'|Vocabulary|':<15}{'Alignment':<15}"
        f"{'Intent Met':<15}{'Suc. Mis.':<15}",
    ]
    grouped = config.phase1.groups is not None
    restricted = " (restricted pairs)" if grouped else ""
    for phase, title in (
        (1, f"Phase 1: convergence, {agents1} agents{restricted}"),
        (2, f"Phase 2: robustness test, {agents2} agents"),
    ):
        lines.append(f"-- {title} --")
        for stat in summary.checkpoint_stats:
            if stat.phase != phase:
                continue
            label = str(stat.episode) if phase == 1 else f"{config.phase1.episodes}+{stat.episode}"
            cells = [
                f"{stat.means[m]:.2f} ({stat.sds[m]:.2f})"
                for m in ("reward", "vocabulary", "alignment", "intent_met", "suc_mis")
            ]
            lines.append(f"{label:<12}" + "".join(f"{c:<15}" for c in cells))
    lines.append("")
    lines.append("Run labels at phase ends (phase 1 / phase 2):")
    for label in LABELS:
        lines.append(
            f"  {label:<28}{summary.label_counts.get((1, label), 0):>6}"
            f"{summary.label_counts.get((2, label), 0):>8}"
        )
    lines.append("Persistence (phase-1 label x phase-2 label):")
    for first in LABELS:
        row = "  ".join(f"{summary.crosstab.get((first, second), 0):>5}" for second in LABELS)
        lines.append(f"  {first:<28}{row}")
    if grouped:
        end1 = [s for s in summary.checkpoint_stats if s.phase == 1][-1]
        lines.append(
            f"Phase-1 end within-group alignment: {end1.means['group_alignment']:.2f} "
            f"({end1.sds['group_alignment']:.2f}) vs population {end1.means['alignment']:.2f}"
        )
    return "\n".join(lines)


# --------------------------------------------------------------------------
# re-reading run rows (for report without re-simulation)


class RunsCsvError(ValueError):
    """Raised when a runs CSV cannot be interpreted."""


def read_runs_csv(path: str | Path) -> list[dict]:
    path = Path(path)
    try:
        with path.open(newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None:
                raise RunsCsvError(f"{path}: empty file")
            missing = [c for c in RUNS_BASE_HEADER if c not in reader.fieldnames]
            if missing:
                raise RunsCsvError(f"{path}: missing columns {missing}")
            rows = list(reader)
    except OSError as exc:
        raise RunsCsvError(f"{path}: {exc}") from exc
    if not rows:
        raise RunsCsvError(f"{path}: no data rows")
    parsed = []
    for i, row in enumerate(rows):
        try:
            parsed.append(
                {
                    "rep": int(row["rep"]),
                    "matrix": row["matrix"],
                    **{
                        f"p{phase}_{col}": float(row[f"p{phase}_{col}"])
                        for phase in (1, 2)
                        for col in ("reward", "success", "vocabulary", "alignment",
                                    "intent_met", "suc_mis")
                    },
                    "p1_label": row["p1_label"],
                    "p2_label": row["p2_label"],
                }
            )
        except (KeyError, ValueError) as exc:
            raise RunsCsvError(f"{path}: bad row {i + 2}: {exc}") from exc
    return parsed


def report_from_rows(rows: Sequence[dict]) -> tuple[dict[tuple[int, str], list[int]], dict[tuple[str, str], int]]:
    """Recompute phase-end histograms and the persistence cross-tab."""
    histograms = {}
    for phase in (1, 2):
        for metric in HISTOGRAM_METRICS:
            histograms[(phase, metric)] = histogram(row[f"p{phase}_{metric}"] for row in rows)
    crosstab: dict[tuple[str, str], int] = {}
    for row in rows:
        key = (row["p1_label"], row["p2_label"])
        crosstab[key] = crosstab.get(key, 0) + 1
    return histograms, crosstab


def format_report(histograms: dict[tuple[int, str], list[int]],
                  crosstab: dict[tuple[str, str], int], total: int) -> str:
    lines = [f"{total} runs"]
    edges = histogram_edges()
    for phase in (1, 2):
        lines.append(f"-- phase {phase} end --")
        for metric in HISTOGRAM_METRICS:
            counts = histograms[(phase, metric)]
            bars = " ".join(f"{c:>4}" for c in counts)
            lines.append(f"  {metric:<12}{bars}")
    lines.append("  bins: " + " ".join(f"{low:.1f}-{high:.1f}" for low, high in edges))
    lines.append("Persistence (phase-1 label x phase-2 label):")
    for first in LABELS:
        row = "  ".join(f"{crosstab.get((first, second), 0):>5}" for second in LABELS)
        lines.append(f"  {first:<28}{row}")
    return "\n".join(lines)
