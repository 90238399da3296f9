"""Trace serialization and mode-versus-mode comparison runs.

Exports are byte-stable: floats carry 9 significant digits, column order is
fixed, and every file ends in a newline, so identical runs produce identical
files and golden-file tests are possible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import engine
from .config import Config, serialize_config
from .engine import Trace
from .metrics import MetricsReport, collect_metrics
from .oracle import OptimalAllocation, solve_separable


def _fmt(v: float) -> str:
    return format(float(v), ".9g")


@dataclass(frozen=True)
class ExportManifest:
    """Data files written for one run, with their data row counts."""

    directory: Path
    rows: dict[str, int]


def export_trace(trace: Trace, report: MetricsReport, out_dir: str | Path) -> ExportManifest:
    """Write trace.csv, events.csv, metrics.csv and summary.json.

    trace.csv holds the per-device snapshots; events.csv and metrics.csv are
    full rate. Returns the manifest of files with data row counts (headers
    excluded).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = trace.m
    rows: dict[str, int] = {}

    lines = ["step,device,resource,x,x_bar,grad_at_xbar"]
    for s, step in enumerate(trace.snap_steps):
        for i in range(trace.n):
            for j in range(m):
                lines.append(
                    f"{int(step)},{i},{j},"
                    f"{_fmt(trace.x_snap[s, i, j])},"
                    f"{_fmt(trace.xbar_snap[s, i, j])},"
                    f"{_fmt(trace.grad_snap[s, i, j])}"
                )
    rows["trace.csv"] = len(lines) - 1
    (out / "trace.csv").write_text("\n".join(lines) + "\n")

    lines = ["step,resource,event"]
    for k in range(trace.events.shape[0]):
        for j in range(m):
            lines.append(f"{k},{j},{int(trace.events[k, j])}")
    rows["events.csv"] = len(lines) - 1
    (out / "events.csv").write_text("\n".join(lines) + "\n")

    cols = (
        ["step"]
        + [f"spread_r{j}" for j in range(m)]
        + ["cost_ratio"]
        + [f"sum_avg_r{j}" for j in range(m)]
        + [f"sum_inst_r{j}" for j in range(m)]
        + [f"cum_bits_r{j}" for j in range(m)]
    )
    lines = [",".join(cols)]
    cum = report.cumulative_event_bits
    for k in range(len(report.steps)):
        parts = [str(int(report.steps[k]))]
        parts += [_fmt(v) for v in report.spread[k]]
        parts.append(_fmt(report.cost_ratio[k]))
        parts += [_fmt(v) for v in report.totals_avg[k]]
        parts += [_fmt(v) for v in report.totals_inst[k]]
        parts += [str(int(v)) for v in cum[k]]
        lines.append(",".join(parts))
    rows["metrics.csv"] = len(lines) - 1
    (out / "metrics.csv").write_text("\n".join(lines) + "\n")

    summary = {
        "config": serialize_config(trace.config),
        "config_hash": trace.config_hash,
        "mode": trace.mode,
        "seed": trace.seed,
        "cost_functions": [
            f.to_dict() if hasattr(f, "to_dict") else {"repr": repr(f)}
            for f in trace.functions
        ],
        "clamp_low": trace.clamp_low,
        "clamp_high": trace.clamp_high,
        "summary": {
            "final_cost_ratio": report.summary.final_cost_ratio,
            "final_spread": list(report.summary.final_spread),
            "distance_median": report.summary.distance_median,
            "distance_max": report.summary.distance_max,
            "event_bits": list(report.summary.event_bits),
            "wall_time_s": report.summary.wall_time_s,
        },
    }
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    rows["summary.json"] = 1

    return ExportManifest(directory=out, rows=rows)


def convergence_step(spread: np.ndarray, thresholds: np.ndarray) -> int:
    """First step after which every resource's spread stays at or below threshold.

    Returns 0 when the spread never exceeds the thresholds and one past the
    last step when it never settles.
    """
    above = np.any(spread > thresholds[None, :], axis=1)
    idx = np.nonzero(above)[0]
    return 0 if idx.size == 0 else int(idx[-1]) + 1


@dataclass
class ComparisonReport:
    """Two runs on identical cost functions and seeds, measured side by side.

    Event overhead is reported two ways on purpose: total bits at the common
    final step, and bits accumulated up to each run's own convergence step.
    A faster-converging mode can show more bits at a fixed step yet fewer
    bits to reach consensus; both readings are provided rather than ranked.
    """

    modes: tuple[str, str]
    traces: tuple[Trace, Trace]
    reports: tuple[MetricsReport, MetricsReport]
    optimum: OptimalAllocation
    diff_steps: np.ndarray        # (S,)
    diff: np.ndarray              # (S, n, m)  |x_bar_A - x_bar_B|
    spread_threshold: np.ndarray  # (m,)
    convergence_steps: tuple[int, int]

    @property
    def event_bits_final(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return tuple(r.summary.event_bits for r in self.reports)

    @property
    def event_bits_at_convergence(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        out = []
        for trace, step in zip(self.traces, self.convergence_steps):
            step = min(step, len(trace.steps) - 1)
            out.append(tuple(int(v) for v in trace.cumulative_event_bits[step]))
        return tuple(out)


def compare_modes(
    config: Config,
    modes: tuple[str, str] | None = None,
    spread_fraction: float = 0.05,
) -> ComparisonReport:
    """Run two update modes on the same instance and measure their gap.

    With ``modes`` unset the config must say ``mode: both`` and the pair is
    (deterministic, stochastic). The convergence-step estimate uses a common
    per-resource threshold: ``spread_fraction`` of the larger of the two
    runs' peak spreads, judged sustainedly.
    """
    if modes is None:
        if config.mode != "both":
            raise ValueError("compare_modes needs mode 'both' (or an explicit mode pair)")
        modes = ("deterministic", "stochastic")
    trace_a = engine.run(config, mode=modes[0])
    trace_b = engine.run(config, mode=modes[1])
    optimum = solve_separable(
        trace_a.functions, [p.capacity for p in config.resources], tol=config.solver_tol
    )
    report_a = collect_metrics(trace_a, optimum.x_star)
    report_b = collect_metrics(trace_b, optimum.x_star)
    diff = np.abs(trace_a.xbar_snap - trace_b.xbar_snap)
    peak = np.maximum(trace_a.spread.max(axis=0), trace_b.spread.max(axis=0))
    thresholds = spread_fraction * peak
    steps = (
        convergence_step(trace_a.spread, thresholds),
        convergence_step(trace_b.spread, thresholds),
    )
    return ComparisonReport(
        modes=modes,
        traces=(trace_a, trace_b),
        reports=(report_a, report_b),
        optimum=optimum,
        diff_steps=trace_a.snap_steps,
        diff=diff,
        spread_threshold=thresholds,
        convergence_steps=steps,
    )


def export_comparison(cr: ComparisonReport, out_dir: str | Path) -> ExportManifest:
    """Write both runs' exports into per-mode subdirectories plus comparison.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows: dict[str, int] = {}
    for mode, trace, report in zip(cr.modes, cr.traces, cr.reports, strict=True):
        sub = out / mode
        manifest = export_trace(trace, report, sub)
        for name, count in manifest.rows.items():
            rows[f"{mode}/{name}"] = count
    final_diff = cr.diff[-1]
    doc = {
        "modes": list(cr.modes),
        "spread_threshold": [float(v) for v in cr.spread_threshold],
        "convergence_steps": list(cr.convergence_steps),
        "event_bits": {
            mode: list(r.summary.event_bits) for mode, r in zip(cr.modes, cr.reports)
        },
        "event_bits_at_convergence": {
            mode: list(bits)
            for mode, bits in zip(cr.modes, cr.event_bits_at_convergence)
        },
        "final_avg_diff_median": float(np.median(final_diff)),
        "final_avg_diff_max": float(final_diff.max()),
        "optimum_mu": [float(v) for v in cr.optimum.mu],
        "optimum_kkt_residual": cr.optimum.kkt_residual,
    }
    (out / "comparison.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    rows["comparison.json"] = 1
    return ExportManifest(directory=out, rows=rows)
