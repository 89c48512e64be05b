# pipeline/ablation.py
"""Run the pipeline once per sampler on the same footage and tabulate the results."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence

from footage.exceptions import OutOfRangeInput
from footage.models import VideoRecord
from footage.reports import NOT_AVAILABLE, write_report
from metrics.evaluation import evaluate, uniform_selection
from sampling.sampler import SamplerMethod, frame_budget

from .runner import PipelineConfig, resolve_video, run_pipeline

logger = logging.getLogger(__name__)

UNIFORM = "uniform"
COLUMNS = (
    "method",
    "sampling_seconds",
    "achieved_speedup",
    "speedup_deviation",
    "semantic_retained",
    "discontinuity",
    "instability",
    "transition_smoothness",
    "selected_frames",
)


@dataclass(frozen=True)
class AblationResult:
    rows: List[Dict[str, Any]]

    def to_dict(self) -> Dict[str, Any]:
        return {"rows": self.rows}

    def table(self) -> str:
        return format_table(self.rows)


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def format_table(rows: Sequence[Dict[str, Any]]) -> str:
    cells = [list(COLUMNS)] + [[_cell(row.get(c, NOT_AVAILABLE)) for c in COLUMNS] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(COLUMNS))]
    lines = ["  ".join(c.rjust(w) if k else c.ljust(w) for k, (c, w) in enumerate(zip(r, widths))) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _uniform_row(video: VideoRecord, config: PipelineConfig) -> Dict[str, Any]:
    selection = uniform_selection(video.n, frame_budget(video.n, config.speedup), config.speedup)
    report = evaluate(video, selection, config.speedup, None, config.metrics_window)
    return {"method": UNIFORM, "sampling_seconds": 0.0, **report.to_dict()}


def run_ablation(
    config: PipelineConfig,
    methods: Sequence[str] = (SamplerMethod.LLC, SamplerMethod.SC, SamplerMethod.OMP),
    video: Optional[VideoRecord] = None,
    output: Optional[str] = None,
) -> AblationResult:
    """
    One row per method: solver wall-time of the sampling stage plus every
    metric. ``uniform`` adds the evenly spaced baseline at the same
    nominal speed-up.
    """
    methods = [str(m) for m in methods]
    if len(methods) < 2:
        raise OutOfRangeInput(f"an ablation compares at least 2 methods, got {methods}")
    unknown = [m for m in methods if m != UNIFORM and m not in SamplerMethod.values]
    if unknown:
        raise OutOfRangeInput(f"unknown methods: {', '.join(unknown)}")
    if video is None:
        video = resolve_video(config)

    rows: List[Dict[str, Any]] = []
    for method in methods:
        if method == UNIFORM:
            rows.append(_uniform_row(video, config))
            continue
        result = run_pipeline(replace(config, sampler=method, output=None), video=video)
        rows.append({"method": method, "sampling_seconds": result.sampling_seconds, **result.report.to_dict()})
        logger.info("Ablation %s: sampling took %.4fs", method, result.sampling_seconds)

    ablation = AblationResult(rows=rows)
    if output:
        write_report(output, ablation.to_dict())
    return ablation
