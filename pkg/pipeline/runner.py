# pipeline/runner.py
"""
End-to-end fast-forward: profile -> rate plan -> per-segment sampling ->
per-segment smoothing -> bridges -> metrics.

Every stage is a plain function over in-memory objects so the management
commands can run them one at a time from intermediate files and get the
same result as ``run_pipeline``.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, TypeVar

from django.conf import settings

from footage.container import read_container
from footage.exceptions import BinCountMismatch, OutOfRangeInput
from footage.models import Selection, SelectionEntry, VideoRecord
from footage.reports import selection_to_dict, write_report
from gapfill.bridges import fill_all, rates_with_bridges
from metrics.evaluation import MetricsReport, evaluate
from profiles.rates import RatePlan, assign_rates
from profiles.segmentation import build_profile, segment_profile
from sampling.sampler import SamplerChoice, sample_segment
from smoothing.smoother import smooth_segment
from synth.scenario import ScenarioSpec, generate

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

SELECTION_FILE = "selection.yaml"
METRICS_FILE = "metrics.yaml"
RATES_FILE = "rates.yaml"


@dataclass(frozen=True)
class PipelineConfig:
    input: Optional[str] = None
    output: Optional[str] = None  # directory receiving rates/selection/metrics reports
    speedup: float = 10.0
    sampler: str = "llc"
    spf: int = 2
    fill: bool = True
    levels: int = 2
    min_seg_len: Optional[int] = None  # default 2 * speedup
    smooth_radius: Optional[int] = None  # default fps / 2
    s_min: float = 1.0
    s_max: Optional[float] = None  # default 4 * speedup
    lambda_scale: float = 0.01
    hist_bins: Optional[int] = None
    metrics_window: int = 4
    seed: Optional[int] = None
    threads: Optional[int] = None

    def __post_init__(self):
        if self.speedup <= 1:
            raise OutOfRangeInput(f"speed-up must be > 1, got {self.speedup}")
        if self.spf < 1:
            raise OutOfRangeInput(f"SpF must be >= 1, got {self.spf}")
        if self.metrics_window < 1:
            raise OutOfRangeInput(f"metrics window must be >= 1, got {self.metrics_window}")

    @classmethod
    def from_settings(cls, **overrides: Any) -> "PipelineConfig":
        """Defaults from settings.FFWD_*, then any non-None override."""
        values: Dict[str, Any] = {
            "speedup": getattr(settings, "FFWD_DEFAULT_SPEEDUP", 10.0),
            "spf": getattr(settings, "FFWD_DEFAULT_SPF", 2),
            "levels": getattr(settings, "FFWD_DEFAULT_LEVELS", 2),
            "lambda_scale": getattr(settings, "FFWD_LAMBDA_SCALE", 0.01),
            "metrics_window": getattr(settings, "FFWD_METRICS_WINDOW", 4),
        }
        known = {f.name for f in fields(cls)}
        values.update({k: v for k, v in overrides.items() if k in known and v is not None})
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    @property
    def choice(self) -> SamplerChoice:
        return SamplerChoice(method=self.sampler, lambda_scale=self.lambda_scale)

    @property
    def min_len(self) -> int:
        return self.min_seg_len if self.min_seg_len is not None else max(1, int(round(2 * self.speedup)))

    def radius_for(self, video: VideoRecord) -> int:
        return self.smooth_radius if self.smooth_radius is not None else int(round(video.fps / 2))


@dataclass(frozen=True)
class PipelineResult:
    plan: RatePlan
    selection: Selection
    report: MetricsReport
    rates: List[float]
    sampling_seconds: float


def resolve_threads(requested: Optional[int] = None) -> int:
    """FFWD_THREADS beats the flag, the flag beats the core count."""
    forced = getattr(settings, "FFWD_THREADS", None)
    if forced:
        return max(1, int(forced))
    if requested:
        return max(1, int(requested))
    return max(1, int(getattr(settings, "FFWD_DEFAULT_THREADS", 1) or 1))


def map_ordered(fn: Callable[[T], R], items: Sequence[T], threads: int) -> List[R]:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def load_video(path, hist_bins: Optional[int] = None) -> VideoRecord:
    video = read_container(path)
    if hist_bins is not None and video.bins != hist_bins:
        raise BinCountMismatch(f"--hist-bins={hist_bins} but the container stores {video.bins} bins")
    return video


def resolve_video(config: PipelineConfig) -> VideoRecord:
    """The input container, or a default synthetic scenario when only a seed is given."""
    if config.input:
        return load_video(config.input, config.hist_bins)
    if config.seed is not None:
        return generate(ScenarioSpec(seed=config.seed))
    raise OutOfRangeInput("no input container or scenario seed given")


# ---------- stages ----------


def plan_rates(video: VideoRecord, config: PipelineConfig) -> RatePlan:
    profile = build_profile(video, radius=config.radius_for(video))
    segments = segment_profile(profile, levels=config.levels, min_len=config.min_len)
    return assign_rates(segments, config.speedup, s_min=config.s_min, s_max=config.s_max)


def sample_all(
    video: VideoRecord,
    plan: RatePlan,
    choice: SamplerChoice,
    spf: int,
    threads: int = 1,
    timings: Optional[List[float]] = None,
) -> List[List[SelectionEntry]]:
    def one(k: int):
        spent: List[float] = []
        entries = sample_segment(video, plan.segments[k], choice, spf, segment_id=k, timings=spent)
        return entries, sum(spent)

    results = map_ordered(one, range(len(plan.segments)), threads)
    if timings is not None:
        timings.extend(seconds for _, seconds in results)
    return [entries for entries, _ in results]


def smooth_all(
    video: VideoRecord,
    plan: RatePlan,
    per_segment: Sequence[Sequence[SelectionEntry]],
    threads: int = 1,
) -> List[List[SelectionEntry]]:
    def one(k: int):
        return smooth_segment(video, plan.segments[k], per_segment[k], segment_id=k)

    return map_ordered(one, range(len(plan.segments)), threads)


def split_by_segment(selection: Selection, plan: RatePlan) -> List[List[SelectionEntry]]:
    return [selection.for_segment(k) for k in range(len(plan.segments))]


def merge_segments(
    video: VideoRecord,
    plan: RatePlan,
    per_segment: Sequence[Sequence[SelectionEntry]],
    config: PipelineConfig,
    threads: int = 1,
) -> Selection:
    return fill_all(video, plan, per_segment, config.choice, config.spf, enabled=config.fill, threads=threads)


def score(video: VideoRecord, plan: RatePlan, selection: Selection, window: int) -> MetricsReport:
    return evaluate(video, selection, plan.target_speedup, rates_with_bridges(plan, selection.bridges), window)


def write_outputs(output, plan: RatePlan, selection: Selection, report: MetricsReport) -> Path:
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    write_report(out / RATES_FILE, plan.to_dict())
    write_report(out / SELECTION_FILE, selection_to_dict(selection))
    write_report(out / METRICS_FILE, report.to_dict())
    return out


def run_pipeline(config: PipelineConfig, video: Optional[VideoRecord] = None) -> PipelineResult:
    if video is None:
        video = resolve_video(config)
    threads = resolve_threads(config.threads)
    logger.info(
        "Pipeline start: %s frames, S_d=%s, sampler=%s, threads=%s", video.n, config.speedup, config.sampler, threads
    )

    plan = plan_rates(video, config)
    timings: List[float] = []
    sampled = sample_all(video, plan, config.choice, config.spf, threads, timings)
    logger.info("Sampled %s frames over %s segments", sum(map(len, sampled)), len(sampled))
    smoothed = smooth_all(video, plan, sampled, threads)
    logger.info("Smoothed to %s frames", sum(map(len, smoothed)))
    selection = merge_segments(video, plan, smoothed, config, threads)
    report = score(video, plan, selection, config.metrics_window)

    if config.output:
        out = write_outputs(config.output, plan, selection, report)
        logger.info("Reports written to %s", out)
    return PipelineResult(
        plan=plan,
        selection=selection,
        report=report,
        rates=rates_with_bridges(plan, selection.bridges),
        sampling_seconds=sum(timings),
    )
