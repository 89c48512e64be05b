# metrics/evaluation.py
"""
Evaluation of a fast-forward selection.

- discontinuity: RMSE of the selected-frame jumps against the required
  speed-up, divided by the number of selected frames
- instability: mean over sliding windows of the summed per-pixel standard
  deviation of the luminance thumbnails (needs thumbnails)
- semantic_retained: captured score / best achievable score at the same
  frame count
- speedup_deviation: |n / m_c - S_d|
- transition_smoothness: mean squared difference between consecutive
  segment rates (bridges included)
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from footage.exceptions import TooFewFrames, TooFewSegments
from footage.models import Provenance, Selection, SelectionEntry, VideoRecord
from footage.reports import NOT_AVAILABLE

logger = logging.getLogger(__name__)

Picks = Union[Selection, Sequence[int], np.ndarray]


@dataclass(frozen=True)
class MetricsReport:
    achieved_speedup: Optional[float]
    speedup_deviation: Optional[float]
    semantic_retained: Optional[float]
    discontinuity: Optional[float]
    instability: Optional[float]
    transition_smoothness: Optional[float]
    selected_frames: int

    def to_dict(self) -> Dict[str, Any]:
        return {k: NOT_AVAILABLE if v is None else v for k, v in asdict(self).items()}


def _picks(selection: Picks) -> np.ndarray:
    if isinstance(selection, Selection):
        return selection.indices
    return np.asarray(selection, dtype=np.int64)


def discontinuity(selection: Picks, required_speedup: float) -> float:
    idx = _picks(selection)
    if idx.size < 2:
        raise TooFewFrames(f"discontinuity needs at least 2 selected frames, got {idx.size}")
    residuals = np.diff(idx).astype(np.float64) - required_speedup
    return float(np.sqrt(np.sum(residuals**2) / idx.size))


def instability_metric(video: VideoRecord, selection: Picks, window: int = 4) -> Optional[float]:
    """None when the video carries no thumbnails."""
    if not video.has_thumbnails:
        return None
    idx = _picks(selection)
    window = min(int(window), idx.size)
    if window < 2:
        return 0.0
    frames = video.thumbnails[idx].astype(np.float64)
    stacks = sliding_window_view(frames, window, axis=0)  # (m - w + 1, H, W, w)
    per_window = stacks.std(axis=-1).sum(axis=(1, 2))
    return float(per_window.mean())


def semantic_retained(video: VideoRecord, selection: Picks) -> float:
    idx = _picks(selection)
    scores = video.semantic_scores
    captured = float(scores[idx].sum())
    best = float(np.sort(scores)[::-1][: idx.size].sum())
    if best == 0.0:
        return 1.0
    return min(1.0, captured / best)


def speedup_deviation(selection: Picks, required_speedup: float, n: int) -> float:
    count = _picks(selection).size
    if count < 1:
        raise TooFewFrames("speed-up deviation needs at least 1 selected frame")
    return abs(n / count - required_speedup)


def transition_smoothness(rates: Sequence[float]) -> float:
    rates = np.asarray(rates, dtype=np.float64)
    if rates.size < 2:
        raise TooFewSegments(f"transition smoothness needs at least 2 segments, got {rates.size}")
    return float(np.mean(np.diff(rates) ** 2))


def uniform_selection(n: int, m: int, required_speedup: Optional[float] = None) -> Selection:
    """Evenly spaced baseline: m frames of n starting at frame 0."""
    m = max(1, min(int(m), int(n)))
    idx = (np.arange(m) * n) // m
    entries = [SelectionEntry(int(i), 0, Provenance.SAMPLED.value) for i in idx]
    return Selection.from_entries(entries, required_speedup or n / m, n)


def evaluate(
    video: VideoRecord,
    selection: Selection,
    required_speedup: Optional[float] = None,
    rates: Optional[Sequence[float]] = None,
    window: int = 4,
) -> MetricsReport:
    """Every metric at once; a metric whose precondition fails is None."""
    speedup = selection.required_speedup if required_speedup is None else required_speedup
    count = selection.count
    n = video.n
    report = MetricsReport(
        achieved_speedup=n / count if count else None,
        speedup_deviation=speedup_deviation(selection, speedup, n) if count else None,
        semantic_retained=semantic_retained(video, selection) if count else None,
        discontinuity=discontinuity(selection, speedup) if count >= 2 else None,
        instability=instability_metric(video, selection, window),
        transition_smoothness=transition_smoothness(rates) if rates is not None and len(rates) >= 2 else None,
        selected_frames=count,
    )
    logger.info("Evaluated %s selected frames of %s: %s", count, n, report.to_dict())
    return report
