# profiles/segmentation.py
"""
Temporal semantic profile and its segmentation into semantic /
non-semantic segments with importance levels.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.ndimage import uniform_filter1d

from footage.exceptions import EmptyProfile, OutOfRangeInput
from footage.models import Segment, VideoRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SemanticProfile:
    raw: np.ndarray
    smoothed: np.ndarray

    def __post_init__(self):
        if self.raw.shape != self.smoothed.shape:
            raise OutOfRangeInput(f"raw {self.raw.shape} and smoothed {self.smoothed.shape} lengths differ")

    def __len__(self) -> int:
        return int(self.raw.shape[0])


def build_profile(source: Union[VideoRecord, Sequence[float]], radius: int = 15) -> SemanticProfile:
    """Moving average of width 2r+1 over the per-frame scores (edges replicated)."""
    raw = source.semantic_scores if isinstance(source, VideoRecord) else source
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size == 0:
        raise EmptyProfile("cannot build a profile for an empty video")
    if radius < 0:
        raise OutOfRangeInput(f"smoothing radius must be >= 0, got {radius}")
    if radius == 0:
        smoothed = raw.copy()
    else:
        smoothed = uniform_filter1d(raw, size=2 * radius + 1, mode="nearest")
        # running sums can overshoot by an ulp
        smoothed = np.clip(smoothed, raw.min(), raw.max())
    return SemanticProfile(raw=raw, smoothed=smoothed)


def otsu_threshold(values: Sequence[float]) -> Tuple[float, bool]:
    """
    Exact Otsu threshold over real values.

    Returns (tau, degenerate). Candidate splits lie between consecutive
    distinct sorted values and tau is the upper end of the low class, so
    ``values > tau`` is the high class. When every value is equal there is
    no split; the mean is returned with ``degenerate=True``.
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    if x.size == 0:
        raise EmptyProfile("no values to threshold")
    if x[0] == x[-1]:
        return float(x.mean()), True

    n = x.size
    csum = np.cumsum(x)
    k = np.arange(1, n)  # low class is x[:k]
    w0 = k / n
    w1 = 1.0 - w0
    mu0 = csum[k - 1] / k
    mu1 = (csum[-1] - csum[k - 1]) / (n - k)
    between = w0 * w1 * (mu0 - mu1) ** 2
    between[x[k - 1] == x[k]] = -np.inf
    best = int(np.argmax(between))
    return float(x[best]), False


def _runs(labels: np.ndarray) -> List[List]:
    """[start, end, label] for every maximal constant run."""
    change = np.flatnonzero(np.diff(labels.astype(np.int8))) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change - 1, [labels.size - 1]))
    return [[int(s), int(e), bool(labels[s])] for s, e in zip(starts, ends)]


def _coalesce(runs: List[List]) -> List[List]:
    out: List[List] = []
    for start, end, label in runs:
        if out and out[-1][2] == label:
            out[-1][1] = end
        else:
            out.append([start, end, label])
    return out


def _merge_short_runs(runs: List[List], min_len: int) -> List[List]:
    # Shortest run first (lowest index on ties) is absorbed by its neighbours.
    runs = [list(r) for r in runs]
    while len(runs) > 1:
        k = min(range(len(runs)), key=lambda i: (runs[i][1] - runs[i][0] + 1, i))
        if runs[k][1] - runs[k][0] + 1 >= min_len:
            break
        runs[k][2] = not runs[k][2]
        runs = _coalesce(runs)
    return runs


def _importance_levels(means: Sequence[float], levels: int) -> List[int]:
    if not means:
        return []
    if levels <= 1:
        return [1] * len(means)
    edges = np.quantile(np.asarray(means), np.arange(1, levels) / levels)
    return [1 + int(np.searchsorted(edges, m, side="left")) for m in means]


def segment_profile(profile: SemanticProfile, levels: int = 2, min_len: int = 20) -> List[Segment]:
    """
    Split the video into semantic runs (smoothed score above the Otsu
    threshold) and non-semantic runs, absorb runs shorter than ``min_len``
    into their neighbours, then grade semantic segments into ``levels``
    importance levels by the quantiles of their mean score.

    Returned segments tile [0, n-1]; speed-ups are left at 1 for
    :func:`profiles.rates.assign_rates`.
    """
    if len(profile) == 0:
        raise EmptyProfile("cannot segment an empty profile")
    if min_len < 1:
        raise OutOfRangeInput(f"min_len must be >= 1, got {min_len}")
    if levels < 1:
        raise OutOfRangeInput(f"levels must be >= 1, got {levels}")

    tau, degenerate = otsu_threshold(profile.smoothed)
    if degenerate:
        logger.info("Flat semantic profile; falling back to mean threshold %.6g", tau)
    labels = profile.smoothed > tau

    runs = _merge_short_runs(_runs(labels), min_len)
    semantic = [r for r in runs if r[2]]
    means = [float(profile.raw[s : e + 1].mean()) for s, e, _ in semantic]
    graded = iter(_importance_levels(means, levels))

    segments = [Segment(start=s, end=e, importance_level=next(graded) if label else 0) for s, e, label in runs]
    logger.info(
        "Segmented %s frames into %s segments (%s semantic, tau=%.6g)",
        len(profile),
        len(segments),
        len(semantic),
        tau,
    )
    return segments
