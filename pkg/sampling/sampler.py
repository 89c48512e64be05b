# sampling/sampler.py
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from django.conf import settings
from django.db import models

from footage.exceptions import OutOfRangeInput
from footage.models import Provenance, Segment, SelectionEntry, VideoRecord

from .solvers import default_lambda, motion_weights, select_frames, solve_llc, solve_omp, solve_sc

logger = logging.getLogger(__name__)


class SamplerMethod(models.TextChoices):
    LLC = "llc", "Weighted LLC"
    SC = "sc", "Weighted Lasso"
    OMP = "omp", "Orthogonal matching pursuit"


@dataclass(frozen=True)
class SamplerChoice:
    method: str = SamplerMethod.LLC.value
    lambda_scale: Optional[float] = None  # None -> settings.FFWD_LAMBDA_SCALE
    target: Optional[int] = None  # overrides the rate-derived budget

    def __post_init__(self):
        if self.method not in SamplerMethod.values:
            raise OutOfRangeInput(f"unknown sampler {self.method!r}; choose from {', '.join(SamplerMethod.values)}")

    @property
    def scale(self) -> float:
        if self.lambda_scale is not None:
            return float(self.lambda_scale)
        return float(getattr(settings, "FFWD_LAMBDA_SCALE", 0.01))


def frame_budget(n: int, rate: float) -> int:
    """round(n / rate), half up, at least 1 and at most n."""
    if n <= 0:
        return 0
    return min(n, max(1, math.floor(n / rate + 0.5)))


def segment_dictionary(video: VideoRecord, segment: Segment) -> np.ndarray:
    """Columns are the descriptors of the segment's frames (f x n_seg)."""
    return video.features[segment.start : segment.end + 1].T


def sample_segment(
    video: VideoRecord,
    segment: Segment,
    choice: SamplerChoice = SamplerChoice(),
    spf: int = 2,
    segment_id: int = 0,
    provenance: str = Provenance.SAMPLED.value,
    timings: Optional[List[float]] = None,
) -> List[SelectionEntry]:
    """
    First sampling pass over one segment at ``speedup * spf``.

    Keeps the frames with the largest activations. Solver wall-time (no
    dictionary building, no selection) is appended to ``timings`` when given.
    """
    if spf < 1:
        raise OutOfRangeInput(f"SpF must be >= 1, got {spf}")
    if segment.end >= video.n:
        raise OutOfRangeInput(f"segment [{segment.start}, {segment.end}] outside video of {video.n} frames")

    n_seg = segment.length
    m = choice.target if choice.target is not None else frame_budget(n_seg, segment.speedup * spf)
    if not 1 <= m <= n_seg:
        raise OutOfRangeInput(f"target m must lie in [1, {n_seg}], got {m}")

    if n_seg == 1:
        return [SelectionEntry(segment.start, segment_id, provenance)]

    D = segment_dictionary(video, segment)
    w = motion_weights(video.motion[segment.start : segment.end + 1])

    started = time.perf_counter()
    if choice.method == SamplerMethod.SC:
        solution = solve_sc(D, w, m)
    elif choice.method == SamplerMethod.OMP:
        solution = solve_omp(D, m)
    else:
        solution = solve_llc(D, w, default_lambda(D, choice.scale))
    elapsed = time.perf_counter() - started
    if timings is not None:
        timings.append(elapsed)

    local = select_frames(solution, m)
    logger.debug(
        "Sampled %s/%s frames of [%s, %s] with %s in %.4fs (residual %.4g)",
        len(local),
        n_seg,
        segment.start,
        segment.end,
        choice.method,
        elapsed,
        solution.reconstruction_error,
    )
    return [SelectionEntry(segment.start + int(i), segment_id, provenance) for i in local]
