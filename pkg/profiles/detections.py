# profiles/detections.py
"""Per-frame semantic score from pre-computed object/face detections."""
from __future__ import annotations

import math
from typing import Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from footage.exceptions import OutOfRangeInput

CENTRALITY_SIGMA = 0.35

Detection = Tuple[float, Tuple[float, float], float]  # (confidence, (x, y), area_fraction)


def _unit(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise OutOfRangeInput(f"{name} must lie in [0, 1], got {value}")
    return value


def detection_score(detections: Iterable[Detection], sigma: float = CENTRALITY_SIGMA) -> float:
    """
    Sum over detections of confidence x centrality x size, where centrality
    is a Gaussian of the distance from the image centre.
    """
    total = 0.0
    for confidence, center, area in detections:
        c = _unit(confidence, "confidence")
        x, y = (_unit(v, "center") for v in center)
        a = _unit(area, "area_fraction")
        dist2 = (x - 0.5) ** 2 + (y - 0.5) ** 2
        total += c * math.exp(-dist2 / (2.0 * sigma * sigma)) * a
    return total


def _as_detection(item: Union[Mapping, Sequence]) -> Detection:
    if isinstance(item, Mapping):
        return (item["confidence"], tuple(item["center"]), item["area"])
    confidence, center, area = item
    return (confidence, tuple(center), area)


def score_frames(per_frame: Sequence[Iterable], n: int) -> np.ndarray:
    """
    Scores for ``n`` frames from a list of per-frame detection lists.

    Frames beyond ``len(per_frame)`` have no detections and score 0.
    """
    scores: List[float] = [0.0] * n
    for i, dets in enumerate(per_frame[:n]):
        scores[i] = detection_score(_as_detection(d) for d in (dets or []))
    return np.asarray(scores, dtype=np.float64)
