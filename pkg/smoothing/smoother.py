# smoothing/smoother.py
"""
Frame-transition smoothing: grow a sampled segment back to its exact frame
budget by repeatedly inserting, into the shakiest transition, the interior
frame that makes both resulting half-transitions the least unstable.
"""
from __future__ import annotations

import logging
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from footage.exceptions import NoInteriorFrame, TooFewFrames
from footage.models import Provenance, Segment, SelectionEntry, VideoRecord
from sampling.sampler import frame_budget

from .transitions import pair_instabilities, stacked_emd

logger = logging.getLogger(__name__)

Points = Sequence[Union[int, SelectionEntry]]


def _indices(points: Points) -> np.ndarray:
    return np.array([p.index if isinstance(p, SelectionEntry) else int(p) for p in points], dtype=np.int64)


def shakiest_transition(video: VideoRecord, points: Points, speedup: float, require_interior: bool = False) -> int:
    """
    Position i of the consecutive pair (points[i], points[i+1]) with the
    highest instability; ties go to the lowest i. With ``require_interior``
    only pairs that still have an unselected frame between them compete.
    """
    idx = _indices(points)
    if idx.size < 2:
        raise TooFewFrames(f"need at least 2 selected frames, got {idx.size}")
    values = pair_instabilities(video, idx[:-1], idx[1:], speedup)
    if require_interior:
        open_gap = np.diff(idx) >= 2
        if not open_gap.any():
            raise NoInteriorFrame("no transition has an interior frame left")
        values = np.where(open_gap, values, -np.inf)
    return int(np.argmax(values))


def best_insertion(video: VideoRecord, left: int, right: int, speedup: float) -> int:
    """argmin over left < j < right of I(left, j)^2 + I(j, right)^2, lowest j on ties."""
    if right - left < 2:
        raise NoInteriorFrame(f"no frame strictly between {left} and {right}")
    js = np.arange(left + 1, right)
    hist = video.histograms
    ac_left = stacked_emd(hist[js], hist[left][None])
    ac_right = stacked_emd(hist[js], hist[right][None])
    cost = (ac_left * ((js - left) - speedup)) ** 2 + (ac_right * ((right - js) - speedup)) ** 2
    return int(js[int(np.argmin(cost))])


def smooth_segment(
    video: VideoRecord,
    segment: Segment,
    entries: Iterable[SelectionEntry],
    target_count: Optional[int] = None,
    segment_id: Optional[int] = None,
    anchors: Sequence[int] = (),
    provenance: str = Provenance.SMOOTHED.value,
) -> List[SelectionEntry]:
    """
    Insert frames until the segment holds ``target_count`` frames
    (default round(n_seg / speedup)).

    ``anchors`` are fixed frames outside the segment (the bridge endpoints in
    gap filling): they take part in the transitions but are never returned.
    When no transition has an interior frame left, the segment's first and
    then last frame are added so the budget is still met.
    """
    entries = list(entries)
    n_seg = segment.length
    target = frame_budget(n_seg, segment.speedup) if target_count is None else min(int(target_count), n_seg)
    if segment_id is None:
        segment_id = entries[0].segment if entries else 0

    selected = {e.index for e in entries}
    if len(selected) >= target:
        return sorted(entries, key=lambda e: e.index)

    fixed = {int(a) for a in anchors}
    speedup = segment.speedup
    while len(selected) < target:
        points = sorted(selected | fixed)
        try:
            i = shakiest_transition(video, points, speedup, require_interior=True)
        except (TooFewFrames, NoInteriorFrame):
            edges = [f for f in (segment.start, segment.end) if f not in selected]
            if not edges:
                logger.debug("Segment [%s, %s] saturated at %s frames", segment.start, segment.end, len(selected))
                break
            j = edges[0]
            logger.debug("Edge-anchoring frame %s of segment %s", j, segment_id)
        else:
            left, right = points[i], points[i + 1]
            j = best_insertion(video, left, right, speedup)
            logger.debug("Segment %s: inserted %s into transition (%s, %s)", segment_id, j, left, right)
        selected.add(j)
        entries.append(SelectionEntry(j, segment_id, provenance))

    return sorted(entries, key=lambda e: e.index)
