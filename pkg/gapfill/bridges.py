# gapfill/bridges.py
"""
Bridges between consecutive segments.

When the jump from the last pick of segment A to the first pick of segment B
is shakier than A's own transitions, the frames in between are sampled and
smoothed again at the mean of both speed-ups. This closes the visual gap and
softens the change of rate.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import List, Sequence

import numpy as np

from footage.models import BridgeSegment, Provenance, Selection, SelectionEntry, VideoRecord
from profiles.rates import RatePlan
from sampling.sampler import SamplerChoice, frame_budget, sample_segment
from smoothing.smoother import smooth_segment
from smoothing.transitions import instability, pair_instabilities

logger = logging.getLogger(__name__)

__all__ = ["BridgeSegment", "needs_bridge", "fill_gap", "fill_all", "rates_with_bridges"]


def needs_bridge(
    video: VideoRecord,
    a_entries: Sequence[SelectionEntry],
    b_entries: Sequence[SelectionEntry],
    speedup_a: float,
) -> bool:
    """
    I(last(A), first(B)) > mean of A's consecutive instabilities, all at
    A's speed-up. A with a single pick averages to 0.
    """
    if not a_entries or not b_entries:
        return False
    a = np.array(sorted(e.index for e in a_entries), dtype=np.int64)
    first_b = min(e.index for e in b_entries)
    boundary = instability(video, int(a[-1]), first_b, speedup_a)
    average = float(pair_instabilities(video, a[:-1], a[1:], speedup_a).mean()) if a.size >= 2 else 0.0
    return boundary > average


def fill_gap(
    video: VideoRecord,
    bridge: BridgeSegment,
    choice: SamplerChoice = SamplerChoice(),
    spf: int = 2,
) -> List[SelectionEntry]:
    """
    Sample and smooth the frames strictly between the anchors at the bridge
    speed-up. The anchors steer the smoothing but are not returned.
    """
    if bridge.right_anchor - bridge.left_anchor < 2:
        return []
    interior = bridge.interior
    choice = replace(choice, target=None)
    tag = Provenance.GAPFILL.value
    sampled = sample_segment(video, interior, choice, spf, segment_id=bridge.after_segment, provenance=tag)
    filled = smooth_segment(
        video,
        interior,
        sampled,
        target_count=frame_budget(interior.length, bridge.speedup),
        segment_id=bridge.after_segment,
        anchors=(bridge.left_anchor, bridge.right_anchor),
        provenance=tag,
    )
    logger.debug(
        "Bridge (%s, %s) at %.3gx filled with %s frames",
        bridge.left_anchor,
        bridge.right_anchor,
        bridge.speedup,
        len(filled),
    )
    return filled


def fill_all(
    video: VideoRecord,
    plan: RatePlan,
    per_segment: Sequence[Sequence[SelectionEntry]],
    choice: SamplerChoice = SamplerChoice(),
    spf: int = 2,
    enabled: bool = True,
    threads: int = 1,
) -> Selection:
    """
    Merge the per-segment selections into one Selection, bridging every
    boundary that needs it (a single pass; bridges do not trigger further
    bridges). With ``enabled=False`` this is a plain concatenation.
    """
    segments = plan.segments
    bridges: List[BridgeSegment] = []
    if enabled:
        for k in range(len(segments) - 1):
            a, b = per_segment[k], per_segment[k + 1]
            if not needs_bridge(video, a, b, segments[k].speedup):
                continue
            left = max(e.index for e in a)
            right = min(e.index for e in b)
            if right - left < 2:
                continue
            speedup = 0.5 * (segments[k].speedup + segments[k + 1].speedup)
            bridges.append(BridgeSegment(left, right, speedup, after_segment=k))

    if threads > 1 and len(bridges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fills = list(pool.map(lambda br: fill_gap(video, br, choice, spf), bridges))
    else:
        fills = [fill_gap(video, br, choice, spf) for br in bridges]

    entries = [e for seg in per_segment for e in seg]
    entries.extend(e for fill in fills for e in fill)
    selection = Selection.from_entries(entries, plan.target_speedup, video.n, bridges)
    logger.info(
        "Merged %s segments with %s bridges into %s frames (%s from bridges)",
        len(segments),
        len(bridges),
        selection.count,
        sum(len(f) for f in fills),
    )
    return selection


def rates_with_bridges(plan: RatePlan, bridges: Sequence[BridgeSegment]) -> List[float]:
    """Segment rates in playback order, each bridge's rate placed after its segment."""
    after = {b.after_segment: b.speedup for b in bridges}
    rates: List[float] = []
    for k, seg in enumerate(plan.segments):
        rates.append(seg.speedup)
        if k in after:
            rates.append(after[k])
    return rates
