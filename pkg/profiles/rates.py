# profiles/rates.py
"""
Speed-up rate assignment: slow down the important segments while keeping
the total output length at (total frames) / S_d.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from footage.exceptions import InfeasibleRates, IoFailure, OutOfRangeInput, TooFewSegments
from footage.models import Segment, check_tiling

logger = logging.getLogger(__name__)

MAX_BISECTION_STEPS = 200


@dataclass(frozen=True)
class RatePlan:
    segments: Tuple[Segment, ...]
    target_speedup: float
    s_min: float
    s_max: float
    feasible: bool = True

    @property
    def rates(self) -> np.ndarray:
        return np.array([s.speedup for s in self.segments], dtype=np.float64)

    @property
    def total_frames(self) -> int:
        return int(sum(s.length for s in self.segments))

    @property
    def output_frames(self) -> float:
        """Sum of L_k / s_k: the (fractional) length of the fast-forward."""
        return float(sum(s.length / s.speedup for s in self.segments))

    @property
    def target_frames(self) -> float:
        return self.total_frames / self.target_speedup

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target_speedup": self.target_speedup,
            "s_min": self.s_min,
            "s_max": self.s_max,
            "frames": self.total_frames,
            "feasible": self.feasible,
            "segments": [
                {
                    "id": k,
                    "start": s.start,
                    "end": s.end,
                    "level": s.importance_level,
                    "speedup": s.speedup,
                }
                for k, s in enumerate(self.segments)
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RatePlan":
        try:
            segments = tuple(
                Segment(int(s["start"]), int(s["end"]), int(s["level"]), float(s["speedup"]))
                for s in data["segments"]
            )
            plan = cls(
                segments=segments,
                target_speedup=float(data["target_speedup"]),
                s_min=float(data["s_min"]),
                s_max=float(data["s_max"]),
                feasible=bool(data.get("feasible", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise IoFailure(f"malformed rate plan: {exc}") from exc
        check_tiling(plan.segments, plan.total_frames)
        return plan


def assign_rates(
    segments: Sequence[Segment],
    target_speedup: float,
    s_min: float = 1.0,
    s_max: Optional[float] = None,
) -> RatePlan:
    """
    Rates s_k = c / (1 + level_k), clamped to [s_min, s_max], with the
    scalar c found by bisection so that sum(L_k / s_k) = sum(L_k) / S_d.

    Clamping happens inside the bisection, so whatever a clamped segment
    cannot absorb is redistributed over the unclamped ones. Raises
    InfeasibleRates (carrying the best-effort plan) when even fully clamped
    rates cannot meet the target within one output frame.
    """
    if not segments:
        raise TooFewSegments("rate assignment needs at least one segment")
    if target_speedup <= 1:
        raise OutOfRangeInput(f"target speed-up must be > 1, got {target_speedup}")
    s_max = 4.0 * target_speedup if s_max is None else float(s_max)
    s_min = float(s_min)
    if not (0 < s_min <= s_max):
        raise OutOfRangeInput(f"invalid rate bounds [{s_min}, {s_max}]")

    lengths = np.array([s.length for s in segments], dtype=np.float64)
    divisors = 1.0 + np.array([s.importance_level for s in segments], dtype=np.float64)
    target = lengths.sum() / target_speedup

    def rates_for(c: float) -> np.ndarray:
        return np.clip(c / divisors, s_min, s_max)

    def produced(c: float) -> float:
        return float(np.sum(lengths / rates_for(c)))

    # produced() is non-increasing in c; at lo every rate sits on s_min, at hi on s_max.
    lo, hi = s_min, s_max * float(divisors.max())

    def plan_for(c: float, feasible: bool = True) -> RatePlan:
        return RatePlan(
            segments=tuple(seg.with_speedup(r) for seg, r in zip(segments, rates_for(c))),
            target_speedup=float(target_speedup),
            s_min=s_min,
            s_max=s_max,
            feasible=feasible,
        )

    if produced(lo) < target - 1.0:
        raise InfeasibleRates(
            f"target of {target:.2f} output frames needs rates below s_min={s_min}", plan=plan_for(lo, False)
        )
    if produced(hi) > target + 1.0:
        raise InfeasibleRates(
            f"target of {target:.2f} output frames needs rates above s_max={s_max}", plan=plan_for(hi, False)
        )

    for _ in range(MAX_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if produced(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    c = 0.5 * (lo + hi)

    plan = plan_for(c)
    logger.info(
        "Assigned rates for %s segments: c=%.6g, output %.3f frames (target %.3f)",
        len(segments),
        c,
        plan.output_frames,
        target,
    )
    return plan
