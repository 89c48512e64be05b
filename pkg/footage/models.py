# footage/models.py
"""
Core domain types: per-frame descriptor records, segments and selections.

Nothing here is persisted through the ORM; the records travel between
stages as descriptor containers (footage.container) and YAML reports
(footage.reports).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from django.db import models

from .exceptions import InvariantViolation

HISTOGRAM_CHANNELS = 3
HISTOGRAM_TOLERANCE = 1e-6


# ---------- Enums ----------


class Provenance(models.TextChoices):
    SAMPLED = "sampled", "Sampled"  # weighted sparse sampling
    SMOOTHED = "smoothed", "Smoothed"  # inserted into a shaky transition
    GAPFILL = "gapfill", "Gap fill"  # bridge between two segments


# ---------- Frames ----------


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


def _as_stored_float(values) -> np.ndarray:
    # Reals are stored as f32; compute on the widened f64 copy.
    return _frozen(np.asarray(values, dtype=np.float32), np.float64)


@dataclass(frozen=True, eq=False)
class FrameRecord:
    index: int
    features: np.ndarray
    semantic_score: float
    motion: float
    histograms: np.ndarray
    thumbnail: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class VideoRecord:
    """
    Columnar store of every frame of one video.

    Arrays are widened to float64 from their float32 storage values and made
    read-only, so a VideoRecord can be shared across worker threads.
    """

    features: np.ndarray  # (n, f)
    semantic_scores: np.ndarray  # (n,)
    motion: np.ndarray  # (n,)
    histograms: np.ndarray  # (n, 3, B)
    fps: float = 30.0
    thumbnails: Optional[np.ndarray] = None  # (n, H, W) uint8

    def __post_init__(self):
        object.__setattr__(self, "features", _as_stored_float(np.atleast_2d(self.features)))
        object.__setattr__(self, "semantic_scores", _as_stored_float(self.semantic_scores))
        object.__setattr__(self, "motion", _as_stored_float(self.motion))
        object.__setattr__(self, "histograms", _as_stored_float(self.histograms))
        object.__setattr__(self, "fps", float(np.float32(self.fps)))
        if self.thumbnails is not None:
            object.__setattr__(self, "thumbnails", _frozen(self.thumbnails, np.uint8))

    # ---- shape helpers ----

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def f(self) -> int:
        return int(self.features.shape[1])

    @property
    def bins(self) -> int:
        return int(self.histograms.shape[-1]) if self.histograms.ndim == 3 else 0

    @property
    def has_thumbnails(self) -> bool:
        return self.thumbnails is not None

    @property
    def thumb_shape(self) -> Tuple[int, int]:
        """(H, W) of the thumbnails, (0, 0) when absent."""
        if self.thumbnails is None:
            return (0, 0)
        return (int(self.thumbnails.shape[1]), int(self.thumbnails.shape[2]))

    def frame(self, index: int) -> FrameRecord:
        return FrameRecord(
            index=index,
            features=self.features[index],
            semantic_score=float(self.semantic_scores[index]),
            motion=float(self.motion[index]),
            histograms=self.histograms[index],
            thumbnail=None if self.thumbnails is None else self.thumbnails[index],
        )

    @property
    def frames(self) -> List[FrameRecord]:
        return [self.frame(i) for i in range(self.n)]

    @classmethod
    def from_frames(cls, frames: Sequence[FrameRecord], fps: float = 30.0) -> "VideoRecord":
        if not frames:
            raise InvariantViolation("a video needs at least one frame", field="frames")
        for expected, fr in enumerate(frames):
            if fr.index != expected:
                raise InvariantViolation(
                    f"indices must be 0..n-1 in order, got {fr.index}", frame=expected, field="index"
                )
        thumbs = [fr.thumbnail for fr in frames]
        if any(t is None for t in thumbs) and not all(t is None for t in thumbs):
            raise InvariantViolation("thumbnails must be present on all frames or none", field="thumbnail")
        return cls(
            features=np.stack([np.asarray(fr.features, dtype=np.float64) for fr in frames]),
            semantic_scores=[fr.semantic_score for fr in frames],
            motion=[fr.motion for fr in frames],
            histograms=np.stack([np.asarray(fr.histograms, dtype=np.float64) for fr in frames]),
            fps=fps,
            thumbnails=None if thumbs[0] is None else np.stack(thumbs),
        )

    # ---- invariants ----

    def validate(self) -> "VideoRecord":
        n = self.n
        if n < 1:
            raise InvariantViolation("a video needs at least one frame", field="frames")
        if self.features.ndim != 2 or self.f < 1:
            raise InvariantViolation("features must be an n x f matrix with f >= 1", field="features")

        for name, arr in (("semantic_score", self.semantic_scores), ("motion", self.motion)):
            if arr.shape != (n,):
                raise InvariantViolation(f"expected {n} values, got shape {arr.shape}", field=name)
            bad = np.flatnonzero(~np.isfinite(arr) | (arr < 0))
            if bad.size:
                raise InvariantViolation(f"must be finite and >= 0, got {arr[bad[0]]}", frame=int(bad[0]), field=name)

        bad = np.flatnonzero(~np.isfinite(self.features).all(axis=1))
        if bad.size:
            raise InvariantViolation("features must be finite", frame=int(bad[0]), field="features")

        hist = self.histograms
        if hist.ndim != 3 or hist.shape[0] != n or hist.shape[1] != HISTOGRAM_CHANNELS or hist.shape[2] < 1:
            raise InvariantViolation(f"expected shape ({n}, 3, B), got {hist.shape}", field="histograms")
        negative = np.flatnonzero((hist < 0).any(axis=(1, 2)))
        if negative.size:
            raise InvariantViolation("histogram bins must be >= 0", frame=int(negative[0]), field="histograms")
        sums = hist.sum(axis=2)
        off = np.flatnonzero((np.abs(sums - 1.0) > HISTOGRAM_TOLERANCE).any(axis=1))
        if off.size:
            i = int(off[0])
            raise InvariantViolation(
                f"each histogram channel must sum to 1, got {sums[i].tolist()}", frame=i, field="histograms"
            )

        if self.thumbnails is not None:
            if self.thumbnails.ndim != 3 or self.thumbnails.shape[0] != n:
                raise InvariantViolation(
                    f"expected shape ({n}, H, W), got {self.thumbnails.shape}", field="thumbnails"
                )
        return self

    def __eq__(self, other):
        if not isinstance(other, VideoRecord):
            return NotImplemented
        if self.fps != other.fps or self.has_thumbnails != other.has_thumbnails:
            return False
        pairs = [
            (self.features, other.features),
            (self.semantic_scores, other.semantic_scores),
            (self.motion, other.motion),
            (self.histograms, other.histograms),
        ]
        if self.thumbnails is not None:
            pairs.append((self.thumbnails, other.thumbnails))
        return all(a.shape == b.shape and np.array_equal(a, b) for a, b in pairs)

    __hash__ = None


# ---------- Segments ----------


@dataclass(frozen=True)
class Segment:
    """Inclusive frame range [start, end] with its importance and speed-up."""

    start: int
    end: int
    importance_level: int = 0
    speedup: float = 1.0

    def __post_init__(self):
        if self.start > self.end:
            raise InvariantViolation(f"segment start {self.start} > end {self.end}", field="segment")
        if self.importance_level < 0:
            raise InvariantViolation("importance_level must be >= 0", field="importance_level")

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    @property
    def frame_indices(self) -> np.ndarray:
        return np.arange(self.start, self.end + 1)

    def with_speedup(self, speedup: float) -> "Segment":
        return replace(self, speedup=float(speedup))


def check_tiling(segments: Sequence[Segment], n: int) -> None:
    """Raise unless ``segments`` tile [0, n-1] in order without overlap."""
    expected = 0
    for k, seg in enumerate(segments):
        if seg.start != expected:
            raise InvariantViolation(f"segment {k} starts at {seg.start}, expected {expected}", field="segments")
        expected = seg.end + 1
    if expected != n:
        raise InvariantViolation(f"segments cover [0, {expected - 1}], expected [0, {n - 1}]", field="segments")


# ---------- Selections ----------


class SelectionEntry(NamedTuple):
    index: int
    segment: int
    provenance: str


@dataclass(frozen=True)
class BridgeSegment:
    """A segment spanning the gap between the last pick of one segment and the first of the next."""

    left_anchor: int
    right_anchor: int
    speedup: float
    after_segment: int = 0

    def __post_init__(self):
        if self.left_anchor >= self.right_anchor:
            raise InvariantViolation(
                f"bridge anchors out of order: {self.left_anchor} >= {self.right_anchor}", field="bridge"
            )

    @property
    def interior(self) -> Segment:
        """The frames strictly between the anchors (requires a gap of at least 2)."""
        return Segment(self.left_anchor + 1, self.right_anchor - 1, 0, self.speedup)


@dataclass(frozen=True)
class Selection:
    entries: Tuple[SelectionEntry, ...]
    required_speedup: float
    frames: int = 0  # n of the source video
    bridges: Tuple[BridgeSegment, ...] = field(default_factory=tuple)

    @classmethod
    def from_entries(
        cls,
        entries: Iterable[SelectionEntry],
        required_speedup: float,
        frames: int,
        bridges: Iterable[BridgeSegment] = (),
    ) -> "Selection":
        ordered = tuple(sorted((SelectionEntry(int(i), int(s), str(p)) for i, s, p in entries), key=lambda e: e.index))
        return cls(ordered, float(required_speedup), int(frames), tuple(bridges)).validate()

    @property
    def indices(self) -> np.ndarray:
        return np.array([e.index for e in self.entries], dtype=np.int64)

    @property
    def count(self) -> int:
        return len(self.entries)

    def for_segment(self, segment_id: int) -> List[SelectionEntry]:
        return [e for e in self.entries if e.segment == segment_id]

    def validate(self) -> "Selection":
        idx = self.indices
        if idx.size > 1 and np.any(np.diff(idx) <= 0):
            k = int(np.flatnonzero(np.diff(idx) <= 0)[0]) + 1
            raise InvariantViolation("selected indices must be strictly increasing", frame=int(idx[k]), field="entries")
        if idx.size and self.frames and (idx[0] < 0 or idx[-1] >= self.frames):
            bad = int(idx[0] if idx[0] < 0 else idx[-1])
            raise InvariantViolation(f"index outside the video (n={self.frames})", frame=bad, field="entries")
        return self
