# synth/scenario.py
"""
Seeded synthetic first-person footage.

A scenario is a handful of semantic plateaus on a noisy score line, a
feature random walk that gets shaky inside bursts, and small colour frames
(low-frequency gradients plus a fixed texture, jittered inside bursts) from
which the colour histograms and luminance thumbnails are computed with
OpenCV. All randomness comes from Philox streams spawned from one seed.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Mapping, Tuple

import cv2
import numpy as np
import yaml
from numpy.random import Generator, Philox, SeedSequence

from footage.exceptions import InvalidSpec, IoFailure
from footage.models import VideoRecord

logger = logging.getLogger(__name__)

NOISE_SIGMA = 0.05
NOISE_CLIP = 0.15
PLATEAU_HEIGHT = (0.5, 1.0)
FEATURE_STEP = 0.05
LEVEL_STEP = 0.8  # intensity units per frame
LEVEL_RANGE = (30.0, 225.0)
SLOPE_STEP = 0.5
SLOPE_RANGE = (-60.0, 60.0)
TEXTURE_AMPLITUDE = 30.0
STREAMS = ("features", "plateaus", "noise", "appearance", "jitter")


@dataclass(frozen=True)
class ShakeBurst:
    start: int
    length: int
    amplitude: float


@dataclass(frozen=True)
class ScenarioSpec:
    n: int = 1000
    f: int = 16
    semantic_fraction: float = 0.5
    shake_bursts: Tuple[ShakeBurst, ...] = field(default_factory=tuple)
    seed: int = 0
    plateaus: int = 3
    fps: float = 30.0
    bins: int = 16
    thumb_width: int = 32
    thumb_height: int = 24
    thumbnails: bool = True

    def validate(self) -> "ScenarioSpec":
        if self.n < 1:
            raise InvalidSpec(f"n must be >= 1, got {self.n}")
        if self.f < 1:
            raise InvalidSpec(f"f must be >= 1, got {self.f}")
        if not 0.0 <= self.semantic_fraction <= 1.0:
            raise InvalidSpec(f"semantic_fraction must lie in [0, 1], got {self.semantic_fraction}")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpec(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.plateaus < 1:
            raise InvalidSpec(f"plateaus must be >= 1, got {self.plateaus}")
        if self.fps <= 0:
            raise InvalidSpec(f"fps must be > 0, got {self.fps}")
        if not 1 <= self.bins <= 256:
            raise InvalidSpec(f"bins must lie in [1, 256], got {self.bins}")
        if self.thumb_width < 1 or self.thumb_height < 1:
            raise InvalidSpec("thumbnail size must be at least 1x1")
        for burst in self.shake_bursts:
            if burst.start < 0 or burst.length < 1 or burst.start + burst.length > self.n:
                raise InvalidSpec(f"shake burst {burst} does not fit in [0, {self.n})")
            if burst.amplitude <= 0:
                raise InvalidSpec(f"shake burst amplitude must be > 0, got {burst.amplitude}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["shake_bursts"] = [asdict(b) for b in self.shake_bursts]
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScenarioSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidSpec(f"unknown scenario keys: {', '.join(unknown)}")
        defaults = cls()

        def value(name, cast):
            return cast(data.get(name, getattr(defaults, name)))

        try:
            spec = cls(
                n=value("n", int),
                f=value("f", int),
                semantic_fraction=value("semantic_fraction", float),
                shake_bursts=tuple(_burst(b) for b in data.get("shake_bursts") or ()),
                seed=value("seed", int),
                plateaus=value("plateaus", int),
                fps=value("fps", float),
                bins=value("bins", int),
                thumb_width=value("thumb_width", int),
                thumb_height=value("thumb_height", int),
                thumbnails=value("thumbnails", bool),
            )
        except (TypeError, ValueError, KeyError) as exc:
            raise InvalidSpec(f"malformed scenario: {exc}") from exc
        return spec.validate()


def _burst(item) -> ShakeBurst:
    if isinstance(item, Mapping):
        return ShakeBurst(int(item["start"]), int(item["length"]), float(item["amplitude"]))
    start, length, amplitude = item
    return ShakeBurst(int(start), int(length), float(amplitude))


def load_scenario(path) -> ScenarioSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise IoFailure(f"cannot read scenario {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise InvalidSpec(f"scenario {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, Mapping):
        raise InvalidSpec(f"scenario {path} must hold a mapping")
    return ScenarioSpec.from_dict(data)


# ---------- generation ----------


def _streams(seed: int) -> Dict[str, Generator]:
    children = SeedSequence(seed).spawn(len(STREAMS))
    return {name: Generator(Philox(child)) for name, child in zip(STREAMS, children)}


def _burst_scale(spec: ScenarioSpec) -> np.ndarray:
    scale = np.ones(spec.n)
    for burst in spec.shake_bursts:
        window = slice(burst.start, burst.start + burst.length)
        scale[window] = np.maximum(scale[window], burst.amplitude)
    return scale


def plateau_layout(n: int, fraction: float, count: int, rng: Generator) -> List[Tuple[int, int]]:
    """[start, end) ranges of the plateaus; together they cover exactly round(fraction * n) frames."""
    total = int(np.floor(fraction * n + 0.5))
    if total == 0:
        return []
    count = min(count, total)
    lengths = [total // count + (1 if k < total % count else 0) for k in range(count)]
    gaps = rng.multinomial(n - total, np.full(count + 1, 1.0 / (count + 1)))
    ranges = []
    cursor = int(gaps[0])
    for length, gap in zip(lengths, gaps[1:]):
        ranges.append((cursor, cursor + length))
        cursor += length + int(gap)
    return ranges


def _semantic_scores(spec: ScenarioSpec, plateau_rng: Generator, noise_rng: Generator) -> np.ndarray:
    base = np.zeros(spec.n)
    for start, end in plateau_layout(spec.n, spec.semantic_fraction, spec.plateaus, plateau_rng):
        base[start:end] = plateau_rng.uniform(*PLATEAU_HEIGHT)
    noise = np.clip(noise_rng.normal(0.0, NOISE_SIGMA, spec.n), -NOISE_CLIP, NOISE_CLIP)
    return np.maximum(base + noise, 0.0)


def _features(spec: ScenarioSpec, scale: np.ndarray, rng: Generator) -> Tuple[np.ndarray, np.ndarray]:
    base = rng.normal(0.0, 1.0, spec.f)
    steps = rng.normal(0.0, FEATURE_STEP, (spec.n, spec.f)) * scale[:, None]
    features = base + np.cumsum(steps, axis=0)
    motion = np.linalg.norm(steps, axis=1)
    return features, motion


def _appearance(spec: ScenarioSpec, scale: np.ndarray, rng: Generator) -> np.ndarray:
    """Per-frame (level, x-slope, y-slope) for each of the 3 channels: (n, 3, 3)."""
    start = np.stack(
        [rng.uniform(*LEVEL_RANGE, 3), rng.uniform(-20.0, 20.0, 3), rng.uniform(-20.0, 20.0, 3)], axis=1
    )
    steps = rng.normal(0.0, 1.0, (spec.n, 3, 3)) * np.array([LEVEL_STEP, SLOPE_STEP, SLOPE_STEP])
    params = start + np.cumsum(steps * scale[:, None, None], axis=0)
    params[..., 0] = np.clip(params[..., 0], *LEVEL_RANGE)
    params[..., 1:] = np.clip(params[..., 1:], *SLOPE_RANGE)
    return params


def _render(spec: ScenarioSpec, params: np.ndarray, scale: np.ndarray, rng: Generator):
    """Colour frames -> (histograms (n, 3, B), luminance thumbnails (n, H, W))."""
    h, w = spec.thumb_height, spec.thumb_width
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    xs = xs / max(w - 1, 1) - 0.5
    ys = ys / max(h - 1, 1) - 0.5
    phase = rng.uniform(0.0, 2.0 * np.pi, 2)
    texture = TEXTURE_AMPLITUDE * np.sin(2.0 * np.pi * xs + phase[0]) * np.cos(2.0 * np.pi * ys + phase[1])
    offsets = np.rint(rng.normal(0.0, 1.0, (spec.n, 2)) * (scale[:, None] - 1.0))
    offsets = np.clip(offsets, -(w // 4), w // 4)

    histograms = np.empty((spec.n, 3, spec.bins))
    thumbs = np.empty((spec.n, h, w), dtype=np.uint8)
    for i in range(spec.n):
        planes = [params[i, c, 0] + params[i, c, 1] * xs + params[i, c, 2] * ys + texture for c in range(3)]
        frame = np.clip(np.rint(np.stack(planes, axis=-1)), 0, 255).astype(np.uint8)
        if offsets[i].any():
            shift = np.float32([[1, 0, offsets[i, 0]], [0, 1, offsets[i, 1]]])
            frame = cv2.warpAffine(frame, shift, (w, h), flags=cv2.INTER_NEAREST, borderMode=cv2.BORDER_REFLECT)
        for c in range(3):
            counts = cv2.calcHist([frame], [c], None, [spec.bins], [0, 256]).ravel()
            histograms[i, c] = counts / counts.sum()
        thumbs[i] = cv2.cvtColor(frame, cv2.COLOR_BGR2GRAY)
    return histograms, thumbs


def generate(spec: ScenarioSpec) -> VideoRecord:
    spec.validate()
    rngs = _streams(spec.seed)
    scale = _burst_scale(spec)

    scores = _semantic_scores(spec, rngs["plateaus"], rngs["noise"])
    features, motion = _features(spec, scale, rngs["features"])
    params = _appearance(spec, scale, rngs["appearance"])
    histograms, thumbs = _render(spec, params, scale, rngs["jitter"])

    video = VideoRecord(
        features=features,
        semantic_scores=scores,
        motion=motion,
        histograms=histograms,
        fps=spec.fps,
        thumbnails=thumbs if spec.thumbnails else None,
    ).validate()
    logger.info(
        "Generated scenario seed=%s: %s frames, f=%s, %s bursts, semantic fraction %.2f",
        spec.seed,
        spec.n,
        spec.f,
        len(spec.shake_bursts),
        spec.semantic_fraction,
    )
    return video
