# smoothing/transitions.py
"""Appearance change and instability of a frame transition."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from footage.exceptions import BinCountMismatch, IndexOutOfRange
from footage.models import VideoRecord


class TransitionCost(NamedTuple):
    ac: float  # EMD between the colour histograms, bin units
    gap_penalty: float  # (y - x) - speedup, frames

    @property
    def instability(self) -> float:
        return self.ac * self.gap_penalty


def emd_histograms(hx: np.ndarray, hy: np.ndarray) -> float:
    """
    Per-channel 1-D earth mover's distance with unit ground distance between
    neighbouring bins (sum of |CDF_x - CDF_y|), averaged over the channels.
    """
    hx = np.atleast_2d(np.asarray(hx, dtype=np.float64))
    hy = np.atleast_2d(np.asarray(hy, dtype=np.float64))
    if hx.shape != hy.shape:
        raise BinCountMismatch(f"histogram shapes differ: {hx.shape} vs {hy.shape}")
    per_channel = np.abs(np.cumsum(hx - hy, axis=-1)).sum(axis=-1)
    return float(per_channel.mean())


def stacked_emd(hx: np.ndarray, hy: np.ndarray) -> np.ndarray:
    """emd_histograms over stacks of (3, B) histograms, shape (k, 3, B) -> (k,)."""
    hx = np.asarray(hx, dtype=np.float64)
    hy = np.asarray(hy, dtype=np.float64)
    if hx.shape[-1] != hy.shape[-1]:
        raise BinCountMismatch(f"bin counts differ: {hx.shape[-1]} vs {hy.shape[-1]}")
    return np.abs(np.cumsum(hx - hy, axis=-1)).sum(axis=-1).mean(axis=-1)


def pair_instabilities(video: VideoRecord, xs, ys, speedup: float) -> np.ndarray:
    """I(x_k, y_k) for every pair, vectorised."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    if xs.size == 0:
        return np.zeros(0)
    for arr in (xs, ys):
        if arr.min() < 0 or arr.max() >= video.n:
            raise IndexOutOfRange(f"frame indices must lie in [0, {video.n - 1}]")
    ac = stacked_emd(video.histograms[xs], video.histograms[ys])
    return ac * ((ys - xs) - speedup)


def _check_index(video: VideoRecord, i: int) -> None:
    if not 0 <= i < video.n:
        raise IndexOutOfRange(f"frame {i} outside [0, {video.n - 1}]")


def transition_cost(video: VideoRecord, x: int, y: int, speedup: float) -> TransitionCost:
    _check_index(video, x)
    _check_index(video, y)
    if x >= y:
        raise IndexOutOfRange(f"transition needs x < y, got {x} >= {y}")
    return TransitionCost(emd_histograms(video.histograms[x], video.histograms[y]), float(y - x - speedup))


def instability(video: VideoRecord, x: int, y: int, speedup: float) -> float:
    """I(x, y) = AC(x, y) * (y - x - speedup)."""
    return transition_cost(video, x, y, speedup).instability
