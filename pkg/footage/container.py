# footage/container.py
"""
Descriptor container: the bit-exact binary file that carries per-frame
descriptors between the (external) video decoder and the pipeline.

Layout, all little-endian:

    header  magic "FFWD" | u16 version | u32 n | u32 f | u16 bins B
            | u16 thumb_w | u16 thumb_h | f32 fps            (24 bytes)
    features         n*f   f32
    semantic_scores  n     f32
    motion           n     f32
    histograms       n*3*B f32
    thumbnails       n*H*W u8   (only when thumb_w and thumb_h are non-zero)
"""
from __future__ import annotations

import logging
import os
import struct
from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import BadMagic, IoFailure, TruncatedSection, VersionUnsupported
from .models import HISTOGRAM_CHANNELS, VideoRecord

logger = logging.getLogger(__name__)

MAGIC = b"FFWD"
VERSION = 1
HEADER = struct.Struct("<4sHIIHHHf")

F32 = np.dtype("<f4")
U8 = np.dtype("u1")

PathLike = Union[str, "os.PathLike[str]"]


@dataclass(frozen=True)
class ContainerHeader:
    version: int
    n: int
    f: int
    bins: int
    thumb_w: int
    thumb_h: int
    fps: float

    @property
    def has_thumbnails(self) -> bool:
        return self.thumb_w > 0 and self.thumb_h > 0

    def section_sizes(self):
        """(name, byte length) of every section in file order."""
        n = self.n
        sizes = [
            ("features", n * self.f * F32.itemsize),
            ("semantic_scores", n * F32.itemsize),
            ("motion", n * F32.itemsize),
            ("histograms", n * HISTOGRAM_CHANNELS * self.bins * F32.itemsize),
        ]
        if self.has_thumbnails:
            sizes.append(("thumbnails", n * self.thumb_h * self.thumb_w * U8.itemsize))
        return sizes

    @property
    def file_size(self) -> int:
        return HEADER.size + sum(size for _, size in self.section_sizes())


def header_for(video: VideoRecord) -> ContainerHeader:
    h, w = video.thumb_shape
    return ContainerHeader(VERSION, video.n, video.f, video.bins, w, h, video.fps)


def encode_container(video: VideoRecord) -> bytes:
    video.validate()
    head = header_for(video)
    parts = [
        HEADER.pack(MAGIC, head.version, head.n, head.f, head.bins, head.thumb_w, head.thumb_h, head.fps),
        video.features.astype(F32).tobytes(),
        video.semantic_scores.astype(F32).tobytes(),
        video.motion.astype(F32).tobytes(),
        video.histograms.astype(F32).tobytes(),
    ]
    if head.has_thumbnails:
        parts.append(video.thumbnails.astype(U8).tobytes())
    return b"".join(parts)


def parse_header(data: bytes) -> ContainerHeader:
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise BadMagic(f"not a descriptor container (magic {bytes(data[:4])!r})")
    if len(data) < HEADER.size:
        raise TruncatedSection(f"header needs {HEADER.size} bytes, file has {len(data)}")
    _, version, n, f, bins, thumb_w, thumb_h, fps = HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise VersionUnsupported(f"container version {version} is not supported (expected {VERSION})")
    if (thumb_w == 0) != (thumb_h == 0):
        raise TruncatedSection(f"thumbnail size {thumb_w}x{thumb_h} is half-specified")
    return ContainerHeader(version, n, f, bins, thumb_w, thumb_h, float(fps))


def decode_container(data: bytes) -> VideoRecord:
    head = parse_header(data)
    if len(data) != head.file_size:
        # Walk the sections to name the one that disagrees with the header.
        offset = HEADER.size
        for name, size in head.section_sizes():
            if offset + size > len(data):
                raise TruncatedSection(
                    f"section '{name}' needs {size} bytes at offset {offset}, file has {len(data)}"
                )
            offset += size
        raise TruncatedSection(f"{len(data) - offset} trailing bytes after the last section")

    offset = HEADER.size
    sections = {}
    for name, size in head.section_sizes():
        dtype = U8 if name == "thumbnails" else F32
        sections[name] = np.frombuffer(data, dtype=dtype, count=size // dtype.itemsize, offset=offset)
        offset += size

    n = head.n
    video = VideoRecord(
        features=sections["features"].reshape(n, head.f),
        semantic_scores=sections["semantic_scores"],
        motion=sections["motion"],
        histograms=sections["histograms"].reshape(n, HISTOGRAM_CHANNELS, head.bins),
        fps=head.fps,
        thumbnails=(
            sections["thumbnails"].reshape(n, head.thumb_h, head.thumb_w) if head.has_thumbnails else None
        ),
    )
    return video.validate()


def read_container(path: PathLike) -> VideoRecord:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read container {path}: {exc}") from exc
    video = decode_container(data)
    logger.info("Loaded %s: n=%s f=%s bins=%s thumbnails=%s", path, video.n, video.f, video.bins, video.has_thumbnails)
    return video


def write_container(video: VideoRecord, path: PathLike) -> None:
    payload = encode_container(video)
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write container {path}: {exc}") from exc
    logger.info("Wrote %s (%s bytes, n=%s)", path, len(payload), video.n)
