# footage/reports.py
"""
Structured-text reports: every artifact a stage hands to the next one
(rate plans, selections, metrics, ablation tables) is a YAML mapping.

Floats are written with ``repr`` precision by PyYAML, so a report read back
reproduces the exact values that were written, and writing the same payload
twice yields identical bytes.
"""
from __future__ import annotations

import logging
from typing import Any, Dict, Mapping

import numpy as np
import yaml

from .exceptions import IoFailure, InvariantViolation
from .models import BridgeSegment, Provenance, Selection, SelectionEntry

logger = logging.getLogger(__name__)

NOT_AVAILABLE = "not_available"


def plain(value: Any) -> Any:
    """Convert numpy scalars/arrays (recursively) into YAML-safe builtins."""
    if isinstance(value, Mapping):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, str):
        return str(value)  # TextChoices members -> plain values
    return value


def dump_report(payload: Mapping[str, Any]) -> str:
    return yaml.safe_dump(plain(payload), sort_keys=False, default_flow_style=None, width=100)


def write_report(path, payload: Mapping[str, Any]) -> None:
    text = dump_report(payload)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write report {path}: {exc}") from exc
    logger.debug("Wrote report %s", path)


def read_report(path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read report {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise IoFailure(f"report {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise IoFailure(f"report {path} must hold a mapping at the top level")
    return data


# ---------- Selection ----------


def selection_to_dict(selection: Selection) -> Dict[str, Any]:
    return {
        "required_speedup": selection.required_speedup,
        "frames": selection.frames,
        "count": selection.count,
        "indices": [e.index for e in selection.entries],
        "segments": [e.segment for e in selection.entries],
        "provenance": [e.provenance for e in selection.entries],
        "bridges": [
            {
                "after_segment": b.after_segment,
                "left_anchor": b.left_anchor,
                "right_anchor": b.right_anchor,
                "speedup": b.speedup,
            }
            for b in selection.bridges
        ],
    }


def selection_from_dict(data: Mapping[str, Any]) -> Selection:
    try:
        indices = data.get("indices") or []
        segments = data.get("segments") or []
        provenance = data.get("provenance") or []
        if not (len(indices) == len(segments) == len(provenance)):
            raise InvariantViolation("indices, segments and provenance must have equal length", field="entries")
        unknown = sorted({str(p) for p in provenance} - set(Provenance.values))
        if unknown:
            raise IoFailure(f"unknown provenance {unknown}; expected one of {Provenance.values}")
        bridges = [
            BridgeSegment(
                left_anchor=int(b["left_anchor"]),
                right_anchor=int(b["right_anchor"]),
                speedup=float(b["speedup"]),
                after_segment=int(b["after_segment"]),
            )
            for b in data.get("bridges") or []
        ]
        return Selection.from_entries(
            (SelectionEntry(int(i), int(s), str(p)) for i, s, p in zip(indices, segments, provenance)),
            required_speedup=float(data["required_speedup"]),
            frames=int(data.get("frames", 0)),
            bridges=bridges,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise IoFailure(f"malformed selection report: {exc}") from exc
