from __future__ import annotations

import dataclasses

from django.core.management.base import BaseCommand, CommandParser

from footage.container import write_container
from footage.exceptions import InvalidSpec
from footage.reports import read_report
from pipeline.options import add_io_arguments, stage_errors
from pipeline.runner import load_video
from profiles.detections import score_frames


class Command(BaseCommand):
    help = "Replace the semantic scores of a container with scores computed from detections."

    def add_arguments(self, parser: CommandParser) -> None:
        add_io_arguments(parser, "Container to write with the new scores.")
        parser.add_argument(
            "--detections",
            required=True,
            help="YAML with `frames: [[{confidence, center: [x, y], area}, ...], ...]`, one list per frame.",
        )

    def handle(self, *args, **opts):
        with stage_errors():
            video = load_video(opts["input"])
            frames = read_report(opts["detections"]).get("frames")
            if not isinstance(frames, list):
                raise InvalidSpec("detections file needs a `frames` list")
            scores = score_frames(frames, video.n)
            rescored = dataclasses.replace(video, semantic_scores=scores).validate()
            write_container(rescored, opts["out"])
        self.stdout.write(self.style.SUCCESS(f"✓ Rescored {video.n} frames -> {opts['out']}"))
