from __future__ import annotations

from django.core.management.base import BaseCommand, CommandParser

from footage.models import Selection
from footage.reports import read_report, selection_from_dict, selection_to_dict, write_report
from pipeline.options import add_bins_argument, add_io_arguments, add_thread_argument, stage_errors
from pipeline.runner import load_video, resolve_threads, smooth_all, split_by_segment
from profiles.rates import RatePlan


class Command(BaseCommand):
    help = "Insert frames into the shakiest transitions until every segment reaches its frame budget."

    def add_arguments(self, parser: CommandParser) -> None:
        add_io_arguments(parser, "Smoothed selection YAML to write.")
        parser.add_argument("--rates", required=True, help="Rate plan YAML from `segment`.")
        parser.add_argument("--selection", required=True, help="Sampled selection YAML from `sample`.")
        add_bins_argument(parser)
        add_thread_argument(parser)

    def handle(self, *args, **opts):
        with stage_errors():
            video = load_video(opts["input"], opts["hist_bins"])
            plan = RatePlan.from_dict(read_report(opts["rates"]))
            sampled = selection_from_dict(read_report(opts["selection"]))
            smoothed = smooth_all(video, plan, split_by_segment(sampled, plan), resolve_threads(opts["threads"]))
            selection = Selection.from_entries(
                (e for entries in smoothed for e in entries), plan.target_speedup, video.n
            )
            write_report(opts["out"], selection_to_dict(selection))
        self.stdout.write(
            self.style.SUCCESS(f"✓ Smoothed {sampled.count} -> {selection.count} frames -> {opts['out']}")
        )
