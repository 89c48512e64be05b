from __future__ import annotations

from django.core.management.base import BaseCommand, CommandParser

from footage.reports import read_report, selection_from_dict, selection_to_dict, write_report
from pipeline.options import (
    add_bins_argument,
    add_io_arguments,
    add_sampler_arguments,
    add_thread_argument,
    config_overrides,
    stage_errors,
)
from pipeline.runner import PipelineConfig, load_video, merge_segments, resolve_threads, split_by_segment
from profiles.rates import RatePlan


class Command(BaseCommand):
    help = "Bridge the visual gaps between consecutive segments (final selection YAML)."

    def add_arguments(self, parser: CommandParser) -> None:
        add_io_arguments(parser, "Final selection YAML to write.")
        parser.add_argument("--rates", required=True, help="Rate plan YAML from `segment`.")
        parser.add_argument("--selection", required=True, help="Smoothed selection YAML from `smooth`.")
        parser.add_argument("--no-fill", action="store_true", help="Only merge the segments, add no bridges.")
        add_sampler_arguments(parser)
        add_bins_argument(parser)
        add_thread_argument(parser)

    def handle(self, *args, **opts):
        with stage_errors():
            config = PipelineConfig.from_settings(**config_overrides(opts))
            video = load_video(config.input, config.hist_bins)
            plan = RatePlan.from_dict(read_report(opts["rates"]))
            smoothed = selection_from_dict(read_report(opts["selection"]))
            selection = merge_segments(
                video, plan, split_by_segment(smoothed, plan), config, resolve_threads(config.threads)
            )
            write_report(opts["out"], selection_to_dict(selection))
        self.stdout.write(
            self.style.SUCCESS(
                f"✓ {len(selection.bridges)} bridges, {selection.count} frames in total -> {opts['out']}"
            )
        )
