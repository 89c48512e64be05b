from __future__ import annotations

from django.core.management.base import BaseCommand, CommandParser

from footage.models import Selection
from footage.reports import read_report, selection_to_dict, write_report
from pipeline.options import (
    add_bins_argument,
    add_io_arguments,
    add_sampler_arguments,
    add_thread_argument,
    config_overrides,
    stage_errors,
)
from pipeline.runner import PipelineConfig, load_video, resolve_threads, sample_all
from profiles.rates import RatePlan


class Command(BaseCommand):
    help = "Weighted sparse sampling of every segment of a rate plan (selection YAML)."

    def add_arguments(self, parser: CommandParser) -> None:
        add_io_arguments(parser, "Selection YAML to write.")
        parser.add_argument("--rates", required=True, help="Rate plan YAML from `segment`.")
        add_sampler_arguments(parser)
        add_bins_argument(parser)
        add_thread_argument(parser)

    def handle(self, *args, **opts):
        with stage_errors():
            config = PipelineConfig.from_settings(**config_overrides(opts))
            video = load_video(config.input, config.hist_bins)
            plan = RatePlan.from_dict(read_report(opts["rates"]))
            timings = []
            per_segment = sample_all(video, plan, config.choice, config.spf, resolve_threads(config.threads), timings)
            selection = Selection.from_entries(
                (e for entries in per_segment for e in entries), plan.target_speedup, video.n
            )
            write_report(opts["out"], selection_to_dict(selection))
        self.stdout.write(
            self.style.SUCCESS(
                f"✓ Sampled {selection.count} frames with {config.sampler} in {sum(timings):.3f}s -> {opts['out']}"
            )
        )
