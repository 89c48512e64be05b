from __future__ import annotations

from django.core.management.base import BaseCommand, CommandParser

from footage.exceptions import InfeasibleRates
from footage.reports import write_report
from pipeline.options import add_bins_argument, add_io_arguments, add_rate_arguments, config_overrides, stage_errors
from pipeline.runner import PipelineConfig, load_video, plan_rates


class Command(BaseCommand):
    help = "Build the semantic profile, segment it and assign per-segment speed-ups (rate plan YAML)."

    def add_arguments(self, parser: CommandParser) -> None:
        add_io_arguments(parser, "Rate plan YAML to write.")
        add_rate_arguments(parser)
        add_bins_argument(parser)

    def handle(self, *args, **opts):
        with stage_errors():
            config = PipelineConfig.from_settings(**config_overrides(opts))
            video = load_video(config.input, config.hist_bins)
            try:
                plan = plan_rates(video, config)
            except InfeasibleRates as exc:
                if exc.plan is not None:
                    write_report(opts["out"], exc.plan.to_dict())
                raise
            write_report(opts["out"], plan.to_dict())
        self.stdout.write(
            self.style.SUCCESS(f"✓ {len(plan.segments)} segments, {plan.output_frames:.1f} output frames -> {opts['out']}")
        )
