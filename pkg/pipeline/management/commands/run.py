from __future__ import annotations

from django.core.management.base import BaseCommand, CommandParser

from pipeline.options import (
    add_bins_argument,
    add_rate_arguments,
    add_sampler_arguments,
    add_thread_argument,
    config_overrides,
    stage_errors,
)
from pipeline.runner import PipelineConfig, run_pipeline
from pipeline.tasks import run_pipeline_task


class Command(BaseCommand):
    help = "Run the whole fast-forward (segment, sample, smooth, fill gaps, evaluate) and write the reports."

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--input", default=None, help="Descriptor container (.ffwd).")
        parser.add_argument("--seed", type=int, default=None, help="Without --input: run on a default synthetic scenario.")
        parser.add_argument("--out", required=True, help="Directory for rates.yaml, selection.yaml and metrics.yaml.")
        add_rate_arguments(parser)
        add_sampler_arguments(parser)
        add_bins_argument(parser)
        parser.add_argument("--no-fill", action="store_true", help="Disable gap filling between segments.")
        parser.add_argument("--metrics-window", type=int, default=None, help="Instability window in frames (default 4).")
        add_thread_argument(parser)
        parser.add_argument("--enqueue", action="store_true", help="Dispatch to a Celery worker instead of running here.")

    def handle(self, *args, **opts):
        with stage_errors():
            config = PipelineConfig.from_settings(output=opts["out"], **config_overrides(opts))
            if opts["enqueue"]:
                run_pipeline_task.delay(config=config.to_dict())
                self.stdout.write(self.style.SUCCESS(f"✓ Enqueued pipeline for {config.input or f'seed {config.seed}'}"))
                return
            result = run_pipeline(config)
        report = result.report
        self.stdout.write(
            self.style.SUCCESS(
                f"✓ {report.selected_frames} frames, achieved {report.achieved_speedup:.3f}x "
                f"(deviation {report.speedup_deviation:.3f}) -> {opts['out']}"
            )
        )
