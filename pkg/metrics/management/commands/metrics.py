from __future__ import annotations

from django.conf import settings
from django.core.management.base import BaseCommand, CommandParser

from footage.reports import read_report, selection_from_dict, write_report
from gapfill.bridges import rates_with_bridges
from metrics.evaluation import evaluate
from pipeline.options import add_bins_argument, add_io_arguments, stage_errors
from pipeline.runner import load_video
from profiles.rates import RatePlan


class Command(BaseCommand):
    help = "Evaluate a selection: speed-up deviation, retention, discontinuity, instability, transition smoothness."

    def add_arguments(self, parser: CommandParser) -> None:
        add_io_arguments(parser, "Metrics YAML to write.")
        parser.add_argument("--selection", required=True, help="Selection YAML.")
        parser.add_argument("--rates", default=None, help="Rate plan YAML; enables transition smoothness.")
        parser.add_argument("--speedup", type=float, default=None, help="Required speed-up (default: from the selection).")
        parser.add_argument("--metrics-window", type=int, default=None, help="Instability window in frames (default 4).")
        add_bins_argument(parser)

    def handle(self, *args, **opts):
        with stage_errors():
            video = load_video(opts["input"], opts["hist_bins"])
            selection = selection_from_dict(read_report(opts["selection"]))
            rates = None
            if opts["rates"]:
                rates = rates_with_bridges(RatePlan.from_dict(read_report(opts["rates"])), selection.bridges)
            window = opts["metrics_window"] or getattr(settings, "FFWD_METRICS_WINDOW", 4)
            report = evaluate(video, selection, opts["speedup"], rates, window)
            write_report(opts["out"], report.to_dict())
        self.stdout.write(self.style.SUCCESS(f"✓ Metrics for {selection.count} frames -> {opts['out']}"))
