from __future__ import annotations

from django.core.management.base import BaseCommand, CommandParser

from pipeline.ablation import UNIFORM, run_ablation
from pipeline.options import add_rate_arguments, add_thread_argument, config_overrides, stage_errors
from pipeline.runner import PipelineConfig
from pipeline.tasks import run_ablation_task
from sampling.sampler import SamplerMethod


class Command(BaseCommand):
    help = "Compare samplers on the same footage: solver wall-time and every metric, one row per method."

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--input", default=None, help="Descriptor container (.ffwd).")
        parser.add_argument("--seed", type=int, default=None, help="Without --input: use a default synthetic scenario.")
        parser.add_argument("--out", required=True, help="Ablation YAML to write.")
        parser.add_argument(
            "--methods",
            nargs="+",
            choices=[*SamplerMethod.values, UNIFORM],
            default=list(SamplerMethod.values),
            help="At least two of llc, sc, omp, uniform.",
        )
        add_rate_arguments(parser)
        parser.add_argument("--lambda-scale", type=float, default=None)
        parser.add_argument("--spf", type=int, default=None)
        parser.add_argument("--no-fill", action="store_true")
        parser.add_argument("--metrics-window", type=int, default=None)
        add_thread_argument(parser)
        parser.add_argument("--enqueue", action="store_true", help="Dispatch to a Celery worker instead of running here.")

    def handle(self, *args, **opts):
        with stage_errors():
            config = PipelineConfig.from_settings(**config_overrides(opts))
            if opts["enqueue"]:
                run_ablation_task.delay(config=config.to_dict(), methods=opts["methods"], output=opts["out"])
                self.stdout.write(self.style.SUCCESS(f"✓ Enqueued ablation of {', '.join(opts['methods'])}"))
                return
            result = run_ablation(config, opts["methods"], output=opts["out"])
        self.stdout.write(result.table())
        self.stdout.write(self.style.SUCCESS(f"✓ Ablation written to {opts['out']}"))
