from __future__ import annotations

from django.core.management.base import BaseCommand, CommandParser

from footage.container import write_container
from pipeline.options import stage_errors
from synth.scenario import ScenarioSpec, generate, load_scenario


class Command(BaseCommand):
    help = "Generate a seeded synthetic video and write it as a descriptor container."

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--out", required=True, help="Container to write (.ffwd).")
        parser.add_argument("--spec", default=None, help="Scenario YAML (n, f, semantic_fraction, shake_bursts, seed, ...).")
        parser.add_argument("--seed", type=int, default=None, help="Overrides the scenario seed.")
        parser.add_argument("--n", type=int, default=None, help="Overrides the frame count.")
        parser.add_argument("--semantic-fraction", type=float, default=None)
        parser.add_argument("--no-thumbnails", action="store_true", help="Leave thumbnails out of the container.")

    def handle(self, *args, **opts):
        with stage_errors():
            spec = load_scenario(opts["spec"]) if opts["spec"] else ScenarioSpec()
            overrides = {
                "seed": opts["seed"],
                "n": opts["n"],
                "semantic_fraction": opts["semantic_fraction"],
            }
            data = spec.to_dict()
            data.update({k: v for k, v in overrides.items() if v is not None})
            if opts["no_thumbnails"]:
                data["thumbnails"] = False
            spec = ScenarioSpec.from_dict(data)
            video = generate(spec)
            write_container(video, opts["out"])
        self.stdout.write(self.style.SUCCESS(f"✓ Wrote {video.n} frames (seed {spec.seed}) to {opts['out']}"))
