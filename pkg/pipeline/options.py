# pipeline/options.py
"""Flags and error mapping shared by the stage management commands."""
from __future__ import annotations

from contextlib import contextmanager

from django.core.management.base import CommandError, CommandParser

from footage.exceptions import FastForwardError
from sampling.sampler import SamplerMethod

CONFIG_OPTIONS = (
    "input",
    "speedup",
    "levels",
    "min_seg_len",
    "smooth_radius",
    "s_min",
    "s_max",
    "sampler",
    "lambda_scale",
    "spf",
    "hist_bins",
    "metrics_window",
    "threads",
    "seed",
)


@contextmanager
def stage_errors():
    """Report FastForwardError on stderr with its exit code (IO 2, invariant 3, infeasible 4)."""
    try:
        yield
    except FastForwardError as exc:
        raise CommandError(f"{type(exc).__name__}: {exc}", returncode=exc.exit_code) from exc


def add_io_arguments(parser: CommandParser, output_help: str) -> None:
    parser.add_argument("--input", required=True, help="Descriptor container (.ffwd).")
    parser.add_argument("--out", required=True, help=output_help)


def add_rate_arguments(parser: CommandParser) -> None:
    parser.add_argument("--speedup", type=float, default=None, help="Required speed-up S_d (default 10).")
    parser.add_argument("--levels", type=int, default=None, help="Importance levels for semantic segments.")
    parser.add_argument("--min-seg-len", type=int, default=None, help="Shortest segment kept (default 2*S_d).")
    parser.add_argument("--smooth-radius", type=int, default=None, help="Profile moving-average radius (default fps/2).")
    parser.add_argument("--s-min", type=float, default=None, help="Lowest rate a segment may get (default 1).")
    parser.add_argument("--s-max", type=float, default=None, help="Highest rate a segment may get (default 4*S_d).")


def add_sampler_arguments(parser: CommandParser) -> None:
    parser.add_argument("--sampler", choices=SamplerMethod.values, default=None, help="Sparse solver (default llc).")
    parser.add_argument("--lambda-scale", type=float, default=None, help="lambda = scale * trace(D^T D) / n_seg.")
    parser.add_argument("--spf", type=int, default=None, help="Speed-up factor of the first sampling pass (default 2).")


def add_thread_argument(parser: CommandParser) -> None:
    parser.add_argument("--threads", type=int, default=None, help="Worker cap; FFWD_THREADS overrides it.")


def add_bins_argument(parser: CommandParser) -> None:
    parser.add_argument("--hist-bins", type=int, default=None, help="Expected histogram bins (must match the container).")


def config_overrides(opts) -> dict:
    """Map command options onto PipelineConfig field names."""
    values = {name: opts.get(name) for name in CONFIG_OPTIONS}
    if opts.get("no_fill"):
        values["fill"] = False
    return values
