import shutil
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from footage.container import read_container, write_container
from footage.exceptions import OutOfRangeInput
from footage.reports import NOT_AVAILABLE, read_report, selection_from_dict
from pipeline.ablation import COLUMNS, UNIFORM, format_table, run_ablation
from pipeline.runner import (
    METRICS_FILE,
    RATES_FILE,
    SELECTION_FILE,
    PipelineConfig,
    map_ordered,
    resolve_threads,
    run_pipeline,
)
from pipeline.tasks import run_ablation_task, run_pipeline_task
from synth.scenario import ScenarioSpec, ShakeBurst, generate
from tests.factories import make_video

SCENARIO = ScenarioSpec(n=400, seed=21, shake_bursts=(ShakeBurst(120, 40, 4.0),))


class PipelineConfigTests(SimpleTestCase):
    def test_defaults(self):
        config = PipelineConfig.from_settings()
        self.assertEqual((config.speedup, config.spf, config.sampler, config.fill), (10.0, 2, "llc", True))
        self.assertEqual(config.min_len, 20)

    def test_overrides_skip_none(self):
        config = PipelineConfig.from_settings(speedup=6.0, spf=None, unknown=3)
        self.assertEqual((config.speedup, config.spf), (6.0, 2))

    def test_validation(self):
        for bad in ({"speedup": 1.0}, {"spf": 0}, {"metrics_window": 0}):
            with self.subTest(bad=bad), self.assertRaises(OutOfRangeInput):
                PipelineConfig(**bad)

    def test_dict_round_trip(self):
        config = PipelineConfig(input="a.ffwd", speedup=8.0, sampler="sc", fill=False)
        self.assertEqual(PipelineConfig.from_dict(config.to_dict()), config)

    def test_smoothing_radius_follows_fps(self):
        self.assertEqual(PipelineConfig().radius_for(make_video(5, fps=24.0)), 12)
        self.assertEqual(PipelineConfig(smooth_radius=3).radius_for(make_video(5)), 3)


class ThreadTests(SimpleTestCase):
    @override_settings(FFWD_THREADS=3)
    def test_environment_beats_flag(self):
        self.assertEqual(resolve_threads(1), 3)

    @override_settings(FFWD_THREADS=None, FFWD_DEFAULT_THREADS=6)
    def test_flag_then_default(self):
        self.assertEqual(resolve_threads(2), 2)
        self.assertEqual(resolve_threads(None), 6)

    def test_map_ordered_keeps_order(self):
        items = list(range(20))
        self.assertEqual(map_ordered(lambda x: x * x, items, 4), [x * x for x in items])


class RunPipelineTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.video = generate(SCENARIO)

    def test_single_frame_video(self):
        result = run_pipeline(PipelineConfig(), video=make_video(1))
        self.assertEqual(result.selection.indices.tolist(), [0])
        data = result.report.to_dict()
        self.assertEqual(data["selected_frames"], 1)
        self.assertEqual(data["discontinuity"], NOT_AVAILABLE)
        self.assertEqual(data["transition_smoothness"], NOT_AVAILABLE)

    def test_selection_is_valid(self):
        result = run_pipeline(PipelineConfig(), video=self.video)
        idx = result.selection.indices
        self.assertTrue(np.all(np.diff(idx) > 0))
        self.assertTrue(0 <= idx[0] and idx[-1] < self.video.n)
        self.assertEqual(len(result.rates), len(result.plan.segments) + len(result.selection.bridges))
        self.assertGreaterEqual(result.sampling_seconds, 0.0)

    def test_no_fill_is_a_subset(self):
        filled = run_pipeline(PipelineConfig(), video=self.video)
        plain = run_pipeline(PipelineConfig(fill=False), video=self.video)
        self.assertEqual(plain.selection.bridges, ())
        self.assertTrue(set(plain.selection.indices.tolist()) <= set(filled.selection.indices.tolist()))
        self.assertEqual(filled.plan, plain.plan)

    def test_threads_do_not_change_the_result(self):
        one = run_pipeline(PipelineConfig(threads=1), video=self.video)
        with override_settings(FFWD_THREADS=None):
            many = run_pipeline(PipelineConfig(threads=4), video=self.video)
        self.assertEqual(one.selection, many.selection)
        self.assertEqual(one.report, many.report)

    def test_seed_without_input(self):
        result = run_pipeline(PipelineConfig(seed=2))
        self.assertEqual(result.selection.frames, ScenarioSpec().n)

    def test_nothing_to_run(self):
        with self.assertRaises(OutOfRangeInput):
            run_pipeline(PipelineConfig())


class AblationTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.video = generate(SCENARIO)

    def test_rows(self):
        result = run_ablation(PipelineConfig(), ["llc", "sc", UNIFORM], video=self.video)
        self.assertEqual([row["method"] for row in result.rows], ["llc", "sc", UNIFORM])
        for row in result.rows:
            self.assertEqual(set(row), set(COLUMNS))

    def test_identical_methods_give_identical_metrics(self):
        result = run_ablation(PipelineConfig(), ["llc", "llc"], video=self.video)
        first, second = ({k: v for k, v in row.items() if k != "sampling_seconds"} for row in result.rows)
        self.assertEqual(first, second)

    def test_needs_two_known_methods(self):
        with self.assertRaises(OutOfRangeInput):
            run_ablation(PipelineConfig(), ["llc"], video=self.video)
        with self.assertRaises(OutOfRangeInput):
            run_ablation(PipelineConfig(), ["llc", "ista"], video=self.video)

    def test_table_alignment(self):
        table = format_table([{"method": "llc", "sampling_seconds": 0.5}, {"method": UNIFORM}])
        lines = table.splitlines()
        self.assertEqual(len(lines), 4)
        self.assertEqual(len({len(line) for line in lines}), 1)
        self.assertIn(NOT_AVAILABLE, lines[3])
        self.assertIn("0.5000", lines[2])


class TaskTests(SimpleTestCase):
    def test_pipeline_task(self):
        config = PipelineConfig(seed=1).to_dict()
        payload = run_pipeline_task.apply(kwargs={"config": config}).get()
        self.assertEqual(set(payload), {"selection", "metrics"})
        self.assertEqual(payload["metrics"]["selected_frames"], payload["selection"]["count"])

    def test_ablation_task(self):
        config = PipelineConfig(seed=1).to_dict()
        payload = run_ablation_task.apply(kwargs={"config": config, "methods": ["llc", UNIFORM]}).get()
        self.assertEqual([row["method"] for row in payload["rows"]], ["llc", UNIFORM])


class CommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.container = self.tmp / "video.ffwd"
        write_container(generate(SCENARIO), self.container)

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def _call(self, *args):
        call_command(*args, stdout=StringIO(), stderr=StringIO())

    def test_run_is_byte_identical(self):
        self._call("run", "--input", str(self.container), "--out", str(self.tmp / "a"))
        self._call("run", "--input", str(self.container), "--out", str(self.tmp / "b"))
        for name in (RATES_FILE, SELECTION_FILE, METRICS_FILE):
            with self.subTest(name=name):
                self.assertEqual((self.tmp / "a" / name).read_bytes(), (self.tmp / "b" / name).read_bytes())

    def test_staged_run_matches_run(self):
        video, t = str(self.container), self.tmp
        self._call("run", "--input", video, "--out", str(t / "run"))
        self._call("segment", "--input", video, "--out", str(t / "rates.yaml"))
        self._call("sample", "--input", video, "--rates", str(t / "rates.yaml"), "--out", str(t / "sampled.yaml"))
        self._call(
            "smooth",
            "--input", video,
            "--rates", str(t / "rates.yaml"),
            "--selection", str(t / "sampled.yaml"),
            "--out", str(t / "smoothed.yaml"),
        )
        self._call(
            "fillgap",
            "--input", video,
            "--rates", str(t / "rates.yaml"),
            "--selection", str(t / "smoothed.yaml"),
            "--out", str(t / "final.yaml"),
        )
        self._call(
            "metrics",
            "--input", video,
            "--selection", str(t / "final.yaml"),
            "--rates", str(t / "rates.yaml"),
            "--out", str(t / "metrics.yaml"),
        )
        self.assertEqual((t / "rates.yaml").read_bytes(), (t / "run" / RATES_FILE).read_bytes())
        self.assertEqual((t / "final.yaml").read_bytes(), (t / "run" / SELECTION_FILE).read_bytes())
        self.assertEqual((t / "metrics.yaml").read_bytes(), (t / "run" / METRICS_FILE).read_bytes())

    def test_synth_command(self):
        out = self.tmp / "synth.ffwd"
        self._call("synth", "--out", str(out), "--seed", "21", "--n", "400")
        spec_out = self.tmp / "spec.ffwd"
        spec_path = self.tmp / "spec.yaml"
        spec_path.write_text("n: 400\nseed: 21\nshake_bursts:\n  - {start: 120, length: 40, amplitude: 4.0}\n")
        self._call("synth", "--spec", str(spec_path), "--out", str(spec_out))
        self.assertEqual(spec_out.read_bytes(), self.container.read_bytes())
        self.assertNotEqual(out.read_bytes(), self.container.read_bytes())

    def test_rescore_command(self):
        detections = self.tmp / "detections.yaml"
        detections.write_text(
            "frames:\n"
            "  - [{confidence: 1.0, center: [0.5, 0.5], area: 1.0}]\n"
            "  - []\n"
            "  - [[0.5, [0.5, 0.5], 0.5]]\n"
        )
        out = self.tmp / "rescored.ffwd"
        self._call("rescore", "--input", str(self.container), "--detections", str(detections), "--out", str(out))
        scores = read_container(out).semantic_scores
        self.assertEqual(scores[:3].tolist(), [1.0, 0.0, 0.25])
        self.assertTrue(np.all(scores[3:] == 0.0))

    def test_rescore_needs_frames(self):
        detections = self.tmp / "detections.yaml"
        detections.write_text("scores: [1, 2]\n")
        with self.assertRaises(CommandError):
            self._call("rescore", "--input", str(self.container), "--detections", str(detections), "--out", str(self.tmp / "r.ffwd"))

    def test_ablate_command(self):
        stdout = StringIO()
        call_command(
            "ablate", "--input", str(self.container), "--methods", "llc", "uniform",
            "--out", str(self.tmp / "ablation.yaml"), stdout=stdout,
        )
        rows = read_report(self.tmp / "ablation.yaml")["rows"]
        self.assertEqual([row["method"] for row in rows], ["llc", UNIFORM])
        self.assertIn("sampling_seconds", stdout.getvalue())

    def test_bad_container_exits_with_io_code(self):
        bad = self.tmp / "bad.ffwd"
        bad.write_bytes(b"NOPE" + bytes(64))
        with self.assertRaises(CommandError) as ctx:
            self._call("run", "--input", str(bad), "--out", str(self.tmp / "x"))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("BadMagic", str(ctx.exception))

    def test_infeasible_rates_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            self._call("run", "--input", str(self.container), "--out", str(self.tmp / "x"), "--s-max", "5")
        self.assertEqual(ctx.exception.returncode, 4)

    def test_segment_writes_best_effort_plan(self):
        out = self.tmp / "rates.yaml"
        with self.assertRaises(CommandError):
            self._call("segment", "--input", str(self.container), "--out", str(out), "--s-max", "5")
        self.assertFalse(read_report(out)["feasible"])

    def test_bin_mismatch(self):
        video, missing = str(self.container), str(self.tmp / "missing.yaml")
        commands = {
            "run": [],
            "sample": ["--rates", missing],
            "smooth": ["--rates", missing, "--selection", missing],
            "fillgap": ["--rates", missing, "--selection", missing],
            "metrics": ["--selection", missing],
        }
        for name, extra in commands.items():
            with self.subTest(command=name):
                with self.assertRaises(CommandError) as ctx:
                    self._call(name, "--input", video, "--out", str(self.tmp / "x"), "--hist-bins", "8", *extra)
                self.assertIn("BinCountMismatch", str(ctx.exception))

    def test_no_fill_flag(self):
        self._call("run", "--input", str(self.container), "--out", str(self.tmp / "plain"), "--no-fill")
        selection = selection_from_dict(read_report(self.tmp / "plain" / SELECTION_FILE))
        self.assertEqual(selection.bridges, ())

    def test_enqueue_dispatches_the_config(self):
        with mock.patch.object(run_pipeline_task, "delay") as delay:
            self._call("run", "--seed", "4", "--out", str(self.tmp / "queued"), "--enqueue")
        config = delay.call_args.kwargs["config"]
        self.assertEqual((config["seed"], config["output"]), (4, str(self.tmp / "queued")))
        self.assertFalse((self.tmp / "queued").exists())
