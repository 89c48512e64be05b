import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hyp_settings, strategies as st

from footage.exceptions import TooFewFrames, TooFewSegments
from footage.models import Selection, SelectionEntry
from footage.reports import NOT_AVAILABLE
from metrics.evaluation import (
    discontinuity,
    evaluate,
    instability_metric,
    semantic_retained,
    speedup_deviation,
    transition_smoothness,
    uniform_selection,
)
from synth.scenario import ScenarioSpec, ShakeBurst, generate
from tests.factories import make_video

increasing_picks = st.lists(st.integers(0, 500), min_size=2, max_size=40, unique=True).map(sorted)


def _selection(indices, n=100, speedup=10.0):
    return Selection.from_entries([SelectionEntry(i, 0, "smoothed") for i in indices], speedup, n)


class DiscontinuityTests(SimpleTestCase):
    def test_hand_value(self):
        self.assertAlmostEqual(discontinuity([0, 10, 30], 10.0), 5.7735, places=4)

    def test_exact_jumps_are_zero(self):
        self.assertEqual(discontinuity(list(range(0, 100, 10)), 10.0), 0.0)

    def test_accepts_selection(self):
        self.assertAlmostEqual(discontinuity(_selection([0, 10, 30]), 10.0), 5.7735, places=4)

    def test_too_few(self):
        with self.assertRaises(TooFewFrames):
            discontinuity([4], 10.0)

    @given(increasing_picks, st.integers(0, 1000), st.floats(1.5, 30.0))
    def test_translation_invariance(self, picks, offset, speedup):
        shifted = [p + offset for p in picks]
        self.assertAlmostEqual(discontinuity(picks, speedup), discontinuity(shifted, speedup), places=9)


class InstabilityMetricTests(SimpleTestCase):
    def test_two_point_std(self):
        thumbs = np.array([[[0]], [[255]]], dtype=np.uint8)
        video = make_video(2, thumbnails=thumbs)
        self.assertAlmostEqual(instability_metric(video, [0, 1], window=2), 127.5)

    def test_identical_thumbnails(self):
        thumbs = np.full((10, 4, 5), 90, dtype=np.uint8)
        video = make_video(10, thumbnails=thumbs)
        self.assertEqual(instability_metric(video, [0, 3, 6, 9]), 0.0)

    def test_window_is_capped_by_selection(self):
        thumbs = np.array([[[0]], [[255]], [[0]]], dtype=np.uint8)
        video = make_video(3, thumbnails=thumbs)
        self.assertAlmostEqual(instability_metric(video, [0, 1], window=8), 127.5)
        self.assertEqual(instability_metric(video, [1], window=4), 0.0)

    def test_mean_over_windows(self):
        thumbs = np.array([[[0]], [[255]], [[255]]], dtype=np.uint8)
        video = make_video(3, thumbnails=thumbs)
        self.assertAlmostEqual(instability_metric(video, [0, 1, 2], window=2), 127.5 / 2)

    def test_not_available_without_thumbnails(self):
        self.assertIsNone(instability_metric(make_video(10), [0, 5]))

    def test_uniform_tenfold_is_shakier_than_the_original(self):
        for seed in (5, 6):
            video = generate(ScenarioSpec(n=400, seed=seed, shake_bursts=(ShakeBurst(100, 200, 4.0),)))
            original = instability_metric(video, np.arange(video.n))
            uniform = instability_metric(video, uniform_selection(video.n, video.n // 10))
            with self.subTest(seed=seed):
                self.assertGreater(uniform, original)


class SemanticRetainedTests(SimpleTestCase):
    def setUp(self):
        self.video = make_video(4, scores=[0.1, 0.9, 0.5, 0.3])

    def test_top_frames(self):
        self.assertEqual(semantic_retained(self.video, [1, 2]), 1.0)

    def test_partial(self):
        self.assertAlmostEqual(semantic_retained(self.video, [0, 3]), 0.4 / 1.4, places=6)

    def test_all_zero_scores(self):
        self.assertEqual(semantic_retained(make_video(4), [0, 2]), 1.0)

    @given(st.floats(0.01, 100.0))
    def test_scale_invariance(self, factor):
        scaled = make_video(4, scores=np.array([0.1, 0.9, 0.5, 0.3]) * factor)
        self.assertAlmostEqual(semantic_retained(scaled, [0, 2]), semantic_retained(self.video, [0, 2]), places=5)


class SpeedupDeviationTests(SimpleTestCase):
    def test_exact(self):
        self.assertEqual(speedup_deviation(list(range(100)), 10.0, 1000), 0.0)

    def test_hand_value(self):
        self.assertAlmostEqual(speedup_deviation(list(range(105)), 10.0, 1000), 0.476, places=3)

    def test_empty(self):
        with self.assertRaises(TooFewFrames):
            speedup_deviation([], 10.0, 1000)


class TransitionSmoothnessTests(SimpleTestCase):
    def test_equal_rates(self):
        self.assertEqual(transition_smoothness([6.0, 6.0, 6.0]), 0.0)

    def test_bridge_halves_the_jump(self):
        self.assertEqual(transition_smoothness([14.0, 2.0]), 144.0)
        self.assertEqual(transition_smoothness([14.0, 8.0, 2.0]), 36.0)

    def test_too_few(self):
        with self.assertRaises(TooFewSegments):
            transition_smoothness([10.0])


class UniformSelectionTests(SimpleTestCase):
    def test_even_spacing(self):
        selection = uniform_selection(100, 10)
        self.assertEqual(selection.indices.tolist(), list(range(0, 100, 10)))
        self.assertEqual(selection.required_speedup, 10.0)

    def test_uneven(self):
        self.assertEqual(uniform_selection(10, 3, 3.0).indices.tolist(), [0, 3, 6])

    def test_clamped(self):
        self.assertEqual(uniform_selection(3, 10).count, 3)
        self.assertEqual(uniform_selection(3, 0).count, 1)


class EvaluateTests(SimpleTestCase):
    def test_full_report(self):
        thumbs = np.zeros((100, 2, 2), dtype=np.uint8)
        video = make_video(100, scores=np.linspace(0.0, 1.0, 100), thumbnails=thumbs)
        report = evaluate(video, uniform_selection(100, 10), 10.0, rates=[14.0, 2.0])
        self.assertEqual(report.achieved_speedup, 10.0)
        self.assertEqual(report.speedup_deviation, 0.0)
        self.assertEqual(report.discontinuity, 0.0)
        self.assertEqual(report.instability, 0.0)
        self.assertEqual(report.transition_smoothness, 144.0)
        self.assertEqual(report.selected_frames, 10)
        self.assertLess(report.semantic_retained, 1.0)

    def test_degenerate_metrics_are_not_available(self):
        video = make_video(1)
        report = evaluate(video, _selection([0], n=1), 10.0)
        data = report.to_dict()
        self.assertEqual(data["selected_frames"], 1)
        self.assertEqual(data["achieved_speedup"], 1.0)
        self.assertEqual(data["discontinuity"], NOT_AVAILABLE)
        self.assertEqual(data["instability"], NOT_AVAILABLE)
        self.assertEqual(data["transition_smoothness"], NOT_AVAILABLE)

    def test_deterministic(self):
        video = make_video(50, seed=4, scores=np.random.default_rng(4).uniform(size=50))
        selection = uniform_selection(50, 7)
        self.assertEqual(evaluate(video, selection).to_dict(), evaluate(video, selection).to_dict())

    @hyp_settings(max_examples=30)
    @given(increasing_picks)
    def test_present_values_are_nonnegative(self, picks):
        video = make_video(501, scores=np.random.default_rng(0).uniform(size=501))
        report = evaluate(video, _selection(picks, n=501), 10.0)
        for key, value in report.to_dict().items():
            if value != NOT_AVAILABLE:
                self.assertGreaterEqual(value, 0.0, key)
        self.assertLessEqual(report.semantic_retained, 1.0)
