import tempfile
from pathlib import Path

import numpy as np
import yaml
from django.test import SimpleTestCase
from hypothesis import given, settings as hyp_settings, strategies as st

from footage.exceptions import DimensionMismatch, InvalidSpec, IoFailure, TooLarge
from sampling.solvers import motion_weights, solve_llc
from synth.oracles import llc_objective, oracle_best_subset, oracle_llc_descent, oracle_llc_gradient
from synth.scenario import ScenarioSpec, ShakeBurst, generate, load_scenario, plateau_layout


class ScenarioSpecTests(SimpleTestCase):
    def test_defaults_are_valid(self):
        self.assertEqual(ScenarioSpec().validate(), ScenarioSpec())

    def test_invalid_values(self):
        bad = [
            ScenarioSpec(n=0),
            ScenarioSpec(f=0),
            ScenarioSpec(semantic_fraction=1.5),
            ScenarioSpec(seed=-1),
            ScenarioSpec(bins=0),
            ScenarioSpec(n=100, shake_bursts=(ShakeBurst(90, 20, 3.0),)),
            ScenarioSpec(n=100, shake_bursts=(ShakeBurst(10, 20, 0.0),)),
        ]
        for scenario in bad:
            with self.subTest(scenario=scenario), self.assertRaises(InvalidSpec):
                scenario.validate()

    def test_from_dict(self):
        spec = ScenarioSpec.from_dict({"n": "300", "seed": 7, "shake_bursts": [{"start": 10, "length": 5, "amplitude": 4}]})
        self.assertEqual(spec.n, 300)
        self.assertEqual(spec.shake_bursts, (ShakeBurst(10, 5, 4.0),))
        self.assertEqual(ScenarioSpec.from_dict(spec.to_dict()), spec)

    def test_from_dict_rejects_unknown_and_malformed(self):
        with self.assertRaises(InvalidSpec):
            ScenarioSpec.from_dict({"frames": 10})
        with self.assertRaises(InvalidSpec):
            ScenarioSpec.from_dict({"n": "many"})

    def test_load_scenario(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "scenario.yaml"
            path.write_text(yaml.safe_dump({"n": 120, "semantic_fraction": 0.25, "shake_bursts": [[5, 10, 3.0]]}))
            spec = load_scenario(path)
            self.assertEqual((spec.n, spec.semantic_fraction), (120, 0.25))
            self.assertEqual(spec.shake_bursts, (ShakeBurst(5, 10, 3.0),))

            (Path(tmp) / "list.yaml").write_text("- 1\n- 2\n")
            with self.assertRaises(InvalidSpec):
                load_scenario(Path(tmp) / "list.yaml")
            with self.assertRaises(IoFailure):
                load_scenario(Path(tmp) / "missing.yaml")


class PlateauLayoutTests(SimpleTestCase):
    @given(st.integers(1, 2000), st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]), st.integers(1, 6), st.integers(0, 2**32))
    def test_exact_coverage_inside_the_video(self, n, fraction, count, seed):
        ranges = plateau_layout(n, fraction, count, np.random.default_rng(seed))
        self.assertEqual(sum(end - start for start, end in ranges), int(np.floor(fraction * n + 0.5)))
        bounds = [b for r in ranges for b in r]
        self.assertEqual(bounds, sorted(bounds))
        self.assertTrue(all(0 <= start < end <= n for start, end in ranges))


class GenerateTests(SimpleTestCase):
    def test_deterministic(self):
        spec = ScenarioSpec(n=200, seed=11, shake_bursts=(ShakeBurst(50, 30, 4.0),))
        self.assertEqual(generate(spec), generate(spec))
        self.assertNotEqual(generate(spec), generate(ScenarioSpec(n=200, seed=12)))

    def test_shapes(self):
        video = generate(ScenarioSpec(n=50, f=8, bins=12, thumb_width=16, thumb_height=10))
        self.assertEqual((video.n, video.f, video.bins), (50, 8, 12))
        self.assertEqual(video.thumb_shape, (10, 16))
        np.testing.assert_allclose(video.histograms.sum(axis=2), 1.0, atol=1e-6)

    def test_without_thumbnails(self):
        self.assertFalse(generate(ScenarioSpec(n=20, thumbnails=False)).has_thumbnails)

    def test_no_semantics_stays_in_the_noise_band(self):
        scores = generate(ScenarioSpec(n=1000, semantic_fraction=0.0, seed=3)).semantic_scores
        self.assertTrue(np.all(scores >= 0.0))
        self.assertLessEqual(scores.max(), 0.15 + 1e-6)

    def test_plateau_frame_count(self):
        for seed in range(5):
            scores = generate(ScenarioSpec(n=1000, semantic_fraction=0.5, seed=seed, thumbnails=False)).semantic_scores
            with self.subTest(seed=seed):
                self.assertEqual(int(np.count_nonzero(scores > 0.25)), 500)

    def test_bursts_raise_motion(self):
        video = generate(ScenarioSpec(n=400, seed=5, shake_bursts=(ShakeBurst(100, 100, 5.0),)))
        inside = video.motion[100:200].mean()
        outside = np.concatenate([video.motion[:100], video.motion[200:]]).mean()
        self.assertGreater(inside, 3.0 * outside)


def _instance(seed, f=8, n=20):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(f, n)), motion_weights(rng.uniform(0.0, 2.0, n))


class LlcOracleTests(SimpleTestCase):
    def test_gradient_vanishes_at_least_squares_solution(self):
        rng = np.random.default_rng(0)
        D = rng.normal(size=(10, 4))
        alpha, *_ = np.linalg.lstsq(D, D.sum(axis=1), rcond=None)
        grad = oracle_llc_gradient(D, np.ones(4), 0.0, alpha)
        np.testing.assert_allclose(grad, 0.0, atol=1e-10)

    def test_finite_differences(self):
        for seed in range(5):
            D, w = _instance(seed)
            alpha = np.random.default_rng(100 + seed).normal(size=D.shape[1])
            lam, h = 0.3, 1e-6
            numeric = np.array(
                [
                    (llc_objective(D, w, lam, alpha + h * e) - llc_objective(D, w, lam, alpha - h * e)) / (2 * h)
                    for e in np.eye(D.shape[1])
                ]
            )
            analytic = oracle_llc_gradient(D, w, lam, alpha)
            with self.subTest(seed=seed):
                np.testing.assert_allclose(numeric, analytic, rtol=1e-5, atol=1e-5 * np.abs(analytic).max())

    def test_solver_output_is_stationary(self):
        for seed in range(10):
            D, w = _instance(seed, f=12, n=30)
            solution = solve_llc(D, w, 0.05)
            grad = oracle_llc_gradient(D, w, 0.05, solution.alpha)
            scale = np.abs(D.T @ D.sum(axis=1)).max()
            with self.subTest(seed=seed):
                self.assertLess(np.abs(grad).max(), 1e-8 * scale)

    def test_descent_reaches_the_minimum(self):
        D, w = _instance(2, f=6, n=10)
        alpha = oracle_llc_descent(D, w, 0.1)
        self.assertLess(np.linalg.norm(oracle_llc_gradient(D, w, 0.1, alpha)), 1e-8)

    def test_shape_checks(self):
        with self.assertRaises(DimensionMismatch):
            oracle_llc_gradient(np.ones((3, 4)), np.ones(4), 0.1, np.ones(3))
        with self.assertRaises(DimensionMismatch):
            llc_objective(np.ones((3, 4)), np.ones(5), 0.1, np.ones(4))


class BestSubsetTests(SimpleTestCase):
    def test_orthogonal_columns(self):
        subset, residual = oracle_best_subset(np.diag([1.0, 2.0, 3.0]), 3)
        self.assertEqual(subset, (0, 1, 2))
        self.assertAlmostEqual(residual, 0.0)

    def test_picks_the_dominant_columns(self):
        subset, residual = oracle_best_subset(np.diag([1.0, 5.0, 3.0]), 2)
        self.assertEqual(subset, (1, 2))
        self.assertAlmostEqual(residual, 1.0)

    def test_full_subset_is_least_squares(self):
        D = np.random.default_rng(1).normal(size=(6, 4))
        v = D.sum(axis=1)
        coef, *_ = np.linalg.lstsq(D, v, rcond=None)
        _, residual = oracle_best_subset(D, 4)
        self.assertAlmostEqual(residual, float(np.linalg.norm(v - D @ coef)), places=10)

    @hyp_settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**32))
    def test_no_subset_beats_the_oracle(self, seed):
        D = np.random.default_rng(seed).normal(size=(5, 7))
        _, best = oracle_best_subset(D, 2)
        _, worse = oracle_best_subset(D, 1)
        self.assertLessEqual(best, worse + 1e-12)

    def test_limits(self):
        with self.assertRaises(TooLarge):
            oracle_best_subset(np.ones((3, 40)), 10)
        with self.assertRaises(DimensionMismatch):
            oracle_best_subset(np.ones((3, 4)), 5)
