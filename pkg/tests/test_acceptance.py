"""
End-to-end properties of the fast-forward on seeded synthetic footage:
solver optimality and cost, frame budgets, gap filling, retention and
determinism.
"""
import logging
import time

import numpy as np
from django.test import SimpleTestCase

from footage.container import decode_container, encode_container
from footage.models import Segment
from footage.reports import dump_report, selection_to_dict
from gapfill.bridges import fill_all, rates_with_bridges
from metrics.evaluation import (
    discontinuity,
    instability_metric,
    semantic_retained,
    transition_smoothness,
    uniform_selection,
)
from pipeline.ablation import run_ablation
from pipeline.runner import PipelineConfig, plan_rates, run_pipeline, sample_all, smooth_all
from profiles.rates import RatePlan
from sampling.sampler import SamplerChoice, frame_budget
from sampling.solvers import default_lambda, motion_weights, solve_llc, solve_omp
from smoothing.transitions import emd_histograms
from synth.oracles import oracle_best_subset, oracle_llc_descent, oracle_llc_gradient
from synth.scenario import ScenarioSpec, ShakeBurst, generate
from tests.factories import OMP_SUITE_ATOMS, OMP_SUITE_SEEDS, make_video, omp_dictionary

logger = logging.getLogger(__name__)


def _llc_instance(rng, f_range, n_range):
    f = int(rng.integers(*f_range))
    n = int(rng.integers(*n_range))
    D = rng.normal(size=(f, n))
    return D, motion_weights(rng.uniform(0.0, 2.0, n))


class LlcOptimalityTests(SimpleTestCase):
    def test_first_order_conditions(self):
        rng = np.random.default_rng(2024)
        spent = 0.0
        for k in range(200):
            D, w = _llc_instance(rng, (4, 65), (5, 201))
            lam = default_lambda(D)
            started = time.perf_counter()
            solution = solve_llc(D, w, lam)
            spent += time.perf_counter() - started
            grad = oracle_llc_gradient(D, w, lam, solution.alpha)
            bound = 1e-8 * np.abs(D.T @ D.sum(axis=1)).max()
            with self.subTest(instance=k, shape=D.shape):
                self.assertLess(np.abs(grad).max(), bound)
        self.assertLess(spent, 10.0)

    def test_matches_gradient_descent(self):
        rng = np.random.default_rng(7)
        for k in range(20):
            D, w = _llc_instance(rng, (4, 17), (5, 31))
            lam = default_lambda(D)
            with self.subTest(instance=k, shape=D.shape):
                np.testing.assert_allclose(solve_llc(D, w, lam).alpha, oracle_llc_descent(D, w, lam), atol=1e-6)


class SolverCostTests(SimpleTestCase):
    def test_llc_is_cheapest(self):
        video = generate(ScenarioSpec(n=3000, seed=7, thumbnails=False))
        best = {}
        for _ in range(3):
            result = run_ablation(PipelineConfig(), ["llc", "sc", "omp"], video=video)
            for row in result.rows:
                best[row["method"]] = min(best.get(row["method"], float("inf")), row["sampling_seconds"])
            deviations = {row["method"]: row["speedup_deviation"] for row in result.rows}
        logger.info("Sampling seconds (best of 3): llc %.4f, sc %.4f, omp %.4f", best["llc"], best["sc"], best["omp"])
        self.assertLessEqual(best["llc"], best["sc"] / 5.0)
        self.assertLessEqual(best["llc"], best["omp"] / 5.0)
        self.assertLessEqual(abs(deviations["llc"] - deviations["sc"]), 1.0)


class FrameBudgetTests(SimpleTestCase):
    def test_segments_hit_their_budget(self):
        config = PipelineConfig()
        for seed in range(3):
            video = generate(ScenarioSpec(n=3000, seed=seed, thumbnails=False))
            plan = plan_rates(video, config)
            smoothed = smooth_all(video, plan, sample_all(video, plan, config.choice, config.spf))
            for k, (segment, entries) in enumerate(zip(plan.segments, smoothed)):
                with self.subTest(seed=seed, segment=k):
                    self.assertEqual(len(entries), frame_budget(segment.length, segment.speedup))

    def test_speedup_deviation_below_one(self):
        deviations = []
        for seed, fraction in enumerate((0.25, 0.5, 0.75, 0.25, 0.5, 0.75)):
            spec = ScenarioSpec(n=3000, seed=seed, semantic_fraction=fraction, thumbnails=False)
            deviations.append(run_pipeline(PipelineConfig(), video=generate(spec)).report.speedup_deviation)
        logger.info("Speed-up deviations: %s", np.round(deviations, 3).tolist())
        self.assertLess(float(np.mean(deviations)), 1.0)


def _contrast_plan(n, length, fast=14.0, slow=2.0):
    segments = tuple(
        Segment(start, start + length - 1, 0 if k % 2 == 0 else 1, fast if k % 2 == 0 else slow)
        for k, start in enumerate(range(0, n, length))
    )
    output = sum(s.length / s.speedup for s in segments)
    return RatePlan(segments=segments, target_speedup=n / output, s_min=1.0, s_max=4.0 * fast)


class GapFillTests(SimpleTestCase):
    def test_bridges_reduce_discontinuity_and_rate_jumps(self):
        plan = _contrast_plan(1200, 200)
        choice = SamplerChoice()
        plain_disc, filled_disc, plain_smooth, filled_smooth = [], [], [], []
        for seed in range(20):
            spec = ScenarioSpec(n=1200, seed=seed, thumbnails=False, shake_bursts=(ShakeBurst(350, 100, 3.0),))
            video = generate(spec)
            smoothed = smooth_all(video, plan, sample_all(video, plan, choice, 2))
            plain = fill_all(video, plan, smoothed, choice, 2, enabled=False)
            filled = fill_all(video, plan, smoothed, choice, 2)

            plain_disc.append(discontinuity(plain, plan.target_speedup))
            filled_disc.append(discontinuity(filled, plan.target_speedup))
            plain_smooth.append(transition_smoothness(plan.rates))
            filled_smooth.append(transition_smoothness(rates_with_bridges(plan, filled.bridges)))
            with self.subTest(seed=seed):
                self.assertLessEqual(filled_smooth[-1], plain_smooth[-1])

        disc_ratio = np.mean(filled_disc) / np.mean(plain_disc)
        smooth_ratio = np.mean(filled_smooth) / np.mean(plain_smooth)
        logger.info("Gap filling: discontinuity x%.3f, transition smoothness x%.3f", disc_ratio, smooth_ratio)
        self.assertLessEqual(disc_ratio, 0.6)
        self.assertLessEqual(smooth_ratio, 0.6)


class RetentionTests(SimpleTestCase):
    def test_pipeline_beats_uniform_sampling(self):
        for fraction in (0.25, 0.5, 0.75):
            for seed in range(30):
                video = generate(ScenarioSpec(n=600, seed=seed, semantic_fraction=fraction, thumbnails=False))
                selection = run_pipeline(PipelineConfig(), video=video).selection
                baseline = uniform_selection(video.n, selection.count)
                with self.subTest(fraction=fraction, seed=seed):
                    self.assertGreater(semantic_retained(video, selection), semantic_retained(video, baseline))


class MetricValueTests(SimpleTestCase):
    def test_reference_values(self):
        self.assertAlmostEqual(discontinuity([0, 10, 30], 10.0), 5.7735, delta=1e-4)
        self.assertEqual(emd_histograms(np.array([1.0, 0.0]), np.array([0.0, 1.0])), 1.0)
        video = make_video(6, thumbnails=np.full((6, 3, 3), 17, dtype=np.uint8))
        self.assertEqual(instability_metric(video, [0, 2, 3, 5]), 0.0)


class DeterminismTests(SimpleTestCase):
    def test_container_round_trip_is_byte_identical(self):
        data = encode_container(generate(ScenarioSpec(n=150, seed=9)))
        self.assertEqual(encode_container(decode_container(data)), data)

    def test_reports_are_reproducible(self):
        spec = ScenarioSpec(n=500, seed=13, shake_bursts=(ShakeBurst(200, 50, 4.0),))
        first = run_pipeline(PipelineConfig(), video=generate(spec))
        second = run_pipeline(PipelineConfig(), video=generate(spec))
        self.assertEqual(dump_report(selection_to_dict(first.selection)), dump_report(selection_to_dict(second.selection)))
        self.assertEqual(dump_report(first.report.to_dict()), dump_report(second.report.to_dict()))


class OmpQualityTests(SimpleTestCase):
    def test_within_twice_the_best_subset(self):
        ratios = []
        for seed in OMP_SUITE_SEEDS:
            D = omp_dictionary(seed)
            _, best = oracle_best_subset(D, OMP_SUITE_ATOMS)
            residual = solve_omp(D, OMP_SUITE_ATOMS).reconstruction_error
            ratios.append(residual / best)
            with self.subTest(seed=seed):
                self.assertLessEqual(residual, 2.0 * best + 1e-9)
        logger.info("OMP / best-subset residual ratios: %s", np.round(ratios, 3).tolist())
