import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hsettings, strategies as st

from footage.exceptions import DimensionMismatch, OutOfRangeInput
from footage.models import Segment
from sampling.sampler import SamplerChoice, SamplerMethod, frame_budget, sample_segment
from sampling.solvers import (
    ActivationSolution,
    default_lambda,
    lasso_coordinate_descent,
    motion_weights,
    select_frames,
    solve_llc,
    solve_omp,
    solve_sc,
)
from synth.oracles import llc_objective, oracle_best_subset, oracle_llc_descent, oracle_llc_gradient
from tests.factories import OMP_SUITE_ATOMS, OMP_SUITE_SEEDS, make_video, omp_dictionary


def _instance(seed, f, n):
    rng = np.random.default_rng(seed)
    D = rng.normal(size=(f, n))
    w = motion_weights(rng.uniform(0, 2, n))
    return D, w


def _solution(alpha):
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.size
    return ActivationSolution(alpha, np.zeros(n), np.ones(n), 1.0, np.zeros(1), 0.0)


def _l1_objective(D, w, lam, alpha):
    v = D.sum(axis=1)
    return 0.5 * np.sum((v - D @ alpha) ** 2) + lam * np.sum(np.abs(w * alpha))


class MotionWeightTests(SimpleTestCase):
    def test_equal_motion_gives_ones(self):
        np.testing.assert_allclose(motion_weights([0.7, 0.7, 0.7]), np.ones(3))

    def test_zero_motion_gives_ones(self):
        np.testing.assert_array_equal(motion_weights(np.zeros(4)), np.ones(4))

    def test_more_motion_less_weight(self):
        w = motion_weights([0.0, 50.0])
        self.assertGreater(w[0], w[1])

    def test_formula(self):
        raw = np.exp(-np.array([1.0, 2.0, 3.0]) / (2.0 + 1e-9))
        np.testing.assert_allclose(motion_weights([1, 2, 3]), raw / raw.mean())
        self.assertAlmostEqual(motion_weights([1, 2, 3]).mean(), 1.0)

    def test_single_jolt_keeps_weights_positive(self):
        motion = np.zeros(800)
        motion[400] = 5.0
        w = motion_weights(motion)
        self.assertTrue(np.all(w > 0))
        self.assertEqual(int(np.argmin(w)), 400)
        self.assertAlmostEqual(w.mean(), 1.0)

    def test_segment_with_a_single_jolt_samples(self):
        motion = np.zeros(800)
        motion[400] = 5.0
        video = make_video(800, 6, seed=3, motion=motion)
        entries = sample_segment(video, Segment(0, 799, 0, 10.0), spf=2)
        indices = [e.index for e in entries]
        self.assertEqual(len(indices), 40)
        self.assertEqual(indices, sorted(set(indices)))


class LlcTests(SimpleTestCase):
    def test_single_column(self):
        sol = solve_llc([[1.0], [2.0]], [1.0], 0.0)
        np.testing.assert_allclose(sol.alpha, [1.0])
        self.assertAlmostEqual(sol.reconstruction_error, 0.0)

    def test_orthonormal_columns(self):
        sol = solve_llc(np.eye(2), [1.0, 1.0], 0.0)
        np.testing.assert_allclose(sol.alpha, [1.0, 1.0])

    def test_matches_gradient_descent(self):
        D, w = _instance(8, 8, 20)
        sol = solve_llc(D, w, 0.01)
        np.testing.assert_allclose(sol.alpha, oracle_llc_descent(D, w, 0.01), atol=1e-6)

    def test_first_order_optimality(self):
        for seed in range(20):
            D, w = _instance(seed, 4 + seed, 5 + 7 * seed)
            lam = default_lambda(D)
            sol = solve_llc(D, w, lam)
            grad = oracle_llc_gradient(D, w, lam, sol.alpha)
            scale = np.abs(D.T @ D.sum(axis=1)).max()
            self.assertLess(np.abs(grad).max(), 1e-8 * scale)

    def test_solution_fields(self):
        D, w = _instance(1, 5, 9)
        sol = solve_llc(D, w, 0.5)
        self.assertEqual(sol.alpha.shape, (9,))
        self.assertTrue(np.all(sol.g >= 0))
        np.testing.assert_allclose(sol.story, D.sum(axis=1))

    def test_duplicate_frames_get_jitter(self):
        D = np.ones((3, 4))
        with self.assertLogs("sampling.solvers", level="WARNING"):
            sol = solve_llc(D, np.ones(4), 0.0)
        self.assertTrue(np.all(np.isfinite(sol.alpha)))
        self.assertLess(sol.reconstruction_error, 1e-6)

    def test_down_weighted_frame_is_not_demoted(self):
        rng = np.random.default_rng(4)
        base = rng.normal(size=6)
        D = base[:, None] + 0.01 * rng.normal(size=(6, 8))
        w = np.ones(8)
        before = solve_llc(D, w, 0.1).alpha
        w_low = w.copy()
        w_low[3] = 0.2
        after = solve_llc(D, w_low, 0.1).alpha
        self.assertGreaterEqual(abs(after[3]), abs(before[3]))

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            solve_llc(np.ones((3, 4)), np.ones(3), 0.1)
        with self.assertRaises(DimensionMismatch):
            solve_llc(np.ones(3), np.ones(3), 0.1)

    def test_deterministic(self):
        D, w = _instance(9, 10, 30)
        a = solve_llc(D, w, 0.2).alpha
        b = solve_llc(D, w, 0.2).alpha
        self.assertEqual(a.tobytes(), b.tobytes())

    def test_wide_segment_matches_full_normal_equations(self):
        for seed, (f, n) in enumerate([(4, 60), (16, 300), (30, 31)]):
            D, w = _instance(40 + seed, f, n)
            lam = default_lambda(D)
            v = D.sum(axis=1)
            g = np.linalg.norm(D - v[:, None], axis=0)
            expected = np.linalg.solve(D.T @ D + np.diag(lam * (w * g) ** 2), D.T @ v)
            with self.subTest(shape=(f, n)):
                np.testing.assert_allclose(solve_llc(D, w, lam).alpha, expected, rtol=1e-7, atol=1e-12)


class LassoTests(SimpleTestCase):
    def test_huge_lambda_gives_zero(self):
        D, w = _instance(2, 6, 10)
        np.testing.assert_array_equal(lasso_coordinate_descent(D, w, 1e9), np.zeros(10))

    def test_zero_lambda_square_system(self):
        D = np.array([[2.0, 0.1, 0.0], [0.1, 2.0, 0.1], [0.0, 0.1, 2.0]])
        alpha = lasso_coordinate_descent(D, np.ones(3), 0.0)
        np.testing.assert_allclose(alpha, np.linalg.solve(D, D.sum(axis=1)), atol=1e-5)

    def test_support_hits_target(self):
        D, w = _instance(3, 8, 20)
        sol = solve_sc(D, w, 4)
        self.assertEqual(np.count_nonzero(sol.alpha), 4)

    def test_no_worse_than_llc_on_l1_objective(self):
        D, w = _instance(8, 8, 20)
        sc = solve_sc(D, w, 5)
        llc = solve_llc(D, w, 0.01)
        self.assertLessEqual(
            _l1_objective(D, w, sc.lam, sc.alpha), _l1_objective(D, w, sc.lam, llc.alpha) + 1e-9
        )

    def test_target_out_of_range(self):
        D, w = _instance(3, 4, 6)
        with self.assertRaises(OutOfRangeInput):
            solve_sc(D, w, 7)


class OmpTests(SimpleTestCase):
    def test_exact_single_atom(self):
        D = np.array([[3.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        sol = solve_omp(D, 1)
        self.assertEqual(sol.support.tolist(), [0])
        self.assertAlmostEqual(sol.reconstruction_error, 0.0)

    def test_full_rank_full_budget(self):
        D, _ = _instance(6, 6, 6)
        sol = solve_omp(D, 6)
        self.assertLess(sol.reconstruction_error, 1e-8)

    def test_support_size(self):
        D, _ = _instance(7, 10, 15)
        self.assertEqual(solve_omp(D, 4).support.size, 4)

    def test_rank_limited_support(self):
        rng = np.random.default_rng(1)
        D = rng.normal(size=(2, 1)) @ rng.normal(size=(1, 6))  # rank 1
        self.assertEqual(solve_omp(D, 4).support.size, 1)

    def test_never_beats_best_subset(self):
        for seed in range(100, 110):
            D = omp_dictionary(seed)
            _, best = oracle_best_subset(D, OMP_SUITE_ATOMS)
            with self.subTest(seed=seed):
                self.assertGreaterEqual(solve_omp(D, OMP_SUITE_ATOMS).reconstruction_error, best - 1e-9)

    def test_within_twice_best_subset_on_seeded_suite(self):
        for seed in OMP_SUITE_SEEDS:
            D = omp_dictionary(seed)
            _, best = oracle_best_subset(D, OMP_SUITE_ATOMS)
            with self.subTest(seed=seed):
                self.assertLessEqual(solve_omp(D, OMP_SUITE_ATOMS).reconstruction_error, 2.0 * best + 1e-9)


class SelectFramesTests(SimpleTestCase):
    def test_top_magnitudes(self):
        self.assertEqual(select_frames(_solution([0.9, 0.1, 0.5]), 2).tolist(), [0, 2])

    def test_ties_go_to_lower_index(self):
        self.assertEqual(select_frames(_solution([0.3, 0.3, 0.3, 0.3]), 2).tolist(), [0, 1])

    def test_negative_activations_rank_by_magnitude(self):
        self.assertEqual(select_frames(_solution([0.1, -0.8, 0.5]), 1).tolist(), [1])

    @hsettings(max_examples=50, deadline=None)
    @given(
        alpha=st.lists(st.sampled_from([-1.0, -0.5, 0.0, 0.25, 0.5, 1.0]), min_size=1, max_size=20),
        data=st.data(),
    )
    def test_matches_sort_oracle(self, alpha, data):
        m = data.draw(st.integers(1, len(alpha)))
        ranked = sorted(range(len(alpha)), key=lambda i: (-abs(alpha[i]), i))
        self.assertEqual(select_frames(_solution(alpha), m).tolist(), sorted(ranked[:m]))


class SampleSegmentTests(SimpleTestCase):
    def setUp(self):
        self.video = make_video(200, 6, seed=7)

    def test_budget_rounding(self):
        self.assertEqual(frame_budget(100, 20), 5)
        self.assertEqual(frame_budget(40, 28), 1)
        self.assertEqual(frame_budget(28, 8), 4)
        self.assertEqual(frame_budget(5, 0.5), 5)

    def test_single_frame_segment(self):
        entries = sample_segment(self.video, Segment(17, 17, 0, 10.0), segment_id=3)
        self.assertEqual([(e.index, e.segment, e.provenance) for e in entries], [(17, 3, "sampled")])

    def test_frame_count_per_method(self):
        segment = Segment(50, 149, 0, 10.0)
        for method in SamplerMethod.values:
            with self.subTest(method=method):
                entries = sample_segment(self.video, segment, SamplerChoice(method=method), spf=2)
                indices = [e.index for e in entries]
                self.assertEqual(len(indices), 5)
                self.assertEqual(indices, sorted(set(indices)))
                self.assertTrue(all(50 <= i <= 149 for i in indices))

    def test_clamped_to_one(self):
        entries = sample_segment(self.video, Segment(0, 39, 0, 14.0), spf=2)
        self.assertEqual(len(entries), 1)

    def test_timings_are_collected(self):
        timings = []
        sample_segment(self.video, Segment(0, 99, 0, 10.0), timings=timings)
        self.assertEqual(len(timings), 1)
        self.assertGreaterEqual(timings[0], 0.0)

    def test_unknown_method(self):
        with self.assertRaises(OutOfRangeInput):
            SamplerChoice(method="lars")

    def test_objective_helper_agrees_with_solver(self):
        D, w = _instance(12, 5, 9)
        sol = solve_llc(D, w, 0.3)
        perturbed = sol.alpha + 1e-3
        self.assertLess(llc_objective(D, w, 0.3, sol.alpha), llc_objective(D, w, 0.3, perturbed))
