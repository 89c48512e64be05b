import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hsettings, strategies as st

from footage.exceptions import EmptyProfile, InfeasibleRates, OutOfRangeInput, TooFewSegments
from footage.models import Segment, check_tiling
from profiles.detections import detection_score, score_frames
from profiles.rates import RatePlan, assign_rates
from profiles.segmentation import SemanticProfile, build_profile, otsu_threshold, segment_profile
from tests.factories import make_video


class DetectionScoreTests(SimpleTestCase):
    def test_centred_full_frame(self):
        self.assertEqual(detection_score([(1.0, (0.5, 0.5), 1.0)]), 1.0)

    def test_empty(self):
        self.assertEqual(detection_score([]), 0.0)

    def test_hand_value(self):
        self.assertAlmostEqual(detection_score([(0.8, (0.5, 0.5), 0.5)]), 0.4)

    def test_off_centre_is_discounted(self):
        expected = 1.0 * math.exp(-0.5**2 / (2 * 0.35**2)) * 1.0
        self.assertAlmostEqual(detection_score([(1.0, (1.0, 0.5), 1.0)]), expected)

    def test_out_of_range(self):
        with self.assertRaises(OutOfRangeInput):
            detection_score([(1.2, (0.5, 0.5), 1.0)])
        with self.assertRaises(OutOfRangeInput):
            detection_score([(1.0, (0.5, -0.1), 1.0)])

    def test_score_frames_accepts_mappings(self):
        frames = [[{"confidence": 1.0, "center": [0.5, 0.5], "area": 0.5}], [], None]
        np.testing.assert_allclose(score_frames(frames, 4), [0.5, 0.0, 0.0, 0.0])


class ProfileTests(SimpleTestCase):
    def test_smoothed_stays_in_range(self):
        raw = np.random.default_rng(0).uniform(0, 3, 200)
        profile = build_profile(raw, radius=15)
        self.assertGreaterEqual(profile.smoothed.min(), raw.min())
        self.assertLessEqual(profile.smoothed.max(), raw.max())

    def test_radius_zero_is_identity(self):
        raw = np.array([0.0, 1.0, 0.5])
        np.testing.assert_array_equal(build_profile(raw, radius=0).smoothed, raw)

    def test_reads_video_scores(self):
        video = make_video(10, scores=np.arange(10.0))
        np.testing.assert_array_equal(build_profile(video, radius=0).raw, np.arange(10.0))

    def test_empty(self):
        with self.assertRaises(EmptyProfile):
            build_profile([])


class OtsuTests(SimpleTestCase):
    def test_two_clusters(self):
        tau, degenerate = otsu_threshold([0.0, 0.1, 0.0, 0.9, 1.0, 1.0])
        self.assertFalse(degenerate)
        self.assertEqual(tau, 0.1)

    def test_degenerate_falls_back_to_mean(self):
        self.assertEqual(otsu_threshold([2.0, 2.0, 2.0]), (2.0, True))

    def test_matches_brute_force(self):
        values = np.random.default_rng(5).uniform(0, 1, 40)
        tau, _ = otsu_threshold(values)
        best, best_tau = -1.0, None
        for cut in np.unique(values)[:-1]:
            low, high = values[values <= cut], values[values > cut]
            score = len(low) * len(high) * (low.mean() - high.mean()) ** 2
            if score > best:
                best, best_tau = score, cut
        self.assertEqual(tau, best_tau)


class SegmentProfileTests(SimpleTestCase):
    def test_all_zero_profile(self):
        segments = segment_profile(build_profile(np.zeros(50)), levels=2, min_len=5)
        self.assertEqual(segments, [Segment(0, 49, 0)])

    def test_step_function(self):
        raw = np.r_[np.zeros(50), np.ones(50)]
        segments = segment_profile(build_profile(raw, radius=0), levels=1, min_len=10)
        self.assertEqual(segments, [Segment(0, 49, 0), Segment(50, 99, 1)])

    def test_short_runs_are_absorbed(self):
        raw = np.r_[np.zeros(40), np.ones(3), np.zeros(40), np.ones(30)]
        segments = segment_profile(build_profile(raw, radius=0), levels=1, min_len=10)
        self.assertEqual(segments, [Segment(0, 82, 0), Segment(83, 112, 1)])

    def test_levels_follow_mean_score(self):
        raw = np.r_[np.zeros(30), np.full(30, 0.6), np.zeros(30), np.full(30, 1.0)]
        segments = segment_profile(build_profile(raw, radius=0), levels=2, min_len=10)
        self.assertEqual([s.importance_level for s in segments], [0, 1, 0, 2])

    def test_two_bump_profile_matches_threshold_oracle(self):
        rng = np.random.default_rng(11)
        raw = np.clip(rng.normal(0, 0.03, 300), 0, None)
        raw[60:120] += 0.8
        raw[200:260] += 0.7
        profile = build_profile(raw, radius=5)
        segments = segment_profile(profile, levels=1, min_len=1)
        tau, _ = otsu_threshold(profile.smoothed)
        for seg in segments:
            labels = profile.smoothed[seg.start : seg.end + 1] > tau
            self.assertTrue(np.all(labels == (seg.importance_level > 0)))

    def test_bad_arguments(self):
        profile = build_profile(np.zeros(5))
        with self.assertRaises(OutOfRangeInput):
            segment_profile(profile, min_len=0)
        with self.assertRaises(EmptyProfile):
            segment_profile(SemanticProfile(np.zeros(0), np.zeros(0)))

    @hsettings(max_examples=60, deadline=None)
    @given(
        raw=st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=120),
        min_len=st.integers(1, 30),
        levels=st.integers(1, 4),
        radius=st.integers(0, 6),
    )
    def test_segments_always_tile(self, raw, min_len, levels, radius):
        segments = segment_profile(build_profile(raw, radius=radius), levels=levels, min_len=min_len)
        check_tiling(segments, len(raw))
        self.assertTrue(all(0 <= s.importance_level <= levels for s in segments))


class AssignRatesTests(SimpleTestCase):
    def test_single_segment_gets_target(self):
        plan = assign_rates([Segment(0, 99, 1)], 10.0)
        self.assertAlmostEqual(plan.segments[0].speedup, 10.0, places=9)

    def test_two_equal_segments(self):
        plan = assign_rates([Segment(0, 49, 0), Segment(50, 99, 1)], 10.0)
        s1, s2 = plan.rates
        self.assertAlmostEqual(s1, 15.0, places=9)
        self.assertAlmostEqual(s2, 7.5, places=9)
        self.assertAlmostEqual(0.5 / s1 + 0.5 / s2, 0.1, places=12)

    def test_seeded_plan_meets_length_constraint(self):
        rng = np.random.default_rng(2)
        bounds = np.cumsum(rng.integers(20, 200, 5))
        starts = np.r_[0, bounds[:-1]]
        segments = [Segment(int(s), int(e) - 1, int(rng.integers(0, 3))) for s, e in zip(starts, bounds)]
        plan = assign_rates(segments, 10.0)
        self.assertLessEqual(abs(plan.output_frames - plan.target_frames), 1.0)
        self.assertTrue(np.all((plan.rates >= plan.s_min) & (plan.rates <= plan.s_max)))

    def test_higher_level_is_never_faster(self):
        segments = [Segment(k * 50, k * 50 + 49, level) for k, level in enumerate([2, 0, 1, 3, 0])]
        plan = assign_rates(segments, 8.0)
        levels = [s.importance_level for s in plan.segments]
        for a in range(5):
            for b in range(5):
                if levels[a] > levels[b]:
                    self.assertLessEqual(plan.rates[a], plan.rates[b])

    def test_clamping_redistributes(self):
        # the level-3 segment would want a rate below 1
        plan = assign_rates([Segment(0, 9, 3), Segment(10, 109, 0)], 3.0, s_max=12.0)
        self.assertEqual(plan.rates[0], 1.0)
        self.assertLessEqual(abs(plan.output_frames - plan.target_frames), 1.0)

    def test_infeasible_carries_plan(self):
        with self.assertRaises(InfeasibleRates) as ctx:
            assign_rates([Segment(0, 999, 0)], 10.0, s_max=5.0)
        self.assertFalse(ctx.exception.plan.feasible)
        self.assertEqual(ctx.exception.plan.rates.tolist(), [5.0])

    def test_preconditions(self):
        with self.assertRaises(TooFewSegments):
            assign_rates([], 10.0)
        with self.assertRaises(OutOfRangeInput):
            assign_rates([Segment(0, 9)], 1.0)

    def test_plan_report_round_trip(self):
        plan = assign_rates([Segment(0, 49, 0), Segment(50, 99, 1)], 10.0)
        self.assertEqual(RatePlan.from_dict(plan.to_dict()), plan)
