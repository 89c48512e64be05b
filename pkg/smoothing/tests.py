import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hsettings, strategies as st
from scipy.stats import wasserstein_distance

from footage.exceptions import BinCountMismatch, IndexOutOfRange, NoInteriorFrame, TooFewFrames
from footage.models import Segment, SelectionEntry
from smoothing.smoother import best_insertion, shakiest_transition, smooth_segment
from smoothing.transitions import emd_histograms, instability, transition_cost
from tests.factories import flat_histograms, make_video, one_hot_histograms


def _random_histograms(rng, n, bins=8):
    hist = rng.uniform(0.0, 1.0, (n, 3, bins))
    return hist / hist.sum(axis=2, keepdims=True)


def _entries(indices, segment=0):
    return [SelectionEntry(i, segment, "sampled") for i in indices]


class EmdTests(SimpleTestCase):
    def test_identical(self):
        h = flat_histograms(1)[0]
        self.assertEqual(emd_histograms(h, h), 0.0)

    def test_unit_mass_one_bin(self):
        self.assertEqual(emd_histograms([[1.0, 0.0]] * 3, [[0.0, 1.0]] * 3), 1.0)

    def test_half_mass_one_bin(self):
        self.assertEqual(emd_histograms([[0.5, 0.5]], [[0.0, 1.0]]), 0.5)

    def test_bin_mismatch(self):
        with self.assertRaises(BinCountMismatch):
            emd_histograms(np.ones((3, 4)) / 4, np.ones((3, 5)) / 5)

    def test_matches_scipy_wasserstein(self):
        rng = np.random.default_rng(0)
        hx, hy = _random_histograms(rng, 2)
        bins = np.arange(hx.shape[1])
        expected = np.mean([wasserstein_distance(bins, bins, hx[c], hy[c]) for c in range(3)])
        self.assertAlmostEqual(emd_histograms(hx, hy), expected, places=12)

    @hsettings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_metric_axioms(self, seed):
        a, b, c = _random_histograms(np.random.default_rng(seed), 3)
        self.assertAlmostEqual(emd_histograms(a, b), emd_histograms(b, a), delta=1e-12)
        self.assertLessEqual(emd_histograms(a, c), emd_histograms(a, b) + emd_histograms(b, c) + 1e-12)


class InstabilityTests(SimpleTestCase):
    def test_identical_histograms(self):
        video = make_video(30)
        self.assertEqual(instability(video, 0, 25, 10.0), 0.0)

    def test_gap_equal_to_speedup(self):
        video = make_video(20, histograms=_random_histograms(np.random.default_rng(1), 20))
        self.assertEqual(instability(video, 3, 13, 10.0), 0.0)
        self.assertEqual(instability(video, 2, 9, 7), 0.0)

    def test_product(self):
        video = make_video(20, histograms=one_hot_histograms([0] * 14 + [1] * 6))
        self.assertEqual(instability(video, 0, 13, 10.0), 0.0)
        self.assertEqual(instability(video, 1, 14, 10.0), 3.0)
        cost = transition_cost(video, 1, 14, 10.0)
        self.assertEqual((cost.ac, cost.gap_penalty), (1.0, 3.0))

    def test_out_of_range(self):
        video = make_video(5)
        with self.assertRaises(IndexOutOfRange):
            instability(video, 0, 5, 1.0)
        with self.assertRaises(IndexOutOfRange):
            instability(video, 3, 2, 1.0)


class ShakiestTransitionTests(SimpleTestCase):
    def test_all_zero_tie(self):
        video = make_video(50)
        self.assertEqual(shakiest_transition(video, [0, 10, 20, 30], 10.0), 0)

    def test_unique_positive(self):
        hot = [0] * 30 + [1] * 20
        video = make_video(50, histograms=one_hot_histograms(hot))
        self.assertEqual(shakiest_transition(video, _entries([0, 10, 20, 40, 45]), 10.0), 2)

    def test_too_few(self):
        with self.assertRaises(TooFewFrames):
            shakiest_transition(make_video(5), [2], 1.0)

    def test_matches_max_scan(self):
        rng = np.random.default_rng(3)
        video = make_video(200, histograms=_random_histograms(rng, 200))
        picks = sorted(rng.choice(200, 15, replace=False).tolist())
        best, best_i = -np.inf, None
        for i in range(len(picks) - 1):
            value = instability(video, picks[i], picks[i + 1], 8.0)
            if value > best:
                best, best_i = value, i
        self.assertEqual(shakiest_transition(video, picks, 8.0), best_i)


class BestInsertionTests(SimpleTestCase):
    def test_single_candidate(self):
        video = make_video(5, histograms=_random_histograms(np.random.default_rng(2), 5))
        self.assertEqual(best_insertion(video, 0, 2, 10.0), 1)

    def test_uniform_histograms_tie(self):
        self.assertEqual(best_insertion(make_video(40), 5, 30, 10.0), 6)

    def test_no_interior(self):
        with self.assertRaises(NoInteriorFrame):
            best_insertion(make_video(5), 1, 2, 1.0)

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(4)
        video = make_video(40, histograms=_random_histograms(rng, 40))
        left, right, speedup = 4, 35, 6.0
        costs = [
            instability(video, left, j, speedup) ** 2 + instability(video, j, right, speedup) ** 2
            for j in range(left + 1, right)
        ]
        self.assertEqual(best_insertion(video, left, right, speedup), left + 1 + int(np.argmin(costs)))


class SmoothSegmentTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(5)
        self.video = make_video(300, histograms=_random_histograms(rng, 300))

    def test_target_reached_is_noop(self):
        entries = _entries([0, 50, 99])
        self.assertEqual(smooth_segment(self.video, Segment(0, 99, 0, 33.0), entries, target_count=3), entries)

    def test_doubles_first_pass(self):
        segment = Segment(100, 199, 0, 10.0)
        entries = _entries([110, 130, 150, 170, 190], segment=2)
        out = smooth_segment(self.video, segment, entries)
        indices = [e.index for e in out]
        self.assertEqual(len(out), 10)
        self.assertEqual(indices, sorted(set(indices)))
        self.assertTrue(set([110, 130, 150, 170, 190]) <= set(indices))
        self.assertTrue(all(e.segment == 2 for e in out))
        self.assertEqual(sum(e.provenance == "smoothed" for e in out), 5)

    def test_budget_is_exact_on_seeded_segments(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            start = int(rng.integers(0, 100))
            length = int(rng.integers(20, 200))
            speedup = float(rng.uniform(1.5, 12.0))
            segment = Segment(start, start + length - 1, 0, speedup)
            picks = sorted(rng.choice(np.arange(segment.start, segment.end + 1), 1, replace=False).tolist())
            out = smooth_segment(self.video, segment, _entries(picks))
            self.assertEqual(len(out), max(1, int(np.floor(length / speedup + 0.5))))

    def test_edge_anchoring_fills_adjacent_picks(self):
        segment = Segment(10, 19, 0, 2.0)
        out = smooth_segment(self.video, segment, _entries([14, 15]))
        indices = [e.index for e in out]
        self.assertEqual(len(indices), 5)
        self.assertEqual(indices[0], 10)
        self.assertTrue({14, 15} <= set(indices))
        self.assertNotIn(19, indices)

    def test_saturation_selects_everything(self):
        segment = Segment(0, 4, 0, 1.0)
        out = smooth_segment(self.video, segment, _entries([2]))
        self.assertEqual([e.index for e in out], [0, 1, 2, 3, 4])

    def test_anchors_are_not_returned(self):
        segment = Segment(21, 48, 0, 8.0)
        out = smooth_segment(self.video, segment, [], target_count=4, anchors=(20, 49), provenance="gapfill")
        self.assertEqual(len(out), 4)
        self.assertTrue(all(21 <= e.index <= 48 and e.provenance == "gapfill" for e in out))
