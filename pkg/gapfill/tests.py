import numpy as np
from django.test import SimpleTestCase

from footage.models import BridgeSegment, Segment, SelectionEntry
from gapfill.bridges import fill_all, fill_gap, needs_bridge, rates_with_bridges
from metrics.evaluation import discontinuity, transition_smoothness
from profiles.rates import RatePlan
from smoothing.transitions import instability
from tests.factories import make_video, one_hot_histograms


def _entries(indices, segment=0):
    return [SelectionEntry(i, segment, "smoothed") for i in indices]


def _random_video(n=200, seed=0):
    rng = np.random.default_rng(seed)
    hist = rng.uniform(0.0, 1.0, (n, 3, 8))
    return make_video(n, 4, seed=seed, histograms=hist / hist.sum(axis=2, keepdims=True))


def _contrast_plan():
    return RatePlan(
        segments=(Segment(0, 99, 0, 14.0), Segment(100, 199, 1, 2.0)),
        target_speedup=5.0,
        s_min=1.0,
        s_max=40.0,
    )


def _contrast_entries():
    return [_entries([0, 14, 28, 42, 56], 0), _entries(list(range(140, 200, 2)), 1)]


class BridgeSegmentTests(SimpleTestCase):
    def test_interior(self):
        bridge = BridgeSegment(10, 39, 8.0)
        self.assertEqual((bridge.interior.start, bridge.interior.end, bridge.interior.length), (11, 38, 28))


class NeedsBridgeTests(SimpleTestCase):
    def test_zero_boundary_against_zero_mean(self):
        video = make_video(60)
        self.assertFalse(needs_bridge(video, _entries([0, 10, 20]), _entries([45, 50]), 10.0))

    def test_visual_jump_after_uniform_segment(self):
        video = make_video(60, histograms=one_hot_histograms([0] * 30 + [1] * 30))
        self.assertTrue(needs_bridge(video, _entries([0, 5, 10]), _entries([30, 35]), 10.0))

    def test_negative_mean_is_taken_literally(self):
        hot = [0, 0, 1, 1, 0] + [0] * 25
        video = make_video(30, histograms=one_hot_histograms(hot))
        # A's transitions are short and change appearance: mean instability is -8
        self.assertTrue(needs_bridge(video, _entries([0, 2, 4]), _entries([20]), 10.0))

    def test_single_pick_averages_to_zero(self):
        video = make_video(60, histograms=one_hot_histograms([0] * 30 + [1] * 30))
        self.assertTrue(needs_bridge(video, _entries([10]), _entries([40]), 10.0))
        self.assertFalse(needs_bridge(video, _entries([10]), _entries([15]), 10.0))

    def test_matches_recomputation(self):
        video = _random_video(seed=3)
        a, b = [3, 17, 30, 44, 61], [90, 95]
        boundary = instability(video, 61, 90, 12.0)
        mean = np.mean([instability(video, x, y, 12.0) for x, y in zip(a, a[1:])])
        self.assertEqual(needs_bridge(video, _entries(a), _entries(b), 12.0), boundary > mean)


class FillGapTests(SimpleTestCase):
    def setUp(self):
        self.video = _random_video()

    def test_adjacent_anchors(self):
        self.assertEqual(fill_gap(self.video, BridgeSegment(10, 11, 8.0)), [])

    def test_gap_budget(self):
        out = fill_gap(self.video, BridgeSegment(10, 39, 8.0, after_segment=0))
        self.assertEqual(len(out), 4)
        self.assertTrue(all(10 < e.index < 39 for e in out))
        self.assertTrue(all(e.provenance == "gapfill" and e.segment == 0 for e in out))


class FillAllTests(SimpleTestCase):
    def setUp(self):
        self.video = _random_video()

    def test_single_segment_is_identity(self):
        plan = RatePlan((Segment(0, 199, 0, 10.0),), 10.0, 1.0, 40.0)
        entries = _entries(list(range(0, 200, 10)))
        selection = fill_all(self.video, plan, [entries])
        self.assertEqual(list(selection.entries), entries)
        self.assertEqual(selection.bridges, ())

    def test_no_trigger_is_concatenation(self):
        video = make_video(200)
        per_segment = _contrast_entries()
        selection = fill_all(video, _contrast_plan(), per_segment)
        self.assertEqual(list(selection.entries), per_segment[0] + per_segment[1])

    def test_contrast_boundary_is_bridged(self):
        plan = _contrast_plan()
        per_segment = _contrast_entries()
        filled = fill_all(self.video, plan, per_segment)
        plain = fill_all(self.video, plan, per_segment, enabled=False)

        self.assertEqual(len(filled.bridges), 1)
        bridge = filled.bridges[0]
        self.assertEqual((bridge.left_anchor, bridge.right_anchor, bridge.speedup), (56, 140, 8.0))
        self.assertTrue(set(plain.indices.tolist()) <= set(filled.indices.tolist()))
        extra = [e for e in filled.entries if e.provenance == "gapfill"]
        self.assertEqual(len(extra), 10)
        self.assertTrue(all(56 < e.index < 140 for e in extra))
        self.assertLessEqual(discontinuity(filled, 5.0), discontinuity(plain, 5.0))

        with_bridges = rates_with_bridges(plan, filled.bridges)
        self.assertEqual(with_bridges, [14.0, 8.0, 2.0])
        self.assertLess(transition_smoothness(with_bridges), transition_smoothness(plan.rates))

    def test_threads_do_not_change_the_result(self):
        plan = RatePlan(
            segments=(Segment(0, 59, 0, 14.0), Segment(60, 119, 1, 2.0), Segment(120, 199, 0, 14.0)),
            target_speedup=5.0,
            s_min=1.0,
            s_max=40.0,
        )
        per_segment = [_entries([0, 14], 0), _entries(list(range(90, 120, 2)), 1), _entries([150, 164, 178], 2)]
        self.assertEqual(
            fill_all(self.video, plan, per_segment, threads=1),
            fill_all(self.video, plan, per_segment, threads=4),
        )
