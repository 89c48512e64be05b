import os
import tempfile

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hsettings, strategies as st

from footage.container import HEADER, decode_container, encode_container, header_for, read_container, write_container
from footage.exceptions import BadMagic, InvariantViolation, IoFailure, TruncatedSection, VersionUnsupported
from footage.models import BridgeSegment, Segment, Selection, SelectionEntry, VideoRecord, check_tiling
from footage.reports import dump_report, read_report, selection_from_dict, selection_to_dict, write_report
from tests.factories import flat_histograms, make_video


class ContainerTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name="video.ffwd"):
        return os.path.join(self.tmp.name, name)

    def test_minimal_container(self):
        video = VideoRecord(features=[[0.0, 0.0]], semantic_scores=[0.0], motion=[0.0], histograms=flat_histograms(1))
        write_container(video, self.path())
        loaded = read_container(self.path())
        self.assertEqual(loaded.n, 1)
        self.assertEqual(loaded.f, 2)
        self.assertFalse(loaded.has_thumbnails)

    def test_round_trip_is_equal_and_byte_identical(self):
        thumbs = np.random.default_rng(3).integers(0, 256, size=(12, 6, 8), dtype=np.uint8)
        video = make_video(12, 5, seed=3, scores=np.linspace(0, 1, 12), thumbnails=thumbs)
        write_container(video, self.path("a.ffwd"))
        loaded = read_container(self.path("a.ffwd"))
        self.assertEqual(loaded, video)
        write_container(loaded, self.path("b.ffwd"))
        with open(self.path("a.ffwd"), "rb") as a, open(self.path("b.ffwd"), "rb") as b:
            self.assertEqual(a.read(), b.read())

    def test_file_size_matches_header(self):
        thumbs = np.zeros((1000, 4, 5), dtype=np.uint8)
        video = make_video(1000, 8, seed=1, thumbnails=thumbs)
        payload = encode_container(video)
        self.assertEqual(len(payload), header_for(video).file_size)
        self.assertEqual(len(payload), HEADER.size + 1000 * (8 * 4 + 4 + 4 + 3 * 4 * 4 + 20))

    def test_bad_magic(self):
        payload = bytearray(encode_container(make_video(3)))
        payload[:4] = b"NOPE"
        with self.assertRaises(BadMagic):
            decode_container(bytes(payload))

    def test_unsupported_version(self):
        payload = bytearray(encode_container(make_video(3)))
        payload[4:6] = (2).to_bytes(2, "little")
        with self.assertRaises(VersionUnsupported):
            decode_container(bytes(payload))

    def test_truncated_and_trailing_sections(self):
        payload = encode_container(make_video(3))
        with self.assertRaisesRegex(TruncatedSection, "histograms"):
            decode_container(payload[:-4])
        with self.assertRaisesRegex(TruncatedSection, "trailing"):
            decode_container(payload + b"\x00")

    def test_histogram_channel_sum_is_an_invariant(self):
        hist = flat_histograms(2)
        hist[1, 2] *= 0.5
        video = VideoRecord(features=np.zeros((2, 2)), semantic_scores=[0, 0], motion=[0, 0], histograms=hist)
        with self.assertRaises(InvariantViolation) as ctx:
            encode_container(video)
        self.assertEqual(ctx.exception.frame, 1)
        self.assertEqual(ctx.exception.field, "histograms")

    def test_negative_motion_names_frame(self):
        with self.assertRaisesRegex(InvariantViolation, "frame 2, field 'motion'"):
            make_video(4, motion=[0.0, 0.1, -0.5, 0.0])

    def test_missing_file_is_io_failure(self):
        with self.assertRaises(IoFailure):
            read_container(self.path("absent.ffwd"))

    @hsettings(max_examples=30, deadline=None)
    @given(
        n=st.integers(1, 12),
        f=st.integers(1, 6),
        seed=st.integers(0, 2**32 - 1),
        thumbs=st.booleans(),
    )
    def test_round_trip_property(self, n, f, seed, thumbs):
        rng = np.random.default_rng(seed)
        video = make_video(
            n,
            f,
            seed=seed,
            scores=rng.uniform(0, 2, n),
            thumbnails=rng.integers(0, 256, size=(n, 3, 4), dtype=np.uint8) if thumbs else None,
        )
        self.assertEqual(decode_container(encode_container(video)), video)


class SegmentTests(SimpleTestCase):
    def test_tiling(self):
        check_tiling([Segment(0, 4), Segment(5, 9)], 10)
        with self.assertRaises(InvariantViolation):
            check_tiling([Segment(0, 4), Segment(6, 9)], 10)
        with self.assertRaises(InvariantViolation):
            check_tiling([Segment(0, 4)], 10)

    def test_start_after_end(self):
        with self.assertRaises(InvariantViolation):
            Segment(5, 4)


class SelectionTests(SimpleTestCase):
    def test_entries_are_sorted_and_strict(self):
        sel = Selection.from_entries([(7, 1, "sampled"), (2, 0, "sampled")], 10.0, 20)
        self.assertEqual(sel.indices.tolist(), [2, 7])
        with self.assertRaises(InvariantViolation):
            Selection.from_entries([(2, 0, "sampled"), (2, 0, "smoothed")], 10.0, 20)
        with self.assertRaises(InvariantViolation):
            Selection.from_entries([(25, 0, "sampled")], 10.0, 20)

    def test_report_round_trip(self):
        sel = Selection.from_entries(
            [SelectionEntry(0, 0, "sampled"), SelectionEntry(5, 0, "gapfill"), SelectionEntry(9, 1, "smoothed")],
            10.0,
            12,
            [BridgeSegment(0, 9, 6.5, after_segment=0)],
        )
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        path = os.path.join(tmp.name, "selection.yaml")
        write_report(path, selection_to_dict(sel))
        self.assertEqual(selection_from_dict(read_report(path)), sel)

    def test_unknown_provenance_is_rejected(self):
        data = {"required_speedup": 10.0, "frames": 12, "indices": [0, 5], "segments": [0, 0], "provenance": ["sampled", "guessed"]}
        with self.assertRaises(IoFailure):
            selection_from_dict(data)

    def test_dump_is_deterministic(self):
        payload = {"a": np.float64(0.1), "b": np.arange(3), "c": "x"}
        self.assertEqual(dump_report(payload), dump_report(dict(payload)))
        self.assertIn("a: 0.1", dump_report(payload))


class FrameRecordTests(SimpleTestCase):
    def test_from_frames_round_trip(self):
        thumbs = np.arange(5 * 2 * 3, dtype=np.uint8).reshape(5, 2, 3)
        video = make_video(5, 4, seed=2, thumbnails=thumbs, fps=24.0)
        rebuilt = VideoRecord.from_frames(video.frames, fps=24.0)
        self.assertEqual(rebuilt, video)
        frame = video.frame(3)
        self.assertEqual(frame.index, 3)
        np.testing.assert_array_equal(frame.features, video.features[3])
        np.testing.assert_array_equal(frame.thumbnail, thumbs[3])

    def test_from_frames_checks_order_and_thumbnails(self):
        frames = make_video(3).frames
        with self.assertRaises(InvariantViolation):
            VideoRecord.from_frames([frames[1], frames[0], frames[2]])
        with self.assertRaises(InvariantViolation):
            VideoRecord.from_frames([])
        with_thumbs = make_video(2, thumbnails=np.zeros((2, 1, 1), dtype=np.uint8)).frames
        with self.assertRaises(InvariantViolation):
            VideoRecord.from_frames([with_thumbs[0], make_video(2).frame(1)])
