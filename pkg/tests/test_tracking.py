import itertools
import json
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from proviq.errors import InvalidArgument
from proviq.tracking import (
    Detection, MotionState, TrackerParams, assign, export_jsonl, group_by_frame,
    iou, track_objects,
)


def box_at(cx, cy, w=0.08, h=0.12):
    return (cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)


def brute_force_assignment(cost: np.ndarray) -> float:
    """Minimum total cost over all injections of the smaller axis."""
    rows, cols = cost.shape
    if rows <= cols:
        perms = itertools.permutations(range(cols), rows)
        return min(sum(cost[i, p[i]] for i in range(rows)) for p in perms)
    perms = itertools.permutations(range(rows), cols)
    return min(sum(cost[p[j], j] for j in range(cols)) for p in perms)


class TestIoU:
    def test_identical(self):
        b = (0.1, 0.1, 0.4, 0.5)
        assert iou(b, b) == 1.0

    def test_disjoint(self):
        assert iou((0, 0, 0.2, 0.2), (0.5, 0.5, 0.7, 0.7)) == 0.0

    def test_known_third(self):
        # boxes (0,0,2,2) and (1,0,3,2) scaled into the unit square
        a = (0.0, 0.0, 0.2, 0.2)
        b = (0.1, 0.0, 0.3, 0.2)
        assert iou(a, b) == pytest.approx(1 / 3)

    @given(st.data())
    def test_symmetry_and_range(self, data):
        def rand_box(d):
            x1 = d.draw(st.floats(0, 0.8))
            y1 = d.draw(st.floats(0, 0.8))
            x2 = d.draw(st.floats(x1 + 0.01, 1.0))
            y2 = d.draw(st.floats(y1 + 0.01, 1.0))
            return (x1, y1, x2, y2)

        a, b = rand_box(data), rand_box(data)
        assert iou(a, b) == iou(b, a)
        assert 0.0 <= iou(a, b) <= 1.0
        assert iou(a, a) == pytest.approx(1.0)


class TestAssign:
    def test_diagonal_dominance(self):
        matches, ur, uc = assign(np.array([[0.1, 0.9], [0.9, 0.1]]))
        assert set(matches) == {(0, 0), (1, 1)}
        assert ur == [] and uc == []

    def test_one_by_one(self):
        matches, _, _ = assign(np.array([[0.4]]))
        assert matches == [(0, 0)]

    def test_three_by_three_brute_force(self):
        rng = random.Random(5)
        for _ in range(50):
            cost = np.array([[rng.random() for _ in range(3)] for _ in range(3)])
            matches, _, _ = assign(cost)
            total = sum(cost[i, j] for i, j in matches)
            assert total == pytest.approx(brute_force_assignment(cost))

    def test_rectangular_brute_force(self):
        rng = random.Random(6)
        for rows, cols in [(2, 5), (5, 2), (4, 6), (6, 3)]:
            cost = np.array([[rng.random() for _ in range(cols)] for _ in range(rows)])
            matches, ur, uc = assign(cost)
            assert len(matches) == min(rows, cols)
            total = sum(cost[i, j] for i, j in matches)
            assert total == pytest.approx(brute_force_assignment(cost))

    def test_gated_pairs_stay_unmatched(self):
        gate = 1e6
        cost = np.array([[0.2, gate], [gate, gate]])
        matches, ur, uc = assign(cost)
        assert matches == [(0, 0)]
        assert ur == [1] and uc == [1]

    def test_empty(self):
        matches, ur, uc = assign(np.zeros((0, 0)))
        assert matches == [] and ur == [] and uc == []


class TestMotionState:
    def test_stationary_fixed_point(self):
        b = box_at(0.5, 0.5)
        state = MotionState(b)
        for _ in range(5):
            state.predict()
            assert state.box() == pytest.approx(b, abs=1e-9)
            state.update(b)

    def test_constant_velocity_prediction(self):
        state = MotionState(box_at(0.2, 0.5))
        for i in range(1, 8):
            state.predict()
            state.update(box_at(0.2 + 0.02 * i, 0.5))
        state.predict()
        cx = (state.box()[0] + state.box()[2]) / 2
        assert cx == pytest.approx(0.2 + 0.02 * 8, abs=0.01)


def linear_scene(n_objects, n_frames, rng, dropout_rate=0.0, noise=0.0):
    """Well-separated objects moving at constant velocity in lanes.

    Returns per-frame detection lists plus the ground-truth identity of every
    detection as a parallel structure.
    """
    lanes = np.linspace(0.15, 0.85, n_objects)
    vels = [(rng.uniform(-0.004, 0.004), rng.uniform(0.002, 0.006)) for _ in range(n_objects)]
    per_frame, identities = [], []
    for f in range(n_frames):
        dets, ids = [], []
        for k in range(n_objects):
            cy = lanes[k] + vels[k][0] * f
            cx = 0.1 + vels[k][1] * f
            score = 0.9 + noise * rng.uniform(-0.05, 0.05)
            if dropout_rate and f >= 3 and rng.random() < dropout_rate:
                score = rng.uniform(0.15, 0.45)  # dips to the low band
            dets.append(Detection(f, box_at(cx, cy), min(score, 0.99)))
            ids.append(k)
        per_frame.append(dets)
        identities.append(ids)
    return per_frame, identities


def oracle_identities(per_frame):
    """Brute-force nearest-box chaining: frame-to-frame highest-IoU matching
    for well-separated scenes."""
    assignments = []  # per frame, list of oracle ids aligned with detections
    prev_boxes: dict[int, tuple] = {}
    next_id = 0
    for dets in per_frame:
        frame_ids = []
        used = set()
        for d in dets:
            best_id, best = None, 0.0
            for oid, b in prev_boxes.items():
                if oid in used:
                    continue
                overlap = iou(b, d.box)
                if overlap > best:
                    best_id, best = oid, overlap
            if best_id is None:
                best_id = next_id
                next_id += 1
            used.add(best_id)
            frame_ids.append(best_id)
        prev_boxes = {oid: d.box for oid, d in zip(frame_ids, dets)}
        assignments.append(frame_ids)
    return assignments


def partition_of(tracks):
    """(frame, rounded box) -> track_id map for comparing identity groupings."""
    out = {}
    for t in tracks:
        for frame, box, _score in t.boxes:
            key = (frame, tuple(round(v, 9) for v in box))
            assert key not in out, "a detection landed in two tracks"
            out[key] = t.track_id
    return out


class TestTrackObjects:
    def test_two_objects_constant_velocity(self, rng):
        per_frame, _ = linear_scene(2, 10, rng)
        tracks = track_objects(per_frame)
        assert len(tracks) == 2
        assert [t.track_id for t in tracks] == [1, 2]
        assert all(len(t.boxes) == 10 for t in tracks)
        oracle = oracle_identities(per_frame)
        mapping = partition_of(tracks)
        # consistent identity: every oracle identity maps to exactly one track id
        pairs = set()
        for f, dets in enumerate(per_frame):
            for d, oid in zip(dets, oracle[f]):
                tid = mapping[(f, tuple(round(v, 9) for v in d.box))]
                pairs.add((oid, tid))
        assert len(pairs) == 2

    def test_single_static_box(self):
        b = box_at(0.5, 0.5)
        per_frame = [[Detection(f, b, 0.9)] for f in range(5)]
        tracks = track_objects(per_frame)
        assert len(tracks) == 1
        assert [frame for frame, _, _ in tracks[0].boxes] == [0, 1, 2, 3, 4]
        assert all(box == b for _, box, _ in tracks[0].boxes)

    def test_low_score_stage_bridges_dip(self):
        b = [box_at(0.3 + 0.01 * f, 0.5) for f in range(10)]
        scores = [0.9, 0.9, 0.9, 0.9, 0.3, 0.3, 0.9, 0.9, 0.9, 0.9]
        per_frame = [[Detection(f, b[f], scores[f])] for f in range(10)]
        with_low = track_objects(per_frame, TrackerParams(min_track_len=3))
        assert len(with_low) == 1
        assert len(with_low[0].boxes) == 10
        # disabling the second stage (tau_low = tau_high) fragments the track
        without_low = track_objects(
            per_frame, TrackerParams(tau_low=0.6, min_track_len=3, max_age=1))
        assert all(len(t.boxes) < 10 for t in without_low)

    def test_empty_input(self):
        assert track_objects([]) == []
        assert track_objects([[], [], []]) == []

    def test_partition_and_temporal_order(self, rng):
        per_frame, _ = linear_scene(4, 30, rng, dropout_rate=0.15)
        tracks = track_objects(per_frame)
        partition_of(tracks)  # asserts no detection is shared
        for t in tracks:
            frames = [frame for frame, _, _ in t.boxes]
            assert frames == sorted(frames)
            assert len(frames) == len(set(frames))

    def test_determinism(self, rng):
        per_frame, _ = linear_scene(3, 25, rng, dropout_rate=0.1)
        a = track_objects(per_frame)
        b = track_objects(per_frame)
        assert [(t.track_id, t.boxes) for t in a] == [(t.track_id, t.boxes) for t in b]

    def test_max_age_removes_stale_tracks(self):
        per_frame = [[Detection(f, box_at(0.5, 0.5), 0.9)] for f in range(6)]
        per_frame += [[] for _ in range(10)]
        per_frame += [[Detection(f, box_at(0.5, 0.5), 0.9)] for f in range(16, 22)]
        tracks = track_objects(per_frame, TrackerParams(max_age=3, min_track_len=3))
        assert len(tracks) == 2  # the revival is a fresh identity

    def test_frames_must_increase(self):
        d0 = Detection(5, box_at(0.5, 0.5), 0.9)
        d1 = Detection(4, box_at(0.5, 0.5), 0.9)
        with pytest.raises(InvalidArgument):
            track_objects([[d0], [d1]])

    def test_group_by_frame(self):
        dets = [Detection(2, box_at(0.5, 0.5), 0.9), Detection(0, box_at(0.3, 0.3), 0.8)]
        grouped = group_by_frame(dets, [0, 1, 2])
        assert [len(g) for g in grouped] == [1, 0, 1]

    def test_export_lines(self):
        per_frame = [[Detection(f, box_at(0.5, 0.5), 0.9)] for f in range(6)]
        tracks = track_objects(per_frame)
        lines = export_jsonl(tracks)
        assert len(lines) == 6
        first = json.loads(lines[0])
        assert first["track_id"] == 1 and first["frame"] == 0
        assert len(first["box"]) == 4


def test_detection_validates_box():
    with pytest.raises(InvalidArgument):
        Detection(0, (0.5, 0.1, 0.2, 0.9), 0.9)
