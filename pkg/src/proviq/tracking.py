"""Two-stage tracking by association over per-frame detections.

Per frame: predict every live track forward with a constant-velocity motion
model, associate high-score detections by IoU cost with optimal assignment,
then try to recover the still-unmatched tracks from the low-score leftovers.
Unmatched high-score detections seed tentative tracks; tracks unseen for too
long are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidArgument
from .gateway import Box

GATE_COST = 1e6  # sentinel for forbidden pairs in the cost matrix


@dataclass(frozen=True)
class Detection:
    frame: int
    box: Box            # x1, y1, x2, y2 normalized
    score: float

    def __post_init__(self):
        x1, y1, x2, y2 = self.box
        if not (x1 < x2 and y1 < y2):
            raise InvalidArgument(f"invalid detection box {self.box}")


@dataclass(frozen=True)
class TrackerParams:
    tau_high: float = 0.6
    tau_low: float = 0.1
    match_gate: float = 0.2      # minimum IoU for a permitted pair
    max_age: int = 30            # frames a track may go unmatched
    min_hits: int = 3            # consecutive matches before activation
    min_track_len: int = 5       # boxes required to appear in the output


class TrackStatus(Enum):
    TENTATIVE = "tentative"
    ACTIVE = "active"
    LOST = "lost"
    REMOVED = "removed"


def iou(a: Box, b: Box) -> float:
    ix1, iy1 = max(a[0], b[0]), max(a[1], b[1])
    ix2, iy2 = min(a[2], b[2]), min(a[3], b[3])
    iw, ih = max(0.0, ix2 - ix1), max(0.0, iy2 - iy1)
    inter = iw * ih
    if inter <= 0.0:
        return 0.0
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def assign(cost: np.ndarray, gate_cost: float = GATE_COST) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """Minimum-total-cost one-to-one assignment over permitted pairs.

    Entries >= gate_cost are forbidden; pairs the solver places on forbidden
    entries are discarded. Returns (matches, unmatched_rows, unmatched_cols).
    """
    cost = np.asarray(cost, dtype=float)
    if cost.size == 0:
        return [], list(range(cost.shape[0])), list(range(cost.shape[1]))
    rows, cols = linear_sum_assignment(cost)
    matches = [(int(r), int(c)) for r, c in zip(rows, cols) if cost[r, c] < gate_cost]
    matched_rows = {r for r, _ in matches}
    matched_cols = {c for _, c in matches}
    unmatched_rows = [r for r in range(cost.shape[0]) if r not in matched_rows]
    unmatched_cols = [c for c in range(cost.shape[1]) if c not in matched_cols]
    return matches, unmatched_rows, unmatched_cols


# --- constant-velocity motion model on (cx, cy, aspect, height) ---

_STD_POS = 1.0 / 20
_STD_VEL = 1.0 / 160


class MotionState:
    """Kalman state over box center, aspect ratio and height plus their
    velocities. Noise scales follow the standard published configuration,
    proportional to box height."""

    def __init__(self, box: Box):
        self.mean = np.zeros(8)
        self.mean[:4] = _box_to_z(box)
        h = self.mean[3]
        std = [2 * _STD_POS * h, 2 * _STD_POS * h, 1e-2, 2 * _STD_POS * h,
               10 * _STD_VEL * h, 10 * _STD_VEL * h, 1e-5, 10 * _STD_VEL * h]
        self.cov = np.diag(np.square(std))
        self._motion = np.eye(8)
        for i in range(4):
            self._motion[i, i + 4] = 1.0

    def predict(self) -> None:
        h = self.mean[3]
        std = [_STD_POS * h, _STD_POS * h, 1e-2, _STD_POS * h,
               _STD_VEL * h, _STD_VEL * h, 1e-5, _STD_VEL * h]
        q = np.diag(np.square(std))
        self.mean = self._motion @ self.mean
        self.cov = self._motion @ self.cov @ self._motion.T + q

    def update(self, box: Box) -> None:
        z = _box_to_z(box)
        h = self.mean[3]
        r = np.diag(np.square([_STD_POS * h, _STD_POS * h, 1e-1, _STD_POS * h]))
        hm = np.zeros((4, 8))
        hm[:, :4] = np.eye(4)
        s = hm @ self.cov @ hm.T + r
        k = self.cov @ hm.T @ np.linalg.inv(s)
        self.mean = self.mean + k @ (z - hm @ self.mean)
        self.cov = (np.eye(8) - k @ hm) @ self.cov

    def box(self) -> Box:
        return _z_to_box(self.mean[:4])


def _box_to_z(box: Box) -> np.ndarray:
    x1, y1, x2, y2 = box
    w, h = x2 - x1, y2 - y1
    return np.array([x1 + w / 2, y1 + h / 2, w / h, h])


def _z_to_box(z: np.ndarray) -> Box:
    cx, cy, a, h = z
    w = a * h
    return (float(cx - w / 2), float(cy - h / 2), float(cx + w / 2), float(cy + h / 2))


@dataclass
class Track:
    track_id: int | None
    boxes: list[tuple[int, Box, float]] = field(default_factory=list)  # (frame, box, score)
    status: TrackStatus = TrackStatus.TENTATIVE
    frames_since_update: int = 0
    hits: int = 0
    state: MotionState | None = None

    @property
    def first_frame(self) -> int:
        return self.boxes[0][0]

    @property
    def last_frame(self) -> int:
        return self.boxes[-1][0]

    def predicted_box(self) -> Box:
        assert self.state is not None
        return self.state.box()


class _TrackerState:
    def __init__(self, params: TrackerParams):
        self.params = params
        self.live: list[Track] = []
        self.finished: list[Track] = []
        self.next_id = 1
        self.created = 0

    def step(self, detections: list[Detection]) -> None:
        p = self.params
        for t in self.live:
            t.state.predict()  # type: ignore[union-attr]

        high = [d for d in detections if d.score >= p.tau_high]
        low = [d for d in detections if p.tau_low <= d.score < p.tau_high]

        matched, leftover_tracks = self._associate(self.live, high)
        recovered, still_unmatched = self._associate(leftover_tracks, low)
        matched_dets = {id(d) for _, d in matched} | {id(d) for _, d in recovered}

        for t in still_unmatched:
            self._miss(t)

        # unmatched high-score detections seed tentative tracks
        for d in high:
            if id(d) not in matched_dets:
                t = Track(track_id=None, state=MotionState(d.box), hits=1)
                t.boxes.append((d.frame, d.box, d.score))
                self.created += 1
                if p.min_hits <= 1:
                    self._activate(t)
                self.live.append(t)

    def _associate(self, tracks: list[Track],
                   dets: list[Detection]) -> tuple[list[tuple[Track, Detection]], list[Track]]:
        if not tracks or not dets:
            return [], list(tracks)
        cost = np.full((len(tracks), len(dets)), GATE_COST)
        for i, t in enumerate(tracks):
            pb = t.predicted_box()
            for j, d in enumerate(dets):
                overlap = iou(pb, d.box)
                if overlap >= self.params.match_gate:
                    cost[i, j] = 1.0 - overlap
        matches, unmatched_rows, _ = assign(cost)
        out = []
        for i, j in matches:
            t, d = tracks[i], dets[j]
            t.state.update(d.box)  # type: ignore[union-attr]
            t.boxes.append((d.frame, d.box, d.score))
            t.frames_since_update = 0
            t.hits += 1
            if t.status is TrackStatus.TENTATIVE and t.hits >= self.params.min_hits:
                self._activate(t)
            elif t.status is TrackStatus.LOST:
                t.status = TrackStatus.ACTIVE
            out.append((t, d))
        return out, [tracks[i] for i in unmatched_rows]

    def _activate(self, t: Track) -> None:
        t.status = TrackStatus.ACTIVE
        if t.track_id is None:
            t.track_id = self.next_id
            self.next_id += 1

    def _miss(self, t: Track) -> None:
        if t.status is TrackStatus.TENTATIVE:
            # activation requires consecutive matches; a miss ends the attempt
            t.status = TrackStatus.REMOVED
            self._finish(t)
            return
        t.status = TrackStatus.LOST
        t.frames_since_update += 1
        if t.frames_since_update >= self.params.max_age:
            t.status = TrackStatus.REMOVED
            self._finish(t)

    def _finish(self, t: Track) -> None:
        self.live.remove(t)
        self.finished.append(t)

    def results(self) -> list[Track]:
        all_tracks = self.finished + self.live
        keep = [t for t in all_tracks if len(t.boxes) >= self.params.min_track_len]
        # tracks that never activated but pass the length filter still get ids,
        # in creation order, after all activated ones
        for t in sorted(keep, key=lambda t: t.first_frame):
            if t.track_id is None:
                t.track_id = self.next_id
                self.next_id += 1
        keep.sort(key=lambda t: t.track_id)  # type: ignore[arg-type]
        return keep


def track_objects(per_frame: list[list[Detection]], params: TrackerParams | None = None) -> list[Track]:
    """Associate per-frame detection lists into identity tracks.

    Each inner list holds one frame's detections (possibly empty; empty
    frames still age unmatched tracks). Frames must arrive in increasing
    order. Track ids are assigned in activation order starting at 1, so the
    output is deterministic for a given input. Empty input yields [].
    """
    params = params or TrackerParams()
    state = _TrackerState(params)
    last: int | None = None
    for group in per_frame:
        frames = {d.frame for d in group}
        if len(frames) > 1:
            raise InvalidArgument(f"one detection frame per step, got {sorted(frames)}")
        if group:
            f = group[0].frame
            if last is not None and f <= last:
                raise InvalidArgument("frames must be presented in increasing order")
            last = f
        state.step(list(group))
    return state.results()


def group_by_frame(detections: list[Detection], frame_indices: list[int]) -> list[list[Detection]]:
    """Arrange a flat detection list into per-frame lists over the given
    (increasing) frame timeline; frames without detections get empty lists."""
    by_frame: dict[int, list[Detection]] = {f: [] for f in frame_indices}
    for d in detections:
        if d.frame not in by_frame:
            raise InvalidArgument(f"detection frame {d.frame} outside the timeline")
        by_frame[d.frame].append(d)
    return [by_frame[f] for f in frame_indices]


def export_jsonl(tracks: list[Track]) -> list[str]:
    """One line per (track_id, frame, box, score), ordered by track then frame."""
    import json

    lines = []
    for t in tracks:
        for frame, box, score in t.boxes:
            lines.append(json.dumps({
                "track_id": t.track_id, "frame": frame,
                "box": [round(v, 6) for v in box], "score": round(score, 6),
            }, sort_keys=True))
    return lines
