"""Frames, source videos and clip windowing.

The engine never decodes video: a source is either a directory of
pre-extracted image files (plus fps/frame_count metadata) or a symbolic
mock-world video whose frames exist only as table rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvalidArgument


@dataclass(frozen=True)
class FrameRef:
    """One frame of a source video.

    `image_path` is None for symbolic (mock-world) frames. Timestamps are
    kept rational (index / fps) so no float drift enters stored values.
    """

    video_id: str
    index: int
    fps: Fraction
    image_path: str | None = None

    @property
    def timestamp_s(self) -> Fraction:
        return Fraction(self.index) / self.fps


@dataclass(frozen=True)
class SourceVideo:
    video_id: str
    fps: Fraction
    frame_count: int
    frame_dir: str | None = None    # directory of %06d.<ext> images
    frame_ext: str = "jpg"
    transcript: str | None = None   # sidecar transcript, if any

    def __post_init__(self):
        if self.frame_count < 1:
            raise InvalidArgument(f"frame_count must be >= 1, got {self.frame_count}")
        if self.fps <= 0:
            raise InvalidArgument(f"fps must be positive, got {self.fps}")

    @property
    def duration_s(self) -> Fraction:
        return Fraction(self.frame_count) / self.fps

    def frame(self, index: int) -> FrameRef:
        if not 0 <= index < self.frame_count:
            raise InvalidArgument(f"frame index {index} outside [0, {self.frame_count})")
        path = None
        if self.frame_dir is not None:
            path = f"{self.frame_dir}/{index:06d}.{self.frame_ext}"
        return FrameRef(self.video_id, index, self.fps, path)


@dataclass(frozen=True)
class VideoClip:
    """An ordered window of frames with half-open [start, end) source bounds.

    Frames are a strictly increasing subsequence of the source's frames;
    after filtering they need not be contiguous. Immutable, safe to share.
    """

    source: SourceVideo
    start: int
    end: int
    frames: tuple[FrameRef, ...] = field(default=())

    def __post_init__(self):
        if not 0 <= self.start <= self.end <= self.source.frame_count:
            raise InvalidArgument(
                f"clip bounds [{self.start}, {self.end}) outside video of "
                f"{self.source.frame_count} frames"
            )
        prev = -1
        for f in self.frames:
            if f.index <= prev:
                raise InvalidArgument("clip frames must be strictly increasing by index")
            prev = f.index

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    def indices(self) -> list[int]:
        return [f.index for f in self.frames]


def full_clip(source: SourceVideo) -> VideoClip:
    frames = tuple(source.frame(i) for i in range(source.frame_count))
    return VideoClip(source, 0, source.frame_count, frames)


def sample_uniform(source: SourceVideo, n: int) -> VideoClip:
    """Clip of min(n, frame_count) frames at indices floor(i * frame_count / n).

    Deterministic; duplicate indices (frame_count < n) are dropped keeping
    first occurrence, so the result is strictly increasing.
    """
    if n < 1:
        raise InvalidArgument(f"sample size must be >= 1, got {n}")
    count = source.frame_count
    seen: set[int] = set()
    indices: list[int] = []
    for i in range(n):
        idx = (i * count) // n
        if idx not in seen:
            seen.add(idx)
            indices.append(idx)
    frames = tuple(source.frame(i) for i in indices)
    return VideoClip(source, 0, count, frames)


def trim(clip: VideoClip, a: int, b: int) -> VideoClip:
    """Keep positions [a, b) of the clip's current frame list.

    Positions are within the frame list, not source indices; start/end are
    updated to the source indices of the retained endpoints.
    """
    n = clip.num_frames
    if not (0 <= a <= b <= n):
        raise InvalidArgument(f"trim range [{a}, {b}) outside clip of {n} frames")
    frames = clip.frames[a:b]
    if frames:
        start, end = frames[0].index, frames[-1].index + 1
    else:
        # empty result: collapse the window to the cut position
        start = clip.frames[a].index if a < n else clip.end
        end = start
    return VideoClip(clip.source, start, end, frames)


def clip_len(clip: VideoClip) -> int:
    return clip.num_frames
