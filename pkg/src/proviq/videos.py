"""Resolve video ids to sources: mock worlds or frame-image directories.

Frame directories follow `<frames_dir>/<video_id>/%06d.<ext>` with a sidecar
`metadata.json` carrying fps, frame_count and an optional transcript.
"""

from __future__ import annotations

import glob
import json
import os

from .clips import SourceVideo
from .errors import ConfigError
from .gateway import MockWorld, load_mock_world, parse_fps


def load_worlds(path: str) -> dict[str, MockWorld]:
    """Load one world file, or every *.json in a directory, keyed by video id."""
    if os.path.isdir(path):
        worlds = {}
        for p in sorted(glob.glob(os.path.join(path, "*.json"))):
            world = load_mock_world(p)
            worlds[world.video_id] = world
        if not worlds:
            raise ConfigError(f"no world files in {path}")
        return worlds
    if os.path.isfile(path):
        world = load_mock_world(path)
        return {world.video_id: world}
    raise ConfigError(f"mock world path does not exist: {path}")


class VideoStore:
    def __init__(self, worlds: dict[str, MockWorld] | None = None,
                 frames_dir: str | None = None):
        self.worlds = worlds or {}
        self.frames_dir = frames_dir

    def source(self, video_id: str) -> SourceVideo:
        world = self.worlds.get(video_id)
        if world is not None:
            # transcripts of mock videos are served by the transcription
            # capability, not as sidecar text
            return SourceVideo(video_id=video_id, fps=world.fps,
                               frame_count=world.frame_count)
        if self.frames_dir is not None:
            return self._from_frame_dir(video_id)
        raise ConfigError(f"unknown video: {video_id}")

    def _from_frame_dir(self, video_id: str) -> SourceVideo:
        directory = os.path.join(self.frames_dir, video_id)  # type: ignore[arg-type]
        meta_path = os.path.join(directory, "metadata.json")
        if not os.path.isdir(directory):
            raise ConfigError(f"frame directory does not exist: {directory}")
        if not os.path.isfile(meta_path):
            raise ConfigError(f"missing frame metadata: {meta_path}")
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
        for key in ("fps", "frame_count"):
            if key not in meta:
                raise ConfigError(f"{meta_path}: missing {key!r}")
        ext = meta.get("ext")
        if ext is None:
            images = sorted(glob.glob(os.path.join(directory, "000000.*")))
            if not images:
                raise ConfigError(f"{directory}: no frame images found")
            ext = images[0].rsplit(".", 1)[-1]
        return SourceVideo(video_id=video_id, fps=parse_fps(meta["fps"]),
                           frame_count=int(meta["frame_count"]),
                           frame_dir=directory, frame_ext=ext,
                           transcript=meta.get("transcript"))
