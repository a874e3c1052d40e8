"""Capability gateway: wire types, mock worlds, remote client, cache."""

from .cache import ResponseCache
from .capabilities import Box, Capability, CapabilityRequest, CapabilityResponse, validate_box
from .gateway import Backend, CallLogEntry, Gateway
from .mockworld import (
    ChunkCaption, CropQA, FaultSpec, LlmRule, MockWorld, MockWorldBackend,
    ScoredBox, inject_fault, load_mock_world, parse_fps,
    CORRUPTED_TEXT, GARBLED_TEXT,
)
from .remote import RemoteBackend, request_body

__all__ = [
    "Backend", "Box", "CallLogEntry", "Capability", "CapabilityRequest",
    "CapabilityResponse", "ChunkCaption", "CropQA", "FaultSpec", "Gateway",
    "LlmRule", "MockWorld", "MockWorldBackend", "RemoteBackend", "ResponseCache",
    "ScoredBox", "inject_fault", "load_mock_world", "parse_fps", "request_body",
    "validate_box", "CORRUPTED_TEXT", "GARBLED_TEXT",
]
