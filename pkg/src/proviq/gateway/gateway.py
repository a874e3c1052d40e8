"""Uniform capability gateway: routing, caching, call accounting and
bounded fan-out over whichever backend implementation is configured.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence

from ..errors import BackendUnavailable
from .cache import ResponseCache
from .capabilities import Capability, CapabilityRequest, CapabilityResponse


class Backend(Protocol):
    def call(self, request: CapabilityRequest) -> dict: ...


@dataclass(frozen=True)
class CallLogEntry:
    capability: Capability
    request_id: str


class Gateway:
    """Thread-safe front door to the backends.

    Responses are validated against the wire schema before they reach a
    primitive; cache hits are returned byte-identical and do not count as
    backend calls. `call_many` fans out with at most `max_concurrency`
    requests in flight and reassembles results in request order.
    """

    def __init__(self, backends: dict[Capability, Backend],
                 cache: ResponseCache | None = None,
                 config_fingerprint: str = "",
                 max_concurrency: int = 1):
        if max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")
        self._backends = dict(backends)
        self._cache = cache
        self._fingerprint = config_fingerprint
        self._max_concurrency = max_concurrency
        self._lock = threading.Lock()
        self.call_log: list[CallLogEntry] = []
        self.backend_calls = 0
        self._pool: ThreadPoolExecutor | None = None

    def supports(self, capability: Capability) -> bool:
        return capability in self._backends

    def call(self, request: CapabilityRequest) -> CapabilityResponse:
        backend = self._backends.get(request.capability)
        if backend is None:
            raise BackendUnavailable("<registry>", f"no backend for {request.capability.value}")
        rid = request.request_id
        if self._cache is not None:
            hit = self._cache.get(rid, self._fingerprint)
            if hit is not None:
                return CapabilityResponse(request.capability, hit, from_cache=True)
        payload = backend.call(request)
        with self._lock:
            self.backend_calls += 1
            self.call_log.append(CallLogEntry(request.capability, rid))
        if self._cache is not None:
            self._cache.put(rid, self._fingerprint, payload)
        return CapabilityResponse(request.capability, payload, from_cache=False)

    def call_many(self, requests: Sequence[CapabilityRequest]) -> list[CapabilityResponse]:
        if len(requests) <= 1 or self._max_concurrency == 1:
            return [self.call(r) for r in requests]
        pool = self._ensure_pool()
        futures = [pool.submit(self.call, r) for r in requests]
        return [f.result() for f in futures]

    def call_many_settled(self, requests: Sequence[CapabilityRequest]) -> list[CapabilityResponse | Exception]:
        """Like call_many, but failures come back in place of a response so
        callers can degrade per request."""
        def settled(r: CapabilityRequest) -> CapabilityResponse | Exception:
            try:
                return self.call(r)
            except Exception as exc:  # noqa: BLE001 - returned, not swallowed
                return exc

        if len(requests) <= 1 or self._max_concurrency == 1:
            return [settled(r) for r in requests]
        pool = self._ensure_pool()
        futures = [pool.submit(settled, r) for r in requests]
        return [f.result() for f in futures]

    def log_length(self) -> int:
        with self._lock:
            return len(self.call_log)

    def _ensure_pool(self) -> ThreadPoolExecutor:
        with self._lock:
            if self._pool is None:
                self._pool = ThreadPoolExecutor(max_workers=self._max_concurrency)
            return self._pool

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None
