"""Persistent response cache: append-only JSON-lines keyed by request id.

The effective key folds in a backend-configuration fingerprint, so pointing
the engine at a different endpoint invalidates prior entries without
touching the file.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading


class ResponseCache:
    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._entries: dict[str, dict] = {}
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    entry = json.loads(line)
                    # identical keys carry identical payloads by construction;
                    # last writer wins is therefore a no-op
                    self._entries[entry["key"]] = entry["payload"]

    @staticmethod
    def effective_key(request_id: str, fingerprint: str) -> str:
        return hashlib.sha256(f"{request_id}:{fingerprint}".encode("utf-8")).hexdigest()

    def get(self, request_id: str, fingerprint: str) -> dict | None:
        return self._entries.get(self.effective_key(request_id, fingerprint))

    def put(self, request_id: str, fingerprint: str, payload: dict) -> None:
        key = self.effective_key(request_id, fingerprint)
        with self._lock:
            if key in self._entries:
                return
            self._entries[key] = payload
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"key": key, "payload": payload},
                                    sort_keys=True, ensure_ascii=False) + "\n")

    def __len__(self) -> int:
        return len(self._entries)
