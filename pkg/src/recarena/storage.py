"""Append-only JSONL event log.

The log is the single source of truth: every state change is appended (and
flushed) before the service acknowledges the request, and derived state is
rebuilt by replaying the file on startup. Appends take a lock, giving
concurrent writers a total order.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Any, Iterator

from .errors import StorageError
from .models import dumps_canonical


class EventLog:
    def __init__(self, path: str | Path, fsync: bool = False):
        self._path = Path(path)
        self._fsync = fsync
        self._lock = threading.Lock()
        try:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self._path, "a", encoding="utf-8")
        except OSError as exc:
            raise StorageError(f"cannot open event log {self._path}: {exc}") from exc

    @property
    def path(self) -> Path:
        return self._path

    def append(self, event: dict[str, Any]) -> None:
        line = dumps_canonical(event)
        with self._lock:
            try:
                self._fh.write(line + "\n")
                self._fh.flush()
                if self._fsync:
                    os.fsync(self._fh.fileno())
            except OSError as exc:
                raise StorageError(f"append to {self._path} failed: {exc}") from exc

    def close(self) -> None:
        with self._lock:
            self._fh.close()

    @staticmethod
    def read_events(path: str | Path) -> Iterator[dict[str, Any]]:
        path = Path(path)
        if not path.exists():
            return
        try:
            with open(path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        yield json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise StorageError(
                            f"{path}:{lineno}: corrupt event record: {exc}"
                        ) from exc
        except OSError as exc:
            raise StorageError(f"cannot read event log {path}: {exc}") from exc
