"""Service configuration.

A config file is either JSON or flat ``key=value`` lines. The ``crs`` key
may repeat, one backend per line::

    min_user_turns=5
    environment=closed
    storage_path=/var/arena/events.jsonl
    crs=stub_echo,stub://echo
    crs=kbrd_redial,http://10.0.0.5:8080,60000

The JSON form uses the same keys with ``crs`` as a list of objects
(``crs_id``, ``endpoint``, optional ``timeout_ms``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigurationError
from .gateway import DEFAULT_TIMEOUT_MS
from .models import CrsDescriptor, Environment


@dataclass(frozen=True)
class CrsEntry:
    crs_id: str
    endpoint: str
    timeout_ms: int = DEFAULT_TIMEOUT_MS

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ConfigurationError(f"{self.crs_id}: timeout_ms must be positive")

    def descriptor(self) -> CrsDescriptor:
        return CrsDescriptor(
            crs_id=self.crs_id, display_name=self.crs_id, endpoint=self.endpoint
        )


@dataclass(frozen=True)
class ArenaConfig:
    crs_entries: tuple[CrsEntry, ...]
    min_user_turns: int = 0
    environment: Environment = Environment.OPEN
    storage_path: str = "arena-events.jsonl"
    fsync: bool = False

    def __post_init__(self) -> None:
        if self.min_user_turns < 0:
            raise ConfigurationError("min_user_turns must be >= 0")
        if len(self.crs_entries) < 2:
            raise ConfigurationError("at least 2 CRS entries are required")
        ids = [e.crs_id for e in self.crs_entries]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("duplicate crs_id in configuration")


def _parse_bool(value: str) -> bool:
    if value.lower() in ("true", "1", "yes"):
        return True
    if value.lower() in ("false", "0", "no"):
        return False
    raise ConfigurationError(f"expected a boolean, got {value!r}")


def load_config(path: str | Path) -> ArenaConfig:
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _from_json(text)
    return _from_key_values(text)


def _from_json(text: str) -> ArenaConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    entries = tuple(
        CrsEntry(
            crs_id=item["crs_id"],
            endpoint=item["endpoint"],
            timeout_ms=int(item.get("timeout_ms", DEFAULT_TIMEOUT_MS)),
        )
        for item in data.get("crs", [])
    )
    return ArenaConfig(
        crs_entries=entries,
        min_user_turns=int(data.get("min_user_turns", 0)),
        environment=Environment(data.get("environment", "open")),
        storage_path=data.get("storage_path", "arena-events.jsonl"),
        fsync=bool(data.get("fsync", False)),
    )


def _from_key_values(text: str) -> ArenaConfig:
    entries: list[CrsEntry] = []
    scalars: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = key.strip(), value.strip()
        if key == "crs":
            parts = [p.strip() for p in value.split(",")]
            if len(parts) not in (2, 3):
                raise ConfigurationError(
                    f"line {lineno}: crs takes crs_id,endpoint[,timeout_ms]"
                )
            timeout = int(parts[2]) if len(parts) == 3 else DEFAULT_TIMEOUT_MS
            entries.append(CrsEntry(crs_id=parts[0], endpoint=parts[1], timeout_ms=timeout))
        else:
            scalars[key] = value
    return ArenaConfig(
        crs_entries=tuple(entries),
        min_user_turns=int(scalars.get("min_user_turns", "0")),
        environment=Environment(scalars.get("environment", "open")),
        storage_path=scalars.get("storage_path", "arena-events.jsonl"),
        fsync=_parse_bool(scalars.get("fsync", "false")),
    )


def stub_config(storage_path: str, **overrides) -> ArenaConfig:
    """Config running the three built-in stub CRSs; handy for demos and tests."""
    entries = tuple(
        CrsEntry(crs_id=f"stub_{kind}", endpoint=f"stub://{kind}")
        for kind in ("echo", "popular", "keyword")
    )
    return ArenaConfig(crs_entries=entries, storage_path=storage_path, **overrides)
