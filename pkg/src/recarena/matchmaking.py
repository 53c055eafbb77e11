"""Least-played pair selection.

The next battle always pairs CRSs drawn from the lowest conversation
counts: two picked uniformly from the minimum-count set when it has at
least two members, otherwise the single minimum plus a uniform pick from
the next-lowest count. Counts are incremented inside :meth:`next_pair`
under a lock, so concurrent sessions never select from stale counts.
"""

from __future__ import annotations

import random
import threading

from .errors import ConfigurationError, RegistryError


class MatchmakingState:
    def __init__(self, crs_ids: list[str] | None = None, rng_seed: int | None = None):
        self._counts: dict[str, int] = {}
        self._rng = random.Random(rng_seed)
        self._lock = threading.Lock()
        for crs_id in crs_ids or []:
            self.register(crs_id)

    def register(self, crs_id: str) -> None:
        with self._lock:
            if crs_id in self._counts:
                raise RegistryError(f"crs_id already registered: {crs_id!r}")
            self._counts[crs_id] = 0

    def counts(self) -> dict[str, int]:
        with self._lock:
            return dict(self._counts)

    def restore_count(self, crs_id: str, count: int) -> None:
        """Set a count directly; used when replaying a persisted event log."""
        with self._lock:
            self._counts[crs_id] = count

    def next_pair(self) -> tuple[str, str]:
        """Pick the next two CRSs and charge one conversation to each.

        Selection and increment happen atomically; the returned pair is
        unordered (the caller randomizes UI side assignment).
        """
        with self._lock:
            if len(self._counts) < 2:
                raise ConfigurationError("matchmaking needs at least 2 registered CRSs")
            # Sorted iteration makes the choice reproducible under a seed.
            levels = sorted(set(self._counts.values()))
            lowest = sorted(c for c, n in self._counts.items() if n == levels[0])
            if len(lowest) >= 2:
                pair = tuple(self._rng.sample(lowest, 2))
            else:
                runners_up = sorted(
                    c for c, n in self._counts.items() if n == levels[1]
                )
                pair = (lowest[0], self._rng.choice(runners_up))
            self._counts[pair[0]] += 1
            self._counts[pair[1]] += 1
            return pair
