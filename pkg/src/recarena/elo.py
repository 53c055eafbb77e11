"""Elo ratings over an ordered battle log.

Ratings are always recomputed from the full log (never incrementally
mutated in storage) so a leaderboard is reproducible from the export alone.
The update applies a single delta with opposite signs, so the transferred
mass is identical on both sides and the rating total drifts only by
floating-point rounding of the additions (well under 1e-6 over any
realistic log).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidArgumentError, RegistryError
from .models import Outcome, RatingTable

_VALID_SCORES = (0.0, 0.5, 1.0)

_OUTCOME_SCORES = {
    Outcome.A_WINS: 1.0,
    Outcome.B_WINS: 0.0,
    Outcome.DRAW: 0.5,
}


@dataclass(frozen=True)
class EloConfig:
    initial_rating: float = 1000.0
    k_factor: float = 16.0

    def __post_init__(self) -> None:
        if not self.k_factor > 0:
            raise InvalidArgumentError("k_factor must be > 0")


def expected_score(rating_a: float, rating_b: float) -> float:
    """Win expectation of A against B: 1 / (1 + 10^((Rb - Ra) / 400))."""
    if not (math.isfinite(rating_a) and math.isfinite(rating_b)):
        raise InvalidArgumentError("ratings must be finite")
    return 1.0 / (1.0 + 10.0 ** ((rating_b - rating_a) / 400.0))


def update(
    rating_a: float,
    rating_b: float,
    score_a: float,
    config: EloConfig = EloConfig(),
) -> tuple[float, float]:
    """Apply one battle result; score_a is 1 (A wins), 0.5 (draw) or 0."""
    if score_a not in _VALID_SCORES:
        raise InvalidArgumentError(f"score must be one of {_VALID_SCORES}, got {score_a!r}")
    delta = config.k_factor * (score_a - expected_score(rating_a, rating_b))
    return rating_a + delta, rating_b - delta


def rate_all(
    battles: Iterable[tuple[str, str, Outcome]],
    registry: Sequence[str],
    config: EloConfig = EloConfig(),
) -> RatingTable:
    """Replay a chronologically ordered battle log into a rating table.

    Battles with a pending outcome are skipped and not counted. CRSs that
    never battled keep the initial rating. The result depends on the order
    of the log; callers sort by (vote timestamp, battle id) first.
    """
    ratings = {crs_id: config.initial_rating for crs_id in registry}
    if len(ratings) != len(list(registry)):
        raise RegistryError("registry contains duplicate crs_id values")
    processed = 0
    for crs_a, crs_b, outcome in battles:
        if crs_a not in ratings or crs_b not in ratings:
            missing = crs_a if crs_a not in ratings else crs_b
            raise RegistryError(f"unknown crs_id in battle log: {missing!r}")
        if outcome is Outcome.PENDING:
            continue
        ratings[crs_a], ratings[crs_b] = update(
            ratings[crs_a], ratings[crs_b], _OUTCOME_SCORES[outcome], config
        )
        processed += 1
    return RatingTable(
        ratings=ratings, ranks=competition_ranks(ratings), battles_processed=processed
    )


def competition_ranks(ratings: dict[str, float]) -> dict[str, int]:
    """Standard competition ranking ("1224"): exact-value ties share a rank."""
    ordered = sorted(ratings.items(), key=lambda kv: (-kv[1], kv[0]))
    ranks: dict[str, int] = {}
    for position, (crs_id, rating) in enumerate(ordered, start=1):
        if position > 1 and rating == ordered[position - 2][1]:
            ranks[crs_id] = ranks[ordered[position - 2][0]]
        else:
            ranks[crs_id] = position
    return ranks
