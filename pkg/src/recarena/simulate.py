"""Synthetic battle generator for validating the rating pipeline.

Outcomes follow the Bradley-Terry rule p(a beats b) = s_a / (s_a + s_b),
with an optional flat draw probability. Pairing goes through the real
matchmaker so simulated logs exercise the same selection behavior as the
live service.
"""

from __future__ import annotations

import random

from .errors import InvalidArgumentError
from .matchmaking import MatchmakingState
from .models import Outcome


def simulate_battles(
    true_strengths: dict[str, float],
    n_battles: int,
    seed: int | None = None,
    draw_probability: float = 0.0,
) -> list[tuple[str, str, Outcome]]:
    if len(true_strengths) < 2:
        raise InvalidArgumentError("need at least 2 CRSs to simulate battles")
    for crs_id, strength in true_strengths.items():
        if not (0.0 < strength < 1.0):
            raise InvalidArgumentError(
                f"{crs_id}: win propensity must be in (0, 1), got {strength!r}"
            )
    if not (0.0 <= draw_probability < 1.0):
        raise InvalidArgumentError("draw_probability must be in [0, 1)")
    if n_battles < 0:
        raise InvalidArgumentError("n_battles must be >= 0")

    rng = random.Random(seed)
    matchmaker = MatchmakingState(sorted(true_strengths), rng_seed=rng.randrange(2**32))
    battles: list[tuple[str, str, Outcome]] = []
    for _ in range(n_battles):
        crs_a, crs_b = matchmaker.next_pair()
        if draw_probability and rng.random() < draw_probability:
            outcome = Outcome.DRAW
        else:
            p_a = true_strengths[crs_a] / (true_strengths[crs_a] + true_strengths[crs_b])
            outcome = Outcome.A_WINS if rng.random() < p_a else Outcome.B_WINS
        battles.append((crs_a, crs_b, outcome))
    return battles
