"""Corpus statistics and rank correlations.

Tokenization is deliberately simple and reproducible: Unicode lowercasing,
split on whitespace, punctuation left attached to tokens. Spearman is
tie-aware (average ranks, then Pearson on the ranks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegenerateInputError, InvalidArgumentError
from .models import ExportRecord, Outcome

ROLE_FILTERS = ("all", "system", "user")


def tokenize(text: str) -> list[str]:
    return text.lower().split()


def distinct_2(utterances: Iterable[str]) -> float:
    """Corpus-level ratio of distinct word bigrams to total bigrams.

    Bigrams never span utterance boundaries and utterances with fewer than
    two tokens contribute nothing. An empty bigram multiset is maximally
    diverse by convention (1.0).
    """
    seen: set[tuple[str, str]] = set()
    total = 0
    for utterance in utterances:
        tokens = tokenize(utterance)
        for i in range(len(tokens) - 1):
            seen.add((tokens[i], tokens[i + 1]))
            total += 1
    return len(seen) / total if total else 1.0


@dataclass(frozen=True)
class CorpusStats:
    utterances_per_dialogue: float
    words_per_utterance: float
    distinct2: float
    n_dialogues: int
    n_votes: int

    def to_dict(self) -> dict[str, float | int]:
        return {
            "utterances_per_dialogue": self.utterances_per_dialogue,
            "words_per_utterance": self.words_per_utterance,
            "distinct2": self.distinct2,
            "n_dialogues": self.n_dialogues,
            "n_votes": self.n_votes,
        }


def corpus_stats(records: Sequence[ExportRecord], role_filter: str = "all") -> CorpusStats:
    """Aggregate dialogue statistics over an export.

    Both sides of a battle count as separate dialogues. The role filter
    applies to the word and diversity metrics only; utterances per dialogue
    always counts every utterance.
    """
    if role_filter not in ROLE_FILTERS:
        raise InvalidArgumentError(f"role_filter must be one of {ROLE_FILTERS}")
    dialogues = [side for record in records for side in record.sides()]
    if not dialogues:
        return CorpusStats(0.0, 0.0, 0.0, 0, 0)
    total_utterances = sum(len(d.utterances) for d in dialogues)
    filtered = [
        u.text
        for d in dialogues
        for u in d.utterances
        if role_filter == "all" or u.role.value == role_filter
    ]
    words = sum(len(tokenize(t)) for t in filtered)
    return CorpusStats(
        utterances_per_dialogue=total_utterances / len(dialogues),
        words_per_utterance=words / len(filtered) if filtered else 0.0,
        distinct2=distinct_2(filtered),
        n_dialogues=len(dialogues),
        n_votes=sum(1 for r in records if r.outcome is not Outcome.PENDING),
    )


def _check_pair(x: Sequence[float], y: Sequence[float]) -> None:
    if len(x) != len(y):
        raise InvalidArgumentError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise InvalidArgumentError("need at least 2 points")
    if any(not math.isfinite(v) for v in x) or any(not math.isfinite(v) for v in y):
        raise InvalidArgumentError("inputs must be finite")


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation; rejects zero-variance input."""
    _check_pair(x, y)
    n = len(x)
    mean_x = math.fsum(x) / n
    mean_y = math.fsum(y) / n
    dx = [v - mean_x for v in x]
    dy = [v - mean_y for v in y]
    var_x = math.fsum(d * d for d in dx)
    var_y = math.fsum(d * d for d in dy)
    if var_x == 0.0 or var_y == 0.0:
        raise DegenerateInputError("pearson is undefined for zero-variance input")
    return math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(var_x * var_y)


def average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks, ascending, with ties sharing their average position."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-aware rank correlation: average ranks, then Pearson on ranks."""
    _check_pair(x, y)
    return pearson(average_ranks(x), average_ranks(y))
