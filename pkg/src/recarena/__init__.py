"""Self-hostable battle arena for benchmarking conversational recommenders.

Humans chat with two anonymized systems side by side, end each conversation
with a satisfaction or frustration verdict, and vote for a winner (or a
draw). The package covers matchmaking, chat proxying, persistence, dataset
export, Elo leaderboards and the accompanying statistical analyses.
"""

from .config import ArenaConfig, CrsEntry, load_config, stub_config
from .elo import EloConfig, expected_score, rate_all, update
from .matchmaking import MatchmakingState
from .models import (
    Battle,
    Conversation,
    CrsDescriptor,
    Environment,
    ExportRecord,
    Outcome,
    RatingTable,
    Role,
    Sentiment,
    Utterance,
    validate,
)
from .service import ArenaService, Phase
from .simulate import simulate_battles
from .stats import CorpusStats, corpus_stats, distinct_2, pearson, spearman

__version__ = "0.1.0"

__all__ = [
    "ArenaConfig",
    "ArenaService",
    "Battle",
    "Conversation",
    "CorpusStats",
    "CrsDescriptor",
    "CrsEntry",
    "EloConfig",
    "Environment",
    "ExportRecord",
    "MatchmakingState",
    "Outcome",
    "Phase",
    "RatingTable",
    "Role",
    "Sentiment",
    "Utterance",
    "corpus_stats",
    "distinct_2",
    "expected_score",
    "load_config",
    "pearson",
    "rate_all",
    "simulate_battles",
    "spearman",
    "stub_config",
    "update",
    "validate",
]
