"""Shared domain types for the arena.

Everything here is an immutable value object; the service layer produces new
versions instead of mutating. Timestamps are UTC milliseconds since the epoch
(ints), which gives battles and votes a total order for rating replay.

JSON (de)serialization uses snake_case keys throughout. ``to_json_line`` /
``parse_json_line`` on :class:`ExportRecord` are byte-stable: parsing a line
and re-serializing it reproduces the input exactly.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Mapping

from .errors import FormatError, InvalidArgumentError


class Role(str, Enum):
    USER = "user"
    SYSTEM = "system"


class Sentiment(str, Enum):
    SATISFACTION = "satisfaction"
    FRUSTRATION = "frustration"
    NONE_YET = "none_yet"


class Outcome(str, Enum):
    A_WINS = "a_wins"
    B_WINS = "b_wins"
    DRAW = "draw"
    PENDING = "pending"


class Environment(str, Enum):
    OPEN = "open"
    CLOSED = "closed"


def now_ms() -> int:
    """Current UTC instant in epoch milliseconds."""
    return int(time.time() * 1000)


@dataclass(frozen=True, slots=True)
class CrsDescriptor:
    """A registered CRS backend.

    ``endpoint`` is either an HTTP base URL or a ``stub://<kind>`` marker for
    one of the built-in deterministic backends. ``conversation_count`` is the
    number of conversations assigned so far; it never decreases.
    """

    crs_id: str
    display_name: str
    endpoint: str
    conversation_count: int = 0

    def __post_init__(self) -> None:
        if not self.crs_id:
            raise InvalidArgumentError("crs_id must be non-empty")
        if self.conversation_count < 0:
            raise InvalidArgumentError("conversation_count must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {
            "crs_id": self.crs_id,
            "display_name": self.display_name,
            "endpoint": self.endpoint,
            "conversation_count": self.conversation_count,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CrsDescriptor":
        return cls(
            crs_id=d["crs_id"],
            display_name=d["display_name"],
            endpoint=d["endpoint"],
            conversation_count=int(d["conversation_count"]),
        )


@dataclass(frozen=True, slots=True)
class Utterance:
    role: Role
    text: str
    timestamp: int

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise InvalidArgumentError("utterance text must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {"role": self.role.value, "text": self.text, "timestamp": self.timestamp}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Utterance":
        return cls(role=Role(d["role"]), text=d["text"], timestamp=int(d["timestamp"]))


@dataclass(frozen=True, slots=True)
class Conversation:
    """One user's dialogue with a single CRS.

    Unlike :class:`Battle`, a conversation is constructible in any shape so
    that foreign data can be loaded and then checked; use :func:`validate`
    to test the invariants.
    """

    conversation_id: str
    crs_id: str
    user_id: str
    utterances: tuple[Utterance, ...] = ()
    sentiment: Sentiment = Sentiment.NONE_YET
    ended: bool = False

    def user_turns(self) -> int:
        return sum(1 for u in self.utterances if u.role is Role.USER)

    def with_utterance(self, utterance: Utterance) -> "Conversation":
        if self.ended:
            raise InvalidArgumentError("cannot append to an ended conversation")
        return Conversation(
            conversation_id=self.conversation_id,
            crs_id=self.crs_id,
            user_id=self.user_id,
            utterances=self.utterances + (utterance,),
            sentiment=self.sentiment,
            ended=self.ended,
        )

    def sealed(self, sentiment: Sentiment) -> "Conversation":
        if sentiment is Sentiment.NONE_YET:
            raise InvalidArgumentError("sealing requires satisfaction or frustration")
        return Conversation(
            conversation_id=self.conversation_id,
            crs_id=self.crs_id,
            user_id=self.user_id,
            utterances=self.utterances,
            sentiment=sentiment,
            ended=True,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "conversation_id": self.conversation_id,
            "crs_id": self.crs_id,
            "user_id": self.user_id,
            "utterances": [u.to_dict() for u in self.utterances],
            "sentiment": self.sentiment.value,
            "ended": self.ended,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Conversation":
        return cls(
            conversation_id=d["conversation_id"],
            crs_id=d["crs_id"],
            user_id=d["user_id"],
            utterances=tuple(Utterance.from_dict(u) for u in d["utterances"]),
            sentiment=Sentiment(d["sentiment"]),
            ended=bool(d["ended"]),
        )


def validate(conversation: Conversation) -> list[str]:
    """Check conversation invariants; violations are returned, not raised.

    An empty list means the conversation is valid. Role alternation must
    start with the user and pair every user utterance with exactly one
    system utterance; a trailing unanswered user utterance is permitted
    (it is a prefix of a valid conversation).
    """
    violations: list[str] = []
    expected = Role.USER
    for i, utt in enumerate(conversation.utterances):
        if utt.role is not expected:
            violations.append(
                f"role-alternation: utterance {i} has role {utt.role.value}, "
                f"expected {expected.value}"
            )
            break
        expected = Role.SYSTEM if expected is Role.USER else Role.USER
    if conversation.ended and conversation.sentiment is Sentiment.NONE_YET:
        violations.append("ended-without-sentiment: ended conversations need a sentiment")
    return violations


@dataclass(frozen=True, slots=True)
class Battle:
    """A pair of conversations by the same user plus the vote outcome.

    Invariants are enforced at construction; an instance that exists is
    valid. The outcome is immutable: recording a vote produces a new Battle
    via :meth:`with_outcome`, which refuses to overwrite a decided outcome.
    """

    battle_id: str
    user_id: str
    side_a: Conversation
    side_b: Conversation
    outcome: Outcome = Outcome.PENDING
    feedback_text: str | None = None
    environment: Environment = Environment.OPEN
    created_at: int = 0

    def __post_init__(self) -> None:
        if self.side_a.crs_id == self.side_b.crs_id:
            raise InvalidArgumentError("battle sides must use distinct CRSs")
        if not (self.side_a.user_id == self.side_b.user_id == self.user_id):
            raise InvalidArgumentError("both conversations must belong to the battle user")
        if self.outcome is not Outcome.PENDING:
            if not (self.side_a.ended and self.side_b.ended):
                raise InvalidArgumentError(
                    "outcome requires both conversations to have ended"
                )

    def with_outcome(self, outcome: Outcome) -> "Battle":
        if self.outcome is not Outcome.PENDING:
            raise InvalidArgumentError("battle outcome is already decided")
        return Battle(
            battle_id=self.battle_id,
            user_id=self.user_id,
            side_a=self.side_a,
            side_b=self.side_b,
            outcome=outcome,
            feedback_text=self.feedback_text,
            environment=self.environment,
            created_at=self.created_at,
        )

    def with_feedback(self, text: str) -> "Battle":
        return Battle(
            battle_id=self.battle_id,
            user_id=self.user_id,
            side_a=self.side_a,
            side_b=self.side_b,
            outcome=self.outcome,
            feedback_text=text,
            environment=self.environment,
            created_at=self.created_at,
        )

    def replace_side(self, side: str, conversation: Conversation) -> "Battle":
        if side not in ("a", "b"):
            raise InvalidArgumentError("side must be 'a' or 'b'")
        return Battle(
            battle_id=self.battle_id,
            user_id=self.user_id,
            side_a=conversation if side == "a" else self.side_a,
            side_b=conversation if side == "b" else self.side_b,
            outcome=self.outcome,
            feedback_text=self.feedback_text,
            environment=self.environment,
            created_at=self.created_at,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "battle_id": self.battle_id,
            "user_id": self.user_id,
            "side_a": self.side_a.to_dict(),
            "side_b": self.side_b.to_dict(),
            "outcome": self.outcome.value,
            "feedback_text": self.feedback_text,
            "environment": self.environment.value,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Battle":
        return cls(
            battle_id=d["battle_id"],
            user_id=d["user_id"],
            side_a=Conversation.from_dict(d["side_a"]),
            side_b=Conversation.from_dict(d["side_b"]),
            outcome=Outcome(d["outcome"]),
            feedback_text=d["feedback_text"],
            environment=Environment(d["environment"]),
            created_at=int(d["created_at"]),
        )


@dataclass(frozen=True)
class RatingTable:
    """Elo ratings and standard-competition ranks for a set of CRSs."""

    ratings: Mapping[str, float]
    ranks: Mapping[str, int]
    battles_processed: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "ratings": dict(sorted(self.ratings.items())),
            "ranks": dict(sorted(self.ranks.items())),
            "battles_processed": self.battles_processed,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RatingTable":
        return cls(
            ratings={k: float(v) for k, v in d["ratings"].items()},
            ranks={k: int(v) for k, v in d["ranks"].items()},
            battles_processed=int(d["battles_processed"]),
        )


@dataclass(frozen=True, slots=True)
class SideRecord:
    """One side of an exported battle: the CRS, its sentiment, the dialogue."""

    crs_id: str
    sentiment: Sentiment
    utterances: tuple[Utterance, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "crs_id": self.crs_id,
            "sentiment": self.sentiment.value,
            "utterances": [u.to_dict() for u in self.utterances],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SideRecord":
        return cls(
            crs_id=d["crs_id"],
            sentiment=Sentiment(d["sentiment"]),
            utterances=tuple(Utterance.from_dict(u) for u in d["utterances"]),
        )


@dataclass(frozen=True, slots=True)
class ExportRecord:
    """One battle flattened into a dataset row (two dialogues plus the vote)."""

    battle_id: str
    user_id: str
    environment: Environment
    created_at: int
    outcome: Outcome
    feedback_text: str | None
    side_a: SideRecord
    side_b: SideRecord

    @classmethod
    def from_battle(cls, battle: Battle) -> "ExportRecord":
        def side(conv: Conversation) -> SideRecord:
            return SideRecord(
                crs_id=conv.crs_id,
                sentiment=conv.sentiment,
                utterances=conv.utterances,
            )

        return cls(
            battle_id=battle.battle_id,
            user_id=battle.user_id,
            environment=battle.environment,
            created_at=battle.created_at,
            outcome=battle.outcome,
            feedback_text=battle.feedback_text,
            side_a=side(battle.side_a),
            side_b=side(battle.side_b),
        )

    def sides(self) -> tuple[SideRecord, SideRecord]:
        return (self.side_a, self.side_b)

    def to_dict(self) -> dict[str, Any]:
        return {
            "battle_id": self.battle_id,
            "user_id": self.user_id,
            "environment": self.environment.value,
            "created_at": self.created_at,
            "outcome": self.outcome.value,
            "feedback_text": self.feedback_text,
            "side_a": self.side_a.to_dict(),
            "side_b": self.side_b.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ExportRecord":
        return cls(
            battle_id=d["battle_id"],
            user_id=d["user_id"],
            environment=Environment(d["environment"]),
            created_at=int(d["created_at"]),
            outcome=Outcome(d["outcome"]),
            feedback_text=d["feedback_text"],
            side_a=SideRecord.from_dict(d["side_a"]),
            side_b=SideRecord.from_dict(d["side_b"]),
        )

    def to_json_line(self) -> str:
        return dumps_canonical(self.to_dict())

    @classmethod
    def parse_json_line(cls, line: str, line_number: int | None = None) -> "ExportRecord":
        try:
            data = json.loads(line)
            return cls.from_dict(data)
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise FormatError(f"bad export record: {exc}", line=line_number) from exc


def dumps_canonical(obj: Any) -> str:
    """Canonical JSON encoding: fixed key order, no spaces, raw unicode."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def read_export_file(path: str) -> list[ExportRecord]:
    """Load a JSONL export; raises FormatError with the 1-based line number."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if line.strip():
                records.append(ExportRecord.parse_json_line(line, line_number=i))
    return records


def write_export_file(path: str, records: Iterable[ExportRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json_line() + "\n")
