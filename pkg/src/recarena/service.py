"""Battle state machine, persistence and export.

Every mutating operation follows the same discipline: validate against the
current derived state, append one event to the write-ahead log, then apply
that event to memory. Replaying the log through the same ``_apply`` code
path therefore reconstructs identical state after a crash.

Sessions are anonymous: a user is a 128-bit random hex identifier and a
session hosts exactly one battle. The two CRSs behind the "CRS 1"/"CRS 2"
labels stay hidden until export.
"""

from __future__ import annotations

import logging
import random
import secrets
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable

from . import gateway
from .config import ArenaConfig
from .elo import EloConfig, rate_all
from .errors import (
    AlreadyVotedError,
    ConversationClosedError,
    GatewayError,
    InvalidArgumentError,
    MinTurnsError,
    StateError,
    UnknownIdError,
)
from .gateway import CrsRequest, Turn
from .matchmaking import MatchmakingState
from .models import (
    Battle,
    Conversation,
    CrsDescriptor,
    Environment,
    ExportRecord,
    Outcome,
    Role,
    Sentiment,
    Utterance,
    now_ms,
)
from .storage import EventLog

log = logging.getLogger(__name__)

PLACEHOLDER_REPLY = "Sorry, I am experiencing technical difficulties. Could you try again?"

SIDE_LABELS = {1: "CRS 1", 2: "CRS 2"}

_VOTE_OUTCOMES = {"crs1": Outcome.A_WINS, "crs2": Outcome.B_WINS, "draw": Outcome.DRAW}


class Phase(str, Enum):
    IDLE = "idle"
    BATTLING = "battling"
    VOTING = "voting"
    DONE = "done"


@dataclass
class SessionState:
    user_id: str
    battle_id: str | None = None
    phase: Phase = Phase.IDLE


class ArenaService:
    """In-process arena; the HTTP layer in :mod:`recarena.server` is a thin shim."""

    def __init__(
        self,
        config: ArenaConfig,
        clock: Callable[[], int] = now_ms,
        rng: random.Random | None = None,
        id_factory: Callable[[], str] | None = None,
    ):
        self.config = config
        self._clock = clock
        self._rng = rng or random.Random()
        self._new_id = id_factory or (lambda: secrets.token_hex(16))
        self._descriptors = {e.crs_id: e.descriptor() for e in config.crs_entries}
        self._timeouts = {e.crs_id: e.timeout_ms for e in config.crs_entries}
        self._matchmaker = MatchmakingState(
            list(self._descriptors), rng_seed=self._rng.randrange(2**63)
        )
        self._sessions: dict[str, SessionState] = {}
        self._battles: dict[str, Battle] = {}
        self._votes: list[tuple[int, str, Outcome]] = []
        self._state_lock = threading.RLock()
        self._battle_locks: dict[str, threading.RLock] = {}
        for event in EventLog.read_events(config.storage_path):
            self._apply(event)
        self._restore_matchmaker_counts()
        self._log = EventLog(config.storage_path, fsync=config.fsync)

    # ── session lifecycle ────────────────────────────────────────────

    def create_session(self) -> SessionState:
        user_id = self._new_id()
        event = {"type": "session_created", "user_id": user_id, "ts": self._clock()}
        with self._state_lock:
            self._log.append(event)
            self._apply(event)
            return self._sessions[user_id]

    def start_battle(self, user_id: str) -> dict[str, Any]:
        """Open a battle for the session; CRS identities stay out of the reply."""
        with self._state_lock:
            session = self._session(user_id)
            if session.phase is not Phase.IDLE:
                raise StateError(f"cannot start a battle in phase {session.phase.value}")
            pair = self._matchmaker.next_pair()
            crs_1, crs_2 = pair if self._rng.random() < 0.5 else (pair[1], pair[0])
            event = {
                "type": "battle_started",
                "battle_id": self._new_id(),
                "user_id": user_id,
                "crs_1": crs_1,
                "crs_2": crs_2,
                "conversation_1": self._new_id(),
                "conversation_2": self._new_id(),
                "environment": self.config.environment.value,
                "created_at": self._clock(),
            }
            self._log.append(event)
            self._apply(event)
        return {
            "battle_id": event["battle_id"],
            "labels": dict(SIDE_LABELS),
            "phase": Phase.BATTLING.value,
            "min_user_turns": self.config.min_user_turns,
        }

    # ── battle operations ────────────────────────────────────────────

    def send_message(self, battle_id: str, side: int, text: str) -> Utterance:
        """Append a user turn, consult the CRS, persist and return the reply.

        A gateway failure never fails the turn: the fixed placeholder
        utterance is stored instead and the error is logged.
        """
        with self._battle_lock(battle_id):
            battle, session = self._battle_session(battle_id)
            self._check_side(side)
            if session.phase is not Phase.BATTLING:
                raise StateError(f"cannot send messages in phase {session.phase.value}")
            conv = self._conversation(battle, side)
            if conv.ended:
                raise ConversationClosedError("this conversation has ended")
            if not text or not text.strip():
                raise InvalidArgumentError("message text must be non-empty")
            user_ts = self._clock()
            context = tuple(
                [Turn(u.role, u.text) for u in conv.utterances] + [Turn(Role.USER, text)]
            )
            descriptor = self._descriptors[conv.crs_id]
            gateway_error = None
            try:
                reply_text = gateway.respond(
                    descriptor, CrsRequest(context), self._timeouts[conv.crs_id]
                ).response
            except GatewayError as exc:
                log.warning("CRS %s failed for battle %s: %s", conv.crs_id, battle_id, exc)
                reply_text = PLACEHOLDER_REPLY
                gateway_error = exc.code
            event = {
                "type": "message",
                "battle_id": battle_id,
                "side": side,
                "user_text": text,
                "reply_text": reply_text,
                "user_ts": user_ts,
                "reply_ts": self._clock(),
                "gateway_error": gateway_error,
            }
            with self._state_lock:
                self._log.append(event)
                self._apply(event)
            return Utterance(role=Role.SYSTEM, text=reply_text, timestamp=event["reply_ts"])

    def end_conversation(self, battle_id: str, side: int, sentiment: str) -> dict[str, Any]:
        with self._battle_lock(battle_id):
            battle, session = self._battle_session(battle_id)
            self._check_side(side)
            if sentiment not in (Sentiment.SATISFACTION.value, Sentiment.FRUSTRATION.value):
                raise InvalidArgumentError(
                    "sentiment must be 'satisfaction' or 'frustration'"
                )
            if session.phase is not Phase.BATTLING:
                raise StateError(f"cannot end a conversation in phase {session.phase.value}")
            conv = self._conversation(battle, side)
            if conv.ended:
                raise ConversationClosedError("this conversation has already ended")
            if conv.user_turns() < self.config.min_user_turns:
                raise MinTurnsError(self.config.min_user_turns, conv.user_turns())
            event = {
                "type": "conversation_ended",
                "battle_id": battle_id,
                "side": side,
                "sentiment": sentiment,
                "ts": self._clock(),
            }
            with self._state_lock:
                self._log.append(event)
                self._apply(event)
            return {"side": side, "ended": True, "phase": session.phase.value}

    def vote(self, battle_id: str, outcome: str) -> dict[str, Any]:
        with self._battle_lock(battle_id):
            battle, session = self._battle_session(battle_id)
            if outcome not in _VOTE_OUTCOMES:
                raise InvalidArgumentError("outcome must be 'crs1', 'crs2' or 'draw'")
            if session.phase is Phase.DONE:
                raise AlreadyVotedError("this battle already has a vote")
            if session.phase is not Phase.VOTING:
                raise StateError("voting requires both conversations to have ended")
            event = {
                "type": "vote",
                "battle_id": battle_id,
                "outcome": _VOTE_OUTCOMES[outcome].value,
                "ts": self._clock(),
            }
            with self._state_lock:
                self._log.append(event)
                self._apply(event)
            return {"outcome": _VOTE_OUTCOMES[outcome].value, "phase": session.phase.value}

    def submit_feedback(self, battle_id: str, text: str) -> dict[str, Any]:
        with self._battle_lock(battle_id):
            battle, session = self._battle_session(battle_id)
            if not text or not text.strip():
                raise InvalidArgumentError("feedback text must be non-empty")
            if session.phase is not Phase.DONE:
                raise StateError("feedback is only accepted after voting")
            if battle.feedback_text is not None:
                raise StateError("feedback was already submitted for this battle")
            event = {
                "type": "feedback",
                "battle_id": battle_id,
                "text": text,
                "ts": self._clock(),
            }
            with self._state_lock:
                self._log.append(event)
                self._apply(event)
            return {"stored": True}

    # ── read side ────────────────────────────────────────────────────

    def leaderboard(self) -> dict[str, Any]:
        """Elo recomputed from the persisted vote log plus satisfaction rates."""
        with self._state_lock:
            ordered = sorted(self._votes, key=lambda v: (v[0], v[1]))
            battles = [
                (
                    self._battles[bid].side_a.crs_id,
                    self._battles[bid].side_b.crs_id,
                    outcome,
                )
                for _, bid, outcome in ordered
            ]
            table = rate_all(battles, sorted(self._descriptors), EloConfig())
            satisfaction = self._satisfaction_rates()
        result = table.to_dict()
        result["satisfaction"] = satisfaction
        return result

    def _satisfaction_rates(self) -> dict[str, float | None]:
        ended: dict[str, int] = {crs_id: 0 for crs_id in self._descriptors}
        satisfied: dict[str, int] = {crs_id: 0 for crs_id in self._descriptors}
        for battle in self._battles.values():
            for conv in (battle.side_a, battle.side_b):
                if conv.ended:
                    ended[conv.crs_id] += 1
                    if conv.sentiment is Sentiment.SATISFACTION:
                        satisfied[conv.crs_id] += 1
        return {
            crs_id: round(100.0 * satisfied[crs_id] / n, 1) if n else None
            for crs_id, n in sorted(ended.items())
        }

    def export_records(self, environment: Environment | None = None) -> list[ExportRecord]:
        """Every battle (voted or pending), ordered by (created_at, battle_id)."""
        with self._state_lock:
            battles = sorted(
                self._battles.values(), key=lambda b: (b.created_at, b.battle_id)
            )
        return [
            ExportRecord.from_battle(b)
            for b in battles
            if environment is None or b.environment is environment
        ]

    def registry(self) -> list[CrsDescriptor]:
        counts = self._matchmaker.counts()
        return [
            CrsDescriptor(
                crs_id=d.crs_id,
                display_name=d.display_name,
                endpoint=d.endpoint,
                conversation_count=counts[d.crs_id],
            )
            for d in self._descriptors.values()
        ]

    def session_view(self, user_id: str) -> dict[str, Any]:
        with self._state_lock:
            session = self._session(user_id)
            return {
                "user_id": session.user_id,
                "battle_id": session.battle_id,
                "phase": session.phase.value,
            }

    def battle_view(self, battle_id: str) -> dict[str, Any]:
        """Anonymized battle snapshot for the UI; no crs_id values inside."""
        with self._state_lock:
            battle, session = self._battle_session(battle_id)
            sides = {}
            for side in (1, 2):
                conv = self._conversation(battle, side)
                sides[str(side)] = {
                    "label": SIDE_LABELS[side],
                    "ended": conv.ended,
                    "sentiment": conv.sentiment.value,
                    "user_turns": conv.user_turns(),
                    "utterances": [u.to_dict() for u in conv.utterances],
                }
            return {
                "battle_id": battle.battle_id,
                "phase": session.phase.value,
                "outcome": battle.outcome.value,
                "feedback_submitted": battle.feedback_text is not None,
                "min_user_turns": self.config.min_user_turns,
                "sides": sides,
            }

    def derived_state(self) -> dict[str, Any]:
        """Canonical snapshot used by replay/crash-recovery tests."""
        with self._state_lock:
            return {
                "sessions": {
                    uid: {"battle_id": s.battle_id, "phase": s.phase.value}
                    for uid, s in sorted(self._sessions.items())
                },
                "battles": {
                    bid: b.to_dict() for bid, b in sorted(self._battles.items())
                },
                "votes": [[ts, bid, o.value] for ts, bid, o in self._votes],
                "matchmaker_counts": self._matchmaker.counts(),
            }

    def close(self) -> None:
        self._log.close()

    # ── event application (shared by live path and replay) ──────────

    def _apply(self, event: dict[str, Any]) -> None:
        kind = event["type"]
        if kind == "session_created":
            user_id = event["user_id"]
            self._sessions[user_id] = SessionState(user_id=user_id)
        elif kind == "battle_started":
            user_id = event["user_id"]
            battle = Battle(
                battle_id=event["battle_id"],
                user_id=user_id,
                side_a=Conversation(
                    conversation_id=event["conversation_1"],
                    crs_id=event["crs_1"],
                    user_id=user_id,
                ),
                side_b=Conversation(
                    conversation_id=event["conversation_2"],
                    crs_id=event["crs_2"],
                    user_id=user_id,
                ),
                environment=Environment(event["environment"]),
                created_at=event["created_at"],
            )
            self._battles[battle.battle_id] = battle
            self._battle_locks[battle.battle_id] = threading.RLock()
            session = self._sessions[user_id]
            session.battle_id = battle.battle_id
            session.phase = Phase.BATTLING
        elif kind == "message":
            battle = self._battles[event["battle_id"]]
            side = event["side"]
            conv = self._conversation(battle, side)
            conv = conv.with_utterance(
                Utterance(Role.USER, event["user_text"], event["user_ts"])
            ).with_utterance(
                Utterance(Role.SYSTEM, event["reply_text"], event["reply_ts"])
            )
            self._battles[battle.battle_id] = battle.replace_side(
                "a" if side == 1 else "b", conv
            )
        elif kind == "conversation_ended":
            battle = self._battles[event["battle_id"]]
            side = event["side"]
            conv = self._conversation(battle, side).sealed(Sentiment(event["sentiment"]))
            battle = battle.replace_side("a" if side == 1 else "b", conv)
            self._battles[battle.battle_id] = battle
            if battle.side_a.ended and battle.side_b.ended:
                self._sessions[battle.user_id].phase = Phase.VOTING
        elif kind == "vote":
            battle = self._battles[event["battle_id"]]
            outcome = Outcome(event["outcome"])
            self._battles[battle.battle_id] = battle.with_outcome(outcome)
            self._sessions[battle.user_id].phase = Phase.DONE
            self._votes.append((event["ts"], battle.battle_id, outcome))
        elif kind == "feedback":
            battle = self._battles[event["battle_id"]]
            self._battles[battle.battle_id] = battle.with_feedback(event["text"])
        else:
            raise StateError(f"unknown event type in log: {kind!r}")

    def _restore_matchmaker_counts(self) -> None:
        counts = {crs_id: 0 for crs_id in self._descriptors}
        for battle in self._battles.values():
            counts[battle.side_a.crs_id] += 1
            counts[battle.side_b.crs_id] += 1
        for crs_id, count in counts.items():
            self._matchmaker.restore_count(crs_id, count)

    # ── lookups ──────────────────────────────────────────────────────

    def _session(self, user_id: str) -> SessionState:
        try:
            return self._sessions[user_id]
        except KeyError:
            raise UnknownIdError(f"unknown session {user_id!r}") from None

    def _battle_session(self, battle_id: str) -> tuple[Battle, SessionState]:
        try:
            battle = self._battles[battle_id]
        except KeyError:
            raise UnknownIdError(f"unknown battle {battle_id!r}") from None
        return battle, self._sessions[battle.user_id]

    def _battle_lock(self, battle_id: str) -> threading.RLock:
        with self._state_lock:
            try:
                return self._battle_locks[battle_id]
            except KeyError:
                raise UnknownIdError(f"unknown battle {battle_id!r}") from None

    @staticmethod
    def _check_side(side: int) -> None:
        if side not in (1, 2):
            raise InvalidArgumentError("side must be 1 or 2")

    @staticmethod
    def _conversation(battle: Battle, side: int) -> Conversation:
        return battle.side_a if side == 1 else battle.side_b
