"""HTTP/JSON API over :class:`~recarena.service.ArenaService`.

Run ``arena-serve --config arena.conf`` (or with no config to get the three
built-in stub CRSs). Endpoints::

    POST /session
    POST /session/{user_id}/battle
    POST /battle/{battle_id}/message   {"side": 1|2, "text": ...} -> {"reply": ...}
    POST /battle/{battle_id}/end       {"side": ..., "sentiment": "satisfaction"|"frustration"}
    POST /battle/{battle_id}/vote      {"outcome": "crs1"|"crs2"|"draw"}
    POST /battle/{battle_id}/feedback  {"text": ...}
    GET  /leaderboard
    GET  /export?environment=open|closed
"""

from __future__ import annotations

import argparse
import logging

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .config import load_config, stub_config
from .errors import (
    AlreadyVotedError,
    ArenaError,
    ConversationClosedError,
    InvalidArgumentError,
    MinTurnsError,
    StateError,
    StorageError,
    UnknownIdError,
)
from .models import Environment
from .service import ArenaService


class MessageBody(BaseModel):
    side: int
    text: str


class EndBody(BaseModel):
    side: int
    sentiment: str


class VoteBody(BaseModel):
    outcome: str


class FeedbackBody(BaseModel):
    text: str


def _status_for(exc: ArenaError) -> int:
    if isinstance(exc, UnknownIdError):
        return 404
    if isinstance(exc, (StateError, ConversationClosedError, AlreadyVotedError)):
        return 409
    if isinstance(exc, StorageError):
        return 500
    if isinstance(exc, InvalidArgumentError):
        return 400
    return 500


def create_app(service: ArenaService) -> FastAPI:
    app = FastAPI(title="recarena", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.service = service

    @app.exception_handler(ArenaError)
    async def arena_error_handler(_: Request, exc: ArenaError) -> JSONResponse:
        payload = {"error": exc.code, "detail": str(exc)}
        if isinstance(exc, MinTurnsError):
            payload["required_turns"] = exc.required
            payload["actual_turns"] = exc.actual
        return JSONResponse(status_code=_status_for(exc), content=payload)

    @app.post("/session")
    def create_session():
        session = service.create_session()
        return {"user_id": session.user_id, "phase": session.phase.value}

    @app.post("/session/{user_id}/battle")
    def start_battle(user_id: str):
        return service.start_battle(user_id)

    @app.post("/battle/{battle_id}/message")
    def send_message(battle_id: str, body: MessageBody):
        reply = service.send_message(battle_id, body.side, body.text)
        return {"reply": reply.text}

    @app.post("/battle/{battle_id}/end")
    def end_conversation(battle_id: str, body: EndBody):
        return service.end_conversation(battle_id, body.side, body.sentiment)

    @app.post("/battle/{battle_id}/vote")
    def vote(battle_id: str, body: VoteBody):
        return service.vote(battle_id, body.outcome)

    @app.post("/battle/{battle_id}/feedback")
    def feedback(battle_id: str, body: FeedbackBody):
        return service.submit_feedback(battle_id, body.text)

    @app.get("/leaderboard")
    def leaderboard():
        return service.leaderboard()

    @app.get("/export")
    def export(environment: str | None = None):
        env = None
        if environment is not None:
            try:
                env = Environment(environment)
            except ValueError:
                raise InvalidArgumentError(
                    "environment must be 'open' or 'closed'"
                ) from None
        lines = "".join(
            record.to_json_line() + "\n" for record in service.export_records(env)
        )
        return PlainTextResponse(lines, media_type="application/x-ndjson")

    return app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Run the arena HTTP service.")
    parser.add_argument("--config", help="JSON or key=value config file")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument(
        "--storage",
        default="arena-events.jsonl",
        help="event log path when no config file is given",
    )
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    if args.config:
        config = load_config(args.config)
    else:
        config = stub_config(storage_path=args.storage)
    service = ArenaService(config)
    app = create_app(service)

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")


if __name__ == "__main__":
    main()
