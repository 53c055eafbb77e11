import json
import random

import pytest
from fastapi.testclient import TestClient

from recarena.config import stub_config
from recarena.models import ExportRecord
from recarena.server import create_app
from recarena.service import ArenaService


@pytest.fixture
def client(tmp_path):
    service = ArenaService(
        stub_config(str(tmp_path / "events.jsonl")), rng=random.Random(0)
    )
    with TestClient(create_app(service)) as test_client:
        test_client.service = service
        yield test_client
    service.close()


def _start_battle(client):
    user_id = client.post("/session").json()["user_id"]
    battle = client.post(f"/session/{user_id}/battle").json()
    return user_id, battle["battle_id"]


def test_full_battle_over_http(client):
    response = client.post("/session")
    assert response.status_code == 200
    body = response.json()
    assert body["phase"] == "idle"
    user_id = body["user_id"]

    battle = client.post(f"/session/{user_id}/battle")
    assert battle.status_code == 200
    payload = battle.json()
    assert payload["labels"] == {"1": "CRS 1", "2": "CRS 2"}
    battle_id = payload["battle_id"]

    reply = client.post(
        f"/battle/{battle_id}/message", json={"side": 1, "text": "hi there"}
    )
    assert reply.status_code == 200
    assert set(reply.json()) == {"reply"}
    assert reply.json()["reply"]

    for side, sentiment in ((1, "satisfaction"), (2, "frustration")):
        ended = client.post(
            f"/battle/{battle_id}/end", json={"side": side, "sentiment": sentiment}
        )
        assert ended.status_code == 200
    vote = client.post(f"/battle/{battle_id}/vote", json={"outcome": "crs1"})
    assert vote.status_code == 200
    assert vote.json()["phase"] == "done"

    feedback = client.post(
        f"/battle/{battle_id}/feedback", json={"text": "CRS 1 was friendlier"}
    )
    assert feedback.status_code == 200

    board = client.get("/leaderboard").json()
    assert board["battles_processed"] == 1
    assert sorted(board["ratings"].values()) == [992.0, 1000.0, 1008.0]


def test_battle_payload_contains_no_crs_ids(client):
    user_id = client.post("/session").json()["user_id"]
    response = client.post(f"/session/{user_id}/battle")
    text = response.text
    for crs_id in ("stub_echo", "stub_popular", "stub_keyword"):
        assert crs_id not in text


def test_error_mapping(client):
    assert client.post("/session/missing/battle").status_code == 404
    assert client.post("/battle/missing/message", json={"side": 1, "text": "x"}).status_code == 404

    user_id, battle_id = _start_battle(client)
    bad_side = client.post(f"/battle/{battle_id}/message", json={"side": 5, "text": "x"})
    assert bad_side.status_code == 400
    assert bad_side.json()["error"] == "invalid_argument"

    early_vote = client.post(f"/battle/{battle_id}/vote", json={"outcome": "crs1"})
    assert early_vote.status_code == 409

    client.post(f"/battle/{battle_id}/end", json={"side": 1, "sentiment": "satisfaction"})
    closed = client.post(f"/battle/{battle_id}/message", json={"side": 1, "text": "x"})
    assert closed.status_code == 409
    assert closed.json()["error"] == "conversation_closed"

    client.post(f"/battle/{battle_id}/end", json={"side": 2, "sentiment": "frustration"})
    client.post(f"/battle/{battle_id}/vote", json={"outcome": "draw"})
    second_vote = client.post(f"/battle/{battle_id}/vote", json={"outcome": "draw"})
    assert second_vote.status_code == 409
    assert second_vote.json()["error"] == "already_voted"


def test_min_turns_error_carries_required_count(tmp_path):
    service = ArenaService(stub_config(str(tmp_path / "e.jsonl"), min_user_turns=5))
    with TestClient(create_app(service)) as client:
        user_id = client.post("/session").json()["user_id"]
        battle_id = client.post(f"/session/{user_id}/battle").json()["battle_id"]
        client.post(f"/battle/{battle_id}/message", json={"side": 1, "text": "once"})
        response = client.post(
            f"/battle/{battle_id}/end", json={"side": 1, "sentiment": "satisfaction"}
        )
        assert response.status_code == 409
        body = response.json()
        assert body["error"] == "min_turns"
        assert body["required_turns"] == 5
        assert body["actual_turns"] == 1
    service.close()


def test_export_endpoint_round_trips(client):
    user_id, battle_id = _start_battle(client)
    client.post(f"/battle/{battle_id}/message", json={"side": 1, "text": "hello"})
    client.post(f"/battle/{battle_id}/end", json={"side": 1, "sentiment": "satisfaction"})
    client.post(f"/battle/{battle_id}/end", json={"side": 2, "sentiment": "frustration"})
    client.post(f"/battle/{battle_id}/vote", json={"outcome": "crs2"})

    exported = client.get("/export")
    assert exported.status_code == 200
    lines = [l for l in exported.text.splitlines() if l]
    assert len(lines) == 1
    record = ExportRecord.parse_json_line(lines[0])
    assert record.to_json_line() == lines[0]
    assert record.battle_id == battle_id

    assert client.get("/export", params={"environment": "closed"}).text == ""
    assert client.get("/export", params={"environment": "open"}).text == exported.text
    assert client.get("/export", params={"environment": "martian"}).status_code == 400


def test_message_body_shape_is_validated(client):
    _, battle_id = _start_battle(client)
    response = client.post(f"/battle/{battle_id}/message", json={"text": "no side"})
    assert response.status_code == 422


def test_cors_headers_for_browser_clients(client):
    response = client.get("/leaderboard", headers={"Origin": "http://localhost:5173"})
    assert response.headers.get("access-control-allow-origin") == "*"
