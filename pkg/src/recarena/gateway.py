"""Uniform adapter over CRS backends.

External systems attach over a minimal HTTP contract: POST {endpoint}/respond
with ``{"context": [{"role": ..., "text": ...}]}`` and reply
``{"response": ...}``. For desk-scale runs and tests, three deterministic
in-process stubs are available behind ``stub://`` endpoints; they derive all
state from the request context, so identical context always yields an
identical response.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from importlib import resources
from typing import Any, Callable

import httpx

from .errors import (
    BackendTimeoutError,
    BackendUnavailableError,
    InvalidArgumentError,
    ProtocolError,
    RegistryError,
)
from .models import CrsDescriptor, Role

DEFAULT_TIMEOUT_MS = 30_000

STUB_PREFIX = "stub://"
STUB_KINDS = ("echo", "popular", "keyword")

ECHO_TEMPLATE = "You said: {text}"
POPULAR_TEMPLATE = 'How about "{title}"? It is one of the most popular picks right now.'
KEYWORD_TEMPLATE = 'Since you mentioned {keyword}, you might enjoy "{title}".'

_TOKEN_RE = re.compile(r"[a-z0-9'-]+")


@dataclass(frozen=True, slots=True)
class Turn:
    role: Role
    text: str

    def to_dict(self) -> dict[str, str]:
        return {"role": self.role.value, "text": self.text}


@dataclass(frozen=True, slots=True)
class CrsRequest:
    """Full conversation so far; the last element is the newest user utterance."""

    context: tuple[Turn, ...]

    def __post_init__(self) -> None:
        if not self.context:
            raise InvalidArgumentError("request context must be non-empty")
        if self.context[-1].role is not Role.USER:
            raise InvalidArgumentError("last context element must be a user turn")

    def to_wire(self) -> dict[str, Any]:
        return {"context": [turn.to_dict() for turn in self.context]}


@dataclass(frozen=True, slots=True)
class CrsResponse:
    response: str
    latency_ms: int

    def __post_init__(self) -> None:
        if not self.response.strip():
            raise InvalidArgumentError("response must be non-empty")
        if self.latency_ms < 0:
            raise InvalidArgumentError("latency_ms must be >= 0")


@dataclass(frozen=True, slots=True)
class CatalogItem:
    title: str
    keywords: tuple[str, ...]


def load_catalog(path: str | None = None) -> tuple[CatalogItem, ...]:
    """Read the recommendation catalog (one ``title TAB kw,kw,...`` per line)."""
    if path is None:
        text = (resources.files("recarena") / "data" / "catalog.tsv").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    items = []
    for line in text.splitlines():
        if not line.strip():
            continue
        title, _, keywords = line.partition("\t")
        items.append(
            CatalogItem(
                title=title.strip(),
                keywords=tuple(k.strip().lower() for k in keywords.split(",") if k.strip()),
            )
        )
    return tuple(items)


_CATALOG: tuple[CatalogItem, ...] | None = None


def _catalog() -> tuple[CatalogItem, ...]:
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = load_catalog()
    return _CATALOG


def register_stub(kind: str) -> CrsDescriptor:
    if kind not in STUB_KINDS:
        raise InvalidArgumentError(f"unknown stub kind {kind!r}, expected one of {STUB_KINDS}")
    return CrsDescriptor(
        crs_id=f"stub_{kind}",
        display_name=f"Built-in {kind} recommender",
        endpoint=f"{STUB_PREFIX}{kind}",
    )


def _stub_echo(request: CrsRequest) -> str:
    return ECHO_TEMPLATE.format(text=request.context[-1].text)


def _already_recommended(request: CrsRequest) -> set[str]:
    """Titles mentioned by the system earlier in this conversation."""
    mentioned = set()
    for turn in request.context:
        if turn.role is Role.SYSTEM:
            for item in _catalog():
                if item.title in turn.text:
                    mentioned.add(item.title)
    return mentioned


def _stub_popular(request: CrsRequest) -> str:
    seen = _already_recommended(request)
    for item in _catalog():
        if item.title not in seen:
            return POPULAR_TEMPLATE.format(title=item.title)
    # Catalog exhausted within one conversation: start over from the top.
    return POPULAR_TEMPLATE.format(title=_catalog()[0].title)


def _stub_keyword(request: CrsRequest) -> str:
    tokens = set(_TOKEN_RE.findall(request.context[-1].text.lower()))
    for item in _catalog():
        for keyword in item.keywords:
            if keyword in tokens:
                return KEYWORD_TEMPLATE.format(keyword=keyword, title=item.title)
    return _stub_popular(request)


_STUBS: dict[str, Callable[[CrsRequest], str]] = {
    "echo": _stub_echo,
    "popular": _stub_popular,
    "keyword": _stub_keyword,
}


def respond(
    crs: CrsDescriptor, request: CrsRequest, timeout_ms: int = DEFAULT_TIMEOUT_MS
) -> CrsResponse:
    """Ask a CRS backend for the next system utterance.

    The backend text is returned verbatim apart from trailing whitespace.
    Timeouts, connection failures and malformed replies raise typed errors;
    the service layer substitutes the fallback placeholder utterance.
    """
    if timeout_ms <= 0:
        raise InvalidArgumentError("timeout_ms must be positive")
    started = time.monotonic()
    if crs.endpoint.startswith(STUB_PREFIX):
        kind = crs.endpoint[len(STUB_PREFIX):]
        if kind not in _STUBS:
            raise RegistryError(f"unknown stub endpoint {crs.endpoint!r}")
        text = _STUBS[kind](request)
    else:
        text = _http_respond(crs.endpoint, request, timeout_ms)
    text = text.rstrip()
    if not text:
        raise ProtocolError(f"{crs.crs_id}: backend returned an empty response")
    latency_ms = int((time.monotonic() - started) * 1000)
    return CrsResponse(response=text, latency_ms=latency_ms)


def _http_respond(endpoint: str, request: CrsRequest, timeout_ms: int) -> str:
    url = endpoint.rstrip("/") + "/respond"
    try:
        reply = httpx.post(url, json=request.to_wire(), timeout=timeout_ms / 1000.0)
    except httpx.TimeoutException as exc:
        raise BackendTimeoutError(f"no reply from {url} within {timeout_ms} ms") from exc
    except httpx.HTTPError as exc:
        raise BackendUnavailableError(f"cannot reach {url}: {exc}") from exc
    if reply.status_code != 200:
        raise ProtocolError(f"{url} answered HTTP {reply.status_code}")
    try:
        payload = reply.json()
    except ValueError as exc:
        raise ProtocolError(f"{url} returned non-JSON body") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("response"), str):
        raise ProtocolError(f"{url} reply is missing a string 'response' field")
    return payload["response"]
