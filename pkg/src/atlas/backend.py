"""Generation backends: the deterministic template path and a remote HTTP client.

Every backend answers ``request(task, payload) -> dict``. Tasks are
``draft_threat_model``, ``generate_properties`` and ``summarize_rtl``.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import urllib.error
import urllib.request
from typing import Callable, Protocol

from atlas.errors import BackendError

log = logging.getLogger(__name__)

DETERMINISTIC = "deterministic_template"
REMOTE = "remote"
BACKEND_MODES = (DETERMINISTIC, REMOTE)


class GenerationBackend(Protocol):
    mode: str

    def request(self, task: str, payload: dict) -> dict: ...


def _default_handlers() -> dict[str, Callable[[dict], dict]]:
    # imported lazily so the backend module has no import-time cycle with its users
    from atlas.context import template_summary
    from atlas.knowledge.drafting import template_draft
    from atlas.propgen.templates import template_candidates

    return {
        "draft_threat_model": template_draft,
        "generate_properties": template_candidates,
        "summarize_rtl": template_summary,
    }


class DeterministicBackend:
    """Pure template backend; identical payloads give identical answers."""

    mode = DETERMINISTIC

    def __init__(self, handlers: dict[str, Callable[[dict], dict]] | None = None):
        self._handlers = handlers

    def request(self, task: str, payload: dict) -> dict:
        if self._handlers is None:
            self._handlers = _default_handlers()
        try:
            handler = self._handlers[task]
        except KeyError:
            raise BackendError(f"deterministic backend has no handler for task '{task}'") from None
        return handler(payload)


class RemoteBackend:
    """JSON-over-HTTP backend with a bounded number of requests in flight."""

    mode = REMOTE

    def __init__(self, url: str, token: str | None = None, max_inflight: int = 2,
                 timeout: float = 60.0):
        if not url:
            raise BackendError("remote backend needs an endpoint URL")
        if max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")
        self.url = url
        self.token = token
        self.timeout = timeout
        self.max_inflight = max_inflight
        self._slots = threading.BoundedSemaphore(max_inflight)

    @classmethod
    def from_env(cls, max_inflight: int = 2, timeout: float = 60.0) -> "RemoteBackend":
        url = os.environ.get("ATLAS_BACKEND_URL", "")
        if not url:
            raise BackendError("ATLAS_BACKEND_URL is not set")
        return cls(url, os.environ.get("ATLAS_BACKEND_TOKEN"), max_inflight, timeout)

    def request(self, task: str, payload: dict) -> dict:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        headers = {"Content-Type": "application/json", "X-Atlas-Task": task}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        req = urllib.request.Request(self.url, data=body, headers=headers, method="POST")
        with self._slots:
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    status = resp.status
                    raw = resp.read()
            except urllib.error.HTTPError as exc:
                raise BackendError(f"backend answered HTTP {exc.code}") from exc
            except (urllib.error.URLError, TimeoutError, OSError) as exc:
                raise BackendError(f"backend request failed: {exc}") from exc
        if status != 200:
            raise BackendError(f"backend answered HTTP {status}")
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise BackendError("backend response is not JSON") from exc
        if not isinstance(doc, dict):
            raise BackendError("backend response must be a JSON object")
        return doc


def make_backend(mode: str, max_inflight: int = 2, timeout: float = 60.0) -> GenerationBackend:
    if mode == DETERMINISTIC:
        return DeterministicBackend()
    if mode == REMOTE:
        return RemoteBackend.from_env(max_inflight, timeout)
    raise BackendError(f"unknown backend mode '{mode}'")
