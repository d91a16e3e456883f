"""Newline-delimited JSON request/response processor over standard streams.

Requests look like ``{"id": ..., "op": "reward", "payload": {...}}``;
responses echo the id with either ``{"ok": true, "result": ...}`` or
``{"ok": false, "error": {"code", "message"}}``.  Malformed lines produce a
BAD_REQUEST response and the stream keeps serving.  A ``{"op": "shutdown"}``
request drains remaining work and exits without a response of its own.

Requests are processed in order; responses are written atomically one per
line, so external trainers can drive rewards in-flight.
"""

from __future__ import annotations

import json
from typing import TextIO

from .config import EngineConfig
from .errors import EngineError
from .jsonio import dumps
from .ops import HANDLERS, Engine, error_json


def _respond(out: TextIO, request_id, ok: bool, body: dict) -> None:
    key = "result" if ok else "error"
    out.write(dumps({"id": request_id, "ok": ok, key: body}))
    out.write("\n")
    out.flush()


def serve_stream(config: EngineConfig, stdin: TextIO, stdout: TextIO) -> int:
    """Serve requests until shutdown or end of input; returns the exit code."""
    engine = Engine(config)
    for line in iter(stdin.readline, ""):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            request = json.loads(stripped)
        except json.JSONDecodeError as exc:
            _respond(stdout, None, False,
                     {"code": "BAD_REQUEST", "message": f"invalid JSON: {exc.msg}"})
            continue
        if not isinstance(request, dict):
            _respond(stdout, None, False,
                     {"code": "BAD_REQUEST", "message": "request must be an object"})
            continue
        request_id = request.get("id")
        op = request.get("op")
        if op == "shutdown":
            break
        if op == "ping":
            _respond(stdout, request_id, True, {"status": "pong"})
            continue
        handler = HANDLERS.get(op)
        if handler is None:
            _respond(stdout, request_id, False,
                     {"code": "BAD_REQUEST", "message": f"unknown op {op!r}"})
            continue
        payload = request.get("payload")
        if not isinstance(payload, dict):
            _respond(stdout, request_id, False,
                     {"code": "BAD_REQUEST", "message": "payload must be an object"})
            continue
        try:
            result = handler(engine, payload)
        except EngineError as exc:
            _respond(stdout, request_id, False, error_json(exc))
            continue
        except Exception as exc:  # totality: the stream must survive anything
            _respond(stdout, request_id, False,
                     {"code": "INTERNAL", "message": f"{type(exc).__name__}: {exc}"})
            continue
        _respond(stdout, request_id, True, result)
    return 0
