"""Subprocess client for the aesreward stream server.

Spawns ``aesreward serve``, correlates newline-delimited JSON requests and
responses by id, and exposes the engine's operations as plain functions.
All math stays in the engine; this module only moves JSON around.

Thread-safe: any number of threads may issue requests against one handle; a
single background reader demultiplexes responses.
"""

from __future__ import annotations

import json
import subprocess
import sys
import threading
from typing import Any, Mapping, Sequence

DEFAULT_ENGINE_CMD = (sys.executable, "-m", "aesreward")


class EngineClientError(Exception):
    """The engine answered with an error response."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class TransportError(Exception):
    """The engine process went away before answering; safe to retry against
    a fresh handle."""


class StartupError(Exception):
    """The engine could not be spawned or died during the handshake."""


class _Pending:
    __slots__ = ("event", "response")

    def __init__(self):
        self.event = threading.Event()
        self.response: dict | None = None


class EngineHandle:
    """A running engine process plus the request-correlation table.

    Use :func:`start` (or the context-manager form) rather than constructing
    directly.  Request ids are never reused within a handle's lifetime.
    """

    def __init__(self, process: subprocess.Popen):
        self._process = process
        self._pending: dict[str, _Pending] = {}
        self._lock = threading.Lock()
        self._write_lock = threading.Lock()
        self._counter = 0
        self._closed = False
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    # -- lifecycle ---------------------------------------------------------

    def close(self) -> None:
        """Request shutdown, drain, and reap the process."""
        if self._closed:
            return
        self._closed = True
        try:
            with self._write_lock:
                self._process.stdin.write(json.dumps({"op": "shutdown"}) + "\n")
                self._process.stdin.flush()
                self._process.stdin.close()
        except (BrokenPipeError, OSError, ValueError):
            pass
        try:
            self._process.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self._process.kill()
            self._process.wait()
        self._reader.join(timeout=10)

    def __enter__(self) -> "EngineHandle":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # -- request plumbing ----------------------------------------------------

    def _read_loop(self) -> None:
        stdout = self._process.stdout
        for line in iter(stdout.readline, ""):
            line = line.strip()
            if not line:
                continue
            try:
                response = json.loads(line)
            except json.JSONDecodeError:
                continue
            rid = response.get("id")
            with self._lock:
                pending = self._pending.pop(rid, None)
            if pending is not None:
                pending.response = response
                pending.event.set()
        # EOF: everything still pending resolves as a transport failure.
        with self._lock:
            leftovers = list(self._pending.values())
            self._pending.clear()
        for pending in leftovers:
            pending.event.set()

    def _next_id(self) -> str:
        with self._lock:
            self._counter += 1
            return f"c{self._counter}"

    def request(self, op: str, payload: Mapping[str, Any] | None = None,
                timeout: float = 120.0) -> Any:
        """Issue one request and block for its response."""
        if self._closed:
            raise TransportError("handle is closed")
        rid = self._next_id()
        pending = _Pending()
        with self._lock:
            self._pending[rid] = pending
        obj: dict[str, Any] = {"id": rid, "op": op}
        if payload is not None:
            obj["payload"] = payload
        line = json.dumps(obj, ensure_ascii=False) + "\n"
        try:
            with self._write_lock:
                self._process.stdin.write(line)
                self._process.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as exc:
            with self._lock:
                self._pending.pop(rid, None)
            raise TransportError(f"engine went away: {exc}") from exc
        if not pending.event.wait(timeout):
            with self._lock:
                self._pending.pop(rid, None)
            raise TransportError(f"timed out waiting for response to {rid}")
        if pending.response is None:
            raise TransportError("engine exited before answering "
                                 f"(exit code {self._process.poll()})")
        response = pending.response
        if response.get("ok"):
            return response.get("result")
        error = response.get("error") or {}
        raise EngineClientError(str(error.get("code", "UNKNOWN")),
                                str(error.get("message", "")))

    # -- plain-function API ----------------------------------------------------

    def ping(self) -> bool:
        return self.request("ping") == {"status": "pong"}

    def parse(self, raw_output: str, variant: str = "cot") -> dict:
        return self.request("parse", {"raw_output": raw_output, "variant": variant})

    def reward(self, raw_output: str, gt: Mapping[str, int],
               variant: str = "cot", teacher: str | None = None) -> dict:
        payload: dict[str, Any] = {
            "raw_output": raw_output, "gt": dict(gt), "variant": variant,
        }
        if teacher is not None:
            payload["teacher_trace"] = teacher
        return self.request("reward", payload)

    def synthesize(self, pool: Mapping[str, Any]) -> dict:
        return self.request("synthesize", dict(pool))

    def evaluate(self, pairs: Sequence[Mapping[str, Any]]) -> dict:
        return self.request("eval", {"pairs": [dict(p) for p in pairs]})

    def weights(self, record: Mapping[str, Any]) -> dict:
        return self.request("weights", dict(record))

    def rwr_weights(self, scores: Sequence[float], group_id: str = "rwr") -> list[float]:
        result = self.weights({"group_id": group_id, "scores": list(scores)})
        return result["weights"]

    def rwr_weights_from_criteria(self, criteria_scores: Sequence[Sequence[int]],
                                  group_id: str = "rwr") -> list[float]:
        result = self.weights({
            "group_id": group_id,
            "criteria_scores": [list(row) for row in criteria_scores],
        })
        return result["weights"]

    def grpo_advantages(self, rewards: Sequence[float], group_id: str = "grpo") -> list[float]:
        result = self.weights({"group_id": group_id, "rewards": list(rewards)})
        return result["advantages"]

    def pref_grpo_advantages(self, pairwise: Sequence[Sequence[int]],
                             group_id: str = "pref") -> tuple[list[float], list[float]]:
        result = self.weights({
            "group_id": group_id,
            "pairwise": [list(row) for row in pairwise],
        })
        return result["win_rates"], result["advantages"]


def start(engine_cmd: Sequence[str] | None = None,
          config: str | None = None,
          extra_args: Sequence[str] = ()) -> EngineHandle:
    """Spawn the engine's stream server and verify it with a ping.

    ``engine_cmd`` defaults to running the installed engine module with the
    current interpreter.  A config file path is passed through as
    ``--config``; engine startup failures (including config errors, exit
    code 2) surface as :class:`StartupError` with captured diagnostics.
    """
    cmd = list(engine_cmd or DEFAULT_ENGINE_CMD)
    if config is not None:
        cmd += ["--config", config]
    cmd += list(extra_args)
    cmd.append("serve")
    try:
        process = subprocess.Popen(
            cmd,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
    except OSError as exc:
        raise StartupError(f"cannot spawn engine {cmd[0]!r}: {exc}") from exc

    handle = EngineHandle(process)
    try:
        if not handle.ping():
            raise TransportError("unexpected ping response")
    except (TransportError, EngineClientError) as exc:
        try:
            code = process.wait(timeout=5)
        except subprocess.TimeoutExpired:
            code = None
        stderr = ""
        if code is not None:
            try:
                stderr = process.stderr.read()
            except (OSError, ValueError):
                pass
        handle.close()
        raise StartupError(
            f"engine failed during handshake (exit code {code}): "
            f"{stderr.strip() or exc}"
        ) from exc
    return handle
