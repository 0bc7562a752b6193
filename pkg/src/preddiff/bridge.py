"""Client side of the line-oriented model-bridge protocol (version 1).

Any external process can serve predictions to the engine over its standard
streams. The wire format is newline-delimited UTF-8 JSON:

  hello     {"preddiff_bridge": 1, "task": "regression" |
             "classification_probabilities" | "classification_logits",
             "n_features": F, "n_outputs": O}
  request   {"id": k, "inputs": [[...], ...]}
  response  {"id": k, "outputs": [[...], ...]}
  error     {"id": k, "error": "message"}

One connection carries one in-flight request at a time; parallelism comes
from a pool of identical workers. Floats are serialized with shortest
round-trip precision, so matrices survive the trip bit-exactly.
"""

from __future__ import annotations

import itertools
import json
import queue
import subprocess
import threading
from collections import deque

import numpy as np

from .errors import BridgeError
from .models import _TASKS, Model

__all__ = ["BridgeConnection", "bridge_model", "BridgePool", "pooled_bridge_model"]

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT = 30.0

_EOF = object()


class BridgeConnection:
    """One worker process with a strictly request/response conversation."""

    def __init__(self, command: list[str], timeout: float = DEFAULT_TIMEOUT) -> None:
        if isinstance(command, str):
            raise BridgeError("command must be an argument list, not a string")
        self.command = list(command)
        self.timeout = timeout
        self._ids = itertools.count()
        self._stderr: deque[str] = deque(maxlen=200)
        self._lines: queue.Queue = queue.Queue()
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise BridgeError(f"cannot spawn worker {self.command!r}: {exc}") from exc
        threading.Thread(target=self._pump_stdout, daemon=True).start()
        threading.Thread(target=self._pump_stderr, daemon=True).start()
        self.hello = self._handshake()
        self.task = self.hello["task"]
        self.n_features = self.hello["n_features"]
        self.n_outputs = self.hello["n_outputs"]

    def _pump_stdout(self) -> None:
        for line in self._proc.stdout:
            self._lines.put(line.rstrip("\n"))
        self._lines.put(_EOF)

    def _pump_stderr(self) -> None:
        for line in self._proc.stderr:
            self._stderr.append(line.rstrip("\n"))

    def _stderr_tail(self) -> str:
        return "\n".join(self._stderr) or "<no stderr output>"

    def _next_line(self) -> str:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            self.close()
            raise BridgeError(
                f"worker timed out after {self.timeout}s; stderr:\n{self._stderr_tail()}"
            ) from None
        if line is _EOF:
            self._lines.put(_EOF)  # keep raising on any later read
            raise BridgeError(
                f"worker exited unexpectedly; stderr:\n{self._stderr_tail()}"
            )
        return line

    def _handshake(self) -> dict:
        line = self._next_line()
        try:
            hello = json.loads(line)
        except json.JSONDecodeError:
            self.close()
            raise BridgeError(f"malformed hello line: {line!r}") from None
        if not isinstance(hello, dict) or hello.get("preddiff_bridge") != PROTOCOL_VERSION:
            self.close()
            raise BridgeError(f"hello line does not declare protocol 1: {line!r}")
        if hello.get("task") not in _TASKS:
            self.close()
            raise BridgeError(f"hello declares unknown task: {line!r}")
        for key in ("n_features", "n_outputs"):
            if not isinstance(hello.get(key), int) or hello[key] < 1:
                self.close()
                raise BridgeError(f"hello needs positive integer {key}: {line!r}")
        return hello

    def predict(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != self.n_features:
            raise BridgeError(
                f"request shape {rows.shape} does not match n_features={self.n_features}"
            )
        if rows.size and not np.all(np.isfinite(rows)):
            raise BridgeError("request contains non-finite values")
        request_id = next(self._ids)
        payload = json.dumps(
            {"id": request_id, "inputs": rows.tolist()}, separators=(",", ":")
        )
        try:
            self._proc.stdin.write(payload + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise BridgeError(
                f"worker pipe closed; stderr:\n{self._stderr_tail()}"
            ) from None
        line = self._next_line()
        try:
            reply = json.loads(line)
        except json.JSONDecodeError:
            raise BridgeError(f"malformed response line: {line!r}") from None
        if reply.get("id") != request_id:
            raise BridgeError(
                f"response id {reply.get('id')!r} does not match request {request_id}"
            )
        if "error" in reply:
            raise BridgeError(f"worker error: {reply['error']}")
        if "outputs" not in reply:
            raise BridgeError(f"response carries neither outputs nor error: {line!r}")
        outputs = np.asarray(reply["outputs"], dtype=float)
        if outputs.size == 0:
            outputs = outputs.reshape(0, self.n_outputs)
        if outputs.shape != (rows.shape[0], self.n_outputs):
            raise BridgeError(
                f"response shape {outputs.shape}, expected {(rows.shape[0], self.n_outputs)}"
            )
        return outputs

    def close(self) -> None:
        proc = getattr(self, "_proc", None)
        if proc is None:
            return
        for stream in (proc.stdin,):
            try:
                stream.close()
            except OSError:
                pass
        try:
            proc.wait(timeout=2.0)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    def __enter__(self) -> "BridgeConnection":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def bridge_model(command: list[str], timeout: float = DEFAULT_TIMEOUT,
                 expected_features: int | None = None) -> Model:
    """Spawn one worker and expose it as a Model.

    The handshake's declared feature count is checked against
    ``expected_features`` (typically the dataset width) before any prediction.
    """
    conn = BridgeConnection(command, timeout)
    if expected_features is not None and conn.n_features != expected_features:
        conn.close()
        raise BridgeError(
            f"worker declares n_features={conn.n_features}, data has {expected_features}"
        )
    model = Model(conn.predict, conn.task, conn.n_outputs,
                  n_features=conn.n_features, name="bridge")
    model.connection = conn
    model.close = conn.close
    return model


class BridgePool:
    """Fixed pool of identical workers checked out one request at a time."""

    def __init__(self, command: list[str], size: int,
                 timeout: float = DEFAULT_TIMEOUT) -> None:
        if size < 1:
            raise BridgeError("pool size must be >= 1")
        self.connections = [BridgeConnection(command, timeout) for _ in range(size)]
        first = self.connections[0].hello
        for conn in self.connections[1:]:
            if conn.hello != first:
                self.close()
                raise BridgeError("pool workers disagree on their hello declaration")
        self._idle: queue.Queue = queue.Queue()
        for conn in self.connections:
            self._idle.put(conn)

    @property
    def hello(self) -> dict:
        return self.connections[0].hello

    def predict(self, rows: np.ndarray) -> np.ndarray:
        conn = self._idle.get()
        try:
            return conn.predict(rows)
        finally:
            self._idle.put(conn)

    def close(self) -> None:
        for conn in self.connections:
            conn.close()

    def __enter__(self) -> "BridgePool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def pooled_bridge_model(command: list[str], size: int,
                        timeout: float = DEFAULT_TIMEOUT,
                        expected_features: int | None = None) -> Model:
    """A Model backed by a worker pool; safe to call from several threads."""
    pool = BridgePool(command, size, timeout)
    hello = pool.hello
    if expected_features is not None and hello["n_features"] != expected_features:
        pool.close()
        raise BridgeError(
            f"workers declare n_features={hello['n_features']}, data has {expected_features}"
        )
    model = Model(pool.predict, hello["task"], hello["n_outputs"],
                  n_features=hello["n_features"], name="bridge-pool")
    model.pool = pool
    model.close = pool.close
    return model
