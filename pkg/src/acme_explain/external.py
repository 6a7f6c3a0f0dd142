"""Adapter for model processes speaking the line-oriented JSON protocol.

One request per line on the child's stdin:

    {"id": <int>, "rows": [[<number|string>, ...], ...]}

and one response per line on its stdout:

    {"id": <int>, "predictions": [<number> | [<number>, ...], ...]}

ids must echo and responses arrive in request order.  The child is
spawned once and reused across batches; batches are serialized.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import threading
from typing import Optional, Sequence

import numpy as np

from .models import CLASSIFICATION, ModelError, Predictor, REGRESSION


class AdapterError(ModelError):
    """Child process failure, protocol violation, or timeout."""


class ExternalModel(Predictor):
    """Predictor backed by a child process.

    The command may be a string (split shell-style) or an argv list.
    """

    def __init__(self, command, task: str = REGRESSION,
                 n_classes: Optional[int] = None, timeout: float = 30.0):
        if task == CLASSIFICATION and not n_classes:
            raise AdapterError("classification adapters must declare n_classes")
        self.task = task
        self.n_classes = n_classes
        self.timeout = timeout
        self._argv = shlex.split(command) if isinstance(command, str) else list(command)
        self._lock = threading.Lock()
        self._next_id = 0
        try:
            self._proc = subprocess.Popen(
                self._argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise AdapterError(f"cannot start external model {self._argv}: {exc}") from exc

    def close(self) -> None:
        proc = getattr(self, "_proc", None)
        if proc is not None and proc.poll() is None:
            proc.terminate()
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()

    def __del__(self):
        self.close()

    def _fail(self, why: str) -> "AdapterError":
        diag = ""
        try:
            # give an exiting child a moment so its stderr can be harvested
            self._proc.wait(timeout=0.5)
        except subprocess.TimeoutExpired:
            pass
        if self._proc.poll() is not None:
            try:
                diag = self._proc.stderr.read() or ""
            except Exception:
                diag = ""
        msg = f"external model error: {why}"
        if diag.strip():
            msg += f" | child stderr: {diag.strip()[-2000:]}"
        return AdapterError(msg)

    def _predict(self, rows):
        with self._lock:
            if self._proc.poll() is not None:
                raise self._fail(f"child exited with code {self._proc.returncode}")
            req_id = self._next_id
            self._next_id += 1
            payload = json.dumps({"id": req_id, "rows": [list(r) for r in rows]})
            timer = threading.Timer(self.timeout, self._proc.kill)
            timer.start()
            try:
                try:
                    self._proc.stdin.write(payload + "\n")
                    self._proc.stdin.flush()
                except (BrokenPipeError, OSError):
                    raise self._fail("child closed stdin") from None
                line = self._proc.stdout.readline()
            finally:
                timed_out = not timer.is_alive()
                timer.cancel()
            if timed_out:
                raise AdapterError(
                    f"external model timed out after {self.timeout} s on a batch"
                )
            if line == "":
                raise self._fail("child produced no response line")
            try:
                resp = json.loads(line)
            except json.JSONDecodeError as exc:
                raise self._fail(f"malformed response line: {exc}") from None
            if not isinstance(resp, dict) or resp.get("id") != req_id:
                raise self._fail(f"response id {resp.get('id')!r} != request id {req_id}")
            preds = resp.get("predictions")
            if not isinstance(preds, list):
                raise self._fail("response is missing a 'predictions' list")
            if len(preds) != len(rows):
                raise self._fail(
                    f"wrong row count: expected {len(rows)} predictions, got {len(preds)}"
                )
            try:
                out = np.asarray(preds, dtype=float)
            except (TypeError, ValueError):
                raise self._fail("predictions are not numeric") from None
        if self.task == CLASSIFICATION:
            if out.ndim != 2 or out.shape[1] != self.n_classes:
                raise self._fail(
                    f"expected {len(rows)}x{self.n_classes} probability rows, "
                    f"got shape {out.shape}"
                )
        elif out.ndim != 1:
            raise self._fail(f"expected a flat score vector, got shape {out.shape}")
        return out


def spawn_external_model(command, task: str = REGRESSION,
                         n_classes: Optional[int] = None,
                         timeout: float = 30.0) -> ExternalModel:
    """Start a child process and wrap it as a Predictor."""
    return ExternalModel(command, task=task, n_classes=n_classes, timeout=timeout)
