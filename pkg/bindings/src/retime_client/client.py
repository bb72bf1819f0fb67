"""Client for the retime CLI's JSON-lines plan service.

A PlanClient owns one spawned `retime --serve-plans` process and speaks
the line protocol over its stdin/stdout: one JSON request per line, one
JSON response per line, strictly in order.  Lines starting with '#' are
configuration banners and are skipped.  No resampling or schedule math
happens client-side; every answer comes from the primary process.
"""

from __future__ import annotations

import json
import os
import subprocess
from typing import Sequence

DEFAULT_COMMAND = ("retime", "--serve-plans")


class PlanServiceError(RuntimeError):
    """An error reported by the primary for one request."""


class PlanClient:
    def __init__(self, command: Sequence[str] | None = None):
        if command is None:
            override = os.environ.get("RETIME_CLI")
            command = (*override.split(), "--serve-plans") if override else DEFAULT_COMMAND
        self._proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self.requests_sent = 0

    def _round_trip(self, request: dict) -> dict:
        if self._proc.poll() is not None:
            raise ConnectionError(
                f"plan service exited with code {self._proc.returncode}"
            )
        try:
            self._proc.stdin.write(json.dumps(request) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ConnectionError("plan service closed its input") from exc
        self.requests_sent += 1
        while True:
            line = self._proc.stdout.readline()
            if not line:
                raise ConnectionError("plan service closed its output")
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            response = json.loads(line)
            if "error" in response:
                raise PlanServiceError(response["error"])
            return response

    def plan(self, n: int, l: int, alpha: float) -> list[int]:
        """1-based source indices for (n, l, alpha), straight from the primary."""
        response = self._round_trip({"n": n, "l": l, "alpha": alpha})
        return response["indices"]

    def schedule_stream(self, descriptor: str, count: int) -> list[float]:
        """The first `count` draws of the primary schedule `descriptor`."""
        response = self._round_trip({"schedule": descriptor, "count": count})
        return response["alphas"]

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)

    def __enter__(self) -> "PlanClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
