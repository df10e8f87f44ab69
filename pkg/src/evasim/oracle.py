"""Black-box view of the defender: predict-only access with probe accounting.

A :class:`ProbeOracle` answers 0/1 labels and nothing else.  Explore-phase
probes are capped by an optional budget; seed-phase probes are tracked in a
separate counter and never draw on the explore budget.  Remote access uses
the JSON wire protocol of :mod:`evasim.service` and counts a probe only when
a response actually arrives.
"""

from __future__ import annotations

import http.client
import json
import socket
import time
from dataclasses import dataclass, field
from typing import Callable
from urllib.parse import urlparse

import numpy as np


class BudgetExhaustedError(Exception):
    """Raised when an explore probe would exceed the probing budget."""


class TransportError(Exception):
    """Remote probe failed to produce a response; no budget was consumed."""


PHASES = ("seed", "explore")


@dataclass
class ProbeLedger:
    """Per-phase probe counts plus first/last probe times (seconds)."""

    seed_probes: int = 0
    explore_probes: int = 0
    first_probe_at: dict = field(default_factory=dict)
    last_probe_at: dict = field(default_factory=dict)

    def record(self, phase: str):
        now = time.time()
        if phase == "seed":
            self.seed_probes += 1
        else:
            self.explore_probes += 1
        self.first_probe_at.setdefault(phase, now)
        self.last_probe_at[phase] = now

    @property
    def total(self) -> int:
        return self.seed_probes + self.explore_probes


class ProbeOracle:
    """Budgeted predict-only wrapper around an opaque label function.

    ``predict_fn`` maps a length-d vector to a 0/1 label.  The wrapper never
    exposes scores, margins, or anything about the backing model.
    """

    def __init__(
        self,
        predict_fn: Callable[[np.ndarray], int],
        d: int,
        budget: int | None = None,
        record_history: bool = False,
    ):
        if budget is not None and budget < 0:
            raise ValueError("budget must be non-negative")
        self._predict_fn = predict_fn
        self.d = int(d)
        self.budget = budget
        self.ledger = ProbeLedger()
        self.history: list[tuple[str, np.ndarray, int]] | None = (
            [] if record_history else None
        )

    @property
    def probes_used(self) -> int:
        return self.ledger.explore_probes

    @property
    def seed_probes_used(self) -> int:
        return self.ledger.seed_probes

    @property
    def remaining_budget(self) -> int | None:
        if self.budget is None:
            return None
        return self.budget - self.ledger.explore_probes

    def predict(self, x: np.ndarray, phase: str = "explore") -> int:
        if phase not in PHASES:
            raise ValueError(f"unknown probe phase {phase!r}")
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d,):
            raise ValueError(
                f"dimension mismatch: expected {self.d} features, got {x.shape}"
            )
        if (
            phase == "explore"
            and self.budget is not None
            and self.ledger.explore_probes >= self.budget
        ):
            raise BudgetExhaustedError(
                f"explore budget of {self.budget} probes exhausted"
            )
        label = int(self._predict_fn(x))
        self.ledger.record(phase)
        if self.history is not None:
            self.history.append((phase, x.copy(), label))
        return label


class _NoDelayConnection(http.client.HTTPConnection):
    """Keep-alive connection with Nagle disabled (small-payload latency)."""

    def connect(self):
        super().connect()
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)


class RemoteClient:
    """Keep-alive JSON client for a defender prediction service."""

    def __init__(self, endpoint: str, api_key: str | None = None,
                 retries: int = 3, backoff: float = 0.05, timeout: float = 10.0):
        parsed = urlparse(endpoint)
        if parsed.scheme != "http" or not parsed.hostname:
            raise ValueError(f"unsupported endpoint {endpoint!r} (need http://host:port)")
        self.host = parsed.hostname
        self.port = parsed.port or 80
        self.api_key = api_key
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self._conn: http.client.HTTPConnection | None = None

    def _connection(self) -> http.client.HTTPConnection:
        if self._conn is None:
            self._conn = _NoDelayConnection(
                self.host, self.port, timeout=self.timeout
            )
        return self._conn

    def close(self):
        if self._conn is not None:
            self._conn.close()
            self._conn = None

    def _roundtrip(self, body: bytes) -> tuple[int, dict]:
        headers = {"Content-Type": "application/json"}
        if self.api_key is not None:
            headers["X-Api-Key"] = self.api_key
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                conn = self._connection()
                conn.request("POST", "/predict", body=body, headers=headers)
                resp = conn.getresponse()
                payload = resp.read()
                return resp.status, json.loads(payload.decode("utf-8"))
            except (OSError, http.client.HTTPException, json.JSONDecodeError) as err:
                last_error = err
                self.close()
                time.sleep(self.backoff * (attempt + 1))
        raise TransportError(f"no response after {self.retries} attempts: {last_error}")

    def predict(self, x: np.ndarray) -> int:
        body = json.dumps({"features": [float(v) for v in x]}).encode("utf-8")
        status, doc = self._roundtrip(body)
        if status == 200:
            return int(doc["label"])
        if status == 422:
            raise ValueError(
                f"dimension mismatch: service expects {doc.get('expected')} features"
            )
        if status == 429:
            raise BudgetExhaustedError("service probe budget exhausted")
        raise TransportError(f"unexpected status {status}: {doc}")

    def health(self) -> dict:
        conn = self._connection()
        conn.request("GET", "/health")
        resp = conn.getresponse()
        return json.loads(resp.read().decode("utf-8"))


def remote_predict(endpoint: str, x: np.ndarray, api_key: str | None = None) -> int:
    """One-shot remote probe; see RemoteClient for the pooled variant."""
    client = RemoteClient(endpoint, api_key=api_key)
    try:
        return client.predict(np.asarray(x, dtype=np.float64))
    finally:
        client.close()


def local_oracle(model, budget: int | None = None,
                 record_history: bool = False) -> ProbeOracle:
    """Wrap an in-process model as a probe oracle."""
    return ProbeOracle(model.predict, model.d, budget=budget,
                       record_history=record_history)


def remote_oracle(endpoint: str, d: int, budget: int | None = None,
                  api_key: str | None = None,
                  record_history: bool = False) -> ProbeOracle:
    """Wrap a remote prediction service as a probe oracle.

    Transport failures raise TransportError without consuming budget;
    observationally equivalent to a local oracle over the same model.
    """
    client = RemoteClient(endpoint, api_key=api_key)
    return ProbeOracle(client.predict, d, budget=budget,
                       record_history=record_history)
