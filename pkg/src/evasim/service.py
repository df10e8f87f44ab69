"""Reference defender prediction service speaking the probe wire protocol.

Endpoints:
    POST /predict   body {"features": [f, ...]}, optional X-Api-Key header
                    -> 200 {"label": 0|1}
                    -> 422 {"error": "dimension mismatch", "expected": d}
                    -> 429 {"error": "budget exhausted"}
    GET  /health    -> 200 {"status": "ok"}

Responses carry the label and nothing else; the model kind is never
revealed.  When a per-key budget is configured, each distinct X-Api-Key
value (missing key counts as the anonymous key) gets that many predictions.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .models import Model

_ANONYMOUS = ""


class DefenderService:
    """Long-running loopback service around a trained model."""

    def __init__(self, model: Model, host: str = "127.0.0.1", port: int = 0,
                 budget_per_key: int | None = None):
        self._model = model
        self.budget_per_key = budget_per_key
        self._lock = threading.Lock()
        self._used: dict[str, int] = {}
        service = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"
            # small request/response pairs stall 40ms per probe under Nagle
            disable_nagle_algorithm = True

            def log_message(self, *args):  # quiet
                pass

            def _send(self, status: int, doc: dict):
                body = json.dumps(doc).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                if self.path == "/health":
                    self._send(200, {"status": "ok"})
                else:
                    self._send(404, {"error": "not found"})

            def do_POST(self):
                if self.path != "/predict":
                    self._send(404, {"error": "not found"})
                    return
                try:
                    length = int(self.headers.get("Content-Length", "0"))
                    doc = json.loads(self.rfile.read(length).decode("utf-8"))
                    features = doc["features"]
                    vector = np.asarray(
                        [float(v) for v in features], dtype=np.float64
                    )
                except (KeyError, TypeError, ValueError, json.JSONDecodeError):
                    self._send(400, {"error": "malformed request"})
                    return
                status, reply = service.handle_predict(
                    vector, self.headers.get("X-Api-Key")
                )
                self._send(status, reply)

        self._server = ThreadingHTTPServer((host, port), Handler)
        self._server.daemon_threads = True
        self._thread: threading.Thread | None = None

    # -- model access -----------------------------------------------------

    def handle_predict(self, vector: np.ndarray, api_key: str | None):
        with self._lock:
            model = self._model
            if vector.shape != (model.d,):
                return 422, {"error": "dimension mismatch", "expected": model.d}
            if self.budget_per_key is not None:
                key = api_key if api_key is not None else _ANONYMOUS
                if self._used.get(key, 0) >= self.budget_per_key:
                    return 429, {"error": "budget exhausted"}
                self._used[key] = self._used.get(key, 0) + 1
        return 200, {"label": int(model.predict(vector))}

    def set_model(self, model: Model, reset_budgets: bool = True):
        """Swap the served model (operator-side action, not client-visible)."""
        with self._lock:
            self._model = model
            if reset_budgets:
                self._used.clear()

    # -- lifecycle ---------------------------------------------------------

    @property
    def host(self) -> str:
        return self._server.server_address[0]

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def start(self) -> "DefenderService":
        if self._thread is None:
            self._thread = threading.Thread(
                target=self._server.serve_forever, daemon=True
            )
            self._thread.start()
        return self

    def stop(self):
        if self._thread is not None:
            self._server.shutdown()
            self._thread.join()
            self._thread = None
        self._server.server_close()

    def serve_forever(self):
        self._server.serve_forever()

    def __enter__(self) -> "DefenderService":
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def serve_defender(model: Model, host: str = "127.0.0.1", port: int = 0,
                   budget_per_key: int | None = None) -> DefenderService:
    """Start a defender service in a background thread; caller stops it."""
    return DefenderService(model, host=host, port=port,
                           budget_per_key=budget_per_key).start()
