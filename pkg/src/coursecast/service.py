"""HTTP scoring service over a loaded checkpoint.

Endpoints (JSON over HTTP/1.1):
  GET  /healthz     -> {"status": "ok", "checkpoint": "<id>"}
  GET  /v1/catalog  -> {"courses": [...], "failure_rates": {...}}
  POST /v1/score    -> planner response for a PlanQuery body

The model is loaded once and shared read-only by all request threads.
Error contract: 400 malformed or invalid request, 422 unknown course,
500 internal failure; bodies always carry a machine-readable "error".
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import nnet
from .planner import PlanError, query_from_document, score_plans
from .transcripts import CourseCatalog, UnknownCourseError

log = logging.getLogger(__name__)


class PlannerApp:
    """Request-independent state: parameters, catalog, failure rates."""

    def __init__(
        self,
        params: nnet.ModelParams,
        catalog: CourseCatalog,
        checkpoint: str,
        failure_rates: dict[str, float] | None = None,
    ):
        self.params = params
        self.catalog = catalog
        self.checkpoint = checkpoint
        self.failure_rates = dict(failure_rates or {})

    def health(self) -> dict:
        return {"status": "ok", "checkpoint": self.checkpoint}

    def catalog_document(self) -> dict:
        return {"courses": list(self.catalog.courses), "failure_rates": self.failure_rates}

    def score(self, body: dict) -> dict:
        query = query_from_document(body)
        response = score_plans(self.params, self.catalog, query, checkpoint=self.checkpoint)
        return response.to_document()


def rates_sidecar_path(model_path) -> Path:
    return Path(model_path).with_suffix(".rates.json")


def app_from_checkpoint(model_path, failure_rates_path=None) -> PlannerApp:
    """Load a checkpoint (and, when present, its failure-rate sidecar)."""
    params, catalog, checkpoint = nnet.load_checkpoint(model_path)
    rates: dict[str, float] = {}
    path = Path(failure_rates_path) if failure_rates_path else rates_sidecar_path(model_path)
    if path.is_file():
        with open(path, encoding="utf-8") as f:
            rates = {str(k): float(v) for k, v in json.load(f).items()}
    return PlannerApp(params, catalog, checkpoint, rates)


def _make_handler(app: PlannerApp, cors_origin: str):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # route through logging, not stderr
            log.debug("%s %s", self.address_string(), fmt % args)

        def _send(self, status: int, document: dict) -> None:
            body = json.dumps(document).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", cors_origin)
            self.end_headers()
            self.wfile.write(body)

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", cors_origin)
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            if self.path == "/healthz":
                self._send(200, app.health())
            elif self.path == "/v1/catalog":
                self._send(200, app.catalog_document())
            else:
                self._send(404, {"error": "not_found", "path": self.path})

        def do_POST(self):
            if self.path != "/v1/score":
                self._send(404, {"error": "not_found", "path": self.path})
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length).decode("utf-8"))
            except (ValueError, UnicodeDecodeError):
                self._send(400, {"error": "malformed_request"})
                return
            try:
                self._send(200, app.score(body))
            except PlanError as err:
                self._send(400, {"error": err.code, "detail": str(err)})
            except UnknownCourseError as err:
                self._send(422, {"error": "unknown_course", "course": err.course_id})
            except Exception:
                log.exception("scoring failed")
                self._send(500, {"error": "internal"})

    return Handler


def build_server(
    app: PlannerApp, host: str = "127.0.0.1", port: int = 0, cors_origin: str = "*"
) -> ThreadingHTTPServer:
    """Bind (but do not start) the service; port 0 picks a free port."""
    return ThreadingHTTPServer((host, port), _make_handler(app, cors_origin))


def start_in_background(server: ThreadingHTTPServer) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
