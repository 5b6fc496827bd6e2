"""HTTP facade over a running engine.

JSON views for state, KPIs, approvals, alerts, and plans; decision and
acknowledgment posts; and ``/api/events``, a server-sent-events feed that
relays audit records the moment they are appended.  The engine serializes
every mutation behind its own lock, so the threaded server needs no locking
of its own beyond subscribing listeners atomically with the backlog snapshot.
"""

from __future__ import annotations

import json
import queue
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from .domain import ValidationError
from .engine import Engine
from .jsonutil import jsonable
from .procurement import WrongState


class ApiServer(ThreadingHTTPServer):
    daemon_threads = True
    engine: Engine


class ApiHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: ApiServer

    # the default handler logs every request to stderr; the CLI owns stdout
    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    # --- plumbing -------------------------------------------------------

    def _send_json(self, obj, status: int = HTTPStatus.OK) -> None:
        body = (json.dumps(jsonable(obj), indent=2) + "\n").encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, message: str) -> None:
        self._send_json({"error": message}, status)

    def do_OPTIONS(self) -> None:
        # CORS preflight, so a console page served from another origin can POST
        self.send_response(HTTPStatus.NO_CONTENT)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ValidationError("body", f"invalid JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise ValidationError("body", "expected a JSON object")
        return body

    # --- routing --------------------------------------------------------

    def do_OPTIONS(self) -> None:
        self.send_response(HTTPStatus.NO_CONTENT)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:
        engine = self.server.engine
        path = urlsplit(self.path).path.rstrip("/") or "/"
        if path == "/api/state":
            self._send_json(engine.snapshot())
        elif path == "/api/kpis":
            self._send_json(engine.kpis().to_dict())
        elif path == "/api/approvals":
            self._send_json({"approvals": engine.approval_views()})
        elif path == "/api/alerts":
            from .alerting import rank

            with engine.lock:
                self._send_json({"alerts": [a.to_dict() for a in rank(engine.alerts.live())]})
        elif path.startswith("/api/plans/"):
            plan_id = path.rsplit("/", 1)[1]
            with engine.lock:
                plan = engine.plans.get(plan_id)
                if plan is None:
                    self._error(HTTPStatus.NOT_FOUND, f"unknown plan {plan_id}")
                else:
                    self._send_json(plan.to_dict())
        elif path == "/api/events":
            self._stream_events()
        else:
            self._error(HTTPStatus.NOT_FOUND, f"no route for GET {path}")

    def do_POST(self) -> None:
        engine = self.server.engine
        path = urlsplit(self.path).path.rstrip("/")
        parts = path.split("/")
        try:
            if len(parts) == 5 and parts[:3] == ["", "api", "approvals"] and parts[4] == "decision":
                body = self._read_body()
                decision = body.get("decision", "")
                item = engine.submit_decision(
                    parts[3],
                    decision,
                    decider=str(body.get("decider") or "human"),
                    modification=body.get("modification"),
                )
                self._send_json(item.to_dict())
            elif len(parts) == 5 and parts[:3] == ["", "api", "alerts"] and parts[4] == "ack":
                body = self._read_body()
                alert = engine.acknowledge_alert(
                    parts[3], actor=str(body.get("actor") or "human"))
                self._send_json(alert.to_dict())
            else:
                self._error(HTTPStatus.NOT_FOUND, f"no route for POST {path}")
        except KeyError as exc:
            self._error(HTTPStatus.NOT_FOUND, f"unknown item {exc.args[0]}")
        except WrongState as exc:
            self._error(HTTPStatus.CONFLICT, str(exc))
        except ValidationError as exc:
            self._error(HTTPStatus.BAD_REQUEST, str(exc))

    # --- the event stream -------------------------------------------------

    def _stream_events(self) -> None:
        engine = self.server.engine
        last_seen = 0
        header_id = self.headers.get("Last-Event-ID")
        if header_id and header_id.isdigit():
            last_seen = int(header_id)
        qs = parse_qs(urlsplit(self.path).query)
        if "since" in qs and qs["since"][0].isdigit():
            last_seen = max(last_seen, int(qs["since"][0]))

        inbox: queue.Queue = queue.Queue(maxsize=4096)

        def listener(record):
            try:
                inbox.put_nowait(record)
            except queue.Full:
                # slow consumer: stop pushing; the client reconnects with
                # Last-Event-ID and replays what it missed
                raise RuntimeError("event stream consumer overflow")

        with engine.lock:
            backlog = [r for r in engine.audit.records if r.seq > last_seen]
            engine.audit.subscribe(listener)

        self.send_response(HTTPStatus.OK)
        self.send_header("Content-Type", "text/event-stream; charset=utf-8")
        self.send_header("Cache-Control", "no-store")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Connection", "close")
        self.end_headers()
        try:
            for record in backlog:
                self._write_event(record)
            while True:
                try:
                    record = inbox.get(timeout=15.0)
                except queue.Empty:
                    if listener not in engine.audit._listeners:
                        break  # dropped on overflow; client reconnects and replays
                    self.wfile.write(b": keepalive\n\n")
                    self.wfile.flush()
                    continue
                self._write_event(record)
        except (BrokenPipeError, ConnectionResetError, TimeoutError):
            pass
        finally:
            engine.audit.unsubscribe(listener)

    def _write_event(self, record) -> None:
        payload = json.dumps(jsonable(record.to_dict()), separators=(",", ":"))
        self.wfile.write(
            f"id: {record.seq}\nevent: audit\ndata: {payload}\n\n".encode("utf-8"))
        self.wfile.flush()


def make_server(engine: Engine, host: str = "127.0.0.1", port: int = 8000) -> ApiServer:
    """Bind the API server; the caller decides the serving thread."""
    server = ApiServer((host, port), ApiHandler)
    server.engine = engine
    return server
