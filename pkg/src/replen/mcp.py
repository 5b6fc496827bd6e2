"""One JSON-RPC 2.0 tool server per agent workflow.

Six independent servers — forecasting, inventory, procurement, supplier,
planning, exceptions — each exposing a small fixed tool registry over the
shared engine, so a single operator client can orchestrate every workflow.
Framing is one JSON document per line on stdio, or one request per POST
/rpc body over HTTP.  Application errors come back as tool error results,
never as transport failures; protocol errors use the standard JSON-RPC
codes (-32700 parse, -32600 envelope, -32601 method, -32602 params).

Read tools touch only snapshots and are unaudited; write tools delegate to
the same engine entry points the HTTP API and CLI use, so they land in the
audit log with the same event kinds.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, TextIO

from . import __version__
from .alerting import rank
from .domain import DC_ID, ValidationError
from .engine import ApprovalKind, Engine
from .jsonutil import jsonable
from .procurement import WrongState

PROTOCOL_VERSION = "2024-11-05"

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603


@dataclass(frozen=True)
class Tool:
    """One callable in a server's registry."""

    name: str
    description: str
    input_schema: dict
    handler: Callable[[Engine, dict, str], object]
    writes: bool = False


def _schema(required: dict | None = None, optional: dict | None = None) -> dict:
    props = {}
    for name, typ in {**(required or {}), **(optional or {})}.items():
        props[name] = {"type": typ}
    return {
        "type": "object",
        "properties": props,
        "required": sorted(required or {}),
        "additionalProperties": False,
    }


_PY_TYPES = {"string": str, "integer": int, "object": dict}


def _validate_args(args: object, schema: dict) -> dict:
    """Check a tools/call arguments object against the registered schema."""
    if not isinstance(args, dict):
        raise ValidationError("arguments", "arguments must be an object")
    props = schema["properties"]
    for name in schema["required"]:
        if name not in args:
            raise ValidationError(name, f"missing required argument {name!r}")
    for name, value in args.items():
        if name not in props:
            raise ValidationError(name, f"unexpected argument {name!r}")
        want = _PY_TYPES[props[name]["type"]]
        if not isinstance(value, want) or (want is int and isinstance(value, bool)):
            raise ValidationError(
                name, f"{name} must be a {props[name]['type']}, got {type(value).__name__}")
    return args


class McpServer:
    """A single workflow's tool server over a shared engine."""

    def __init__(self, workflow: str, engine: Engine, tools: list[Tool]) -> None:
        self.workflow = workflow
        self.engine = engine
        self.tools = {t.name: t for t in tools}
        self.actor = f"mcp:{workflow}"

    # --- framing ----------------------------------------------------------

    def handle_line(self, raw: str) -> str | None:
        """One JSON document in, one out; None when no response is owed."""
        try:
            message = json.loads(raw)
        except ValueError:
            return self._encode(_error(None, PARSE_ERROR, "parse error: request is not valid JSON"))
        response = self.handle_message(message)
        return self._encode(response) if response is not None else None

    def handle_message(self, message: object) -> dict | None:
        if not isinstance(message, dict):
            return _error(None, INVALID_REQUEST, "request must be a JSON object")
        req_id = message.get("id")
        if not isinstance(req_id, (str, int, type(None))):
            return _error(None, INVALID_REQUEST, "request id must be a string or number")
        if message.get("jsonrpc") != "2.0":
            return _error(req_id, INVALID_REQUEST, 'request must declare "jsonrpc": "2.0"')
        method = message.get("method")
        if not isinstance(method, str):
            return _error(req_id, INVALID_REQUEST, "method must be a string")
        if "id" not in message:
            return None  # notification: process nothing, owe nothing
        params = message.get("params", {})
        if not isinstance(params, dict):
            return _error(req_id, INVALID_PARAMS, "params must be an object")

        if method == "initialize":
            return _result(req_id, {
                "protocolVersion": params.get("protocolVersion", PROTOCOL_VERSION),
                "capabilities": {"tools": {}},
                "serverInfo": {"name": f"replen-{self.workflow}", "version": __version__},
            })
        if method == "ping":
            return _result(req_id, {})
        if method == "tools/list":
            return _result(req_id, {"tools": [
                {"name": t.name, "description": t.description, "inputSchema": t.input_schema}
                for t in self.tools.values()
            ]})
        if method == "tools/call":
            return self._call_tool(req_id, params)
        return _error(req_id, METHOD_NOT_FOUND, f"method not found: {method}")

    def _call_tool(self, req_id, params: dict) -> dict:
        name = params.get("name")
        if not isinstance(name, str):
            return _error(req_id, INVALID_PARAMS, "tools/call params need a tool name")
        tool = self.tools.get(name)
        if tool is None:
            return _result(req_id, _tool_error(
                f"unknown tool {name!r} on the {self.workflow} server"))
        try:
            args = _validate_args(params.get("arguments", {}), tool.input_schema)
        except ValidationError as exc:
            return _error(req_id, INVALID_PARAMS, str(exc))
        try:
            payload = tool.handler(self.engine, args, self.actor)
        except (KeyError, ValidationError, WrongState) as exc:
            return _result(req_id, _tool_error(_bare_message(exc)))
        except Exception as exc:
            return _error(req_id, INTERNAL_ERROR, f"{type(exc).__name__}: {exc}")
        text = json.dumps(jsonable(payload), indent=2, sort_keys=True)
        return _result(req_id, {"content": [{"type": "text", "text": text}]})

    @staticmethod
    def _encode(response: dict) -> str:
        return json.dumps(response, sort_keys=True, separators=(",", ":"))


def _bare_message(exc: Exception) -> str:
    # KeyError repr-quotes its argument; unwrap to the plain message
    if isinstance(exc, KeyError) and exc.args:
        return str(exc.args[0])
    return str(exc)


def _result(req_id, result: dict) -> dict:
    return {"jsonrpc": "2.0", "id": req_id, "result": result}


def _error(req_id, code: int, message: str) -> dict:
    return {"jsonrpc": "2.0", "id": req_id, "error": {"code": code, "message": message}}


def _tool_error(message: str) -> dict:
    return {"content": [{"type": "text", "text": message}], "isError": True}


# --- tool handlers ---------------------------------------------------------


def _gate_item_id(engine: Engine, kind: ApprovalKind, ref: str) -> str:
    """Accept either a gate item id or the id of the order/plan behind it."""
    item = engine.approvals.get(ref)
    if item is not None and item.kind is kind:
        return item.id
    matches = [i for i in engine.approvals.values()
               if i.kind is kind and i.payload_ref == ref]
    if matches:
        return max(matches, key=lambda i: i.id).id
    raise KeyError(f"{ref} names no {kind.value} approval item")


def _pending_views(engine: Engine, kind: ApprovalKind) -> list[dict]:
    views = [v for v in engine.approval_views()
             if v["kind"] == kind.value and v["state"] == "Pending"]
    return sorted(views, key=lambda v: v["id"])


def _list_pending_orders(engine, args, actor):
    return _pending_views(engine, ApprovalKind.PURCHASE_ORDER)


def _get_order(engine, args, actor):
    po = engine.pos.get(args["id"])
    if po is None:
        raise KeyError(f"no purchase order {args['id']}")
    return po.to_dict()


def _approve_order(engine, args, actor):
    item_id = _gate_item_id(engine, ApprovalKind.PURCHASE_ORDER, args["id"])
    return engine.submit_decision(
        item_id, "approve", decider=args.get("decider", actor)).to_dict()


def _reject_order(engine, args, actor):
    item_id = _gate_item_id(engine, ApprovalKind.PURCHASE_ORDER, args["id"])
    return engine.submit_decision(
        item_id, "reject", decider=args.get("decider", actor)).to_dict()


def _generate_plan(engine, args, actor):
    plan, drafted = engine.draft_plan_now()
    if plan is None:
        return {"drafted": drafted, "plan": None,
                "note": "nothing to allocate today"}
    return {"drafted": drafted, "plan": plan.to_dict()}


def _get_plan(engine, args, actor):
    plan = engine.plans.get(args["id"])
    if plan is None:
        raise KeyError(f"no plan {args['id']}")
    return plan.to_dict()


def _approve_plan(engine, args, actor):
    item_id = _gate_item_id(engine, ApprovalKind.REPLENISHMENT_PLAN, args["id"])
    return engine.submit_decision(
        item_id, "approve", decider=args.get("decider", actor)).to_dict()


def _list_alerts(engine, args, actor):
    return [a.to_dict() for a in rank(engine.alerts.live())]


def _get_alert(engine, args, actor):
    return engine.alerts.get(args["id"]).to_dict()


def _acknowledge_alert(engine, args, actor):
    return engine.acknowledge_alert(args["id"], args.get("actor", actor)).to_dict()


def _get_forecast(engine, args, actor):
    location, sku = args["location"], args["sku"]
    with engine.lock:
        fc = (engine._dc_forecasts.get(sku) if location == DC_ID
              else engine._forecasts.get((location, sku)))
    if fc is None:
        raise KeyError(f"no current forecast for {sku} at {location}")
    return fc.to_dict()


def _get_signals(engine, args, actor):
    with engine.lock:
        day, signals = engine._last_scan
        return {"day": day, "signals": [s.to_dict() for s in signals]}


def _get_interactions(engine, args, actor):
    po_id = args.get("po_id")
    with engine.lock:
        return [i.to_dict() for i in engine.interactions
                if po_id is None or i.po_id == po_id]


_ID_ARG = {"id": "string"}
_DECIDER = {"decider": "string"}

_REGISTRY: dict[str, list[Tool]] = {
    "forecasting": [
        Tool("get_forecast",
             "Current demand forecast for one SKU at an outlet or the DC.",
             _schema({"location": "string", "sku": "string"}), _get_forecast),
    ],
    "inventory": [
        Tool("get_signals",
             "Replenishment signals (low stock, expiry risk) from the latest scan.",
             _schema(), _get_signals),
    ],
    "procurement": [
        Tool("list_pending_orders",
             "Purchase orders waiting at the approval gate.",
             _schema(), _list_pending_orders),
        Tool("approve_order",
             "Approve a pending purchase order (by gate item id or PO id).",
             _schema(_ID_ARG, _DECIDER), _approve_order, writes=True),
        Tool("reject_order",
             "Reject a pending purchase order (by gate item id or PO id).",
             _schema(_ID_ARG, _DECIDER), _reject_order, writes=True),
        Tool("get_order",
             "Full detail of one purchase order.",
             _schema(_ID_ARG), _get_order),
    ],
    "supplier": [
        Tool("get_interactions",
             "Supplier conversation records, optionally for one PO.",
             _schema(optional={"po_id": "string"}), _get_interactions),
    ],
    "planning": [
        Tool("generate_plan",
             "Draft today's replenishment plan and submit it to the gate.",
             _schema(), _generate_plan, writes=True),
        Tool("get_plan",
             "Full detail of one replenishment plan.",
             _schema(_ID_ARG), _get_plan),
        Tool("approve_plan",
             "Approve a pending replenishment plan (by gate item id or plan id).",
             _schema(_ID_ARG, _DECIDER), _approve_plan, writes=True),
    ],
    "exceptions": [
        Tool("list_alerts",
             "Live exception alerts, most urgent first.",
             _schema(), _list_alerts),
        Tool("get_alert",
             "Full detail of one alert.",
             _schema(_ID_ARG), _get_alert),
        Tool("acknowledge_alert",
             "Mark an open alert as acknowledged.",
             _schema(_ID_ARG, {"actor": "string"}), _acknowledge_alert, writes=True),
    ],
}

WORKFLOWS = tuple(_REGISTRY)


def make_mcp_server(workflow: str, engine: Engine) -> McpServer:
    if workflow not in _REGISTRY:
        raise ValidationError(
            "workflow", f"{workflow!r} is not one of {', '.join(WORKFLOWS)}")
    return McpServer(workflow, engine, _REGISTRY[workflow])


def make_servers(engine: Engine) -> dict[str, McpServer]:
    """All six workflow servers over one shared engine."""
    return {wf: make_mcp_server(wf, engine) for wf in WORKFLOWS}


# --- transports -------------------------------------------------------------


def serve_stdio(server: McpServer, stdin: TextIO = sys.stdin,
                stdout: TextIO = sys.stdout) -> None:
    """Line-framed loop: one JSON-RPC document per line, until EOF."""
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        response = server.handle_line(line)
        if response is not None:
            stdout.write(response + "\n")
            stdout.flush()


class McpHttpServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True
    mcp: McpServer


class _McpHttpHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: McpHttpServer

    def log_message(self, fmt, *args):
        pass

    def do_POST(self):
        if self.path.split("?", 1)[0] != "/rpc":
            body = json.dumps({"error": f"no route {self.path}"}).encode()
            self._respond(404, body, "application/json")
            return
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length).decode("utf-8", errors="replace")
        response = self.server.mcp.handle_line(raw)
        if response is None:
            self._respond(204, b"", "application/json")
        else:
            self._respond(200, response.encode("utf-8"), "application/json")

    def _respond(self, status: int, body: bytes, ctype: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        if body:
            self.wfile.write(body)


def make_http_server(server: McpServer, host: str = "127.0.0.1",
                     port: int = 0) -> McpHttpServer:
    httpd = McpHttpServer((host, port), _McpHttpHandler)
    httpd.mcp = server
    return httpd
