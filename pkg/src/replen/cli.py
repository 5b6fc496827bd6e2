"""Command-line driver.

Three modes share one binary: batch simulation (`scenario`, `sim run`,
`kpis --from-audit`), serving the interfaces (`serve`, `mcp`), and thin
HTTP-client commands against a live server (`approvals`, `alerts`,
`plan`, `kpis`).  Every mutation issued here travels through the same
engine entry points as the API and tool servers, so it lands in the audit
log identically.

Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import threading
import time
import urllib.error
import urllib.request

from .audit import load as load_audit, verify_integrity
from .domain import ValidationError
from .engine import Engine, kpis_from_audit
from .httpapi import make_server
from .mcp import WORKFLOWS, make_http_server, make_mcp_server, serve_stdio
from .procurement import WrongState
from .scenario import make_config
from .world import WorldConfig

DEFAULT_URL = "http://127.0.0.1:8000"


class CliError(Exception):
    """Failure with a chosen exit code; message goes to stderr."""

    def __init__(self, message: str, code: int = 1) -> None:
        super().__init__(message)
        self.code = code


class Parser(argparse.ArgumentParser):
    # exit 1 on usage errors (argparse's default is 2, which we reserve
    # for runtime failures)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# --- config loading ---------------------------------------------------------


def _load_config(args) -> WorldConfig:
    path = getattr(args, "config", None) or os.environ.get("REPLEN_CONFIG")
    if path:
        try:
            with open(path) as fh:
                cfg = WorldConfig.from_dict(json.load(fh))
        except FileNotFoundError:
            raise CliError(f"config file not found: {path}", 2)
        except (ValueError, KeyError, TypeError) as exc:
            raise CliError(f"bad config file {path}: {exc}", 1)
        if not (cfg.outlets and cfg.skus and cfg.demand):
            raise CliError(
                f"bad config file {path}: scenario needs outlets, skus, and demand", 1)
        if getattr(args, "seed", None) is not None:
            cfg.seed = args.seed
        return cfg
    seed = getattr(args, "seed", None)
    return make_config(4, 6, seed=seed if seed is not None else 7)


def _build_engine(args, audit_path=None) -> Engine:
    engine = Engine(_load_config(args), audit_path=audit_path,
                    auto_approve=getattr(args, "auto_approve", False))
    for _ in range(getattr(args, "prime_days", 0) or 0):
        engine.run_cycle()
    return engine


# --- output helpers ---------------------------------------------------------


def _emit(args, data, human) -> None:
    if getattr(args, "json", False):
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        human(data)


def _table(rows: list[list], headers: list[str]) -> None:
    widths = [len(h) for h in headers]
    cells = [[str(c) for c in row] for row in rows]
    for row in cells:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    print(line)
    print("  ".join("-" * w for w in widths))
    for row in cells:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)))


def _print_kpis(k: dict) -> None:
    for key in ("days_run", "units_sold", "lost_sales", "fill_rate",
                "stockout_days", "waste_units", "total_route_km",
                "pending_pos", "pending_plans", "open_alerts"):
        print(f"{key:>16}: {k[key]}")


# --- HTTP client ------------------------------------------------------------


def _request(url: str, method: str = "GET", body: dict | None = None) -> dict:
    data = json.dumps(body).encode() if body is not None else None
    headers = {"Content-Type": "application/json"} if body is not None else {}
    req = urllib.request.Request(url, data=data, headers=headers, method=method)
    try:
        with urllib.request.urlopen(req, timeout=30) as resp:
            return json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        try:
            detail = json.loads(exc.read()).get("error", exc.reason)
        except ValueError:
            detail = exc.reason
        raise CliError(f"{exc.code}: {detail}", 1)
    except urllib.error.URLError as exc:
        raise CliError(f"cannot reach {url}: {exc.reason}", 2)


# --- subcommands ------------------------------------------------------------


def cmd_scenario_generate(args) -> int:
    cfg = make_config(
        args.outlets, args.skus, seed=args.seed,
        noise_sigma=args.noise_sigma,
        perishable_share=args.perishable_share,
        supplier_count=args.supplier_count,
        time_windows=args.time_windows,
    )
    text = json.dumps(cfg.to_dict(), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_sim_run(args) -> int:
    engine = _build_engine(args, audit_path=args.audit)
    started = time.perf_counter()
    engine.run(args.days)
    elapsed = time.perf_counter() - started
    report = {
        "days": args.days,
        "seed": engine.config.seed,
        "kpis": engine.kpis().to_dict(),
        "audit_records": len(engine.audit.records),
        "audit_digest": engine.audit.log_digest(),
        "elapsed_seconds": round(elapsed, 3),
    }
    engine.close()

    def human(rep):
        print(f"ran {rep['days']} days (seed {rep['seed']}) "
              f"in {rep['elapsed_seconds']}s")
        _print_kpis(rep["kpis"])
        print(f"{'audit_records':>16}: {rep['audit_records']}")
        print(f"{'audit_digest':>16}: {rep['audit_digest']}")

    _emit(args, report, human)
    return 0


def cmd_serve(args) -> int:
    engine = _build_engine(args)
    api = make_server(engine, host=args.host, port=args.http_port)
    bound = []
    print(f"api http://{args.host}:{api.server_address[1]}", flush=True)
    if args.mcp:
        next_port = args.http_port + 1 if args.http_port else 0
        for wf in WORKFLOWS:
            httpd = make_http_server(make_mcp_server(wf, engine),
                                     host=args.host, port=next_port)
            bound.append(httpd)
            print(f"mcp {wf} http://{args.host}:{httpd.server_address[1]}/rpc",
                  flush=True)
            if next_port:
                next_port += 1
        for httpd in bound:
            threading.Thread(target=httpd.serve_forever, daemon=True).start()
    if args.tick_seconds > 0:
        def ticker():
            while True:
                time.sleep(args.tick_seconds)
                engine.run_cycle()
        threading.Thread(target=ticker, daemon=True).start()
    try:
        api.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        api.server_close()
        for httpd in bound:
            httpd.shutdown()
            httpd.server_close()
        engine.close()
    return 0


def cmd_mcp(args) -> int:
    engine = _build_engine(args)
    serve_stdio(make_mcp_server(args.workflow, engine))
    engine.close()
    return 0


def cmd_approvals(args) -> int:
    if args.action == "list":
        body = _request(f"{args.url}/api/approvals")
        views = body["approvals"]
        if not args.all:
            views = [v for v in views if v["state"] == "Pending"]

        def human(rows):
            if not rows:
                print("no approvals" if args.all else "no pending approvals")
                return
            _table([[v["id"], v["kind"], v["payload_ref"], v["state"],
                     json.dumps(v.get("summary", {}), sort_keys=True)]
                    for v in rows],
                   ["id", "kind", "ref", "state", "summary"])

        _emit(args, views, human)
        return 0
    body = _request(f"{args.url}/api/approvals/{args.id}/decision", "POST",
                    {"decision": args.action, "decider": args.decider})
    _emit(args, body, lambda b: print(
        f"{b['id']} {b['state']} by {b['decider']} (ref {b['payload_ref']})"))
    return 0


def cmd_alerts(args) -> int:
    if args.action == "list":
        body = _request(f"{args.url}/api/alerts")

        def human(b):
            if not b["alerts"]:
                print("no live alerts")
                return
            _table([[a["id"], a["kind"], a["subject"], a["days_to_impact"],
                     a["state"], a["recommended_action"][:60]]
                    for a in b["alerts"]],
                   ["id", "kind", "subject", "days", "state", "action"])

        _emit(args, body, human)
        return 0
    body = _request(f"{args.url}/api/alerts/{args.id}/ack", "POST",
                    {"actor": args.actor})
    _emit(args, body, lambda a: print(f"{a['id']} {a['state']}"))
    return 0


def cmd_plan_show(args) -> int:
    plan = _request(f"{args.url}/api/plans/{args.id}")

    def human(p):
        print(f"{p['id']}  day {p['day']}  state {p['state']}  "
              f"km {p['optimized_km']} (baseline {p['baseline_km']})")
        if p.get("rationale"):
            print(f"rationale: {p['rationale']}")
        allocs = [[a["outlet"], a["sku"], a["units"]] for a in p["allocations"]]
        if allocs:
            _table(allocs, ["outlet", "sku", "units"])
        for route in p["routes"]:
            stops = " -> ".join(
                f"{stop}@{eta}m" for stop, eta in zip(route["stops"], route["etas"]))
            print(f"route {route['vehicle_id']} [{route['temp_class']}]: {stops}  "
                  f"({route['total_km']} km, depart {route['depart_minute']}m)")

    _emit(args, plan, human)
    return 0


def cmd_kpis(args) -> int:
    if args.from_audit:
        try:
            records = load_audit(args.from_audit)
        except FileNotFoundError:
            raise CliError(f"audit file not found: {args.from_audit}", 2)
        verify_integrity(records)
        report = kpis_from_audit(records).to_dict()
    else:
        report = _request(f"{args.url}/api/kpis")
    _emit(args, report, _print_kpis)
    return 0


# --- parser -----------------------------------------------------------------


def _add_engine_args(p, prime=True):
    p.add_argument("--config", help="scenario JSON (default: $REPLEN_CONFIG)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--auto-approve", action="store_true",
                   help="gate policy approves every item")
    if prime:
        p.add_argument("--prime-days", type=int, default=0, metavar="K",
                       help="advance K days before serving")


def _add_client_args(p):
    p.add_argument("--url", default=DEFAULT_URL, help=f"server (default {DEFAULT_URL})")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> Parser:
    parser = Parser(prog="replen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    scen = sub.add_parser("scenario", help="scenario tools")
    scen_sub = scen.add_subparsers(dest="action", required=True)
    gen = scen_sub.add_parser("generate", help="emit a scenario config as JSON")
    gen.add_argument("--outlets", type=int, default=4)
    gen.add_argument("--skus", type=int, default=6)
    gen.add_argument("--seed", type=int, default=7)
    gen.add_argument("--noise-sigma", type=float, default=0.15)
    gen.add_argument("--perishable-share", type=float, default=0.3)
    gen.add_argument("--supplier-count", type=int, default=None)
    gen.add_argument("--time-windows", action="store_true")
    gen.add_argument("--out", help="write to a file instead of stdout")
    gen.set_defaults(func=cmd_scenario_generate)

    sim = sub.add_parser("sim", help="headless simulation")
    sim_sub = sim.add_subparsers(dest="action", required=True)
    run = sim_sub.add_parser("run", help="run N days and report KPIs")
    run.add_argument("--days", type=int, required=True)
    _add_engine_args(run, prime=False)
    run.add_argument("--audit", help="write the audit log to this JSONL file")
    run.add_argument("--json", action="store_true")
    run.set_defaults(func=cmd_sim_run)

    serve = sub.add_parser("serve", help="serve the HTTP API (and MCP servers)")
    _add_engine_args(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--http-port", type=int, default=8000,
                       help="API port; MCP servers take the next six (0 = ephemeral)")
    serve.add_argument("--mcp", action="store_true",
                       help="also serve the six workflow tool servers")
    serve.add_argument("--tick-seconds", type=float, default=0.0,
                       help="advance one day every X seconds while serving")
    serve.set_defaults(func=cmd_serve)

    mcp = sub.add_parser("mcp", help="serve one workflow's tools on stdio")
    mcp.add_argument("workflow", choices=list(WORKFLOWS))
    _add_engine_args(mcp)
    mcp.set_defaults(func=cmd_mcp)

    appr = sub.add_parser("approvals", help="inspect and decide gate items")
    appr_sub = appr.add_subparsers(dest="action", required=True)
    lst = appr_sub.add_parser("list")
    lst.add_argument("--all", action="store_true", help="include decided items")
    _add_client_args(lst)
    lst.set_defaults(func=cmd_approvals)
    for verb in ("approve", "reject"):
        dec = appr_sub.add_parser(verb)
        dec.add_argument("id")
        dec.add_argument("--decider", default="cli")
        _add_client_args(dec)
        dec.set_defaults(func=cmd_approvals)

    al = sub.add_parser("alerts", help="inspect and acknowledge alerts")
    al_sub = al.add_subparsers(dest="action", required=True)
    al_list = al_sub.add_parser("list")
    _add_client_args(al_list)
    al_list.set_defaults(func=cmd_alerts)
    ack = al_sub.add_parser("ack")
    ack.add_argument("id")
    ack.add_argument("--actor", default="cli")
    _add_client_args(ack)
    ack.set_defaults(func=cmd_alerts)

    plan = sub.add_parser("plan", help="inspect plans")
    plan_sub = plan.add_subparsers(dest="action", required=True)
    show = plan_sub.add_parser("show")
    show.add_argument("id")
    _add_client_args(show)
    show.set_defaults(func=cmd_plan_show)

    kp = sub.add_parser("kpis", help="KPI report, live or replayed from a log")
    kp.add_argument("--from-audit", metavar="F",
                    help="replay KPIs from an audit JSONL file")
    _add_client_args(kp)
    kp.set_defaults(func=cmd_kpis)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValidationError, WrongState, KeyError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
