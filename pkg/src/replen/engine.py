"""Daily orchestration: the agent pipeline, approval gates, and audit trail.

One ``run_cycle()`` advances the operation a day in a fixed stage order:
forecast, inventory scan, purchase-order drafting, supplier responses and
chasing, dispatch planning, dispatch of approved plans, exception scan, and
finally the physical day (sales, arrivals, expiry).  Anything that commits
money or trucks stops at an :class:`ApprovalItem` until a decision arrives —
from a human via ``submit_decision``, or from the configured policy.

Every state change lands in the append-only audit log, and the KPI report
can be rebuilt from that log alone (``kpis_from_audit``), which is the basis
of the replay test.  No wall-clock time enters the log, so two runs with the
same config produce byte-identical trails.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

from .alerting import (
    AlertBook,
    ExceptionAlert,
    from_demand_spike,
    from_dispatch_infeasibility,
    from_escalation,
    from_expiry_risk,
    from_late_promise,
    from_low_stock,
    from_unsourceable,
    rank,
)
from .audit import AuditLog, AuditRecord
from .consortium import BaselineReasoner, Reasoner
from .domain import DC_ID, ValidationError, inventory_position
from .forecasting import Calendar, ForecastSeries, aggregate_for_dc, forecast
from .monitoring import ReplenishmentSignal, SignalKind, evaluate
from .planning import (
    PlanningContext,
    PlanState,
    ReplenishmentPlan,
    build_plan,
    route_allocations,
)
from .procurement import (
    POState,
    ProcurementContext,
    PurchaseOrder,
    WrongState,
    draft_purchase_orders,
)
from .supplier import (
    Escalation,
    FollowupAction,
    ReliabilityLedger,
    ResponseEffect,
    SupplierInteraction,
    apply_response,
    due_responses,
    transmit,
)
from .supplier import tick as supplier_tick
from .world import DayEvents, World, WorldConfig, gen_world


class ApprovalKind(str, Enum):
    PURCHASE_ORDER = "purchase_order"
    REPLENISHMENT_PLAN = "replenishment_plan"


class ApprovalState(str, Enum):
    PENDING = "Pending"
    APPROVED = "Approved"
    MODIFIED = "Modified"  # approved with changes; the delta is recorded
    REJECTED = "Rejected"


@dataclass
class ApprovalItem:
    """One gate entry: a drafted PO or plan waiting for sign-off."""

    id: str
    kind: ApprovalKind
    payload_ref: str
    created_tick: int
    state: ApprovalState = ApprovalState.PENDING
    modification: dict | None = None
    decider: str | None = None
    decided_tick: int | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "payload_ref": self.payload_ref,
            "created_tick": self.created_tick,
            "state": self.state.value,
            "modification": self.modification,
            "decider": self.decider,
            "decided_tick": self.decided_tick,
        }


@dataclass
class KpiReport:
    days_run: int
    units_sold: int
    lost_sales: int
    fill_rate: float
    stockout_days: int
    waste_units: int
    total_route_km: float
    pending_pos: int
    pending_plans: int
    open_alerts: int

    def to_dict(self) -> dict:
        return {
            "days_run": self.days_run,
            "units_sold": self.units_sold,
            "lost_sales": self.lost_sales,
            "fill_rate": round(self.fill_rate, 6),
            "stockout_days": self.stockout_days,
            "waste_units": self.waste_units,
            "total_route_km": round(self.total_route_km, 3),
            "pending_pos": self.pending_pos,
            "pending_plans": self.pending_plans,
            "open_alerts": self.open_alerts,
        }


def kpis_from_audit(records: Iterable[AuditRecord]) -> KpiReport:
    """Rebuild the KPI report from audit records alone.

    Must agree exactly with ``Engine.kpis()`` after the same run — the
    engine derives its live counters from the same events it logs.
    """
    days = sold = lost = waste = stockouts = 0
    km = 0.0
    pending: dict[str, str] = {}
    open_alerts = 0
    for rec in records:
        p = rec.payload
        if rec.event_kind == "day_events":
            days += 1
            sold += p["sold_total"]
            lost += p["lost_total"]
            waste += p["waste_total"]
            stockouts += len(p["lost"])
        elif rec.event_kind == "plan_dispatched":
            km += p["total_km"]
        elif rec.event_kind == "approval_requested":
            pending[p["item_id"]] = p["kind"]
        elif rec.event_kind in ("approval_decision", "approval_auto_rejected"):
            pending.pop(p["item_id"], None)
        elif rec.event_kind == "alert_raised":
            open_alerts += 1
        elif rec.event_kind == "alert_resolved":
            open_alerts -= 1
    demand = sold + lost
    return KpiReport(
        days_run=days,
        units_sold=sold,
        lost_sales=lost,
        fill_rate=sold / demand if demand else 1.0,
        stockout_days=stockouts,
        waste_units=waste,
        total_route_km=km,
        pending_pos=sum(1 for k in pending.values() if k == ApprovalKind.PURCHASE_ORDER.value),
        pending_plans=sum(1 for k in pending.values() if k == ApprovalKind.REPLENISHMENT_PLAN.value),
        open_alerts=open_alerts,
    )


# decision_policy: called for every Pending item each tick; returns
# "approve", "reject", or None to leave it waiting for a human.
DecisionPolicy = Callable[[ApprovalItem, dict], "str | None"]


class Engine:
    def __init__(
        self,
        config: WorldConfig,
        *,
        audit_path: "str | None" = None,
        auto_approve: bool = False,
        decision_policy: "DecisionPolicy | None" = None,
        reasoners: "list[Reasoner] | None" = None,
    ) -> None:
        config.validate()
        self.config = config
        self.world: World = gen_world(config)
        self.policy = config.policy
        self.calendar = Calendar.from_config(config)
        self.audit = AuditLog(audit_path)
        self.lock = threading.RLock()
        self.auto_approve = auto_approve
        self.decision_policy = decision_policy
        self.reasoners: list[Reasoner] = list(reasoners) if reasoners else [BaselineReasoner()]

        self.pos: dict[str, PurchaseOrder] = {}
        self.plans: dict[str, ReplenishmentPlan] = {}
        self.approvals: dict[str, ApprovalItem] = {}
        self.interactions: list[SupplierInteraction] = []
        self.reliability = ReliabilityLedger()
        self._counters: dict[str, int] = {}
        self.alerts = AlertBook(lambda: self._next_id("AL"))

        # sku -> [(catalog entry, supplier)] in supplier-id order
        self._catalog = {}
        for sku in config.skus:
            cands = sorted(
                ((e, config.supplier(e.supplier_id)) for e in config.catalog_for(sku.id)),
                key=lambda pair: pair[0].supplier_id,
            )
            if cands:
                self._catalog[sku.id] = cands

        self._forecasts: dict[tuple[str, str], ForecastSeries] = {}
        self._dc_forecasts: dict[str, ForecastSeries] = {}
        # (outlet, sku) -> (expected mean, sigma) stashed before each
        # forecast refresh, so yesterday's sales are judged against the
        # forecast that was live when they happened
        self._spike_base: dict[tuple[str, str], tuple[float, float]] = {}
        self._last_scan: tuple[int | None, list[ReplenishmentSignal]] = (None, [])
        self._last_events: "DayEvents | None" = None
        self._undispatchable: set[str] = set()

        self._days_run = 0
        self._sold = 0
        self._lost = 0
        self._waste = 0
        self._stockout_days = 0
        self._route_km = 0.0

        self.audit.append(self.world.day, "system", "run_started", {
            "seed": config.seed,
            "outlets": len(config.outlets),
            "skus": len(config.skus),
            "suppliers": len(config.suppliers),
            "auto_approve": auto_approve,
        })

    # --- id allocation ------------------------------------------------

    def _next_id(self, prefix: str) -> str:
        self._counters[prefix] = self._counters.get(prefix, 0) + 1
        return f"{prefix}-{self._counters[prefix]:04d}"

    def _horizon(self) -> int:
        if self.config.forecast_horizon:
            return self.config.forecast_horizon
        lead = self.config.max_lead_time() + self.policy.review_period_days + 1
        cover = max((s.target_cover_days for s in self.config.skus), default=3) + 1
        return max(14, lead, cover)

    # --- the daily cycle ------------------------------------------------

    def run_cycle(self) -> dict:
        """Advance one day through every stage; returns a small summary."""
        with self.lock:
            today = self.world.day
            self._spike_base = {
                key: (fc.mean[0], fc.sigma_daily) for key, fc in self._forecasts.items()
            }
            self._stage_forecast(today)
            outlet_signals, dc_signals = self._stage_inventory_scan(today)
            drafted, unsourceable = self._stage_procurement(today, dc_signals)
            self._apply_gate_policy(today)
            effects, escalations = self._stage_supplier(today)
            plan = self._stage_planning(today)
            self._apply_gate_policy(today)
            dispatched = self._stage_dispatch(today)
            raised = self._stage_exceptions(
                today, outlet_signals, dc_signals, effects, escalations, unsourceable, plan)
            events = self.world.step_day()
            self._absorb_day_events(events)
            return {
                "day": today,
                "pos_drafted": [po.id for po in drafted],
                "plan_id": plan.id if plan else None,
                "dispatched": [p.id for p in dispatched],
                "alerts_raised": raised,
                "sold": events.sold_total,
                "lost": events.lost_total,
            }

    def run(self, days: int) -> None:
        for _ in range(days):
            self.run_cycle()

    # --- stages ---------------------------------------------------------

    def _stage_forecast(self, today: int) -> None:
        horizon = self._horizon()
        fcs: dict[tuple[str, str], ForecastSeries] = {}
        for (out_id, sku_id) in sorted(self.config.demand):
            history = self.world.sales.get((out_id, sku_id), [])
            fcs[(out_id, sku_id)] = forecast(
                history, self.calendar, out_id, sku_id, horizon, today)
        self._forecasts = fcs

        dc: dict[str, ForecastSeries] = {}
        for sku in sorted(self.config.skus, key=lambda s: s.id):
            series = [fc for (_, s), fc in sorted(fcs.items()) if s == sku.id]
            if series:
                dc[sku.id] = aggregate_for_dc(series, sku.id)
        self._dc_forecasts = dc

        self.audit.append(today, "forecasting_agent", "forecasts_generated", {
            "day": today,
            "series": len(fcs),
            "dc_daily_mean": {s: round(fc.mean[0], 3) for s, fc in sorted(dc.items())},
        })

    def _stage_inventory_scan(
        self, today: int
    ) -> tuple[list[ReplenishmentSignal], list[ReplenishmentSignal]]:
        incoming = self.world.incoming_map()
        outlet_signals: list[ReplenishmentSignal] = []
        for (out_id, sku_id) in sorted(self.config.demand):
            rec = self.world.inventory(out_id, sku_id)
            sigs = evaluate(
                rec,
                self.config.sku(sku_id),
                self._forecasts[(out_id, sku_id)],
                lead_time_days=1,  # outlet restock is next-day from the DC
                policy=self.policy,
                arrivals=incoming.get((out_id, sku_id), []),
            )
            outlet_signals.extend(sigs)

        dc_signals: list[ReplenishmentSignal] = []
        for sku_id in sorted(self._dc_forecasts):
            rec = self.world.inventory(DC_ID, sku_id)
            cands = self._catalog.get(sku_id)
            lead = min(e.lead_time_days for e, _ in cands) if cands else 1
            sigs = evaluate(
                rec,
                self.config.sku(sku_id),
                self._dc_forecasts[sku_id],
                # deciding NOT to order today means the next chance lands a
                # review period later, so the scan must look that far ahead
                lead_time_days=lead + self.policy.review_period_days,
                policy=self.policy,
                arrivals=incoming.get((DC_ID, sku_id), []),
            )
            dc_signals.extend(sigs)

        signals = outlet_signals + dc_signals
        self._last_scan = (today, signals)
        self.audit.append(today, "inventory_agent", "inventory_scanned", {
            "day": today,
            "signals": [s.to_dict() for s in signals],
            "low_stock": sum(1 for s in signals if s.kind is SignalKind.LOW_STOCK),
            "expiry_risk": sum(1 for s in signals if s.kind is SignalKind.EXPIRY_RISK),
        })
        return outlet_signals, dc_signals

    def _stage_procurement(self, today, dc_signals):
        low = [s for s in dc_signals if s.kind is SignalKind.LOW_STOCK]

        # pending POs whose trigger evaporated are stale, not approvable
        active = {s.sku for s in low}
        for item in self._pending(ApprovalKind.PURCHASE_ORDER):
            po = self.pos[item.payload_ref]
            if po.sku_id not in active:
                self._auto_reject(item, today, "low-stock signal cleared")

        open_unconfirmed: dict[str, int] = {}
        for po in self.pos.values():
            if po.state in (POState.PENDING_APPROVAL, POState.APPROVED, POState.TRANSMITTED):
                open_unconfirmed[po.sku_id] = open_unconfirmed.get(po.sku_id, 0) + po.qty

        ctx = ProcurementContext(
            today=today,
            catalog=self._catalog,
            skus={s.id: s for s in self.config.skus},
            inventory_position={
                s.id: inventory_position(self.world.inventory(DC_ID, s.id))
                for s in self.config.skus
            },
            open_po_qty=open_unconfirmed,
            policy=self.policy,
            reasoners=self.reasoners,
            next_po_id=lambda: self._next_id("PO"),
        )
        drafted, unsourceable = draft_purchase_orders(low, self._dc_forecasts, ctx)
        for po in drafted:
            self.pos[po.id] = po
            self.audit.append(today, "procurement_agent", "po_drafted", po.to_dict())
            self._open_gate(ApprovalKind.PURCHASE_ORDER, po.id, today)
        return drafted, unsourceable

    def _stage_supplier(self, today):
        for po in sorted(self.pos.values(), key=lambda p: p.id):
            if po.state is POState.APPROVED:
                sup = self.config.supplier(po.supplier_id)
                inter = transmit(po, sup, today)
                self.interactions.append(inter)
                self.audit.append(today, "supplier_agent", "po_transmitted", {
                    "po_id": po.id,
                    "supplier_id": sup.id,
                    "qty": po.qty,
                    "reply_due_day": inter.next_response_day,
                })

        effects: list[ResponseEffect] = []
        for inter in due_responses(self.interactions, today):
            po = self.pos[inter.po_id]
            sup = self.config.supplier(inter.supplier_id)
            response = self.world.draw_supplier_response(
                sup, po.qty, po.order_day, po.lead_time_days)
            eff = apply_response(po, inter, response, today)
            self.audit.append(today, "supplier_agent", "supplier_response", {
                "po_id": eff.po_id,
                "supplier_id": eff.supplier_id,
                "kind": eff.kind,
                "confirmed_qty": eff.confirmed_qty,
                "shortfall": eff.shortfall,
                "promised_day": eff.promised_day,
                "late": eff.late,
            })
            if eff.kind in ("confirmed", "partial"):
                self.world.schedule_supplier_delivery(
                    po.id, po.sku_id, eff.confirmed_qty, eff.promised_day)
                self.reliability.record(sup, on_time=not eff.late)
            elif eff.kind == "rejected":
                self.reliability.record(sup, on_time=False)
            effects.append(eff)

        escalations: list[Escalation] = []
        suppliers = {s.id: s for s in self.config.suppliers}
        for action in supplier_tick(self.interactions, self.pos, suppliers, today, self.policy):
            if isinstance(action, FollowupAction):
                self.audit.append(today, "supplier_agent", "po_followup", {
                    "po_id": action.po_id,
                    "supplier_id": action.supplier_id,
                    "number": action.number,
                })
            else:
                self.audit.append(today, "supplier_agent", "po_escalated", {
                    "po_id": action.po_id,
                    "supplier_id": action.supplier_id,
                })
                self.reliability.record(suppliers[action.supplier_id], on_time=False)
                escalations.append(action)
        return effects, escalations

    def _stage_planning(self, today) -> "ReplenishmentPlan | None":
        # a plan drafted on an earlier day describes stock that no longer
        # exists in that shape; a fresh one supersedes it
        for item in self._pending(ApprovalKind.REPLENISHMENT_PLAN):
            if self.plans[item.payload_ref].day < today:
                self._auto_reject(item, today, "superseded by a newer planning day")

        incoming = self.world.incoming_map()
        available: dict[str, int] = {}
        for sku in sorted(self.config.skus, key=lambda s: s.id):
            rec = self.world.inventory(DC_ID, sku.id)
            arriving = sum(
                q for d, q in incoming.get((DC_ID, sku.id), []) if d <= today)
            free = rec.on_hand + arriving - rec.committed
            if free > 0:
                available[sku.id] = free

        positions = {
            (o, s): self.world.inventory(o, s).on_hand
            + sum(q for _, q in incoming.get((o, s), []))
            for (o, s) in sorted(self.config.demand)
        }

        ctx = PlanningContext(
            today=today,
            skus={s.id: s for s in self.config.skus},
            outlets={o.id: o for o in self.config.outlets},
            fleet=self.config.fleet,
            depot=self.config.dc_location,
            policy=self.policy,
            reasoners=self.reasoners,
            next_plan_id=lambda: self._next_id("PLAN"),
        )
        plan = build_plan(available, positions, self._forecasts, ctx)
        if not plan.allocations:
            self.audit.append(today, "planning_agent", "plan_skipped", {
                "day": today,
                "contingency_notes": plan.contingency_notes,
            })
            return None
        self.plans[plan.id] = plan
        self.audit.append(today, "planning_agent", "plan_drafted", plan.to_dict())
        self._open_gate(ApprovalKind.REPLENISHMENT_PLAN, plan.id, today)
        return plan

    def _stage_dispatch(self, today) -> list[ReplenishmentPlan]:
        dispatched = []
        for plan in sorted(self.plans.values(), key=lambda p: p.id):
            if plan.state is not PlanState.APPROVED or plan.id in self._undispatchable:
                continue
            blocked = self._dispatch_blocker(plan, today)
            if blocked:
                self._undispatchable.add(plan.id)
                self.audit.append(today, "dispatch", "plan_dispatch_blocked", {
                    "plan_id": plan.id,
                    "reason": blocked,
                })
                continue
            feasible = [r for r in plan.routes if r.feasible]
            for route in feasible:
                for (out_id, sku_id), units in sorted(route.load.items()):
                    self.world.schedule_outlet_delivery(plan.id, out_id, sku_id, units)
            plan.transition(PlanState.DISPATCHED)
            km = sum(r.total_km for r in feasible)
            self._route_km += km
            self.audit.append(today, "dispatch", "plan_dispatched", {
                "plan_id": plan.id,
                "day": today,
                "routes": [
                    {"vehicle_id": r.vehicle_id, "stops": r.stops,
                     "km": round(r.total_km, 3), "depart_minute": r.depart_minute}
                    for r in feasible
                ],
                "total_km": km,
                "skipped_outlets": plan.infeasible_outlets,
            })
            dispatched.append(plan)
        return dispatched

    def _dispatch_blocker(self, plan: ReplenishmentPlan, today: int) -> "str | None":
        """Why an approved plan cannot leave the yard today, if anything.

        A plan approved after its drafting day describes stock that may have
        sold, shipped, or expired since; dispatching it could overdraw the
        DC.  These stay approved-but-parked with an audit note — the next
        cycle drafts a fresh plan.
        """
        if plan.day < today:
            return f"approved on day {today} but drafted for day {plan.day}"
        needed: dict[str, int] = {}
        for route in plan.routes:
            if not route.feasible:
                continue
            for (_, sku_id), units in route.load.items():
                needed[sku_id] = needed.get(sku_id, 0) + units
        for sku_id in sorted(needed):
            rec = self.world.inventory(DC_ID, sku_id)
            arriving = sum(q for d, q in self.world.incoming(DC_ID, sku_id) if d <= today)
            free = rec.on_hand + arriving - rec.committed
            if needed[sku_id] > free:
                return f"insufficient {sku_id}: need {needed[sku_id]}, free {free}"
        return None

    def _stage_exceptions(
        self, today, outlet_signals, dc_signals, effects, escalations, unsourceable, plan
    ) -> list[str]:
        drafts = []
        for sig in outlet_signals + dc_signals:
            if sig.kind is SignalKind.LOW_STOCK:
                fc = (self._forecasts.get((sig.holder, sig.sku))
                      or self._dc_forecasts.get(sig.sku))
                drafts.append(from_low_stock(
                    sig, fc, self.world.incoming(sig.holder, sig.sku), today))
            elif sig.kind is SignalKind.EXPIRY_RISK:
                drafts.append(from_expiry_risk(sig, today))

        for eff in effects:
            if eff.late:
                drafts.append(from_late_promise(
                    self.pos[eff.po_id], self._dc_forecasts.get(eff.sku_id), today))
        for esc in escalations:
            drafts.append(from_escalation(self.pos[esc.po_id], today))
        for err in unsourceable:
            drafts.append(from_unsourceable(err, today))

        if plan is not None:
            for out_id in plan.infeasible_outlets:
                units = sum(
                    u for (o, _), u in plan.allocations.items() if o == out_id)
                drafts.append(from_dispatch_infeasibility(
                    plan.id, out_id, "no feasible route in today's plan", units, today))

        if self._last_events is not None:
            for (out_id, sku_id), sold in sorted(self._last_events.sold.items()):
                base = self._spike_base.get((out_id, sku_id))
                if base is not None:
                    drafts.append(from_demand_spike(
                        out_id, sku_id, sold, base[0], base[1],
                        self.policy.spike_k, today))

        raised = []
        for draft in drafts:
            if draft is None:
                continue
            alert, created = self.alerts.upsert(draft, today)
            if created:
                self.audit.append(today, "exception_agent", "alert_raised", alert.to_dict())
                raised.append(alert.id)
        return raised

    def _absorb_day_events(self, events: DayEvents) -> None:
        self._last_events = events
        self._days_run += 1
        self._sold += events.sold_total
        self._lost += events.lost_total
        self._waste += events.waste_total
        self._stockout_days += len(events.lost)
        for po_id in events.delivered_po_ids:
            po = self.pos.get(po_id)
            if po is not None and po.delivered_day is None:
                po.delivered_day = events.day
        self.audit.append(events.day, "simulator", "day_events", events.to_dict())

    # --- the approval gate ------------------------------------------------

    def _pending(self, kind: ApprovalKind) -> list[ApprovalItem]:
        return sorted(
            (i for i in self.approvals.values()
             if i.state is ApprovalState.PENDING and i.kind is kind),
            key=lambda i: i.id,
        )

    def _open_gate(self, kind: ApprovalKind, ref: str, today: int) -> ApprovalItem:
        item = ApprovalItem(self._next_id("AP"), kind, ref, today)
        self.approvals[item.id] = item
        self.audit.append(today, "system", "approval_requested", {
            "item_id": item.id,
            "kind": kind.value,
            "payload_ref": ref,
        })
        return item

    def _auto_reject(self, item: ApprovalItem, today: int, reason: str) -> None:
        item.state = ApprovalState.REJECTED
        item.decider = "system"
        item.decided_tick = today
        payload = self._payload_of(item)
        if item.kind is ApprovalKind.PURCHASE_ORDER:
            payload.transition(POState.CANCELLED)
        else:
            payload.transition(PlanState.REJECTED)
        self.audit.append(today, "system", "approval_auto_rejected", {
            "item_id": item.id,
            "kind": item.kind.value,
            "payload_ref": item.payload_ref,
            "reason": reason,
        })

    def _payload_of(self, item: ApprovalItem):
        if item.kind is ApprovalKind.PURCHASE_ORDER:
            return self.pos[item.payload_ref]
        return self.plans[item.payload_ref]

    def _apply_gate_policy(self, today: int) -> None:
        for item in self._pending(ApprovalKind.PURCHASE_ORDER) + self._pending(
                ApprovalKind.REPLENISHMENT_PLAN):
            if self.decision_policy is not None:
                verdict = self.decision_policy(item, self._payload_of(item).to_dict())
            elif self.auto_approve:
                verdict = "approve"
            else:
                verdict = None
            if verdict is None:
                continue
            if verdict not in ("approve", "reject"):
                raise ValidationError(
                    "decision_policy", f"returned {verdict!r}, expected approve/reject/None")
            self.submit_decision(item.id, verdict, decider="system")

    def submit_decision(
        self,
        item_id: str,
        decision: str,
        decider: str,
        modification: "dict | None" = None,
    ) -> ApprovalItem:
        """Decide a pending item: ``approve``, ``reject``, or ``modify``.

        Modify applies the delta, re-validates the payload, and approves the
        result.  Raises KeyError for an unknown item, WrongState when the
        item was already decided, ValidationError for a bad decision string
        or delta.
        """
        with self.lock:
            if item_id not in self.approvals:
                raise KeyError(item_id)
            item = self.approvals[item_id]
            if item.state is not ApprovalState.PENDING:
                raise WrongState(f"{item_id} already decided: {item.state.value}")
            today = self.world.day

            if decision == "approve":
                self._decide(item, ApprovalState.APPROVED, decider, today, None)
            elif decision == "reject":
                payload = self._payload_of(item)
                if item.kind is ApprovalKind.PURCHASE_ORDER:
                    payload.transition(POState.CANCELLED)
                else:
                    payload.transition(PlanState.REJECTED)
                self._decide(item, ApprovalState.REJECTED, decider, today, None)
            elif decision == "modify":
                if not isinstance(modification, dict) or not modification:
                    raise ValidationError("modification", "modify requires a delta object")
                self._apply_modification(item, modification)
                self._decide(item, ApprovalState.MODIFIED, decider, today, modification)
            else:
                raise ValidationError(
                    "decision", f"{decision!r} is not approve/reject/modify")
            return item

    def _decide(self, item, state, decider, today, modification) -> None:
        item.state = state
        item.decider = decider
        item.decided_tick = today
        item.modification = modification
        if state in (ApprovalState.APPROVED, ApprovalState.MODIFIED):
            payload = self._payload_of(item)
            if item.kind is ApprovalKind.PURCHASE_ORDER:
                payload.transition(POState.APPROVED)
            else:
                payload.transition(PlanState.APPROVED)
        self.audit.append(today, decider, "approval_decision", {
            "item_id": item.id,
            "kind": item.kind.value,
            "payload_ref": item.payload_ref,
            "decision": {
                ApprovalState.APPROVED: "approve",
                ApprovalState.MODIFIED: "modify",
                ApprovalState.REJECTED: "reject",
            }[state],
            "modification": modification,
        })

    def _apply_modification(self, item: ApprovalItem, delta: dict) -> None:
        if item.kind is ApprovalKind.PURCHASE_ORDER:
            po = self.pos[item.payload_ref]
            unknown = set(delta) - {"qty"}
            if unknown:
                raise ValidationError("modification", f"unknown PO fields {sorted(unknown)}")
            qty = delta.get("qty")
            if not isinstance(qty, int) or isinstance(qty, bool) or qty <= 0:
                raise ValidationError("modification.qty", f"must be a positive integer, got {qty!r}")
            po.qty = qty
            po.flags.add("modified")
            return

        plan = self.plans[item.payload_ref]
        unknown = set(delta) - {"allocations"}
        if unknown:
            raise ValidationError("modification", f"unknown plan fields {sorted(unknown)}")
        rows = delta.get("allocations")
        if not isinstance(rows, list) or not rows:
            raise ValidationError("modification.allocations", "must be a non-empty list")
        changes: dict[tuple[str, str], int] = {}
        for row in rows:
            if not isinstance(row, dict) or set(row) != {"outlet", "sku", "units"}:
                raise ValidationError(
                    "modification.allocations", "rows need outlet, sku, units")
            key = (row["outlet"], row["sku"])
            if key not in plan.allocations:
                raise ValidationError(
                    "modification.allocations", f"{key[0]}/{key[1]} is not in the plan")
            units = row["units"]
            current = plan.allocations[key]
            if not isinstance(units, int) or isinstance(units, bool) or not 0 <= units <= current:
                raise ValidationError(
                    "modification.allocations",
                    f"{key[0]}/{key[1]}: units must be an integer in 0..{current}, got {units!r}")
            changes[key] = units

        for key, units in changes.items():
            freed = plan.allocations[key] - units
            if freed:
                plan.unallocated[key[1]] = plan.unallocated.get(key[1], 0) + freed
            if units:
                plan.allocations[key] = units
            else:
                del plan.allocations[key]

        ctx = PlanningContext(
            today=plan.day,
            skus={s.id: s for s in self.config.skus},
            outlets={o.id: o for o in self.config.outlets},
            fleet=self.config.fleet,
            depot=self.config.dc_location,
            policy=self.policy,
            reasoners=self.reasoners,
            next_plan_id=lambda: plan.id,
        )
        routes, infeasible, baseline_km = route_allocations(plan.allocations, ctx)
        plan.routes = routes
        plan.infeasible_outlets = sorted(set(infeasible))
        plan.baseline_km = baseline_km
        plan.optimized_km = sum(r.total_km for r in routes)

    def draft_plan_now(self) -> tuple["ReplenishmentPlan | None", bool]:
        """Draft and gate a plan for today on demand, between daily cycles.

        Returns (plan, drafted).  If today's plan is already waiting at the
        gate it is returned untouched with drafted=False; otherwise the
        planning stage runs and the fresh plan (or None when there is
        nothing to allocate) comes back with drafted=True.
        """
        with self.lock:
            today = self.world.day
            for item in self._pending(ApprovalKind.REPLENISHMENT_PLAN):
                plan = self.plans[item.payload_ref]
                if plan.day == today:
                    return plan, False
            return self._stage_planning(today), True

    # --- alerts -----------------------------------------------------------

    def acknowledge_alert(self, alert_id: str, actor: str) -> ExceptionAlert:
        with self.lock:
            alert = self.alerts.acknowledge(alert_id)
            self.audit.append(self.world.day, actor, "alert_acknowledged", {
                "alert_id": alert.id, "kind": alert.kind.value, "subject": alert.subject,
            })
            return alert

    def resolve_alert(self, alert_id: str, actor: str) -> ExceptionAlert:
        with self.lock:
            alert = self.alerts.resolve(alert_id)
            self.audit.append(self.world.day, actor, "alert_resolved", {
                "alert_id": alert.id, "kind": alert.kind.value, "subject": alert.subject,
            })
            return alert

    # --- views ------------------------------------------------------------

    def kpis(self) -> KpiReport:
        with self.lock:
            demand = self._sold + self._lost
            return KpiReport(
                days_run=self._days_run,
                units_sold=self._sold,
                lost_sales=self._lost,
                fill_rate=self._sold / demand if demand else 1.0,
                stockout_days=self._stockout_days,
                waste_units=self._waste,
                total_route_km=self._route_km,
                pending_pos=len(self._pending(ApprovalKind.PURCHASE_ORDER)),
                pending_plans=len(self._pending(ApprovalKind.REPLENISHMENT_PLAN)),
                open_alerts=len(self.alerts.live()),
            )

    def approval_views(self) -> list[dict]:
        """Every gate item, enriched with a payload summary, newest first."""
        with self.lock:
            out = []
            for item in sorted(self.approvals.values(), key=lambda i: i.id, reverse=True):
                view = item.to_dict()
                payload = self._payload_of(item)
                if item.kind is ApprovalKind.PURCHASE_ORDER:
                    view["summary"] = {
                        "sku_id": payload.sku_id,
                        "supplier_id": payload.supplier_id,
                        "qty": payload.qty,
                        "need_by_day": payload.need_by_day,
                        "state": payload.state.value,
                        "flags": sorted(payload.flags),
                        "rationale":
                            payload.rationale.to_dict() if payload.rationale else None,
                        "supplier_rationale":
                            payload.supplier_rationale.to_dict()
                            if payload.supplier_rationale else None,
                    }
                else:
                    view["summary"] = {
                        "day": payload.day,
                        "outlets": len({o for o, _ in payload.allocations}),
                        "units": sum(payload.allocations.values()),
                        "routes": len(payload.routes),
                        "state": payload.state.value,
                        "rationale":
                            payload.rationale.to_dict() if payload.rationale else None,
                    }
                out.append(view)
            return out

    def snapshot(self) -> dict:
        with self.lock:
            dc_stock = {
                s.id: self.world.inventory(DC_ID, s.id).on_hand
                for s in sorted(self.config.skus, key=lambda s: s.id)
            }
            outlet_units: dict[str, int] = {}
            for (o, s), rec in sorted(self.world.inventories.items()):
                if o != DC_ID:
                    outlet_units[o] = outlet_units.get(o, 0) + rec.on_hand
            return {
                "day": self.world.day,
                "seed": self.config.seed,
                "outlets": len(self.config.outlets),
                "skus": len(self.config.skus),
                "kpis": self.kpis().to_dict(),
                "pending_approvals": [
                    v for v in self.approval_views() if v["state"] == "Pending"
                ],
                "alerts": [a.to_dict() for a in rank(self.alerts.live())],
                "purchase_orders": [
                    po.to_dict() for po in sorted(self.pos.values(), key=lambda p: p.id)
                    if po.state not in (POState.CANCELLED, POState.REJECTED)
                ][-50:],
                "plans": [
                    {"id": p.id, "day": p.day, "state": p.state.value,
                     "units": sum(p.allocations.values()),
                     "optimized_km": round(p.optimized_km, 3)}
                    for p in sorted(self.plans.values(), key=lambda p: p.id)
                ][-20:],
                "dc_stock": dc_stock,
                "outlet_stock": outlet_units,
            }

    def close(self) -> None:
        self.audit.close()
