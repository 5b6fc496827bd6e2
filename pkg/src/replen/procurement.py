"""Draft purchase orders: order-up-to sizing, supplier scoring, uncertainty flags.

Every PO is born Draft, moves to PendingApproval immediately, and carries two
reasoning traces — one for the quantity decision, one for the supplier choice
— plus the full supplier score table, so an approver can see exactly why it
asks what it asks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .consortium import Reasoner, ReasonerTask, ReasoningTrace, TaskKind, decide
from .domain import DC_ID, CatalogEntry, PolicyParams, Sku, Supplier
from .forecasting import ForecastSeries
from .monitoring import ReplenishmentSignal


class POState(str, Enum):
    DRAFT = "Draft"
    PENDING_APPROVAL = "PendingApproval"
    APPROVED = "Approved"
    TRANSMITTED = "Transmitted"
    CONFIRMED = "Confirmed"
    PARTIALLY_CONFIRMED = "PartiallyConfirmed"
    REJECTED = "Rejected"
    EXPIRED = "Expired"
    CANCELLED = "Cancelled"


# Legal lifecycle moves. Transmitted POs can still be Rejected — that is the
# supplier declining the order, as opposed to a human rejecting the draft.
_TRANSITIONS: dict[POState, set[POState]] = {
    POState.DRAFT: {POState.PENDING_APPROVAL, POState.CANCELLED},
    POState.PENDING_APPROVAL: {POState.APPROVED, POState.REJECTED, POState.CANCELLED},
    POState.APPROVED: {POState.TRANSMITTED, POState.CANCELLED},
    POState.TRANSMITTED: {POState.CONFIRMED, POState.PARTIALLY_CONFIRMED,
                          POState.EXPIRED, POState.REJECTED},
    POState.CONFIRMED: set(),
    POState.PARTIALLY_CONFIRMED: set(),
    POState.REJECTED: set(),
    POState.EXPIRED: set(),
    POState.CANCELLED: set(),
}


class WrongState(RuntimeError):
    pass


class HorizonTooShort(ValueError):
    pass


class NoCandidates(ValueError):
    pass


@dataclass
class PurchaseOrder:
    id: str
    sku_id: str
    supplier_id: str
    qty: int
    unit_price: int
    order_day: int
    need_by_day: int
    lead_time_days: int
    state: POState = POState.DRAFT
    promised_day: int | None = None
    confirmed_qty: int | None = None
    delivered_day: int | None = None
    flags: set[str] = field(default_factory=set)
    rationale: ReasoningTrace | None = None
    supplier_rationale: ReasoningTrace | None = None
    score_table: list[dict] = field(default_factory=list)

    def transition(self, new_state: POState) -> None:
        if new_state not in _TRANSITIONS[self.state]:
            raise WrongState(f"{self.id}: illegal transition {self.state.value} -> {new_state.value}")
        self.state = new_state

    @property
    def open_qty(self) -> int:
        """Units this PO still promises to bring in, by lifecycle stage."""
        if self.state in (POState.CONFIRMED, POState.PARTIALLY_CONFIRMED):
            return 0 if self.delivered_day is not None else (self.confirmed_qty or 0)
        if self.state in (POState.PENDING_APPROVAL, POState.APPROVED, POState.TRANSMITTED):
            return self.qty
        return 0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "sku_id": self.sku_id,
            "supplier_id": self.supplier_id,
            "qty": self.qty,
            "unit_price": self.unit_price,
            "order_day": self.order_day,
            "need_by_day": self.need_by_day,
            "lead_time_days": self.lead_time_days,
            "state": self.state.value,
            "promised_day": self.promised_day,
            "confirmed_qty": self.confirmed_qty,
            "delivered_day": self.delivered_day,
            "flags": sorted(self.flags),
            "rationale": self.rationale.to_dict() if self.rationale else None,
            "supplier_rationale": self.supplier_rationale.to_dict() if self.supplier_rationale else None,
            "score_table": self.score_table,
        }


def order_up_to_level(forecast: ForecastSeries, lead_time_days: int, policy: PolicyParams) -> int:
    """S = ceil(demand over protection period + z * sigma * sqrt(P))."""
    protection = lead_time_days + policy.review_period_days
    if forecast.horizon < protection:
        raise HorizonTooShort(f"horizon {forecast.horizon} < protection period {protection}")
    demand = sum(forecast.mean[:protection])
    safety = policy.service_z * forecast.sigma_daily * math.sqrt(protection)
    return math.ceil(demand + safety)


def compute_order_qty(s_level: int, ip: int, entry: CatalogEntry, case_pack: int) -> tuple[int, bool]:
    """Raw need rounded up to case pack, lifted to MOQ; returns (qty, moq_padded)."""
    raw = max(0, s_level - ip)
    if raw == 0:
        return 0, False
    qty = max(entry.moq, math.ceil(raw / case_pack) * case_pack)
    return qty, qty > raw * 1.5


def select_supplier(
    candidates: list[tuple[CatalogEntry, Supplier]],
    days_to_stockout: int | None,
    policy: PolicyParams,
) -> tuple[CatalogEntry, list[dict], bool]:
    """Score candidates on price, reliability, lead time; returns the winner,
    the full score table, and whether the urgency filter came up empty."""
    if not candidates:
        raise NoCandidates("no catalog entries to choose from")
    urgent = False
    pool = candidates
    if days_to_stockout is not None:
        fast_enough = [c for c in candidates if c[0].lead_time_days <= days_to_stockout]
        if fast_enough:
            pool = fast_enough
        else:
            urgent = True  # nobody can make it in time; keep all and flag

    prices = [e.unit_price for e, _ in pool]
    leads = [e.lead_time_days for e, _ in pool]

    def norm(x, lo, hi):
        return 0.0 if hi == lo else (x - lo) / (hi - lo)

    table = []
    for entry, sup in pool:
        p_hat = norm(entry.unit_price, min(prices), max(prices))
        l_hat = norm(entry.lead_time_days, min(leads), max(leads))
        score = (policy.w_price * (1.0 - p_hat)
                 + policy.w_reliability * sup.reliability
                 + policy.w_lead * (1.0 - l_hat))
        table.append({
            "supplier_id": sup.id,
            "unit_price": entry.unit_price,
            "lead_time_days": entry.lead_time_days,
            "reliability": sup.reliability,
            "price_norm": p_hat,
            "lead_norm": l_hat,
            "score": score,
        })
    table.sort(key=lambda row: (-row["score"], row["supplier_id"]))
    chosen_id = table[0]["supplier_id"]
    chosen = next(e for e, _ in pool if e.supplier_id == chosen_id)
    return chosen, table, urgent


@dataclass
class ProcurementContext:
    """Everything draft_purchase_orders needs beyond the signals themselves."""

    today: int
    catalog: dict[str, list[tuple[CatalogEntry, Supplier]]]  # sku -> candidates
    skus: dict[str, Sku]
    inventory_position: dict[str, int]  # sku -> DC inventory position
    open_po_qty: dict[str, int]  # sku -> units on unconfirmed open POs
    policy: PolicyParams
    reasoners: list[Reasoner]
    next_po_id: "callable"


@dataclass
class UnsourceableSku:
    sku_id: str
    needed_qty: int
    trace: str


def draft_purchase_orders(
    signals: list[ReplenishmentSignal],
    forecasts: dict[str, ForecastSeries],
    ctx: ProcurementContext,
) -> tuple[list[PurchaseOrder], list[UnsourceableSku]]:
    """One PO per DC low_stock signal, sized order-up-to and routed through
    the consortium; unsourceable SKUs come back as exception payloads."""
    pos: list[PurchaseOrder] = []
    unsourceable: list[UnsourceableSku] = []

    for sig in sorted(signals, key=lambda s: s.sku):
        forecast = forecasts[sig.sku]
        sku = ctx.skus[sig.sku]
        candidates = ctx.catalog.get(sig.sku, [])
        if not candidates:
            s_rough = order_up_to_level(forecast, 1, ctx.policy)
            gap = max(0, s_rough - ctx.inventory_position.get(sig.sku, 0))
            unsourceable.append(UnsourceableSku(
                sku_id=sig.sku,
                needed_qty=gap,
                trace=f"unsourceable: no catalog entry for {sig.sku} (signal: {sig.trigger_trace})",
            ))
            continue

        days_to_stockout = None
        if sig.projected_stockout_day is not None:
            days_to_stockout = max(0, sig.projected_stockout_day - ctx.today)

        # categorical decision: which supplier
        baseline_entry, table, urgent = select_supplier(candidates, days_to_stockout, ctx.policy)
        supplier_task = ReasonerTask(
            kind=TaskKind.SUPPLIER_CHOICE,
            context={
                "sku": sig.sku,
                "candidates": [row["supplier_id"] for row in table],
                "baseline_score": table[0]["score"],
            },
            baseline_hint=baseline_entry.supplier_id,
        )
        chosen_supplier_id, supplier_trace = decide(supplier_task, ctx.reasoners, ctx.policy)
        entry = next((e for e, _ in candidates if e.supplier_id == chosen_supplier_id), baseline_entry)

        # numeric decision: how much
        s_level = order_up_to_level(forecast, entry.lead_time_days, ctx.policy)
        ip_effective = ctx.inventory_position.get(sig.sku, 0) + ctx.open_po_qty.get(sig.sku, 0)
        raw = max(0, s_level - ip_effective)
        baseline_qty, moq_padded = compute_order_qty(s_level, ip_effective, entry, sku.case_pack)
        qty_task = ReasonerTask(
            kind=TaskKind.ORDER_QUANTITY,
            context={"sku": sig.sku, "s_level": s_level, "ip": ip_effective,
                     "supplier": entry.supplier_id},
            baseline_hint=baseline_qty,
        )
        qty_synth, qty_trace = decide(qty_task, ctx.reasoners, ctx.policy)
        qty = int(round(qty_synth))
        if qty > 0 and qty != baseline_qty:
            # re-impose supplier constraints on the synthesized quantity
            qty = max(entry.moq, math.ceil(qty / sku.case_pack) * sku.case_pack)
            moq_padded = raw > 0 and qty > raw * 1.5
        if qty <= 0:
            continue

        flags = set()
        if moq_padded:
            flags.add("moq_padded")
        if urgent:
            flags.add("urgent")
        cv_high = math.isinf(forecast.cv) or forecast.cv > ctx.policy.cv_flag_threshold
        if cv_high or qty_trace.flagged or supplier_trace.flagged:
            flags.add("forecast_uncertain")

        po = PurchaseOrder(
            id=ctx.next_po_id(),
            sku_id=sig.sku,
            supplier_id=entry.supplier_id,
            qty=qty,
            unit_price=entry.unit_price,
            order_day=ctx.today,
            need_by_day=ctx.today + entry.lead_time_days,
            lead_time_days=entry.lead_time_days,
            flags=flags,
            rationale=qty_trace,
            supplier_rationale=supplier_trace,
            score_table=table,
        )
        po.transition(POState.PENDING_APPROVAL)
        pos.append(po)

    return pos, unsourceable
