"""Purchase-order lifecycle with suppliers: transmit, track, follow up, escalate.

The orchestrator owns the clock and the RNG; everything here either mutates
the objects it is handed (under the orchestrator's lock) or returns plain
effect records describing what must happen next — scheduling deliveries,
emitting exceptions, re-triggering procurement for shortfalls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .domain import PolicyParams, Supplier
from .procurement import POState, PurchaseOrder
from .world import SupplierResponse


class InteractionStatus(str, Enum):
    AWAITING_RESPONSE = "AwaitingResponse"
    RESPONDED = "Responded"
    ESCALATED = "Escalated"


@dataclass
class SupplierInteraction:
    """Structured record of one PO's conversation with its supplier.

    ``next_response_day`` is when the supplier's reply is due to be played;
    ``None`` means the supplier has gone silent and only a follow-up will
    re-open the channel.  ``on_time`` is set once the interaction completes
    and feeds the supplier's observed reliability.
    """

    po_id: str
    supplier_id: str
    sent_day: int
    followups_sent: int = 0
    last_action_day: int = 0
    status: InteractionStatus = InteractionStatus.AWAITING_RESPONSE
    next_response_day: int | None = None
    on_time: bool | None = None
    log: list[dict] = field(default_factory=list)

    def note(self, day: int, event: str, detail: str = "") -> None:
        if self.log and day < self.log[-1]["day"]:
            raise ValueError(f"interaction log must be chronological: {day} after {self.log[-1]['day']}")
        self.log.append({"day": day, "event": event, "detail": detail})

    def to_dict(self) -> dict:
        return {
            "po_id": self.po_id,
            "supplier_id": self.supplier_id,
            "sent_day": self.sent_day,
            "followups_sent": self.followups_sent,
            "last_action_day": self.last_action_day,
            "status": self.status.value,
            "next_response_day": self.next_response_day,
            "on_time": self.on_time,
            "log": list(self.log),
        }


# ---------------------------------------------------------------------------
# effect records handed back to the orchestrator


@dataclass(frozen=True)
class FollowupAction:
    po_id: str
    supplier_id: str
    day: int
    number: int  # 1-based


@dataclass(frozen=True)
class Escalation:
    """Supplier never answered within the allowed follow-up budget."""

    po_id: str
    supplier_id: str
    day: int


@dataclass(frozen=True)
class ResponseEffect:
    po_id: str
    sku_id: str
    supplier_id: str
    kind: str  # "confirmed" | "partial" | "rejected" | "no_response"
    confirmed_qty: int
    shortfall: int
    promised_day: int | None
    late: bool  # promised after the day the stock was needed


def transmit(po: PurchaseOrder, supplier: Supplier, today: int) -> SupplierInteraction:
    """Send an approved PO to its supplier and open an interaction.

    Raises WrongState unless the PO is Approved, which also makes a second
    transmit of the same PO impossible.
    """
    po.transition(POState.TRANSMITTED)
    inter = SupplierInteraction(
        po_id=po.id,
        supplier_id=supplier.id,
        sent_day=today,
        last_action_day=today,
        next_response_day=today + supplier.response_delay_days,
    )
    inter.note(today, "transmitted", f"{po.qty} x {po.sku_id}, reply due day {inter.next_response_day}")
    return inter


def due_responses(interactions: list[SupplierInteraction], day: int) -> list[SupplierInteraction]:
    """Interactions whose reply should be played today, in PO-id order.

    The stable ordering is what keeps simulator RNG draws reproducible.
    """
    due = [
        i for i in interactions
        if i.status is InteractionStatus.AWAITING_RESPONSE
        and i.next_response_day is not None
        and i.next_response_day <= day
    ]
    return sorted(due, key=lambda i: i.po_id)


def apply_response(
    po: PurchaseOrder,
    interaction: SupplierInteraction,
    response: SupplierResponse,
    today: int,
) -> ResponseEffect:
    """Record what the supplier said and move the PO accordingly.

    Returns an effect the orchestrator acts on: scheduling the in-transit
    delivery for confirmed units, re-raising a low-stock pass for partial
    shortfalls, and turning ``late`` into a supplier-delay exception.
    """
    if po.state is not POState.TRANSMITTED:
        # transition() below would also catch this, but the error should name
        # the operation, not the attempted edge
        from .procurement import WrongState

        raise WrongState(f"cannot apply a response to {po.id} in state {po.state.value}")

    if response.kind == "none":
        interaction.next_response_day = None
        interaction.note(today, "no_response", "supplier silent; awaiting follow-up window")
        return ResponseEffect(po.id, po.sku_id, po.supplier_id, "no_response", 0, 0, None, False)

    if response.kind == "reject":
        po.transition(POState.REJECTED)
        interaction.status = InteractionStatus.RESPONDED
        interaction.on_time = False
        interaction.note(today, "rejected", "supplier declined the order")
        return ResponseEffect(po.id, po.sku_id, po.supplier_id, "rejected", 0, po.qty, None, False)

    assert response.promised_day is not None
    late = response.promised_day > po.need_by_day
    po.confirmed_qty = response.confirmed_qty
    po.promised_day = response.promised_day
    if response.kind == "confirm":
        po.transition(POState.CONFIRMED)
        kind = "confirmed"
    else:
        po.transition(POState.PARTIALLY_CONFIRMED)
        kind = "partial"
    shortfall = po.qty - response.confirmed_qty
    interaction.status = InteractionStatus.RESPONDED
    interaction.on_time = not late
    interaction.note(
        today,
        kind,
        f"{response.confirmed_qty}/{po.qty} promised day {response.promised_day}"
        + (" (late)" if late else ""),
    )
    return ResponseEffect(
        po.id, po.sku_id, po.supplier_id, kind,
        response.confirmed_qty, shortfall, response.promised_day, late,
    )


def tick(
    interactions: list[SupplierInteraction],
    pos_by_id: dict[str, PurchaseOrder],
    suppliers: dict[str, Supplier],
    day: int,
    policy: PolicyParams,
) -> list[FollowupAction | Escalation]:
    """Chase unanswered POs; escalate once the follow-up budget is spent.

    A follow-up re-arms ``next_response_day`` so the supplier gets a fresh
    chance to answer.  After ``max_followups`` follow-ups, the next elapsed
    window escalates: the interaction closes, the PO expires and releases
    any phantom pipeline quantity.
    """
    actions: list[FollowupAction | Escalation] = []
    awaiting = [i for i in interactions if i.status is InteractionStatus.AWAITING_RESPONSE]
    for inter in sorted(awaiting, key=lambda i: i.po_id):
        if day - inter.last_action_day < policy.followup_window_days:
            continue
        if inter.followups_sent >= policy.max_followups:
            inter.status = InteractionStatus.ESCALATED
            inter.on_time = False
            inter.note(day, "escalated", f"no reply after {inter.followups_sent} follow-ups")
            pos_by_id[inter.po_id].transition(POState.EXPIRED)
            actions.append(Escalation(inter.po_id, inter.supplier_id, day))
        else:
            inter.followups_sent += 1
            inter.last_action_day = day
            delay = suppliers[inter.supplier_id].response_delay_days
            inter.next_response_day = day + delay
            inter.note(day, "followup", f"#{inter.followups_sent}, reply due day {inter.next_response_day}")
            actions.append(FollowupAction(inter.po_id, inter.supplier_id, day, inter.followups_sent))
    return actions


class ReliabilityLedger:
    """Observed on-time fractions; overrides configured priors once data exists.

    An interaction counts as on-time only when the supplier answered and the
    promised date met the need-by date.  Escalations and rejections count
    against the supplier.
    """

    def __init__(self) -> None:
        self._completed: dict[str, int] = {}
        self._on_time: dict[str, int] = {}

    def record(self, supplier: Supplier, on_time: bool) -> None:
        self._completed[supplier.id] = self._completed.get(supplier.id, 0) + 1
        if on_time:
            self._on_time[supplier.id] = self._on_time.get(supplier.id, 0) + 1
        supplier.reliability = self._on_time.get(supplier.id, 0) / self._completed[supplier.id]

    def observed(self, supplier_id: str) -> tuple[int, int]:
        return self._on_time.get(supplier_id, 0), self._completed.get(supplier_id, 0)
