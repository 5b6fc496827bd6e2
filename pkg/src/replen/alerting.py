"""Exception alerts: detection helpers, deduplication, priority ranking.

Every risk the pipeline can surface maps to one of seven kinds.  Detection
is split into small builders the orchestrator calls as events occur (a late
promise, an escalation, an infeasible route), so each stays pure and
testable; the AlertBook then deduplicates by (kind, subject) and keeps
impact figures fresh while an alert is still live.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

from .forecasting import ForecastSeries
from .monitoring import ReplenishmentSignal, SignalKind
from .procurement import PurchaseOrder, UnsourceableSku, WrongState


class AlertKind(str, Enum):
    STOCKOUT_IMMINENT = "E1"
    SUPPLIER_DELAY = "E2"
    EXPIRY_RISK = "E3"
    DEMAND_SPIKE = "E4"
    SUPPLIER_NONRESPONSE = "E5"
    DISPATCH_INFEASIBLE = "E6"
    UNSOURCEABLE_SKU = "E7"


SEVERITY: dict[AlertKind, int] = {
    AlertKind.STOCKOUT_IMMINENT: 5,
    AlertKind.SUPPLIER_DELAY: 4,
    AlertKind.EXPIRY_RISK: 3,
    AlertKind.DEMAND_SPIKE: 2,
    AlertKind.SUPPLIER_NONRESPONSE: 4,
    AlertKind.DISPATCH_INFEASIBLE: 4,
    AlertKind.UNSOURCEABLE_SKU: 5,
}

_ORDINAL = {kind: i for i, kind in enumerate(AlertKind)}


class AlertState(str, Enum):
    OPEN = "Open"
    ACKNOWLEDGED = "Acknowledged"
    RESOLVED = "Resolved"


@dataclass(frozen=True)
class AlertDraft:
    """A detected condition, not yet deduplicated or numbered."""

    kind: AlertKind
    subject: str
    impact: float  # units at stake
    days_to_impact: int
    trigger_trace: str
    recommended_action: str


@dataclass
class ExceptionAlert:
    id: str
    kind: AlertKind
    subject: str
    impact: float
    days_to_impact: int
    trigger_trace: str
    recommended_action: str
    state: AlertState = AlertState.OPEN
    raised_day: int = 0

    @property
    def severity_weight(self) -> int:
        return SEVERITY[self.kind]

    @property
    def priority_score(self) -> float:
        return self.severity_weight * self.impact / (self.days_to_impact + 1)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "subject": self.subject,
            "impact": round(self.impact, 3),
            "days_to_impact": self.days_to_impact,
            "severity_weight": self.severity_weight,
            "priority_score": round(self.priority_score, 4),
            "trigger_trace": self.trigger_trace,
            "recommended_action": self.recommended_action,
            "state": self.state.value,
            "raised_day": self.raised_day,
        }


class AlertBook:
    """Registry with (kind, subject) dedup: a live alert absorbs re-detections
    of the same condition, refreshing its numbers instead of multiplying."""

    def __init__(self, next_id: Callable[[], str]) -> None:
        self._next_id = next_id
        self.alerts: dict[str, ExceptionAlert] = {}
        self._live: dict[tuple[AlertKind, str], str] = {}

    def upsert(self, draft: AlertDraft, day: int) -> tuple[ExceptionAlert, bool]:
        key = (draft.kind, draft.subject)
        existing_id = self._live.get(key)
        if existing_id is not None:
            alert = self.alerts[existing_id]
            alert.impact = draft.impact
            alert.days_to_impact = draft.days_to_impact
            alert.trigger_trace = draft.trigger_trace
            alert.recommended_action = draft.recommended_action
            return alert, False
        alert = ExceptionAlert(
            id=self._next_id(),
            kind=draft.kind,
            subject=draft.subject,
            impact=draft.impact,
            days_to_impact=draft.days_to_impact,
            trigger_trace=draft.trigger_trace,
            recommended_action=draft.recommended_action,
            raised_day=day,
        )
        self.alerts[alert.id] = alert
        self._live[key] = alert.id
        return alert, True

    def acknowledge(self, alert_id: str) -> ExceptionAlert:
        alert = self._get(alert_id)
        if alert.state is not AlertState.OPEN:
            raise WrongState(f"alert {alert_id} is {alert.state.value}, not Open")
        alert.state = AlertState.ACKNOWLEDGED
        return alert

    def resolve(self, alert_id: str) -> ExceptionAlert:
        alert = self._get(alert_id)
        if alert.state is AlertState.RESOLVED:
            raise WrongState(f"alert {alert_id} is already Resolved")
        alert.state = AlertState.RESOLVED
        self._live.pop((alert.kind, alert.subject), None)
        return alert

    def _get(self, alert_id: str) -> ExceptionAlert:
        if alert_id not in self.alerts:
            raise KeyError(f"no alert {alert_id}")
        return self.alerts[alert_id]

    def get(self, alert_id: str) -> ExceptionAlert:
        return self._get(alert_id)

    def live(self) -> list[ExceptionAlert]:
        return [self.alerts[i] for i in self._live.values()]


def rank(alerts: Iterable[ExceptionAlert]) -> list[ExceptionAlert]:
    """Most urgent first; deterministic total order."""
    return sorted(alerts, key=lambda a: (-a.priority_score, _ORDINAL[a.kind], a.id))


# ---------------------------------------------------------------------------
# detection builders, one per kind


def _uncovered_demand(fc: ForecastSeries, start_day: int, arrivals: list[tuple[int, int]]) -> float:
    """Forecast demand from start_day until the first later arrival (or the
    end of the horizon): the units nobody currently covers."""
    end = fc.start_day + fc.horizon - 1
    later = [d for d, _ in arrivals if d > start_day]
    if later:
        end = min(end, min(later) - 1)
    if end < start_day:
        return 0.0
    return fc.demand_between(start_day, end)


def from_low_stock(
    signal: ReplenishmentSignal,
    fc: ForecastSeries,
    arrivals: list[tuple[int, int]],
    today: int,
) -> AlertDraft | None:
    """E1 when the projection actually reaches zero, not merely dips below
    safety stock."""
    if signal.kind is not SignalKind.LOW_STOCK or signal.projected_stockout_day is None:
        return None
    day = signal.projected_stockout_day
    impact = math.ceil(_uncovered_demand(fc, day, arrivals))
    subject = f"{signal.holder}/{signal.sku}"
    return AlertDraft(
        kind=AlertKind.STOCKOUT_IMMINENT,
        subject=subject,
        impact=float(max(impact, 1)),
        days_to_impact=max(0, day - today),
        trigger_trace=signal.trigger_trace,
        recommended_action=(
            f"expedite inbound stock for {subject}: projected stockout on day "
            f"{day}; consider an emergency transfer or a faster supplier"
        ),
    )


def from_expiry_risk(signal: ReplenishmentSignal, today: int) -> AlertDraft | None:
    if signal.kind is not SignalKind.EXPIRY_RISK or signal.at_risk_qty <= 0:
        return None
    first = signal.first_risk_day if signal.first_risk_day is not None else today
    subject = f"{signal.holder}/{signal.sku}"
    return AlertDraft(
        kind=AlertKind.EXPIRY_RISK,
        subject=subject,
        impact=float(signal.at_risk_qty),
        days_to_impact=max(0, first - today),
        trigger_trace=signal.trigger_trace,
        recommended_action=(
            f"{signal.at_risk_qty} units at {subject} will outlive demand: "
            f"mark down, transfer, or trim the next order"
        ),
    )


def from_late_promise(po: PurchaseOrder, fc: ForecastSeries | None, today: int) -> AlertDraft:
    """E2: the supplier will deliver after the stock is needed."""
    assert po.promised_day is not None
    if fc is not None:
        gap_end = min(po.promised_day - 1, fc.start_day + fc.horizon - 1)
        impact = max(1.0, math.ceil(fc.demand_between(po.need_by_day, gap_end)))
    else:
        impact = float(po.qty)
    return AlertDraft(
        kind=AlertKind.SUPPLIER_DELAY,
        subject=po.id,
        impact=float(impact),
        days_to_impact=max(0, po.need_by_day - today),
        trigger_trace=(
            f"{po.id} promised day {po.promised_day} but needed by day "
            f"{po.need_by_day} ({po.supplier_id})"
        ),
        recommended_action=(
            f"chase {po.supplier_id} to pull {po.id} forward, or cover days "
            f"{po.need_by_day}-{po.promised_day} from an alternate source"
        ),
    )


def from_escalation(po: PurchaseOrder, today: int) -> AlertDraft:
    """E5: follow-up budget exhausted, the order is presumed dead."""
    return AlertDraft(
        kind=AlertKind.SUPPLIER_NONRESPONSE,
        subject=po.id,
        impact=float(po.qty),
        days_to_impact=max(0, po.need_by_day - today),
        trigger_trace=f"{po.supplier_id} never answered {po.id}; order expired",
        recommended_action=(
            f"re-source {po.qty} x {po.sku_id} from another supplier and "
            f"review {po.supplier_id}'s standing"
        ),
    )


def from_dispatch_infeasibility(plan_id: str, outlet_id: str, reason: str, units: int, today: int) -> AlertDraft:
    return AlertDraft(
        kind=AlertKind.DISPATCH_INFEASIBLE,
        subject=f"{plan_id}/{outlet_id}",
        impact=float(max(units, 1)),
        days_to_impact=0,
        trigger_trace=f"{plan_id}: {outlet_id} cannot be served ({reason})",
        recommended_action=(
            f"re-plan {outlet_id}: add a vehicle, relax its window, or defer "
            f"part of the load to tomorrow"
        ),
    )


def from_unsourceable(err: UnsourceableSku, today: int) -> AlertDraft:
    return AlertDraft(
        kind=AlertKind.UNSOURCEABLE_SKU,
        subject=err.sku_id,
        impact=float(max(err.needed_qty, 1)),
        days_to_impact=0,
        trigger_trace=err.trace,
        recommended_action=(
            f"no catalog source for {err.sku_id} ({err.needed_qty} units "
            f"needed): onboard a supplier or delist the SKU"
        ),
    )


def spike_exceeds(sales: float, mean: float, sigma: float, k: float) -> bool:
    return sales > mean + k * sigma


def from_demand_spike(
    outlet_id: str, sku_id: str, sales: int, mean: float, sigma: float, k: float, today: int
) -> AlertDraft | None:
    """E4: yesterday's sales blew past the band the forecast allowed."""
    if not spike_exceeds(sales, mean, sigma, k):
        return None
    subject = f"{outlet_id}/{sku_id}"
    return AlertDraft(
        kind=AlertKind.DEMAND_SPIKE,
        subject=subject,
        impact=float(sales - mean),
        days_to_impact=0,
        trigger_trace=(
            f"sales {sales} at {subject} vs forecast {mean:.1f} "
            f"(threshold {mean + k * sigma:.1f} = mean + {k:g} sigma)"
        ),
        recommended_action=(
            f"review {subject}: verify the till data, check for an untracked "
            f"promotion, and consider a forecast override"
        ),
    )
