"""Inventory monitoring: replenishment signals, overstock notices, expiry risk.

All evaluation is a pure function of an inventory snapshot, a forecast, and
scheduled arrivals — nothing is latched, so re-running on the same snapshot
yields identical signals.

Projection convention: projection(d) is the stock available at the start of
day d (arrivals on a day land before that day's sales), computed as
on_hand + arrivals(arrive_day <= d) - sum of forecast means over [today, d-1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .domain import Batch, InventoryRecord, PolicyParams, Sku, days_of_cover, inventory_position
from .forecasting import ForecastSeries


class SignalKind(str, Enum):
    LOW_STOCK = "low_stock"
    EXPIRY_RISK = "expiry_risk"
    OVERSTOCK = "overstock"


@dataclass
class ReplenishmentSignal:
    holder: str
    sku: str
    kind: SignalKind
    trigger_trace: str
    projected_stockout_day: int | None = None
    at_risk_qty: int = 0
    first_risk_day: int | None = None

    def to_dict(self) -> dict:
        d = {
            "holder": self.holder,
            "sku": self.sku,
            "kind": self.kind.value,
            "trigger_trace": self.trigger_trace,
        }
        if self.projected_stockout_day is not None:
            d["projected_stockout_day"] = self.projected_stockout_day
        if self.kind is SignalKind.EXPIRY_RISK:
            d["at_risk_qty"] = self.at_risk_qty
            d["first_risk_day"] = self.first_risk_day
        return d


def project_on_hand(
    on_hand: int,
    forecast: ForecastSeries,
    arrivals: list[tuple[int, int]],
    day: int,
) -> float:
    """Projected stock at the start of `day` (absolute), per the convention above."""
    today = forecast.start_day
    arrived = sum(q for (d, q) in arrivals if d <= day)
    consumed = forecast.demand_between(today, day - 1) if day > today else 0.0
    return on_hand + arrived - consumed


def projected_stockout_day(
    on_hand: int,
    forecast: ForecastSeries,
    arrivals: list[tuple[int, int]],
    search_days: int,
) -> int | None:
    """First day within the search window whose projection is <= 0."""
    today = forecast.start_day
    for d in range(today, today + search_days + 1):
        if project_on_hand(on_hand, forecast, arrivals, d) <= 0:
            return d
    return None


def evaluate(
    rec: InventoryRecord,
    sku: Sku,
    forecast: ForecastSeries,
    lead_time_days: int,
    policy: PolicyParams,
    arrivals: list[tuple[int, int]] | None = None,
) -> list[ReplenishmentSignal]:
    """Emit low_stock / overstock / expiry_risk signals for one (holder, sku)."""
    if forecast.horizon < lead_time_days:
        raise ValueError(f"forecast horizon {forecast.horizon} < lead time {lead_time_days}")
    arrivals = arrivals or []
    today = forecast.start_day
    signals: list[ReplenishmentSignal] = []

    safety = policy.service_z * forecast.sigma_daily * math.sqrt(lead_time_days)
    at_lead = project_on_hand(rec.on_hand, forecast, arrivals, today + lead_time_days)
    if at_lead < safety:
        stockout = projected_stockout_day(
            rec.on_hand, forecast, arrivals, search_days=max(lead_time_days, forecast.horizon)
        )
        signals.append(
            ReplenishmentSignal(
                holder=rec.holder,
                sku=rec.sku_id,
                kind=SignalKind.LOW_STOCK,
                projected_stockout_day=stockout,
                trigger_trace=(
                    f"low_stock: projected on_hand {at_lead:.1f} at day {today + lead_time_days} "
                    f"< safety stock {safety:.1f} (z={policy.service_z}, "
                    f"sigma={forecast.sigma_daily:.2f}, lead={lead_time_days}d)"
                ),
            )
        )

    doc = days_of_cover(rec.on_hand, forecast.avg_mean())
    limit = policy.overstock_multiple * sku.target_cover_days
    if doc > limit:
        doc_text = "inf" if math.isinf(doc) else f"{doc:.1f}"
        signals.append(
            ReplenishmentSignal(
                holder=rec.holder,
                sku=rec.sku_id,
                kind=SignalKind.OVERSTOCK,
                trigger_trace=(
                    f"overstock: days_of_cover {doc_text} > {limit:.1f} "
                    f"({policy.overstock_multiple} x target cover {sku.target_cover_days}d)"
                ),
            )
        )

    if sku.perishable and rec.batches:
        at_risk, first_day = expiry_risk(rec.batches, forecast)
        if at_risk > 0:
            signals.append(
                ReplenishmentSignal(
                    holder=rec.holder,
                    sku=rec.sku_id,
                    kind=SignalKind.EXPIRY_RISK,
                    at_risk_qty=at_risk,
                    first_risk_day=first_day,
                    trigger_trace=(
                        f"expiry_risk: {at_risk} units project unsold at expiry "
                        f"(first at day {first_day}) under FEFO at forecast rate"
                    ),
                )
            )

    return signals


def expiry_risk(batches: list[Batch], forecast: ForecastSeries) -> tuple[int, int | None]:
    """FEFO sell-through projection: (units at risk, earliest at-risk expiry day).

    Consumption starts tomorrow — sales still happen on a batch's expiry day,
    and remaining units afterwards are the risk. Days beyond the forecast
    horizon extend the final horizon mean.
    """
    today = forecast.start_day
    live = sorted(([float(b.qty), b.expiry_day] for b in batches if b.qty > 0),
                  key=lambda b: b[1])
    if not live:
        return 0, None
    at_risk = 0.0
    first_day: int | None = None

    # anything already at or past expiry has no selling day left
    while live and live[0][1] <= today:
        qty, expiry = live.pop(0)
        at_risk += qty
        if first_day is None:
            first_day = expiry

    last_expiry = live[-1][1] if live else today
    for day in range(today + 1, last_expiry + 1):
        rate = forecast.mean_on(day)
        for b in live:
            if rate <= 0:
                break
            take = min(b[0], rate)
            b[0] -= take
            rate -= take
        for b in live:
            if b[1] == day and b[0] > 0:
                at_risk += b[0]
                if first_day is None:
                    first_day = day
                b[0] = 0.0
        live = [b for b in live if b[0] > 0]
    return int(round(at_risk)), first_day
