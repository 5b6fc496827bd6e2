"""Allocate incoming DC stock across outlets and build the dispatch plan.

Scarce stock is apportioned by priority-weighted need using the
largest-remainder method, whole-outlet loads are packed onto temperature-
matched vehicles, and tours come back from the routing layer already
sequenced and timed.  The finished plan is a document: allocations with a
rationale, route manifests, contingency notes for outlets left short, and
advisory consolidation suggestions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .consortium import ReasonerTask, ReasoningTrace, TaskKind, decide
from .domain import Outlet, PolicyParams, Sku, TempClass
from .forecasting import ForecastSeries
from .procurement import WrongState
from .routing import Route, baseline_routes, consolidation_scan, optimized_routes
from .world import Vehicle


def allocate(
    available: dict[str, int],
    needs: dict[tuple[str, str], int],
    priority_weights: dict[str, float],
) -> dict[tuple[str, str], int]:
    """Split each SKU's available units across outlets, never above need.

    Abundance hands every outlet its need.  Under scarcity, shares are
    proportional to priority-weighted need and rounded by largest remainder:
    floor every share, then hand out the leftover units one at a time by
    descending fractional remainder (ties to the lower outlet id), skipping
    outlets already at their need and cycling until the units run out.
    """
    allocations: dict[tuple[str, str], int] = {}
    for sku_id in sorted(available):
        stock = available[sku_id]
        rows = sorted(
            (outlet_id, qty)
            for (outlet_id, s), qty in needs.items()
            if s == sku_id and qty > 0
        )
        if not rows or stock <= 0:
            continue
        total_need = sum(q for _, q in rows)
        if total_need <= stock:
            for outlet_id, qty in rows:
                allocations[(outlet_id, sku_id)] = qty
            continue

        weighted = [(o, q, priority_weights.get(o, 1.0) * q) for o, q in rows]
        denom = sum(w for _, _, w in weighted)
        if denom <= 0:
            # degenerate weights: fall back to plain need proportions
            weighted = [(o, q, float(q)) for o, q in rows]
            denom = float(total_need)
        shares = [(o, q, stock * w / denom) for o, q, w in weighted]
        grants = {o: min(int(math.floor(share)), q) for o, q, share in shares}
        leftover = stock - sum(grants.values())

        # hand out remaining units by largest fractional remainder, cycling
        # while any outlet can still absorb one
        by_remainder = sorted(shares, key=lambda row: (-(row[2] - math.floor(row[2])), row[0]))
        while leftover > 0:
            placed = False
            for o, q, _ in by_remainder:
                if leftover == 0:
                    break
                if grants[o] < q:
                    grants[o] += 1
                    leftover -= 1
                    placed = True
            if not placed:
                break
        for o, q in rows:
            if grants[o] > 0:
                allocations[(o, sku_id)] = grants[o]
    return allocations


class PlanState(str, Enum):
    DRAFT = "Draft"
    PENDING_APPROVAL = "PendingApproval"
    APPROVED = "Approved"
    REJECTED = "Rejected"
    DISPATCHED = "Dispatched"


_TRANSITIONS: dict[PlanState, set[PlanState]] = {
    PlanState.DRAFT: {PlanState.PENDING_APPROVAL},
    PlanState.PENDING_APPROVAL: {PlanState.APPROVED, PlanState.REJECTED},
    PlanState.APPROVED: {PlanState.DISPATCHED},
    PlanState.REJECTED: set(),
    PlanState.DISPATCHED: set(),
}


@dataclass
class ReplenishmentPlan:
    id: str
    day: int
    allocations: dict[tuple[str, str], int]
    routes: list[Route]
    unallocated: dict[str, int]
    state: PlanState = PlanState.DRAFT
    rationale: ReasoningTrace | None = None
    contingency_notes: list[str] = field(default_factory=list)
    consolidation_recs: list[str] = field(default_factory=list)
    infeasible_outlets: list[str] = field(default_factory=list)
    baseline_km: float = 0.0
    optimized_km: float = 0.0

    def transition(self, to: PlanState) -> None:
        if to not in _TRANSITIONS[self.state]:
            raise WrongState(f"plan {self.id}: no transition {self.state.value} -> {to.value}")
        self.state = to

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "day": self.day,
            "state": self.state.value,
            "allocations": [
                {"outlet": o, "sku": s, "units": u}
                for (o, s), u in sorted(self.allocations.items())
            ],
            "routes": [r.to_dict() for r in self.routes],
            "unallocated": {s: u for s, u in sorted(self.unallocated.items())},
            "rationale": self.rationale.to_dict() if self.rationale else None,
            "contingency_notes": list(self.contingency_notes),
            "consolidation_recs": list(self.consolidation_recs),
            "infeasible_outlets": list(self.infeasible_outlets),
            "baseline_km": round(self.baseline_km, 3),
            "optimized_km": round(self.optimized_km, 3),
        }


def compute_needs(
    positions: dict[tuple[str, str], int],
    forecasts: dict[tuple[str, str], ForecastSeries],
    skus: dict[str, Sku],
) -> dict[tuple[str, str], int]:
    """Shortfall of each outlet position against the SKU's target cover."""
    needs: dict[tuple[str, str], int] = {}
    for (outlet_id, sku_id), fc in forecasts.items():
        cover = skus[sku_id].target_cover_days
        demand = math.ceil(sum(fc.mean[:cover]))
        gap = demand - positions.get((outlet_id, sku_id), 0)
        if gap > 0:
            needs[(outlet_id, sku_id)] = gap
    return needs


@dataclass
class PlanningContext:
    today: int
    skus: dict[str, Sku]
    outlets: dict[str, Outlet]
    fleet: Sequence[Vehicle]
    depot: tuple[float, float]
    policy: PolicyParams
    reasoners: Sequence
    next_plan_id: Callable[[], str]


def route_allocations(
    allocations: dict[tuple[str, str], int],
    ctx: PlanningContext,
) -> tuple[list[Route], list[str], float]:
    """Pack allocated loads by temperature class and sequence the tours.

    Returns (routes, outlets that could not be served, baseline km of the
    naive plan the optimizer is measured against).  Also used to rebuild a
    plan's routes after an approver trims its allocations.
    """
    volumes: dict[TempClass, dict[str, float]] = {}
    loads: dict[TempClass, dict[str, dict[tuple[str, str], int]]] = {}
    for (outlet_id, sku_id), units in sorted(allocations.items()):
        sku = ctx.skus[sku_id]
        tc = sku.temp_class
        volumes.setdefault(tc, {}).setdefault(outlet_id, 0.0)
        volumes[tc][outlet_id] += units * sku.unit_volume
        loads.setdefault(tc, {}).setdefault(outlet_id, {})[(outlet_id, sku_id)] = units

    routes: list[Route] = []
    infeasible: list[str] = []
    baseline_km = 0.0
    for tc in sorted(volumes, key=lambda t: t.value):
        class_fleet = [v for v in ctx.fleet if v.temp_class is tc]
        cap_minutes = ctx.policy.max_chilled_route_minutes if tc is TempClass.CHILLED else None
        class_routes, overflow = optimized_routes(
            volumes[tc], loads[tc], class_fleet, ctx.outlets, ctx.depot, cap_minutes)
        routes.extend(class_routes)
        infeasible.extend(overflow)
        infeasible.extend(o for r in class_routes if not r.feasible for o in r.stops)
        base, _ = baseline_routes(
            volumes[tc], loads[tc], class_fleet, ctx.outlets, ctx.depot)
        baseline_km += sum(r.total_km for r in base)
    return routes, infeasible, baseline_km


def build_plan(
    available: dict[str, int],
    positions: dict[tuple[str, str], int],
    forecasts: dict[tuple[str, str], ForecastSeries],
    ctx: PlanningContext,
) -> ReplenishmentPlan:
    """Draft one day's dispatch plan and submit it for approval.

    ``available`` is stock the DC can physically load today (on hand plus
    today's confirmed arrivals, minus units already committed to earlier
    dispatches).  Outlets the fleet cannot serve are reported, not dropped:
    their allocations stand and the infeasibility surfaces as an exception.
    """
    needs = compute_needs(positions, forecasts, ctx.skus)

    outlet_order = sorted(ctx.outlets)
    task = ReasonerTask(
        kind=TaskKind.ALLOCATION_WEIGHTS,
        context={
            "day": ctx.today,
            "outlets": outlet_order,
            "total_need": sum(needs.values()),
            "total_available": sum(available.values()),
        },
        baseline_hint=[ctx.outlets[o].priority_weight for o in outlet_order],
    )
    value, trace = decide(task, list(ctx.reasoners), ctx.policy)
    weights = {o: float(w) for o, w in zip(outlet_order, value)}

    allocations = allocate(available, needs, weights)

    # everything left at the DC after the plan, per sku
    granted: dict[str, int] = {}
    for (o, s), units in allocations.items():
        granted[s] = granted.get(s, 0) + units
    unallocated = {
        s: available[s] - granted.get(s, 0)
        for s in sorted(available)
        if available[s] - granted.get(s, 0) > 0
    }

    routes, infeasible, baseline_km = route_allocations(allocations, ctx)

    # outlets still projected to hit zero before the next planning cycle
    notes: list[str] = []
    horizon = ctx.policy.review_period_days + 1
    for (outlet_id, sku_id), fc in sorted(forecasts.items()):
        post = positions.get((outlet_id, sku_id), 0) + allocations.get((outlet_id, sku_id), 0)
        upcoming = math.ceil(sum(fc.mean[:horizon]))
        if post < upcoming:
            notes.append(
                f"{outlet_id}/{sku_id}: position {post} covers less than the "
                f"next {horizon} days of demand ({upcoming}); shortfall risk "
                f"until the next cycle"
            )

    plan = ReplenishmentPlan(
        id=ctx.next_plan_id(),
        day=ctx.today,
        allocations=allocations,
        routes=routes,
        unallocated=unallocated,
        rationale=trace,
        contingency_notes=notes,
        consolidation_recs=consolidation_scan(routes, list(ctx.fleet), ctx.outlets, ctx.depot),
        infeasible_outlets=sorted(set(infeasible)),
        baseline_km=baseline_km,
        optimized_km=sum(r.total_km for r in routes),
    )
    plan.transition(PlanState.PENDING_APPROVAL)
    return plan
