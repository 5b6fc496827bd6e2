"""Tour construction and dispatch scheduling on a flat 2-D map.

Distances are Euclidean kilometers, travel time is distance over a constant
per-vehicle speed, and departures are timed so vehicles never wait at a
closed gate: the depot departure is pushed just late enough that every stop
is reached at or after its window opens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .domain import Outlet, TempClass
from .world import Vehicle

Point = tuple[float, float]

_EPS = 1e-9  # an improvement smaller than this is noise, not progress


def dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def tour_length(stops: list[str], locations: dict[str, Point], depot: Point) -> float:
    """Total km of depot -> stops... -> depot."""
    if not stops:
        return 0.0
    km = dist(depot, locations[stops[0]])
    for a, b in zip(stops, stops[1:]):
        km += dist(locations[a], locations[b])
    return km + dist(locations[stops[-1]], depot)


def nearest_neighbor(stops: Iterable[str], locations: dict[str, Point], depot: Point) -> list[str]:
    """Greedy tour: repeatedly visit the closest unvisited stop (ties by id)."""
    remaining = sorted(stops)
    order: list[str] = []
    here = depot
    while remaining:
        nxt = min(remaining, key=lambda s: (dist(here, locations[s]), s))
        remaining.remove(nxt)
        order.append(nxt)
        here = locations[nxt]
    return order


def two_opt(
    order: list[str],
    locations: dict[str, Point],
    depot: Point,
    acceptable: Callable[[list[str]], bool] | None = None,
) -> list[str]:
    """Best-improvement 2-opt: apply the single most km-saving segment
    reversal, repeat until nothing saves more than epsilon.

    When ``acceptable`` is given, a reversal is only considered if the
    resulting order passes it (used to preserve window feasibility).
    """
    order = list(order)
    n = len(order)
    if n < 2:
        return order

    def point(i: int) -> Point:
        # virtual depot at both ends of the tour
        if i < 0 or i >= n:
            return depot
        return locations[order[i]]

    while True:
        best_delta = -_EPS
        best: tuple[int, int] | None = None
        for i in range(n - 1):
            for j in range(i + 1, n):
                # reversing order[i..j] swaps edges (i-1,i) and (j,j+1)
                # for (i-1,j) and (i,j+1)
                before = dist(point(i - 1), point(i)) + dist(point(j), point(j + 1))
                after = dist(point(i - 1), point(j)) + dist(point(i), point(j + 1))
                delta = after - before
                if delta < best_delta:
                    if acceptable is not None:
                        candidate = order[:i] + order[i:j + 1][::-1] + order[j + 1:]
                        if not acceptable(candidate):
                            continue
                    best_delta = delta
                    best = (i, j)
        if best is None:
            return order
        i, j = best
        order[i:j + 1] = order[i:j + 1][::-1]


@dataclass
class Schedule:
    depart_minute: int
    etas: list[int]  # arrival minute per stop, same order
    duration_minutes: int  # depot back to depot
    window_feasible: bool

    @property
    def return_minute(self) -> int:
        return self.depart_minute + self.duration_minutes


def schedule_departure(
    order: list[str],
    outlets: dict[str, Outlet],
    speed_kmh: float,
    depot: Point,
) -> Schedule:
    """Time a tour so no stop is reached before its window opens.

    Offsets from departure are fixed by geometry, so the latest
    ``open - offset`` over all stops is the earliest depot departure that
    avoids waiting anywhere.  Feasibility then only requires every arrival
    to beat its window close.
    """
    offsets: list[float] = []
    here = depot
    t = 0.0
    for stop in order:
        o = outlets[stop]
        t += dist(here, o.location) / speed_kmh * 60
        offsets.append(t)
        t += o.service_time
        here = o.location
    t += dist(here, depot) / speed_kmh * 60

    depart = max(0.0, max(outlets[s].delivery_window[0] - off for s, off in zip(order, offsets)))
    depart = math.ceil(depart)
    etas = [int(math.ceil(depart + off)) for off in offsets]
    ok = all(eta <= outlets[s].delivery_window[1] for s, eta in zip(order, etas))
    return Schedule(depart, etas, int(math.ceil(t)), ok)


@dataclass
class Route:
    vehicle_id: str
    temp_class: TempClass
    stops: list[str]
    load: dict[tuple[str, str], int]  # (outlet, sku) -> units
    total_volume: float
    depart_minute: int
    etas: list[int]
    total_km: float
    duration_minutes: int
    feasible: bool = True
    infeasibility: str | None = None

    def to_dict(self) -> dict:
        return {
            "vehicle_id": self.vehicle_id,
            "temp_class": self.temp_class.value,
            "stops": list(self.stops),
            "load": [
                {"outlet": o, "sku": s, "units": u}
                for (o, s), u in sorted(self.load.items())
            ],
            "total_volume": round(self.total_volume, 3),
            "depart_minute": self.depart_minute,
            "etas": list(self.etas),
            "total_km": round(self.total_km, 3),
            "duration_minutes": self.duration_minutes,
            "feasible": self.feasible,
            "infeasibility": self.infeasibility,
        }


def sequence_route(
    stops: list[str],
    outlets: dict[str, Outlet],
    vehicle: Vehicle,
    depot: Point,
    load: dict[tuple[str, str], int],
    total_volume: float,
    max_route_minutes: int | None = None,
) -> Route:
    """Order the stops, time the tour, and package the result.

    2-opt runs from two seeds — nearest-neighbor and the stops as given —
    and the better tour wins (feasibility first, then km).  Seeding from the
    given order means the result can never drive farther than that order,
    which is what makes optimized plans provably no worse than the id-order
    baseline.  If the km-optimal order breaks a delivery window we fall back
    to earliest-window order and only accept reversals that stay feasible.
    A tour that still cannot meet its windows (or exceeds the duration cap)
    comes back flagged rather than raising — infeasibility is a planning
    fact the exception scan turns into an alert.
    """
    locations = {s: outlets[s].location for s in stops}

    def windows_ok(order: list[str]) -> bool:
        return schedule_departure(order, outlets, vehicle.speed_kmh, depot).window_feasible

    candidates = [two_opt(nearest_neighbor(stops, locations, depot), locations, depot)]
    from_given = two_opt(list(stops), locations, depot)
    if from_given != candidates[0]:
        candidates.append(from_given)
    order = min(
        candidates,
        key=lambda o: (not windows_ok(o), tour_length(o, locations, depot)),
    )
    if not windows_ok(order):
        fallback = sorted(stops, key=lambda s: (outlets[s].delivery_window[0], s))
        fallback = two_opt(fallback, locations, depot, acceptable=windows_ok)
        if windows_ok(fallback):
            order = fallback

    sched = schedule_departure(order, outlets, vehicle.speed_kmh, depot)
    infeasibility = None
    if not sched.window_feasible:
        infeasibility = "delivery windows cannot all be met"
    elif max_route_minutes is not None and sched.duration_minutes > max_route_minutes:
        infeasibility = (
            f"route duration {sched.duration_minutes} min exceeds "
            f"{max_route_minutes} min limit"
        )
    return Route(
        vehicle_id=vehicle.id,
        temp_class=vehicle.temp_class,
        stops=order,
        load=dict(load),
        total_volume=total_volume,
        depart_minute=sched.depart_minute,
        etas=sched.etas,
        total_km=tour_length(order, locations, depot),
        duration_minutes=sched.duration_minutes,
        feasible=infeasibility is None,
        infeasibility=infeasibility,
    )


def _first_fit(
    outlet_order: list[str],
    volumes: dict[str, float],
    fleet: list[Vehicle],
) -> tuple[dict[str, list[str]], list[str]]:
    remaining = {v.id: v.capacity for v in fleet}
    assignment: dict[str, list[str]] = {v.id: [] for v in fleet}
    overflow: list[str] = []
    for outlet_id in outlet_order:
        vol = volumes[outlet_id]
        for v in fleet:
            if remaining[v.id] >= vol - 1e-9:
                remaining[v.id] -= vol
                assignment[v.id].append(outlet_id)
                break
        else:
            overflow.append(outlet_id)
    return {vid: outs for vid, outs in assignment.items() if outs}, overflow


def assign_vehicles(
    outlet_volumes: dict[str, float],
    vehicles: list[Vehicle],
) -> tuple[dict[str, list[str]], list[str]]:
    """First-fit-decreasing bin packing of whole outlets onto vehicles.

    One outlet's load (within a temp class) never splits across vehicles;
    anything that fits nowhere is returned as overflow.  Caller pre-filters
    vehicles to the temperature class in question.
    """
    fleet = sorted([v for v in vehicles if v.available], key=lambda v: v.id)
    order = [o for o, _ in sorted(outlet_volumes.items(), key=lambda kv: (-kv[1], kv[0]))]
    return _first_fit(order, outlet_volumes, fleet)


def optimized_routes(
    outlet_volumes: dict[str, float],
    loads: dict[str, dict[tuple[str, str], int]],
    vehicles: list[Vehicle],
    outlets: dict[str, Outlet],
    depot: Point,
    max_route_minutes: int | None = None,
) -> tuple[list[Route], list[str]]:
    """Sequence a full dispatch: pack outlets onto vehicles, tour each.

    Two packings are evaluated — first-fit-decreasing and plain id order —
    and the better whole plan is kept (fewest stranded outlets, then fewest
    infeasible routes, then fewest km).  Because the id-order packing with
    2-opt can only shorten the id-order tours, the winner never drives
    farther than the unoptimized baseline over the same outlets.
    """
    fleet = sorted([v for v in vehicles if v.available], key=lambda v: v.id)
    by_id = {v.id: v for v in fleet}
    ffd_order = [o for o, _ in sorted(outlet_volumes.items(), key=lambda kv: (-kv[1], kv[0]))]
    plans = []
    for order in (ffd_order, sorted(outlet_volumes)):
        packing, overflow = _first_fit(order, outlet_volumes, fleet)
        routes = []
        for vid, stops in packing.items():
            load: dict[tuple[str, str], int] = {}
            for s in stops:
                load.update(loads.get(s, {}))
            routes.append(sequence_route(
                stops, outlets, by_id[vid], depot, load,
                sum(outlet_volumes[s] for s in stops), max_route_minutes,
            ))
        plans.append((routes, overflow))
    return min(
        plans,
        key=lambda p: (
            len(p[1]),
            sum(not r.feasible for r in p[0]),
            sum(r.total_km for r in p[0]),
        ),
    )


def baseline_routes(
    outlet_volumes: dict[str, float],
    loads: dict[str, dict[tuple[str, str], int]],
    vehicles: list[Vehicle],
    outlets: dict[str, Outlet],
    depot: Point,
) -> tuple[list[Route], list[str]]:
    """The manual stand-in plan: outlets in id order, first vehicle with room,
    stops visited in assignment order, no tour improvement.

    Exists so optimized plans have a fixed, documented comparison point.
    """
    fleet = sorted([v for v in vehicles if v.available], key=lambda v: v.id)
    stops_for, overflow = _first_fit(sorted(outlet_volumes), outlet_volumes, fleet)

    routes = []
    by_id = {v.id: v for v in fleet}
    for vid, stops in stops_for.items():
        v = by_id[vid]
        sched = schedule_departure(stops, outlets, v.speed_kmh, depot)
        load: dict[tuple[str, str], int] = {}
        for s in stops:
            load.update(loads.get(s, {}))
        routes.append(Route(
            vehicle_id=vid,
            temp_class=v.temp_class,
            stops=stops,
            load=load,
            total_volume=sum(outlet_volumes[s] for s in stops),
            depart_minute=sched.depart_minute,
            etas=sched.etas,
            total_km=tour_length(stops, {s: outlets[s].location for s in stops}, depot),
            duration_minutes=sched.duration_minutes,
            feasible=sched.window_feasible,
            infeasibility=None if sched.window_feasible else "delivery windows cannot all be met",
        ))
    return routes, overflow


def consolidation_scan(
    routes: list[Route],
    vehicles: list[Vehicle],
    outlets: dict[str, Outlet],
    depot: Point,
) -> list[str]:
    """Advisory merge suggestions: same-class route pairs that would fit one
    vehicle and drive fewer total km without breaking any window.

    Recommendations are strings for the plan document; nothing is applied.
    """
    recs: list[str] = []
    by_class: dict[TempClass, float] = {}
    for v in vehicles:
        if v.available:
            by_class[v.temp_class] = max(by_class.get(v.temp_class, 0.0), v.capacity)
    for i in range(len(routes)):
        for j in range(i + 1, len(routes)):
            a, b = routes[i], routes[j]
            if a.temp_class is not b.temp_class:
                continue
            cap = by_class.get(a.temp_class, 0.0)
            if a.total_volume + b.total_volume > cap + 1e-9:
                continue
            vehicle = next(
                v for v in sorted(vehicles, key=lambda v: v.id)
                if v.available and v.temp_class is a.temp_class and v.capacity >= cap - 1e-9
            )
            merged_load = dict(a.load)
            merged_load.update(b.load)
            merged = sequence_route(
                a.stops + b.stops, outlets, vehicle, depot,
                merged_load, a.total_volume + b.total_volume,
            )
            if merged.feasible and merged.total_km < a.total_km + b.total_km - _EPS:
                recs.append(
                    f"consolidate {a.vehicle_id} + {b.vehicle_id} onto {vehicle.id}: "
                    f"{merged.total_km:.1f} km vs {a.total_km + b.total_km:.1f} km "
                    f"({', '.join(merged.stops)})"
                )
    return recs
