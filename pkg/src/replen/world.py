"""Deterministic seeded supermarket world.

The world realizes daily demand, applies sales and expiry, receives supplier
deliveries, and plays the supplier side of purchase orders. All randomness
flows through a single stdlib RNG seeded from the config, and every loop runs
in sorted-id order, so a fixed (config, command sequence) reproduces the run
bit for bit.

Day convention: the agents plan "in the morning" of day D against start-of-day
stock; step_day() then executes day D (arrivals, sales, expiry) and advances
to D+1. Batches expire at the end of their expiry_day — stock still sells on
that day.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum

from .domain import (
    DC_ID,
    Batch,
    CatalogEntry,
    InventoryRecord,
    Outlet,
    PolicyParams,
    Sku,
    Supplier,
    TempClass,
    ValidationError,
    _require,
)

# Derived stream for the pre-run sales backstory; keeps the main RNG untouched.
_WARMUP_SEED_XOR = 0x5EED_CAFE
WARMUP_DAYS = 28


@dataclass(frozen=True)
class Promo:
    """A scheduled promotion window, inclusive on both ends."""

    start_day: int
    end_day: int
    uplift: float

    def covers(self, day: int) -> bool:
        return self.start_day <= day <= self.end_day

    def to_dict(self) -> dict:
        return {"start_day": self.start_day, "end_day": self.end_day, "uplift": self.uplift}

    @classmethod
    def from_dict(cls, d: dict) -> "Promo":
        return cls(int(d["start_day"]), int(d["end_day"]), float(d["uplift"]))


@dataclass
class DemandParams:
    """Generative demand model for one (outlet, sku) pair.

    demand(day) = round(base * weekday_factor * season * promo * spike * exp(N(0, sigma)))
    """

    base: float
    weekday_factors: tuple[float, ...] = (1.0,) * 7
    season_amplitude: float = 0.0
    season_phase: float = 0.0
    promo_calendar: list[Promo] = field(default_factory=list)
    noise_sigma: float = 0.0
    spike_probability: float = 0.0
    spike_factor: float = 1.0

    def validate(self, where: str) -> None:
        _require(self.base > 0, f"demand[{where}].base", "must be > 0")
        _require(len(self.weekday_factors) == 7, f"demand[{where}].weekday_factors", "must have 7 entries")
        _require(all(f > 0 for f in self.weekday_factors), f"demand[{where}].weekday_factors", "must be > 0")
        avg = sum(self.weekday_factors) / 7.0
        _require(abs(avg - 1.0) <= 1e-6, f"demand[{where}].weekday_factors", "must average to 1")
        _require(0.0 <= self.season_amplitude < 1.0, f"demand[{where}].season_amplitude", "must be in [0, 1)")
        _require(self.noise_sigma >= 0, f"demand[{where}].noise_sigma", "must be >= 0")
        _require(0.0 <= self.spike_probability <= 1.0, f"demand[{where}].spike_probability", "must be in [0, 1]")
        _require(self.spike_factor >= 1.0, f"demand[{where}].spike_factor", "must be >= 1")
        for p in self.promo_calendar:
            _require(p.start_day <= p.end_day, f"demand[{where}].promo_calendar", "start_day must be <= end_day")
            _require(p.uplift >= 1.0, f"demand[{where}].promo_calendar", "uplift must be >= 1")

    def uplift_on(self, day: int) -> float:
        """Largest scheduled uplift covering the day, 1.0 when none."""
        return max((p.uplift for p in self.promo_calendar if p.covers(day)), default=1.0)

    def expected_value(self, day: int) -> float:
        """Noiseless expectation for the day (no spike, lognormal-corrected)."""
        wf = self.weekday_factors[day % 7]
        season = 1.0 + self.season_amplitude * math.sin(2 * math.pi * day / 365.0 + self.season_phase)
        noise_mean = math.exp(self.noise_sigma**2 / 2.0)
        spike_mean = 1.0 - self.spike_probability + self.spike_probability * self.spike_factor
        return self.base * wf * season * self.uplift_on(day) * noise_mean * spike_mean

    def to_dict(self) -> dict:
        return {
            "base": self.base,
            "weekday_factors": list(self.weekday_factors),
            "season_amplitude": self.season_amplitude,
            "season_phase": self.season_phase,
            "promo_calendar": [p.to_dict() for p in self.promo_calendar],
            "noise_sigma": self.noise_sigma,
            "spike_probability": self.spike_probability,
            "spike_factor": self.spike_factor,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DemandParams":
        return cls(
            base=float(d["base"]),
            weekday_factors=tuple(float(f) for f in d.get("weekday_factors", [1.0] * 7)),
            season_amplitude=float(d.get("season_amplitude", 0.0)),
            season_phase=float(d.get("season_phase", 0.0)),
            promo_calendar=[Promo.from_dict(p) for p in d.get("promo_calendar", [])],
            noise_sigma=float(d.get("noise_sigma", 0.0)),
            spike_probability=float(d.get("spike_probability", 0.0)),
            spike_factor=float(d.get("spike_factor", 1.0)),
        )


@dataclass(frozen=True)
class Vehicle:
    id: str
    capacity: float  # liters
    temp_class: TempClass = TempClass.AMBIENT
    speed_kmh: float = 40.0
    available: bool = True

    def validate(self) -> None:
        _require(bool(self.id), "vehicle.id", "must be non-empty")
        _require(self.capacity > 0, "vehicle.capacity", "must be > 0")
        _require(self.speed_kmh > 0, "vehicle.speed_kmh", "must be > 0")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "capacity": self.capacity,
            "temp_class": self.temp_class.value,
            "speed_kmh": self.speed_kmh,
            "available": self.available,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Vehicle":
        return cls(
            id=d["id"],
            capacity=float(d["capacity"]),
            temp_class=TempClass(d.get("temp_class", "ambient")),
            speed_kmh=float(d.get("speed_kmh", 40.0)),
            available=bool(d.get("available", True)),
        )


@dataclass
class WorldConfig:
    """Full scenario definition; the JSON file format is its to_dict image."""

    seed: int
    outlets: list[Outlet]
    skus: list[Sku]
    suppliers: list[Supplier]
    catalog: list[CatalogEntry]
    fleet: list[Vehicle]
    demand: dict[tuple[str, str], DemandParams]
    policy: PolicyParams = field(default_factory=PolicyParams)
    holidays: list[int] = field(default_factory=list)
    holiday_factor: float = 1.0
    dc_location: tuple[float, float] = (0.0, 0.0)
    dc_cover_days: int = 6
    forecast_horizon: int | None = None

    def validate(self) -> None:
        self.policy.validate()
        outlet_ids = set()
        for o in self.outlets:
            o.validate()
            _require(o.id not in outlet_ids, "outlets", f"duplicate id {o.id}")
            _require(o.id != DC_ID, "outlets", f"outlet id may not be {DC_ID}")
            outlet_ids.add(o.id)
        sku_ids = set()
        for s in self.skus:
            s.validate()
            _require(s.id not in sku_ids, "skus", f"duplicate id {s.id}")
            sku_ids.add(s.id)
        supplier_ids = set()
        for sup in self.suppliers:
            sup.validate()
            _require(sup.id not in supplier_ids, "suppliers", f"duplicate id {sup.id}")
            supplier_ids.add(sup.id)
        seen_entries = set()
        for e in self.catalog:
            e.validate()
            _require(e.supplier_id in supplier_ids, "catalog", f"unknown supplier {e.supplier_id}")
            _require(e.sku_id in sku_ids, "catalog", f"unknown sku {e.sku_id}")
            key = (e.supplier_id, e.sku_id)
            _require(key not in seen_entries, "catalog", f"duplicate entry {key}")
            seen_entries.add(key)
        for v in self.fleet:
            v.validate()
        for (out_id, sku_id), dp in self.demand.items():
            _require(out_id in outlet_ids, "demand", f"unknown outlet {out_id}")
            _require(sku_id in sku_ids, "demand", f"unknown sku {sku_id}")
            dp.validate(f"{out_id}/{sku_id}")
        _require(self.dc_cover_days >= 1, "dc_cover_days", "must be >= 1")
        _require(self.holiday_factor > 0, "holiday_factor", "must be > 0")
        if self.forecast_horizon is not None:
            _require(self.forecast_horizon >= 1, "forecast_horizon", "must be >= 1")

    # lookup helpers -------------------------------------------------------
    def sku(self, sku_id: str) -> Sku:
        return self._sku_index[sku_id]

    def outlet(self, outlet_id: str) -> Outlet:
        return self._outlet_index[outlet_id]

    def supplier(self, supplier_id: str) -> Supplier:
        return self._supplier_index[supplier_id]

    def catalog_for(self, sku_id: str) -> list[CatalogEntry]:
        return [e for e in self.catalog if e.sku_id == sku_id]

    def __post_init__(self) -> None:
        self._sku_index = {s.id: s for s in self.skus}
        self._outlet_index = {o.id: o for o in self.outlets}
        self._supplier_index = {s.id: s for s in self.suppliers}

    def max_lead_time(self, sku_id: str | None = None) -> int:
        entries = self.catalog if sku_id is None else self.catalog_for(sku_id)
        return max((e.lead_time_days for e in entries), default=1)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "outlets": [o.to_dict() for o in self.outlets],
            "skus": [s.to_dict() for s in self.skus],
            "suppliers": [s.to_dict() for s in self.suppliers],
            "catalog": [e.to_dict() for e in self.catalog],
            "fleet": [v.to_dict() for v in self.fleet],
            "demand": [
                {"outlet": o, "sku": s, **dp.to_dict()}
                for (o, s), dp in sorted(self.demand.items())
            ],
            "policy": self.policy.to_dict(),
            "holidays": list(self.holidays),
            "holiday_factor": self.holiday_factor,
            "dc_location": list(self.dc_location),
            "dc_cover_days": self.dc_cover_days,
            "forecast_horizon": self.forecast_horizon,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorldConfig":
        demand = {}
        for row in d.get("demand", []):
            params = {k: v for k, v in row.items() if k not in ("outlet", "sku")}
            demand[(row["outlet"], row["sku"])] = DemandParams.from_dict(params)
        return cls(
            seed=int(d["seed"]),
            outlets=[Outlet.from_dict(x) for x in d.get("outlets", [])],
            skus=[Sku.from_dict(x) for x in d.get("skus", [])],
            suppliers=[Supplier.from_dict(x) for x in d.get("suppliers", [])],
            catalog=[CatalogEntry.from_dict(x) for x in d.get("catalog", [])],
            fleet=[Vehicle.from_dict(x) for x in d.get("fleet", [])],
            demand=demand,
            policy=PolicyParams.from_dict(d.get("policy", {})),
            holidays=[int(h) for h in d.get("holidays", [])],
            holiday_factor=float(d.get("holiday_factor", 1.0)),
            dc_location=tuple(d.get("dc_location", (0.0, 0.0))),
            dc_cover_days=int(d.get("dc_cover_days", 6)),
            forecast_horizon=d.get("forecast_horizon"),
        )


class ShipmentKind(str, Enum):
    SUPPLIER_TO_DC = "supplier_to_dc"
    DC_TO_OUTLET = "dc_to_outlet"


@dataclass
class Shipment:
    """Goods in motion: a confirmed PO delivery or a dispatched outlet drop.

    DC-to-outlet shipments are withdrawn from DC stock (FEFO) on depart_day
    during step_day and arrive at the outlet the next day, carrying the batch
    expiry composition they were picked with.
    """

    ref: str  # po id or plan id
    kind: ShipmentKind
    dest: str
    sku_id: str
    qty: int
    arrive_day: int
    depart_day: int | None = None
    withdrawn: bool = False
    batches: list[Batch] | None = None

    def to_dict(self) -> dict:
        return {
            "ref": self.ref,
            "kind": self.kind.value,
            "dest": self.dest,
            "sku_id": self.sku_id,
            "qty": self.qty,
            "arrive_day": self.arrive_day,
            "depart_day": self.depart_day,
            "withdrawn": self.withdrawn,
            "batches": [b.to_dict() for b in self.batches] if self.batches is not None else None,
        }


@dataclass
class SupplierResponse:
    kind: str  # "confirm" | "partial" | "none"
    confirmed_qty: int
    promised_day: int | None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "confirmed_qty": self.confirmed_qty, "promised_day": self.promised_day}


@dataclass
class DayEvents:
    """What physically happened during one simulated day."""

    day: int
    sold: dict[tuple[str, str], int] = field(default_factory=dict)
    lost: dict[tuple[str, str], int] = field(default_factory=dict)
    arrived: dict[tuple[str, str], int] = field(default_factory=dict)
    waste: dict[tuple[str, str], int] = field(default_factory=dict)
    delivered_po_ids: list[str] = field(default_factory=list)

    @property
    def sold_total(self) -> int:
        return sum(self.sold.values())

    @property
    def lost_total(self) -> int:
        return sum(self.lost.values())

    @property
    def waste_total(self) -> int:
        return sum(self.waste.values())

    def to_dict(self) -> dict:
        def flat(d):
            return [
                {"holder": h, "sku": s, "units": q}
                for (h, s), q in sorted(d.items())
                if q
            ]

        return {
            "day": self.day,
            "sold_total": self.sold_total,
            "lost_total": self.lost_total,
            "waste_total": self.waste_total,
            "lost": flat(self.lost),
            "waste": flat(self.waste),
            "arrived_total": sum(self.arrived.values()),
            "delivered_po_ids": list(self.delivered_po_ids),
        }


def _stagger_batches(on_hand: int, shelf_life_days: int) -> list[Batch]:
    """Spread initial stock evenly over expiry days 1..shelf_life."""
    batches = []
    prev = 0
    for i in range(1, shelf_life_days + 1):
        cum = on_hand * i // shelf_life_days
        if cum > prev:
            batches.append(Batch(qty=cum - prev, expiry_day=i))
        prev = cum
    return batches


def _consume_fefo(rec: InventoryRecord, qty: int) -> list[Batch]:
    """Remove qty from the earliest-expiring batches; returns what was taken."""
    taken: list[Batch] = []
    remaining = qty
    rec.batches.sort(key=lambda b: b.expiry_day)
    kept: list[Batch] = []
    for b in rec.batches:
        if remaining <= 0:
            kept.append(b)
            continue
        take = min(b.qty, remaining)
        if take:
            taken.append(Batch(qty=take, expiry_day=b.expiry_day))
            remaining -= take
        if b.qty - take > 0:
            kept.append(Batch(qty=b.qty - take, expiry_day=b.expiry_day))
    rec.batches = kept
    return taken


class World:
    """Mutable world state plus the config that generated it."""

    def __init__(self, config: WorldConfig):
        config.validate()
        self.config = config
        self.day = 0
        self.rng = random.Random(config.seed)
        self.inventories: dict[tuple[str, str], InventoryRecord] = {}
        self.sales: dict[tuple[str, str], list[tuple[int, int]]] = {}
        self.shipments: list[Shipment] = []
        self._init_stock()
        self._init_warmup_history()

    # --- generation -------------------------------------------------------

    def _init_stock(self) -> None:
        cfg = self.config
        for o in sorted(cfg.outlets, key=lambda x: x.id):
            for s in sorted(cfg.skus, key=lambda x: x.id):
                dp = cfg.demand.get((o.id, s.id))
                base = dp.base if dp else 0.0
                on_hand = int(round(s.target_cover_days * base))
                rec = InventoryRecord(holder=o.id, sku_id=s.id, on_hand=on_hand)
                if s.perishable and on_hand:
                    rec.batches = _stagger_batches(on_hand, s.shelf_life_days)
                self.inventories[(o.id, s.id)] = rec
        for s in sorted(cfg.skus, key=lambda x: x.id):
            network_base = sum(dp.base for (o, k), dp in cfg.demand.items() if k == s.id)
            on_hand = int(round(cfg.dc_cover_days * network_base))
            rec = InventoryRecord(holder=DC_ID, sku_id=s.id, on_hand=on_hand)
            if s.perishable and on_hand:
                rec.batches = _stagger_batches(on_hand, s.shelf_life_days)
            self.inventories[(DC_ID, s.id)] = rec

    def _init_warmup_history(self) -> None:
        """Backfill WARMUP_DAYS of synthetic sales so day-0 forecasts exist.

        Uses a derived RNG so the main stream starts untouched; spike draws
        are deliberately left out of the backstory.
        """
        warm_rng = random.Random(self.config.seed ^ _WARMUP_SEED_XOR)
        pairs = sorted(self.config.demand.keys())
        for key in pairs:
            self.sales[key] = []
        for day in range(-WARMUP_DAYS, 0):
            for key in pairs:
                dp = self.config.demand[key]
                z = warm_rng.normalvariate(0.0, dp.noise_sigma)
                units = self._demand_value(dp, day, z, spike=False)
                self.sales[key].append((day, units))

    # --- demand -----------------------------------------------------------

    @staticmethod
    def _demand_value(dp: DemandParams, day: int, noise_z: float, spike: bool) -> int:
        wf = dp.weekday_factors[day % 7]
        season = 1.0 + dp.season_amplitude * math.sin(2 * math.pi * day / 365.0 + dp.season_phase)
        spike_mult = dp.spike_factor if spike else 1.0
        value = dp.base * wf * season * dp.uplift_on(day) * spike_mult * math.exp(noise_z)
        return max(0, int(round(value)))

    def realize_demand(self, outlet_id: str, sku_id: str) -> int:
        """Draw one (outlet, sku) demand for the current day; advances the RNG."""
        dp = self.config.demand[(outlet_id, sku_id)]
        z = self.rng.normalvariate(0.0, dp.noise_sigma)
        spike = self.rng.random() < dp.spike_probability
        return self._demand_value(dp, self.day, z, spike)

    # --- supplier side ----------------------------------------------------

    def draw_supplier_response(
        self, supplier: Supplier, qty: int, order_day: int, lead_time_days: int
    ) -> SupplierResponse:
        """Play the supplier's reply to a transmitted PO; advances the RNG.

        A partial fraction that rounds to zero units is a non-response — the
        supplier simply never answers.
        """
        if self.rng.random() < supplier.confirm_probability:
            confirmed = qty
        else:
            lo, hi = supplier.partial_fraction_range
            frac = lo + self.rng.random() * (hi - lo)
            confirmed = int(round(qty * frac))
            if confirmed <= 0:
                return SupplierResponse(kind="none", confirmed_qty=0, promised_day=None)
        delay = 0
        if self.rng.random() < supplier.delay_probability:
            delay = supplier.delivery_delay_days
        promised = order_day + lead_time_days + delay
        kind = "confirm" if confirmed == qty else "partial"
        return SupplierResponse(kind=kind, confirmed_qty=confirmed, promised_day=promised)

    def schedule_supplier_delivery(self, po_id: str, sku_id: str, qty: int, arrive_day: int) -> Shipment:
        shp = Shipment(
            ref=po_id,
            kind=ShipmentKind.SUPPLIER_TO_DC,
            dest=DC_ID,
            sku_id=sku_id,
            qty=qty,
            arrive_day=arrive_day,
        )
        self.shipments.append(shp)
        rec = self.inventories[(DC_ID, sku_id)]
        rec.on_order += qty
        return shp

    def schedule_outlet_delivery(self, plan_id: str, outlet_id: str, sku_id: str, qty: int) -> Shipment:
        """Reserve DC stock for an outlet drop leaving today, arriving tomorrow."""
        shp = Shipment(
            ref=plan_id,
            kind=ShipmentKind.DC_TO_OUTLET,
            dest=outlet_id,
            sku_id=sku_id,
            qty=qty,
            depart_day=self.day,
            arrive_day=self.day + 1,
        )
        self.shipments.append(shp)
        self.inventories[(DC_ID, sku_id)].committed += qty
        return shp

    def incoming(self, holder: str, sku_id: str) -> list[tuple[int, int]]:
        """(arrive_day, qty) of undelivered shipments headed to holder."""
        out = []
        for shp in self.shipments:
            if shp.dest == holder and shp.sku_id == sku_id:
                out.append((shp.arrive_day, shp.qty))
        return sorted(out)

    def incoming_map(self) -> dict[tuple[str, str], list[tuple[int, int]]]:
        """incoming() for every (holder, sku) at once: one pass, not one scan
        per lookup, which matters when a scan visits hundreds of pairs."""
        out: dict[tuple[str, str], list[tuple[int, int]]] = {}
        for shp in self.shipments:
            out.setdefault((shp.dest, shp.sku_id), []).append((shp.arrive_day, shp.qty))
        for rows in out.values():
            rows.sort()
        return out

    # --- the day loop -----------------------------------------------------

    def step_day(self) -> DayEvents:
        """Execute the current day: arrivals, sales (capped), expiry; advance."""
        day = self.day
        ev = DayEvents(day=day)
        cfg = self.config

        # 1) arrivals, then stock withdrawals for today's dispatches
        arriving: list[Shipment] = []
        remaining: list[Shipment] = []
        for shp in self.shipments:
            (arriving if shp.arrive_day <= day else remaining).append(shp)
        arriving.sort(key=lambda s: (s.dest, s.sku_id, s.ref))
        for shp in arriving:
            rec = self.inventories[(shp.dest, shp.sku_id)]
            sku = cfg.sku(shp.sku_id)
            if shp.kind is ShipmentKind.SUPPLIER_TO_DC:
                rec.on_hand += shp.qty
                rec.on_order = max(0, rec.on_order - shp.qty)
                if sku.perishable:
                    rec.batches.append(Batch(qty=shp.qty, expiry_day=day + sku.shelf_life_days))
                ev.delivered_po_ids.append(shp.ref)
            else:
                if not shp.withdrawn:  # dispatched and arriving same tick is a bug
                    raise ValidationError("shipment", f"{shp.ref} arrived before withdrawal")
                rec.on_hand += shp.qty
                if sku.perishable and shp.batches:
                    rec.batches.extend(Batch(qty=b.qty, expiry_day=b.expiry_day) for b in shp.batches)
            ev.arrived[(shp.dest, shp.sku_id)] = ev.arrived.get((shp.dest, shp.sku_id), 0) + shp.qty
        self.shipments = remaining

        departing = sorted(
            (s for s in self.shipments if s.kind is ShipmentKind.DC_TO_OUTLET
             and not s.withdrawn and s.depart_day == day),
            key=lambda s: (s.dest, s.sku_id, s.ref),
        )
        for shp in departing:
            rec = self.inventories[(DC_ID, shp.sku_id)]
            if shp.qty > rec.on_hand:
                raise ValidationError("shipment", f"{shp.ref} withdraws {shp.qty} > DC on_hand {rec.on_hand}")
            sku = cfg.sku(shp.sku_id)
            if sku.perishable:
                shp.batches = _consume_fefo(rec, shp.qty)
            rec.on_hand -= shp.qty
            rec.committed = max(0, rec.committed - shp.qty)
            shp.withdrawn = True

        # 2) realize and apply sales, lost demand recorded, FEFO rotation
        for (out_id, sku_id) in sorted(self.config.demand.keys()):
            rec = self.inventories[(out_id, sku_id)]
            demand = self.realize_demand(out_id, sku_id)
            sold = min(demand, rec.on_hand)
            lost = demand - sold
            rec.on_hand -= sold
            if rec.batches:
                _consume_fefo(rec, sold)
            self.sales[(out_id, sku_id)].append((day, sold))
            if sold:
                ev.sold[(out_id, sku_id)] = sold
            if lost:
                ev.lost[(out_id, sku_id)] = lost

        # 3) expiry at end of day
        for key in sorted(self.inventories.keys()):
            rec = self.inventories[key]
            if not rec.batches:
                continue
            kept = []
            for b in rec.batches:
                if b.expiry_day <= day:
                    rec.on_hand -= b.qty
                    ev.waste[key] = ev.waste.get(key, 0) + b.qty
                else:
                    kept.append(b)
            rec.batches = kept

        self.day += 1
        return ev

    # --- views ------------------------------------------------------------

    def inventory(self, holder: str, sku_id: str) -> InventoryRecord:
        return self.inventories[(holder, sku_id)]

    def sales_window(self, outlet_id: str, sku_id: str, since_day: int) -> list[tuple[int, int]]:
        return [(d, u) for d, u in self.sales.get((outlet_id, sku_id), []) if d >= since_day]

    def to_dict(self) -> dict:
        state = self.rng.getstate()
        return {
            "day": self.day,
            "inventories": [self.inventories[k].to_dict() for k in sorted(self.inventories)],
            "sales": [
                {"outlet": o, "sku": s, "records": [[d, u] for d, u in recs]}
                for (o, s), recs in sorted(self.sales.items())
            ],
            "shipments": [s.to_dict() for s in self.shipments],
            "rng_state": [state[0], list(state[1]), state[2]],
        }


def gen_world(config: WorldConfig) -> World:
    """Build the day-0 world for a config; deterministic for a fixed seed."""
    return World(config)
