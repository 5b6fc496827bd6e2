"""Shared domain types and elementary inventory arithmetic.

Conventions used everywhere: quantities are integer eaches, currency is
integer minor units (cents), distances are real kilometers, days are
integer ticks, and within-day scheduling uses minutes from midnight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

DC_ID = "DC"


class TempClass(str, Enum):
    AMBIENT = "ambient"
    CHILLED = "chilled"


class ValidationError(ValueError):
    """Raised when a record violates a field constraint; names the field."""

    def __init__(self, field_name: str, message: str):
        self.field_name = field_name
        super().__init__(f"{field_name}: {message}")


def _require(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise ValidationError(field_name, message)


@dataclass(frozen=True)
class Sku:
    """A tracked product. Perishable iff shelf_life_days is set."""

    id: str
    name: str
    category: str
    case_pack: int
    unit_volume: float  # liters per unit
    temp_class: TempClass = TempClass.AMBIENT
    shelf_life_days: int | None = None
    target_cover_days: int = 3

    @property
    def perishable(self) -> bool:
        return self.shelf_life_days is not None

    def validate(self) -> None:
        _require(bool(self.id), "sku.id", "must be non-empty")
        _require(self.case_pack >= 1, "sku.case_pack", "must be >= 1")
        _require(self.unit_volume > 0, "sku.unit_volume", "must be > 0")
        if self.shelf_life_days is not None:
            _require(self.shelf_life_days >= 1, "sku.shelf_life_days", "must be >= 1 when present")
        _require(self.target_cover_days >= 1, "sku.target_cover_days", "must be >= 1")

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "name": self.name,
            "category": self.category,
            "case_pack": self.case_pack,
            "unit_volume": self.unit_volume,
            "temp_class": self.temp_class.value,
            "target_cover_days": self.target_cover_days,
        }
        if self.shelf_life_days is not None:
            d["shelf_life_days"] = self.shelf_life_days
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Sku":
        return cls(
            id=d["id"],
            name=d["name"],
            category=d["category"],
            case_pack=int(d["case_pack"]),
            unit_volume=float(d["unit_volume"]),
            temp_class=TempClass(d.get("temp_class", "ambient")),
            shelf_life_days=d.get("shelf_life_days"),
            target_cover_days=int(d.get("target_cover_days", 3)),
        )


@dataclass(frozen=True)
class Outlet:
    """A retail store fed from the DC, with a planar location in km."""

    id: str
    name: str
    location: tuple[float, float]
    delivery_window: tuple[int, int] = (360, 1200)  # minutes from midnight
    service_time: int = 10
    priority_weight: float = 1.0

    def validate(self) -> None:
        _require(bool(self.id), "outlet.id", "must be non-empty")
        open_m, close_m = self.delivery_window
        _require(0 <= open_m < close_m <= 1440, "outlet.delivery_window", "requires 0 <= open < close <= 1440")
        _require(self.service_time >= 0, "outlet.service_time", "must be >= 0")
        _require(self.priority_weight >= 1.0, "outlet.priority_weight", "must be >= 1")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "location": list(self.location),
            "delivery_window": list(self.delivery_window),
            "service_time": self.service_time,
            "priority_weight": self.priority_weight,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Outlet":
        return cls(
            id=d["id"],
            name=d["name"],
            location=(float(d["location"][0]), float(d["location"][1])),
            delivery_window=(int(d["delivery_window"][0]), int(d["delivery_window"][1])),
            service_time=int(d.get("service_time", 10)),
            priority_weight=float(d.get("priority_weight", 1.0)),
        )


@dataclass
class Supplier:
    """A supplier with simulated response behavior.

    reliability is the observed on-time fraction; it starts at 1.0 and is
    recomputed only from interactions actually seen during a run.
    """

    id: str
    name: str
    response_delay_days: int = 1
    confirm_probability: float = 1.0
    partial_fraction_range: tuple[float, float] = (0.5, 0.9)
    delivery_delay_days: int = 0
    delay_probability: float = 0.0
    reliability: float = 1.0

    def validate(self) -> None:
        _require(bool(self.id), "supplier.id", "must be non-empty")
        _require(self.response_delay_days >= 0, "supplier.response_delay_days", "must be >= 0")
        for fname, p in (
            ("supplier.confirm_probability", self.confirm_probability),
            ("supplier.delay_probability", self.delay_probability),
            ("supplier.reliability", self.reliability),
        ):
            _require(0.0 <= p <= 1.0, fname, "must be in [0, 1]")
        lo, hi = self.partial_fraction_range
        _require(0.0 <= lo <= hi <= 1.0, "supplier.partial_fraction_range", "must be within [0, 1] with lo <= hi")
        _require(self.delivery_delay_days >= 0, "supplier.delivery_delay_days", "must be >= 0")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "response_delay_days": self.response_delay_days,
            "confirm_probability": self.confirm_probability,
            "partial_fraction_range": list(self.partial_fraction_range),
            "delivery_delay_days": self.delivery_delay_days,
            "delay_probability": self.delay_probability,
            "reliability": self.reliability,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Supplier":
        rng = d.get("partial_fraction_range", [0.5, 0.9])
        return cls(
            id=d["id"],
            name=d["name"],
            response_delay_days=int(d.get("response_delay_days", 1)),
            confirm_probability=float(d.get("confirm_probability", 1.0)),
            partial_fraction_range=(float(rng[0]), float(rng[1])),
            delivery_delay_days=int(d.get("delivery_delay_days", 0)),
            delay_probability=float(d.get("delay_probability", 0.0)),
            reliability=float(d.get("reliability", 1.0)),
        )


@dataclass(frozen=True)
class CatalogEntry:
    """One supplier's terms for one SKU. unit_price is in minor units."""

    supplier_id: str
    sku_id: str
    unit_price: int
    moq: int
    lead_time_days: int

    def validate(self) -> None:
        _require(self.unit_price > 0, "catalog.unit_price", "must be > 0")
        _require(self.moq >= 1, "catalog.moq", "must be >= 1")
        _require(self.lead_time_days >= 1, "catalog.lead_time_days", "must be >= 1")

    def to_dict(self) -> dict:
        return {
            "supplier_id": self.supplier_id,
            "sku_id": self.sku_id,
            "unit_price": self.unit_price,
            "moq": self.moq,
            "lead_time_days": self.lead_time_days,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CatalogEntry":
        return cls(
            supplier_id=d["supplier_id"],
            sku_id=d["sku_id"],
            unit_price=int(d["unit_price"]),
            moq=int(d["moq"]),
            lead_time_days=int(d["lead_time_days"]),
        )


@dataclass
class Batch:
    """A lot of perishable stock expiring at the end of expiry_day."""

    qty: int
    expiry_day: int

    def to_dict(self) -> dict:
        return {"qty": self.qty, "expiry_day": self.expiry_day}


@dataclass
class InventoryRecord:
    """Stock position of one SKU at one holder (an outlet id or DC_ID).

    For perishable SKUs the batches list is authoritative and must sum to
    on_hand after every simulator step.
    """

    holder: str
    sku_id: str
    on_hand: int = 0
    on_order: int = 0
    committed: int = 0
    batches: list[Batch] = field(default_factory=list)

    def validate(self) -> None:
        for fname, q in (
            ("inventory.on_hand", self.on_hand),
            ("inventory.on_order", self.on_order),
            ("inventory.committed", self.committed),
        ):
            _require(q >= 0, fname, "must be >= 0")
        if self.batches:
            _require(
                sum(b.qty for b in self.batches) == self.on_hand,
                "inventory.batches",
                "batch quantities must sum to on_hand",
            )

    def to_dict(self) -> dict:
        return {
            "holder": self.holder,
            "sku_id": self.sku_id,
            "on_hand": self.on_hand,
            "on_order": self.on_order,
            "committed": self.committed,
            "batches": [b.to_dict() for b in self.batches],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InventoryRecord":
        return cls(
            holder=d["holder"],
            sku_id=d["sku_id"],
            on_hand=int(d.get("on_hand", 0)),
            on_order=int(d.get("on_order", 0)),
            committed=int(d.get("committed", 0)),
            batches=[Batch(int(b["qty"]), int(b["expiry_day"])) for b in d.get("batches", [])],
        )


@dataclass(frozen=True)
class PolicyParams:
    """Tunable policy constants shared by all agents."""

    service_z: float = 1.645
    review_period_days: int = 1
    w_price: float = 0.4
    w_reliability: float = 0.4
    w_lead: float = 0.2
    cv_flag_threshold: float = 0.5
    overstock_multiple: float = 3.0
    dispersion_flag_threshold: float = 0.25
    spike_k: float = 3.0
    max_followups: int = 2
    followup_window_days: int = 2
    max_chilled_route_minutes: int = 240

    def validate(self) -> None:
        _require(self.service_z >= 0, "policy.service_z", "must be >= 0")
        _require(self.review_period_days >= 1, "policy.review_period_days", "must be >= 1")
        for fname, w in (
            ("policy.w_price", self.w_price),
            ("policy.w_reliability", self.w_reliability),
            ("policy.w_lead", self.w_lead),
        ):
            _require(w >= 0, fname, "must be >= 0")
        _require(
            abs(self.w_price + self.w_reliability + self.w_lead - 1.0) <= 1e-9,
            "policy.supplier_weights",
            "w_price + w_reliability + w_lead must sum to 1",
        )
        _require(self.cv_flag_threshold > 0, "policy.cv_flag_threshold", "must be > 0")
        _require(self.overstock_multiple > 1, "policy.overstock_multiple", "must be > 1")
        _require(self.dispersion_flag_threshold > 0, "policy.dispersion_flag_threshold", "must be > 0")
        _require(self.spike_k > 0, "policy.spike_k", "must be > 0")
        _require(self.max_followups >= 0, "policy.max_followups", "must be >= 0")
        _require(self.followup_window_days >= 1, "policy.followup_window_days", "must be >= 1")

    def to_dict(self) -> dict:
        return {
            "service_z": self.service_z,
            "review_period_days": self.review_period_days,
            "w_price": self.w_price,
            "w_reliability": self.w_reliability,
            "w_lead": self.w_lead,
            "cv_flag_threshold": self.cv_flag_threshold,
            "overstock_multiple": self.overstock_multiple,
            "dispersion_flag_threshold": self.dispersion_flag_threshold,
            "spike_k": self.spike_k,
            "max_followups": self.max_followups,
            "followup_window_days": self.followup_window_days,
            "max_chilled_route_minutes": self.max_chilled_route_minutes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyParams":
        defaults = cls()
        return cls(
            service_z=float(d.get("service_z", defaults.service_z)),
            review_period_days=int(d.get("review_period_days", defaults.review_period_days)),
            w_price=float(d.get("w_price", defaults.w_price)),
            w_reliability=float(d.get("w_reliability", defaults.w_reliability)),
            w_lead=float(d.get("w_lead", defaults.w_lead)),
            cv_flag_threshold=float(d.get("cv_flag_threshold", defaults.cv_flag_threshold)),
            overstock_multiple=float(d.get("overstock_multiple", defaults.overstock_multiple)),
            dispersion_flag_threshold=float(d.get("dispersion_flag_threshold", defaults.dispersion_flag_threshold)),
            spike_k=float(d.get("spike_k", defaults.spike_k)),
            max_followups=int(d.get("max_followups", defaults.max_followups)),
            followup_window_days=int(d.get("followup_window_days", defaults.followup_window_days)),
            max_chilled_route_minutes=int(d.get("max_chilled_route_minutes", defaults.max_chilled_route_minutes)),
        )


def inventory_position(rec: InventoryRecord) -> int:
    """on_hand + on_order - committed; negative when committed exceeds supply."""
    return rec.on_hand + rec.on_order - rec.committed


def days_of_cover(on_hand: int, forecast_mean: float) -> float:
    """Days the stock lasts at the given mean daily rate.

    Returns +inf when the rate is zero but stock remains, and 0 when both
    are zero.
    """
    if forecast_mean <= 0:
        return math.inf if on_hand > 0 else 0.0
    return on_hand / forecast_mean
