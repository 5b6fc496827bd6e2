"""Synthetic scenario generator.

Builds a complete WorldConfig from a handful of knobs, deterministically for
a given seed. The defaults describe a mildly noisy but healthy network; the
stochastic knobs can each be zeroed for fully deterministic worlds.
"""

from __future__ import annotations

import random

from .domain import CatalogEntry, Outlet, PolicyParams, Sku, Supplier, TempClass
from .world import DemandParams, Promo, Vehicle, WorldConfig

SKU_CATEGORIES = [
    ("dairy", True, TempClass.CHILLED),
    ("produce", True, TempClass.CHILLED),
    ("bakery", True, TempClass.AMBIENT),
    ("beverages", False, TempClass.AMBIENT),
    ("snacks", False, TempClass.AMBIENT),
    ("household", False, TempClass.AMBIENT),
    ("canned", False, TempClass.AMBIENT),
]


def make_config(
    outlets: int,
    skus: int,
    seed: int,
    *,
    noise_sigma: float = 0.15,
    season_amplitude: float = 0.1,
    spike_probability: float = 0.0,
    spike_factor: float = 3.0,
    promo_count: int = 0,
    weekday_pattern: bool = True,
    supplier_count: int | None = None,
    confirm_probability: float = 1.0,
    delay_probability: float = 0.0,
    delivery_delay_days: int = 2,
    response_delay_days: int = 1,
    box_km: float = 30.0,
    time_windows: bool = False,
    perishable_share: float = 0.3,
    service_z: float | None = None,
    policy: PolicyParams | None = None,
) -> WorldConfig:
    """Deterministically generate a scenario. Same arguments, same config."""
    rng = random.Random(seed)

    outlet_list = []
    for i in range(1, outlets + 1):
        oid = f"OUT{i:02d}"
        loc = (round(rng.uniform(0, box_km), 3), round(rng.uniform(0, box_km), 3))
        if time_windows:
            open_m = rng.choice([360, 420, 480])
            close_m = rng.choice([960, 1080, 1200])
        else:
            open_m, close_m = 0, 1440
        outlet_list.append(
            Outlet(
                id=oid,
                name=f"Outlet {i}",
                location=loc,
                delivery_window=(open_m, close_m),
                service_time=rng.choice([5, 10, 15]),
                priority_weight=1.0,
            )
        )

    sku_list = []
    for i in range(1, skus + 1):
        cat, can_perish, temp = SKU_CATEGORIES[(i - 1) % len(SKU_CATEGORIES)]
        perishable = can_perish and rng.random() < (perishable_share * len(SKU_CATEGORIES) / 3.0)
        sku_list.append(
            Sku(
                id=f"SKU{i:03d}",
                name=f"{cat.title()} item {i}",
                category=cat,
                case_pack=rng.choice([1, 6, 12, 24]),
                unit_volume=round(rng.uniform(0.2, 3.0), 2),
                temp_class=temp if perishable or temp is TempClass.CHILLED else TempClass.AMBIENT,
                shelf_life_days=rng.randint(4, 10) if perishable else None,
                target_cover_days=rng.choice([3, 3, 4]),
            )
        )

    n_sup = supplier_count or max(2, skus // 10)
    suppliers = [
        Supplier(
            id=f"SUP{j:02d}",
            name=f"Supplier {j}",
            response_delay_days=response_delay_days,
            confirm_probability=confirm_probability,
            partial_fraction_range=(0.5, 0.9),
            delivery_delay_days=delivery_delay_days,
            delay_probability=delay_probability,
        )
        for j in range(1, n_sup + 1)
    ]

    catalog = []
    for s in sku_list:
        n_sources = rng.randint(1, min(3, n_sup))
        chosen = rng.sample(range(n_sup), n_sources)
        base_price = rng.randint(50, 500)
        for j in sorted(chosen):
            sup = suppliers[j]
            catalog.append(
                CatalogEntry(
                    supplier_id=sup.id,
                    sku_id=s.id,
                    unit_price=max(10, base_price + rng.randint(-40, 40)),
                    moq=s.case_pack * rng.choice([1, 1, 2]),
                    lead_time_days=rng.randint(1, 4),
                )
            )

    demand = {}
    for o in outlet_list:
        for s in sku_list:
            base = round(rng.uniform(2.0, 15.0), 2)
            if weekday_pattern:
                raw = [rng.uniform(0.75, 1.25) for _ in range(7)]
                mean_raw = sum(raw) / 7.0
                factors = tuple(f / mean_raw for f in raw)
            else:
                factors = (1.0,) * 7
            promos = []
            demand[(o.id, s.id)] = DemandParams(
                base=base,
                weekday_factors=factors,
                season_amplitude=season_amplitude,
                season_phase=rng.uniform(0, 6.283) if season_amplitude else 0.0,
                promo_calendar=promos,
                noise_sigma=noise_sigma,
                spike_probability=spike_probability,
                spike_factor=spike_factor,
            )

    # Promotions, if requested, land on random pairs within the first 90 days.
    if promo_count:
        pairs = sorted(demand.keys())
        for _ in range(promo_count):
            key = pairs[rng.randrange(len(pairs))]
            start = rng.randint(7, 80)
            demand[key].promo_calendar.append(
                Promo(start_day=start, end_day=start + rng.randint(2, 6), uplift=round(rng.uniform(1.2, 1.8), 2))
            )

    # Size the fleet so one day's worth of network volume fits comfortably.
    daily_volume = {TempClass.AMBIENT: 0.0, TempClass.CHILLED: 0.0}
    for (o, k), dp in demand.items():
        sku = next(s for s in sku_list if s.id == k)
        daily_volume[sku.temp_class] += dp.base * sku.unit_volume * sku.target_cover_days
    fleet = []
    v_idx = 1
    for temp in (TempClass.AMBIENT, TempClass.CHILLED):
        if daily_volume[temp] <= 0:
            continue
        cap = 9000.0 if temp is TempClass.AMBIENT else 6000.0
        count = max(1, int(daily_volume[temp] // cap) + 1)
        for _ in range(count):
            fleet.append(Vehicle(id=f"VEH{v_idx:02d}", capacity=cap, temp_class=temp, speed_kmh=40.0))
            v_idx += 1

    pol = policy or PolicyParams()
    if service_z is not None:
        pol = PolicyParams.from_dict({**pol.to_dict(), "service_z": service_z})

    max_lead = max((e.lead_time_days for e in catalog), default=1)
    return WorldConfig(
        seed=seed,
        outlets=outlet_list,
        skus=sku_list,
        suppliers=suppliers,
        catalog=catalog,
        fleet=fleet,
        demand=demand,
        policy=pol,
        holidays=[],
        dc_location=(box_km / 2.0, box_km / 2.0),
        dc_cover_days=max_lead + 3,
    )


def zero_variance_config(outlets: int, skus: int, seed: int, **kw) -> WorldConfig:
    """Fully deterministic world: no noise, no season, no spikes, reliable suppliers."""
    kw.setdefault("noise_sigma", 0.0)
    kw.setdefault("season_amplitude", 0.0)
    kw.setdefault("spike_probability", 0.0)
    kw.setdefault("confirm_probability", 1.0)
    kw.setdefault("delay_probability", 0.0)
    return make_config(outlets, skus, seed, **kw)
