"""Rolling demand forecasts from sales history and calendar signals.

The method is deliberately transparent: a same-weekday seasonal-naive mean
over the trailing four weeks, promo-affected days excluded from the baseline,
scheduled uplifts and holiday factors multiplied back in for future days. The
basis_note on every series records which rule produced it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .domain import DC_ID
from .world import Promo, WorldConfig

WINDOW_DAYS = 28
MIN_WEEKDAY_SAMPLES = 2


@dataclass
class Calendar:
    """Known-in-advance demand drivers: scheduled promos and holidays."""

    promos: dict[tuple[str, str], list[Promo]] = field(default_factory=dict)
    holidays: frozenset[int] = frozenset()
    holiday_factor: float = 1.0

    @classmethod
    def from_config(cls, config: WorldConfig) -> "Calendar":
        return cls(
            promos={k: list(dp.promo_calendar) for k, dp in config.demand.items() if dp.promo_calendar},
            holidays=frozenset(config.holidays),
            holiday_factor=config.holiday_factor,
        )

    def uplift(self, outlet: str, sku: str, day: int) -> float:
        promos = self.promos.get((outlet, sku))
        if not promos:
            return 1.0
        return max((p.uplift for p in promos if p.covers(day)), default=1.0)

    def day_factor(self, outlet: str, sku: str, day: int) -> float:
        f = self.uplift(outlet, sku, day)
        if self.holidays and day in self.holidays:
            f *= self.holiday_factor
        return f

    def affects(self, outlet: str, sku: str, day: int) -> bool:
        """True when the day's history can't be used as plain baseline."""
        if not self.holidays and (outlet, sku) not in self.promos:
            return False
        return self.day_factor(outlet, sku, day) != 1.0


@dataclass
class ForecastSeries:
    outlet: str
    sku: str
    start_day: int
    horizon: int
    mean: list[float]
    sigma_daily: float
    cv: float
    basis_note: str

    def mean_on(self, day: int) -> float:
        """Mean for an absolute day; the last horizon day extends onward."""
        idx = day - self.start_day
        if idx < 0:
            idx = 0
        if idx >= len(self.mean):
            idx = len(self.mean) - 1
        return self.mean[idx]

    def demand_between(self, first_day: int, last_day: int) -> float:
        """Sum of means over [first_day, last_day] inclusive."""
        return sum(self.mean_on(d) for d in range(first_day, last_day + 1))

    def avg_mean(self, days: int = 7) -> float:
        take = self.mean[: max(1, min(days, len(self.mean)))]
        return sum(take) / len(take)

    def to_dict(self) -> dict:
        return {
            "outlet": self.outlet,
            "sku": self.sku,
            "start_day": self.start_day,
            "horizon": self.horizon,
            "mean": self.mean,
            "sigma_daily": self.sigma_daily,
            "cv": self.cv,
            "basis_note": self.basis_note,
        }


def forecast(
    history: list[tuple[int, int]],
    calendar: Calendar,
    outlet: str,
    sku: str,
    horizon: int,
    today: int,
) -> ForecastSeries:
    """Forecast `horizon` days starting at `today` from (day, units) history.

    Only the trailing WINDOW_DAYS of history are consulted. Promo- and
    holiday-affected days are excluded from the baseline rather than
    de-uplifted. With no usable history at all, returns a zero forecast with
    a cv of +inf so downstream flags fire.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    window = [(d, u) for d, u in history if today - WINDOW_DAYS <= d < today]
    clean = [(d, u) for d, u in window if not calendar.affects(outlet, sku, d)]

    if not window:
        return ForecastSeries(outlet, sku, today, horizon, [0.0] * horizon,
                              0.0, math.inf, "no data")

    by_weekday: dict[int, list[int]] = {}
    for d, u in clean:
        by_weekday.setdefault(d % 7, []).append(u)

    overall = [u for _, u in clean]
    overall_mean = sum(overall) / len(overall) if overall else 0.0

    means: list[float] = []
    fallback_days = 0
    for i in range(horizon):
        day = today + i
        samples = by_weekday.get(day % 7, [])
        if len(samples) >= MIN_WEEKDAY_SAMPLES:
            base = sum(samples) / len(samples)
        else:
            base = overall_mean
            fallback_days += 1
        means.append(base * calendar.day_factor(outlet, sku, day))

    sigma = _pooled_sigma(by_weekday, overall)
    avg = sum(means) / len(means)
    if avg > 0:
        cv = sigma / avg
    else:
        cv = 0.0 if sigma == 0 else math.inf

    if fallback_days == 0:
        note = f"same-weekday mean over trailing {WINDOW_DAYS}d ({len(clean)} clean days)"
    elif fallback_days == horizon:
        note = f"trailing-{WINDOW_DAYS}d fallback (insufficient same-weekday samples)"
    else:
        note = (f"same-weekday mean; trailing-{WINDOW_DAYS}d fallback on "
                f"{fallback_days}/{horizon} days")
    return ForecastSeries(outlet, sku, today, horizon, means, sigma, cv, note)


def _pooled_sigma(by_weekday: dict[int, list[int]], overall: list[int]) -> float:
    """Pooled within-weekday sample sd; falls back to the plain sample sd."""
    ss = 0.0
    dof = 0
    for samples in by_weekday.values():
        n = len(samples)
        if n < 2:
            continue
        m = sum(samples) / n
        ss += sum((x - m) ** 2 for x in samples)
        dof += n - 1
    if dof > 0:
        return math.sqrt(ss / dof)
    if len(overall) >= 2:
        m = sum(overall) / len(overall)
        return math.sqrt(sum((x - m) ** 2 for x in overall) / (len(overall) - 1))
    return 0.0


def aggregate_for_dc(series: list[ForecastSeries], sku: str) -> ForecastSeries:
    """Network-level forecast for the DC: sum of outlet means, pooled sigma."""
    if not series:
        raise ValueError("no outlet series to aggregate")
    horizon = min(s.horizon for s in series)
    start = series[0].start_day
    means = [sum(s.mean[i] for s in series) for i in range(horizon)]
    sigma = math.sqrt(sum(s.sigma_daily**2 for s in series))
    avg = sum(means) / len(means) if means else 0.0
    finite = [s.cv for s in series if not math.isinf(s.cv)]
    if avg > 0:
        cv = sigma / avg
    elif len(finite) < len(series):
        cv = math.inf
    else:
        cv = 0.0
    return ForecastSeries(DC_ID, sku, start, horizon, means, sigma, cv,
                          f"aggregate of {len(series)} outlets")
