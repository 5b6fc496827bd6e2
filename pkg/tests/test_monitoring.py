"""Signal evaluation: projections, thresholds, FEFO expiry risk."""

import math

from hypothesis import given, settings
from hypothesis import strategies as st

from replen.domain import Batch, InventoryRecord, PolicyParams, Sku
from replen.forecasting import ForecastSeries
from replen.monitoring import SignalKind, evaluate, expiry_risk, project_on_hand

POLICY = PolicyParams()


def series(means, sigma=0.0, today=0, outlet="OUT01", sku="SKU001"):
    avg = sum(means) / len(means)
    cv = sigma / avg if avg else 0.0
    return ForecastSeries(outlet, sku, today, len(means), [float(m) for m in means],
                          float(sigma), cv, "test fixture")


def plain_sku(**kw):
    defaults = dict(id="SKU001", name="x", category="c", case_pack=1, unit_volume=1.0)
    defaults.update(kw)
    return Sku(**defaults)


def rec(on_hand, holder="OUT01", batches=None):
    r = InventoryRecord(holder=holder, sku_id="SKU001", on_hand=on_hand)
    if batches:
        r.batches = batches
    return r


class TestLowStock:
    def test_projection_below_zero_triggers(self):
        fc = series([5] * 8)
        signals = evaluate(rec(10), plain_sku(), fc, lead_time_days=3, policy=POLICY)
        low = [s for s in signals if s.kind is SignalKind.LOW_STOCK]
        assert len(low) == 1
        assert low[0].projected_stockout_day == 2  # 10 - 5*2 = 0 at start of day 2

    def test_arrival_cancels_signal(self):
        fc = series([5] * 8)
        signals = evaluate(rec(10), plain_sku(), fc, lead_time_days=3, policy=POLICY,
                           arrivals=[(1, 20)])
        assert [s for s in signals if s.kind is SignalKind.LOW_STOCK] == []

    def test_safety_stock_threshold(self):
        # projection at lead: 40 - 3*10 = 10; safety = 1.645*4*sqrt(3) = 11.4 > 10
        fc = series([10] * 8, sigma=4.0)
        signals = evaluate(rec(40), plain_sku(), fc, lead_time_days=3, policy=POLICY)
        low = [s for s in signals if s.kind is SignalKind.LOW_STOCK]
        assert len(low) == 1
        assert "safety stock 11.4" in low[0].trigger_trace

    def test_adequate_stock_is_silent(self):
        fc = series([5] * 8)
        assert evaluate(rec(30), plain_sku(), fc, lead_time_days=3, policy=POLICY) == []


class TestOverstock:
    def test_doc_above_multiple(self):
        fc = series([1] * 8)
        signals = evaluate(rec(100), plain_sku(target_cover_days=3), fc,
                           lead_time_days=3, policy=POLICY)
        kinds = {s.kind for s in signals}
        assert SignalKind.OVERSTOCK in kinds

    def test_boundary_not_flagged(self):
        fc = series([1] * 8)
        signals = evaluate(rec(9), plain_sku(target_cover_days=3), fc,
                           lead_time_days=3, policy=POLICY)
        assert all(s.kind is not SignalKind.OVERSTOCK for s in signals)


class TestExpiryRisk:
    def test_boundary_sells_in_time(self):
        fc = series([5] * 8)
        at_risk, _ = expiry_risk([Batch(qty=10, expiry_day=2)], fc)
        assert at_risk == 0

    def test_one_day_short(self):
        fc = series([5] * 8)
        at_risk, first = expiry_risk([Batch(qty=10, expiry_day=1)], fc)
        assert at_risk == 5
        assert first == 1

    def test_already_expired_is_all_risk(self):
        fc = series([5] * 8)
        at_risk, first = expiry_risk([Batch(qty=7, expiry_day=0)], fc)
        assert at_risk == 7 and first == 0

    @given(
        batch_qtys=st.lists(st.integers(1, 40), min_size=1, max_size=5),
        expiries=st.lists(st.integers(1, 10), min_size=5, max_size=5),
        rate=st.integers(0, 15),
    )
    @settings(max_examples=100)
    def test_matches_bruteforce_fefo_simulation(self, batch_qtys, expiries, rate):
        batches = [Batch(qty=q, expiry_day=e) for q, e in zip(batch_qtys, expiries)]
        fc = series([rate] * 12)
        got, _ = expiry_risk(batches, fc)

        # independent day-by-day FEFO oracle
        pool = sorted([[float(b.qty), b.expiry_day] for b in batches], key=lambda x: x[1])
        wasted = 0.0
        for day in range(1, 11):
            left = float(rate)
            for b in pool:
                if b[1] < day or left <= 0:
                    continue
                take = min(b[0], left)
                b[0] -= take
                left -= take
            for b in pool:
                if b[1] == day:
                    wasted += b[0]
                    b[0] = 0.0
            pool = [b for b in pool if b[0] > 0]
        assert got == int(round(wasted))

    def test_monotone_in_forecast(self):
        batches = [Batch(qty=20, expiry_day=3)]
        risks = [expiry_risk(batches, series([r] * 8))[0] for r in range(0, 12)]
        assert all(a >= b for a, b in zip(risks, risks[1:]))


class TestIdempotence:
    def test_same_snapshot_same_signals(self):
        fc = series([5] * 8, sigma=1.0)
        r = rec(8, batches=None)
        s1 = evaluate(r, plain_sku(), fc, 3, POLICY)
        s2 = evaluate(r, plain_sku(), fc, 3, POLICY)
        assert [s.to_dict() for s in s1] == [s.to_dict() for s in s2]


def test_projection_includes_same_day_arrival():
    fc = series([5] * 8)
    assert project_on_hand(0, fc, [(2, 20)], 2) == 20 - 10
