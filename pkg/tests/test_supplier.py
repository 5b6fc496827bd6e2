"""Transmission, response handling, follow-up cadence, escalation, reliability."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from replen.domain import PolicyParams, Supplier
from replen.procurement import POState, PurchaseOrder, WrongState
from replen.supplier import (
    Escalation,
    FollowupAction,
    InteractionStatus,
    ReliabilityLedger,
    apply_response,
    due_responses,
    tick,
    transmit,
)
from replen.world import SupplierResponse

POLICY = PolicyParams()  # followup window 2, max 2


def approved_po(po_id="PO-0001", qty=100, order_day=0, lead=2):
    po = PurchaseOrder(po_id, "SKU001", "SUP01", qty, 100.0, order_day,
                       order_day + lead, lead, state=POState.APPROVED)
    return po


def supplier(delay=1):
    return Supplier(id="SUP01", name="Alpha", response_delay_days=delay)


class TestTransmit:
    def test_approved_becomes_transmitted(self):
        po = approved_po()
        inter = transmit(po, supplier(), today=0)
        assert po.state is POState.TRANSMITTED
        assert inter.status is InteractionStatus.AWAITING_RESPONSE
        assert inter.next_response_day == 1
        assert len(inter.log) == 1

    def test_draft_po_rejected(self):
        po = PurchaseOrder("PO-0001", "SKU001", "SUP01", 10, 100.0, 0, 2, 2)
        with pytest.raises(WrongState):
            transmit(po, supplier(), today=0)

    def test_double_transmit_rejected(self):
        po = approved_po()
        transmit(po, supplier(), today=0)
        with pytest.raises(WrongState):
            transmit(po, supplier(), today=0)


class TestResponses:
    def test_full_confirm(self):
        po = approved_po(qty=100)
        inter = transmit(po, supplier(), 0)
        eff = apply_response(po, inter, SupplierResponse("confirm", 100, 2), today=1)
        assert po.state is POState.CONFIRMED
        assert (eff.kind, eff.confirmed_qty, eff.shortfall) == ("confirmed", 100, 0)
        assert not eff.late
        assert inter.on_time is True

    def test_partial_shortfall(self):
        po = approved_po(qty=100)
        inter = transmit(po, supplier(), 0)
        eff = apply_response(po, inter, SupplierResponse("partial", 60, 2), today=1)
        assert po.state is POState.PARTIALLY_CONFIRMED
        assert eff.shortfall == 40
        assert po.confirmed_qty == 60

    def test_late_promise_flagged(self):
        po = approved_po(qty=100, lead=2)  # need_by == 2
        inter = transmit(po, supplier(), 0)
        eff = apply_response(po, inter, SupplierResponse("confirm", 100, 5), today=1)
        assert eff.late and po.state is POState.CONFIRMED
        assert inter.on_time is False

    def test_silence_closes_channel(self):
        po = approved_po()
        inter = transmit(po, supplier(), 0)
        eff = apply_response(po, inter, SupplierResponse("none", 0, None), today=1)
        assert eff.kind == "no_response"
        assert inter.next_response_day is None
        assert inter.status is InteractionStatus.AWAITING_RESPONSE
        assert po.state is POState.TRANSMITTED

    def test_rejection(self):
        po = approved_po(qty=100)
        inter = transmit(po, supplier(), 0)
        eff = apply_response(po, inter, SupplierResponse("reject", 0, None), today=1)
        assert po.state is POState.REJECTED
        assert eff.shortfall == 100

    def test_wrong_state_guard(self):
        po = approved_po()
        inter = transmit(po, supplier(), 0)
        apply_response(po, inter, SupplierResponse("confirm", 100, 2), today=1)
        with pytest.raises(WrongState):
            apply_response(po, inter, SupplierResponse("confirm", 100, 2), today=1)


class TestDue:
    def test_sorted_by_po_id(self):
        pos = {pid: approved_po(pid) for pid in ("PO-0003", "PO-0001", "PO-0002")}
        inters = [transmit(pos[pid], supplier(), 0) for pid in pos]
        due = due_responses(inters, day=1)
        assert [i.po_id for i in due] == ["PO-0001", "PO-0002", "PO-0003"]

    def test_not_due_early(self):
        po = approved_po()
        inter = transmit(po, supplier(delay=3), 0)
        assert due_responses([inter], day=2) == []
        assert due_responses([inter], day=3) == [inter]


class TestFollowups:
    def run_silent_days(self, through_day, window=2):
        policy = PolicyParams(followup_window_days=window)
        po = approved_po()
        inter = transmit(po, supplier(), 0)
        sups = {"SUP01": supplier()}
        pos = {po.id: po}
        actions = []
        for day in range(1, through_day + 1):
            for i in due_responses([inter], day):
                apply_response(po, i, SupplierResponse("none", 0, None), day)
            actions += tick([inter], pos, sups, day, policy)
        return po, inter, actions

    def test_followup_at_window_boundary(self):
        po, inter, actions = self.run_silent_days(2)
        assert actions == [FollowupAction("PO-0001", "SUP01", 2, 1)]
        assert inter.followups_sent == 1
        assert inter.next_response_day == 3

    def test_no_followup_after_response(self):
        policy = PolicyParams()
        po = approved_po()
        inter = transmit(po, supplier(), 0)
        apply_response(po, inter, SupplierResponse("confirm", 100, 2), 1)
        assert tick([inter], {po.id: po}, {"SUP01": supplier()}, 4, policy) == []

    def test_escalation_after_budget_spent(self):
        po, inter, actions = self.run_silent_days(6)
        followups = [a for a in actions if isinstance(a, FollowupAction)]
        escalations = [a for a in actions if isinstance(a, Escalation)]
        assert [f.day for f in followups] == [2, 4]
        assert [e.day for e in escalations] == [6]
        assert inter.status is InteractionStatus.ESCALATED
        assert po.state is POState.EXPIRED
        assert po.open_qty == 0  # phantom pipeline released

    @given(window=st.integers(1, 4), maxf=st.integers(0, 3))
    @settings(max_examples=40)
    def test_liveness_bound(self, window, maxf):
        # a silent supplier always terminates by sent + (max+1) * window
        policy = PolicyParams(followup_window_days=window, max_followups=maxf)
        po = approved_po()
        inter = transmit(po, supplier(), 0)
        sups, pos = {"SUP01": supplier()}, {po.id: po}
        deadline = (maxf + 1) * window
        for day in range(1, deadline + 1):
            for i in due_responses([inter], day):
                apply_response(po, i, SupplierResponse("none", 0, None), day)
            tick([inter], pos, sups, day, policy)
        assert inter.status is InteractionStatus.ESCALATED

    def test_log_is_chronological(self):
        _, inter, _ = self.run_silent_days(6)
        days = [e["day"] for e in inter.log]
        assert days == sorted(days)


class TestReliability:
    def test_fraction_overrides_prior(self):
        led = ReliabilityLedger()
        sup = Supplier(id="SUP01", name="A", reliability=0.97)
        led.record(sup, True)
        led.record(sup, True)
        led.record(sup, False)
        assert sup.reliability == pytest.approx(2 / 3)
        assert led.observed("SUP01") == (2, 3)

    def test_untouched_supplier_keeps_prior(self):
        led = ReliabilityLedger()
        sup = Supplier(id="SUP02", name="B", reliability=0.8)
        assert led.observed("SUP02") == (0, 0)
        assert sup.reliability == 0.8
