// Rendering checks: every value shown must come off the API payload, and
// anything string-ish from the wire must be escaped before it hits the DOM.

import { describe, expect, it } from "vitest";
import type { ConsoleView } from "../src/store.js";
import type { Alert, ApprovalItem, Plan, ReasoningTrace } from "../src/types.js";
import {
  alertsView,
  approvalsView,
  dashboardView,
  esc,
  planView,
  tabsView,
} from "../src/views.js";

function view(partial: Partial<ConsoleView>): ConsoleView {
  return {
    tab: "dashboard",
    connection: "live",
    banner: null,
    state: null,
    kpis: null,
    approvals: [],
    alerts: [],
    plan: null,
    feed: [],
    ...partial,
  };
}

const TRACE: ReasoningTrace = {
  kind: "order_quantity",
  proposals: [
    { reasoner_id: "baseline", value: 40, rationale: "policy computation", score: null },
    { reasoner_id: "mirror-1", value: 44, rationale: "<script>alert(1)</script>", score: 0.9 },
  ],
  value: 40,
  dispersion: 2.5,
  synthesis_note: "median of 2 proposals",
  flagged: true,
  failures: ["mirror-2: timeout"],
};

function poItem(over: Partial<ApprovalItem> = {}): ApprovalItem {
  return {
    id: "AP-0004",
    kind: "purchase_order",
    payload_ref: "PO-0002",
    created_tick: 3,
    state: "Pending",
    modification: null,
    decider: null,
    decided_tick: null,
    summary: {
      sku_id: "SKU003",
      supplier_id: "SUP01",
      qty: 40,
      need_by_day: 7,
      state: "PendingApproval",
      flags: ["urgent"],
      rationale: TRACE,
      supplier_rationale: null,
    },
    ...over,
  };
}

const PLAN: Plan = {
  id: "PLAN-0003",
  day: 6,
  state: "PendingApproval",
  allocations: [
    { outlet: "OUT01", sku: "SKU001", units: 18 },
    { outlet: "OUT02", sku: "SKU001", units: 12 },
  ],
  routes: [
    {
      vehicle_id: "VEH01",
      temp_class: "ambient",
      stops: ["OUT01", "OUT02"],
      load: [],
      total_volume: 88,
      depart_minute: 360,
      etas: [23, 41],
      total_km: 34.2,
      duration_minutes: 62,
      feasible: true,
      infeasibility: null,
    },
  ],
  unallocated: { SKU002: 5 },
  rationale: null,
  contingency_notes: ["OUT03 skipped: no feasible route"],
  consolidation_recs: ["merge OUT01+OUT02 drops"],
  infeasible_outlets: ["OUT03"],
  baseline_km: 51.7,
  optimized_km: 34.2,
};

describe("esc", () => {
  it("escapes HTML metacharacters", () => {
    expect(esc(`<b a="1">&`)).toBe("&lt;b a=&quot;1&quot;&gt;&amp;");
  });
});

describe("approvalsView", () => {
  it("renders the reasoning trace: dispersion, flag, proposals, failures", () => {
    const html = approvalsView(view({ approvals: [poItem()] }));
    expect(html).toContain("flagged dispersion 2.5");
    expect(html).toContain("median of 2 proposals");
    expect(html).toContain("baseline");
    expect(html).toContain("mirror-1");
    expect(html).toContain("failures: mirror-2: timeout");
  });

  it("escapes hostile strings from the wire", () => {
    const html = approvalsView(view({ approvals: [poItem()] }));
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });

  it("offers approve/reject and a quantity modify form for POs", () => {
    const html = approvalsView(view({ approvals: [poItem()] }));
    expect(html).toContain('data-action="approve" data-item="AP-0004"');
    expect(html).toContain('data-action="reject" data-item="AP-0004"');
    expect(html).toContain('data-qty-for="AP-0004"');
    expect(html).toContain('value="40"'); // prefilled with the drafted qty
  });

  it("lists only pending items", () => {
    const decided = poItem({ id: "AP-0001", state: "Approved" });
    const html = approvalsView(view({ approvals: [decided, poItem()] }));
    expect(html).toContain("AP-0004");
    expect(html).not.toContain("AP-0001");
    expect(html).toContain("1 pending");
  });
});

describe("alertsView", () => {
  const alert = (state: string): Alert => ({
    id: "AL-0001",
    kind: "stockout_projected",
    subject: "OUT02/SKU004",
    impact: 30,
    days_to_impact: 2,
    severity_weight: 1.0,
    priority_score: 15,
    trigger_trace: "cover 1.2d < threshold 2.0d",
    recommended_action: "expedite PO-0005",
    state,
    raised_day: 5,
  });

  it("shows trigger trace and recommended action with an ack control", () => {
    const html = alertsView(view({ alerts: [alert("Open")] }));
    expect(html).toContain("cover 1.2d &lt; threshold 2.0d");
    expect(html).toContain("expedite PO-0005");
    expect(html).toContain('data-action="ack" data-alert="AL-0001"');
  });

  it("drops the ack control once acknowledged", () => {
    const html = alertsView(view({ alerts: [alert("Acknowledged")] }));
    expect(html).not.toContain('data-action="ack"');
    expect(html).toContain("Acknowledged");
  });
});

describe("planView", () => {
  it("shows per-stop ETAs and the km comparison", () => {
    const html = planView(view({ plan: PLAN }));
    expect(html).toContain("OUT01@23m → OUT02@41m");
    expect(html).toContain("optimized 34.2 km vs baseline 51.7 km");
    expect(html).toContain("merge OUT01+OUT02 drops");
    expect(html).toContain("OUT03 skipped: no feasible route");
    expect(html).toContain("held at DC: SKU002: 5");
  });

  it("makes allocations editable only while the plan waits at the gate", () => {
    const gated = view({
      plan: PLAN,
      approvals: [
        poItem({
          id: "AP-0009",
          kind: "replenishment_plan",
          payload_ref: "PLAN-0003",
          summary: { day: 6, outlets: 2, units: 30, routes: 1, state: "PendingApproval", rationale: null },
        }),
      ],
    });
    const editable = planView(gated);
    expect(editable).toContain('data-alloc data-plan="PLAN-0003"');
    expect(editable).toContain('data-action="modify-plan" data-item="AP-0009"');

    const readonly = planView(view({ plan: PLAN }));
    expect(readonly).not.toContain("data-alloc");
    expect(readonly).toContain("<td>18</td>");
  });
});

describe("dashboardView", () => {
  it("renders KPI tiles straight from the payload", () => {
    const html = dashboardView(
      view({
        kpis: {
          days_run: 6,
          units_sold: 900,
          lost_sales: 12,
          fill_rate: 0.987,
          stockout_days: 1,
          waste_units: 3,
          total_route_km: 210.53,
          pending_pos: 2,
          pending_plans: 1,
          open_alerts: 1,
        },
      }),
    );
    expect(html).toContain("98.7%");
    expect(html).toContain("210.5");
    expect(html).toContain("fill rate");
  });

  it("lists feed records newest first", () => {
    const rec = (seq: number) => ({
      seq,
      tick: 1,
      actor: "sim",
      event_kind: "day_events",
      payload: {},
      payload_digest: "d",
    });
    const html = dashboardView(view({ feed: [rec(1), rec(2), rec(3)] }));
    expect(html.indexOf('data-seq="3"')).toBeLessThan(html.indexOf('data-seq="1"'));
  });
});

describe("tabsView", () => {
  it("marks the active tab and counts pending approvals", () => {
    const html = tabsView(view({ tab: "approvals", approvals: [poItem()] }));
    expect(html).toContain('class="tab active"');
    expect(html).toContain("Approvals (1)");
  });
});
