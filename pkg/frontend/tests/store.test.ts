// Store behaviour against a scripted API double. The invariant under test
// throughout: lists only ever change via refetch, never via local edits.

import { describe, expect, it } from "vitest";
import { ApiError, type ApiClient } from "../src/api.js";
import { ConsoleStore, invalidModification } from "../src/store.js";
import type {
  Alert,
  ApprovalItem,
  AuditRecord,
  Kpis,
  Plan,
  StateView,
} from "../src/types.js";

const KPIS: Kpis = {
  days_run: 6,
  units_sold: 900,
  lost_sales: 12,
  fill_rate: 0.987,
  stockout_days: 1,
  waste_units: 3,
  total_route_km: 210.5,
  pending_pos: 2,
  pending_plans: 1,
  open_alerts: 1,
};

function poItem(id: string, state: ApprovalItem["state"] = "Pending"): ApprovalItem {
  return {
    id,
    kind: "purchase_order",
    payload_ref: "PO-0001",
    created_tick: 4,
    state,
    modification: null,
    decider: null,
    decided_tick: null,
    summary: {
      sku_id: "SKU001",
      supplier_id: "SUP01",
      qty: 40,
      need_by_day: 8,
      state: "PendingApproval",
      flags: [],
      rationale: null,
      supplier_rationale: null,
    },
  };
}

function record(seq: number, event_kind: string): AuditRecord {
  return { seq, tick: 5, actor: "gate", event_kind, payload: {}, payload_digest: "x" };
}

/** Scripted stand-in for ApiClient: canned data, call log, optional fault. */
class FakeApi {
  calls: string[] = [];
  fail: ApiError | null = null;
  approvalsData: ApprovalItem[] = [poItem("AP-0001")];
  alertsData: Alert[] = [];
  planData: Plan | null = null;

  private gate<T>(name: string, value: T): Promise<T> {
    this.calls.push(name);
    return this.fail ? Promise.reject(this.fail) : Promise.resolve(value);
  }

  state(): Promise<StateView> {
    return this.gate("state", {
      day: 6,
      seed: 5,
      outlets: 4,
      skus: 6,
      kpis: KPIS,
      pending_approvals: this.approvalsData,
      alerts: this.alertsData,
      dc_stock: {},
      outlet_stock: {},
    });
  }
  kpis(): Promise<Kpis> {
    return this.gate("kpis", KPIS);
  }
  approvals(): Promise<ApprovalItem[]> {
    return this.gate("approvals", this.approvalsData);
  }
  alerts(): Promise<Alert[]> {
    return this.gate("alerts", this.alertsData);
  }
  plan(id: string): Promise<Plan> {
    this.calls.push(`plan:${id}`);
    if (this.planData === null) {
      return Promise.reject(new ApiError(404, `unknown plan ${id}`));
    }
    return Promise.resolve(this.planData);
  }
  decide(itemId: string, decision: string): Promise<ApprovalItem> {
    this.calls.push(`decide:${itemId}:${decision}`);
    return this.fail
      ? Promise.reject(this.fail)
      : Promise.resolve(poItem(itemId, "Approved"));
  }
  ack(alertId: string): Promise<Alert> {
    this.calls.push(`ack:${alertId}`);
    return this.fail
      ? Promise.reject(this.fail)
      : Promise.resolve({} as Alert);
  }
}

function fixture() {
  const api = new FakeApi();
  const store = new ConsoleStore(api as unknown as ApiClient);
  return { api, store };
}

describe("ConsoleStore", () => {
  it("refreshAll loads every list from the API", async () => {
    const { api, store } = fixture();
    await store.refreshAll();
    expect(store.current.state?.day).toBe(6);
    expect(store.current.kpis?.fill_rate).toBeCloseTo(0.987);
    expect(store.current.approvals).toHaveLength(1);
    expect(store.current.banner).toBeNull();
    expect(api.calls).toContain("state");
  });

  it("refreshAll surfaces an unreachable engine as a banner", async () => {
    const { api, store } = fixture();
    api.fail = new ApiError(0, "cannot reach engine at http://127.0.0.1:8000");
    await store.refreshAll();
    expect(store.current.banner?.kind).toBe("error");
    expect(store.current.banner?.text).toContain("cannot reach engine");
  });

  it("an approval event triggers an approvals+state refetch", async () => {
    const { api, store } = fixture();
    api.approvalsData = [poItem("AP-0001", "Approved")];
    await store.handleRecord(record(10, "approval_decision"));
    expect(store.current.approvals[0]?.state).toBe("Approved");
    expect(api.calls).toEqual(["approvals", "state"]);
    expect(store.current.feed.map((r) => r.seq)).toEqual([10]);
  });

  it("drops replayed records with a seq it has already seen", async () => {
    const { api, store } = fixture();
    await store.handleRecord(record(10, "approval_decision"));
    api.calls = [];
    await store.handleRecord(record(10, "approval_decision"));
    await store.handleRecord(record(9, "approval_decision"));
    expect(api.calls).toEqual([]);
    expect(store.current.feed).toHaveLength(1);
  });

  it("a day-close event refreshes KPIs but not approvals", async () => {
    const { api, store } = fixture();
    await store.handleRecord(record(11, "day_events"));
    expect(api.calls).toEqual(["kpis"]);
  });

  it("decide posts but never edits the pending list locally", async () => {
    const { api, store } = fixture();
    await store.refreshAll();
    const before = store.current.approvals;
    const ok = await store.decide("AP-0001", "approve");
    expect(ok).toBe(true);
    expect(api.calls).toContain("decide:AP-0001:approve");
    // still the same pending row — only an audit event may change it
    expect(store.current.approvals).toBe(before);
    expect(store.current.approvals[0]?.state).toBe("Pending");
    expect(store.current.banner?.kind).toBe("info");
  });

  it("shows the server's conflict message verbatim and reports failure", async () => {
    const { api, store } = fixture();
    await store.refreshAll();
    api.fail = new ApiError(409, "AP-0001 already decided: Approved");
    const ok = await store.decide("AP-0001", "approve");
    expect(ok).toBe(false);
    expect(store.current.banner).toEqual({
      kind: "error",
      text: "AP-0001 already decided: Approved",
    });
    expect(store.current.approvals[0]?.state).toBe("Pending");
  });

  it("ack failures land in the banner", async () => {
    const { api, store } = fixture();
    api.fail = new ApiError(404, "unknown alert AL-9999");
    expect(await store.ack("AL-9999")).toBe(false);
    expect(store.current.banner?.text).toBe("unknown alert AL-9999");
  });

  it("openPlan loads detail and switches tab", async () => {
    const { api, store } = fixture();
    api.planData = {
      id: "PLAN-0002",
      day: 6,
      state: "PendingApproval",
      allocations: [],
      routes: [],
      unallocated: {},
      rationale: null,
      contingency_notes: [],
      consolidation_recs: [],
      infeasible_outlets: [],
      baseline_km: 50,
      optimized_km: 40,
    };
    await store.openPlan("PLAN-0002");
    expect(store.current.tab).toBe("plan");
    expect(store.current.plan?.id).toBe("PLAN-0002");
  });

  it("reportLocalError sets an error banner without any API call", () => {
    const { api, store } = fixture();
    store.reportLocalError("order quantity must be a positive integer, got -5");
    expect(store.current.banner?.kind).toBe("error");
    expect(api.calls).toEqual([]);
  });
});

describe("invalidModification", () => {
  it("rejects non-positive and non-integer PO quantities", () => {
    expect(invalidModification("purchase_order", { qty: -5 })).toContain(
      "positive",
    );
    expect(invalidModification("purchase_order", { qty: 0 })).toContain(
      "positive",
    );
    expect(invalidModification("purchase_order", { qty: 2.5 })).toContain(
      "positive",
    );
    expect(invalidModification("purchase_order", {})).toContain("positive");
  });

  it("accepts a positive integer quantity", () => {
    expect(invalidModification("purchase_order", { qty: 12 })).toBeNull();
  });

  it("rejects empty or negative plan allocation rows", () => {
    expect(
      invalidModification("replenishment_plan", { allocations: [] }),
    ).toContain("at least one");
    expect(
      invalidModification("replenishment_plan", {
        allocations: [{ outlet: "OUT01", sku: "SKU001", units: -1 }],
      }),
    ).toContain("non-negative");
  });

  it("accepts reduced allocations", () => {
    expect(
      invalidModification("replenishment_plan", {
        allocations: [{ outlet: "OUT01", sku: "SKU001", units: 0 }],
      }),
    ).toBeNull();
  });
});
