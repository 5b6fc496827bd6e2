// Console state. The store holds the latest API responses plus the audit
// feed and nothing else: actions post to the decision endpoints and the
// lists change only when the resulting audit record comes back over the
// event stream and triggers a refetch — never by optimistic local edits.
// Reloading the page therefore reproduces the identical view.

import { ApiError, type ApiClient } from "./api.js";
import type { FeedStatus } from "./sse.js";
import type {
  Alert,
  ApprovalItem,
  AuditRecord,
  Kpis,
  Modification,
  Plan,
  StateView,
} from "./types.js";

export type Banner = { kind: "error" | "info"; text: string } | null;

export type Tab = "dashboard" | "approvals" | "alerts" | "plan";

export interface ConsoleView {
  tab: Tab;
  connection: FeedStatus;
  banner: Banner;
  state: StateView | null;
  kpis: Kpis | null;
  approvals: ApprovalItem[];
  alerts: Alert[];
  plan: Plan | null;
  feed: AuditRecord[];
}

/**
 * Client-side guard mirroring the server's delta validation. Returns the
 * reason a modification is invalid, or null when it is worth posting — the
 * server re-validates either way and its verdict is the authoritative one.
 */
export function invalidModification(
  kind: ApprovalItem["kind"],
  mod: Modification,
): string | null {
  if (kind === "purchase_order") {
    if (!Number.isInteger(mod.qty) || (mod.qty as number) <= 0) {
      return `order quantity must be a positive integer, got ${mod.qty}`;
    }
    return null;
  }
  if (!mod.allocations || mod.allocations.length === 0) {
    return "plan modification needs at least one allocation row";
  }
  for (const row of mod.allocations) {
    if (!Number.isInteger(row.units) || row.units < 0) {
      return `${row.outlet}/${row.sku}: units must be a non-negative integer`;
    }
  }
  return null;
}

// Which refetches an audit record warrants, by event kind.
const APPROVAL_EVENTS = new Set([
  "approval_requested",
  "approval_decision",
  "approval_auto_rejected",
]);
const ALERT_EVENTS = new Set(["alert_raised", "alert_acknowledged"]);
const KPI_EVENTS = new Set([
  "day_events",
  "po_transmitted",
  "plan_dispatched",
  "run_started",
]);

export class ConsoleStore {
  private view: ConsoleView = {
    tab: "dashboard",
    connection: "connecting",
    banner: null,
    state: null,
    kpis: null,
    approvals: [],
    alerts: [],
    plan: null,
    feed: [],
  };
  private listeners: Array<() => void> = [];

  constructor(private readonly api: ApiClient) {}

  get current(): ConsoleView {
    return this.view;
  }

  subscribe(fn: () => void): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  setTab(tab: Tab): void {
    this.view.tab = tab;
    this.emit();
  }

  setConnection(status: FeedStatus): void {
    this.view.connection = status;
    this.emit();
  }

  clearBanner(): void {
    this.view.banner = null;
    this.emit();
  }

  /** Surface a client-side validation failure without posting anything. */
  reportLocalError(text: string): void {
    this.view.banner = { kind: "error", text };
    this.emit();
  }

  async refreshAll(): Promise<void> {
    try {
      const [state, kpis, approvals, alerts] = await Promise.all([
        this.api.state(),
        this.api.kpis(),
        this.api.approvals(),
        this.api.alerts(),
      ]);
      this.view.state = state;
      this.view.kpis = kpis;
      this.view.approvals = approvals;
      this.view.alerts = alerts;
      this.view.banner = null;
    } catch (err) {
      this.view.banner = { kind: "error", text: messageOf(err) };
    }
    this.emit();
  }

  /**
   * Fold one audit record from the event stream into the console: append it
   * to the feed (deduped by seq) and refetch whichever lists the event
   * touches, so what the user sees is always the server's audited state.
   */
  async handleRecord(rec: AuditRecord): Promise<void> {
    const last = this.view.feed[this.view.feed.length - 1];
    if (last !== undefined && rec.seq <= last.seq) return; // reconnect replay
    this.view.feed.push(rec);

    const jobs: Array<Promise<void>> = [];
    if (APPROVAL_EVENTS.has(rec.event_kind)) {
      jobs.push(
        this.api.approvals().then((items) => {
          this.view.approvals = items;
        }),
        this.api.state().then((s) => {
          this.view.state = s;
        }),
      );
    }
    if (ALERT_EVENTS.has(rec.event_kind)) {
      jobs.push(
        this.api.alerts().then((alerts) => {
          this.view.alerts = alerts;
        }),
      );
    }
    if (KPI_EVENTS.has(rec.event_kind)) {
      jobs.push(
        this.api.kpis().then((k) => {
          this.view.kpis = k;
        }),
      );
    }
    try {
      await Promise.all(jobs);
    } catch (err) {
      this.view.banner = { kind: "error", text: messageOf(err) };
    }
    this.emit();
  }

  /**
   * Post a gate decision. The pending list is not touched here: on success
   * the decision's own audit record arrives over the stream and triggers
   * the refetch. A server rejection (conflict, invalid delta) lands in the
   * banner verbatim.
   */
  async decide(
    itemId: string,
    decision: "approve" | "reject" | "modify",
    modification?: Modification,
  ): Promise<boolean> {
    try {
      await this.api.decide(itemId, decision, { modification });
      this.view.banner = {
        kind: "info",
        text: `${decision} submitted for ${itemId}`,
      };
      this.emit();
      return true;
    } catch (err) {
      this.view.banner = { kind: "error", text: messageOf(err) };
      this.emit();
      return false;
    }
  }

  async ack(alertId: string): Promise<boolean> {
    try {
      await this.api.ack(alertId);
      this.emit();
      return true;
    } catch (err) {
      this.view.banner = { kind: "error", text: messageOf(err) };
      this.emit();
      return false;
    }
  }

  /** Load one plan's detail and switch to the plan tab. */
  async openPlan(planId: string): Promise<void> {
    try {
      this.view.plan = await this.api.plan(planId);
      this.view.tab = "plan";
    } catch (err) {
      this.view.banner = { kind: "error", text: messageOf(err) };
    }
    this.emit();
  }
}

function messageOf(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return err instanceof Error ? err.message : String(err);
}
