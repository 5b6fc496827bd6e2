// Mirrors of the engine's HTTP API payloads. Field names match the wire
// exactly; the console never derives quantities of its own, so these are the
// only shapes it knows.

export interface TraceProposal {
  reasoner_id: string;
  value: unknown;
  rationale: string;
  score: number | null;
}

export interface ReasoningTrace {
  kind: string;
  proposals: TraceProposal[];
  value: unknown;
  dispersion: number;
  synthesis_note: string;
  flagged: boolean;
  failures: string[];
}

export interface PoSummary {
  sku_id: string;
  supplier_id: string;
  qty: number;
  need_by_day: number;
  state: string;
  flags: string[];
  rationale: ReasoningTrace | null;
  supplier_rationale: ReasoningTrace | null;
}

export interface PlanSummary {
  day: number;
  outlets: number;
  units: number;
  routes: number;
  state: string;
  rationale: ReasoningTrace | null;
}

export type ApprovalState = "Pending" | "Approved" | "Modified" | "Rejected";

export interface ApprovalItem {
  id: string;
  kind: "purchase_order" | "replenishment_plan";
  payload_ref: string;
  created_tick: number;
  state: ApprovalState;
  modification: unknown;
  decider: string | null;
  decided_tick: number | null;
  summary: PoSummary | PlanSummary;
}

export interface Alert {
  id: string;
  kind: string;
  subject: string;
  impact: number;
  days_to_impact: number;
  severity_weight: number;
  priority_score: number;
  trigger_trace: string;
  recommended_action: string;
  state: string;
  raised_day: number;
}

export interface AllocationRow {
  outlet: string;
  sku: string;
  units: number;
}

export interface RouteView {
  vehicle_id: string;
  temp_class: string;
  stops: string[];
  load: AllocationRow[];
  total_volume: number;
  depart_minute: number;
  etas: number[];
  total_km: number;
  duration_minutes: number;
  feasible: boolean;
  infeasibility: string | null;
}

export interface Plan {
  id: string;
  day: number;
  state: string;
  allocations: AllocationRow[];
  routes: RouteView[];
  unallocated: Record<string, number>;
  rationale: ReasoningTrace | null;
  contingency_notes: string[];
  consolidation_recs: string[];
  infeasible_outlets: string[];
  baseline_km: number;
  optimized_km: number;
}

export interface Kpis {
  days_run: number;
  units_sold: number;
  lost_sales: number;
  fill_rate: number;
  stockout_days: number;
  waste_units: number;
  total_route_km: number;
  pending_pos: number;
  pending_plans: number;
  open_alerts: number;
}

export interface StateView {
  day: number;
  seed: number;
  outlets: number;
  skus: number;
  kpis: Kpis;
  pending_approvals: ApprovalItem[];
  alerts: Alert[];
  dc_stock: Record<string, number>;
  outlet_stock: Record<string, number>;
}

export interface AuditRecord {
  seq: number;
  tick: number;
  actor: string;
  event_kind: string;
  payload: Record<string, unknown>;
  payload_digest: string;
}

/** Structured delta posted with a "modify" decision. */
export interface Modification {
  qty?: number;
  allocations?: AllocationRow[];
}

export function isPoSummary(s: PoSummary | PlanSummary): s is PoSummary {
  return "sku_id" in s;
}
