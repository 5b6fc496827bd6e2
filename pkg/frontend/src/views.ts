// Pure HTML renderers: console state in, markup string out. Everything the
// user sees comes straight off API payloads — the only arithmetic here is
// formatting. Buttons carry data-action/data-* attributes that main.ts
// dispatches on; no view installs handlers itself.

import type { ConsoleView } from "./store.js";
import type {
  Alert,
  ApprovalItem,
  AuditRecord,
  Kpis,
  Plan,
  ReasoningTrace,
} from "./types.js";
import { isPoSummary } from "./types.js";

export function esc(text: unknown): string {
  return String(text)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

const fmtKm = (km: number) => `${km.toFixed(1)} km`;
const fmtPct = (x: number) => `${(100 * x).toFixed(1)}%`;

export function bannerView(view: ConsoleView): string {
  const dot =
    view.connection === "live"
      ? `<span class="dot live"></span>live`
      : `<span class="dot dead"></span>${esc(view.connection)}`;
  const note = view.banner
    ? `<span class="banner ${view.banner.kind}">${esc(view.banner.text)}</span>`
    : "";
  const day = view.state ? `day <b>${view.state.day}</b> · seed ${view.state.seed}` : "";
  return `<span class="conn">${dot}</span><span class="runinfo">${day}</span>${note}`;
}

// --- dashboard -----------------------------------------------------------

export function dashboardView(view: ConsoleView): string {
  const k = view.kpis;
  const tiles = k === null ? "<p class='muted'>no KPI data yet</p>" : kpiTiles(k);
  return `<section class="tiles">${tiles}</section>
<section class="card">
  <h2>Event feed</h2>
  ${feedTable(view.feed)}
</section>`;
}

function kpiTiles(k: Kpis): string {
  const tile = (label: string, value: string) =>
    `<div class="tile"><div class="tile-v">${esc(value)}</div><div class="tile-l">${esc(label)}</div></div>`;
  return [
    tile("fill rate", fmtPct(k.fill_rate)),
    tile("days run", String(k.days_run)),
    tile("units sold", String(k.units_sold)),
    tile("lost sales", String(k.lost_sales)),
    tile("stockout days", String(k.stockout_days)),
    tile("waste units", String(k.waste_units)),
    tile("route km", k.total_route_km.toFixed(1)),
    tile("pending POs", String(k.pending_pos)),
    tile("pending plans", String(k.pending_plans)),
    tile("open alerts", String(k.open_alerts)),
  ].join("");
}

function feedTable(feed: AuditRecord[], limit = 50): string {
  if (feed.length === 0) return "<p class='muted'>waiting for events…</p>";
  const rows = feed
    .slice(-limit)
    .reverse()
    .map((r) => {
      const gist = JSON.stringify(r.payload);
      const trimmed = gist.length > 160 ? gist.slice(0, 157) + "…" : gist;
      return `<tr data-seq="${r.seq}"><td>${r.seq}</td><td>${r.tick}</td>
<td>${esc(r.actor)}</td><td class="ev">${esc(r.event_kind)}</td>
<td class="payload">${esc(trimmed)}</td></tr>`;
    })
    .join("");
  return `<div class="scrollx"><table class="feed">
<thead><tr><th>seq</th><th>day</th><th>actor</th><th>event</th><th>payload</th></tr></thead>
<tbody>${rows}</tbody></table></div>`;
}

// --- approvals -----------------------------------------------------------

export function approvalsView(view: ConsoleView): string {
  const pending = view.approvals.filter((i) => i.state === "Pending");
  if (pending.length === 0) {
    return `<section class="card"><h2>Approval queue</h2>
<p class="muted">nothing waiting at the gate</p></section>`;
  }
  return `<section class="card"><h2>Approval queue · ${pending.length} pending</h2>
${pending.map(approvalCard).join("")}</section>`;
}

function approvalCard(item: ApprovalItem): string {
  const head = `<div class="ap-head">
<b>${esc(item.id)}</b>
<span class="pill">${esc(item.kind.replace("_", " "))}</span>
<span class="muted">${esc(item.payload_ref)} · drafted day ${item.created_tick}</span>
</div>`;
  const body = isPoSummary(item.summary)
    ? poSummaryBlock(item)
    : planSummaryBlock(item);
  return `<article class="approval" data-approval="${esc(item.id)}">${head}${body}
<div class="actions">
  <button class="ok" data-action="approve" data-item="${esc(item.id)}">approve</button>
  <button class="danger" data-action="reject" data-item="${esc(item.id)}">reject</button>
  ${modifyControls(item)}
</div></article>`;
}

function poSummaryBlock(item: ApprovalItem): string {
  if (!isPoSummary(item.summary)) return "";
  const s = item.summary;
  const flags = s.flags.length
    ? s.flags.map((f) => `<span class="flag">${esc(f)}</span>`).join(" ")
    : "<span class='muted'>none</span>";
  return `<dl class="kv">
<dt>SKU</dt><dd>${esc(s.sku_id)}</dd>
<dt>supplier</dt><dd>${esc(s.supplier_id)}</dd>
<dt>quantity</dt><dd>${s.qty}</dd>
<dt>need by</dt><dd>day ${s.need_by_day}</dd>
<dt>flags</dt><dd>${flags}</dd>
</dl>
${traceBlock("quantity reasoning", s.rationale)}
${traceBlock("supplier choice", s.supplier_rationale)}`;
}

function planSummaryBlock(item: ApprovalItem): string {
  if (isPoSummary(item.summary)) return "";
  const s = item.summary;
  return `<dl class="kv">
<dt>plan day</dt><dd>${s.day}</dd>
<dt>outlets</dt><dd>${s.outlets}</dd>
<dt>units</dt><dd>${s.units}</dd>
<dt>routes</dt><dd>${s.routes}</dd>
</dl>
${traceBlock("allocation weights", s.rationale)}
<button data-action="open-plan" data-plan="${esc(item.payload_ref)}">review plan detail</button>`;
}

function modifyControls(item: ApprovalItem): string {
  if (item.kind !== "purchase_order") return "";
  const current = isPoSummary(item.summary) ? item.summary.qty : 0;
  return `<span class="modify">
<input type="number" min="1" step="1" value="${current}"
       data-qty-for="${esc(item.id)}" aria-label="new quantity">
<button data-action="modify-po" data-item="${esc(item.id)}">modify qty</button>
</span>`;
}

function traceBlock(label: string, trace: ReasoningTrace | null): string {
  if (trace === null) return "";
  const flag = trace.flagged
    ? `<span class="flag">flagged dispersion ${trace.dispersion}</span>`
    : `<span class="muted">dispersion ${trace.dispersion}</span>`;
  const proposals = trace.proposals
    .map(
      (p) => `<tr><td>${esc(p.reasoner_id)}</td><td>${esc(JSON.stringify(p.value))}</td>
<td>${p.score === null ? "—" : esc(p.score)}</td><td>${esc(p.rationale)}</td></tr>`,
    )
    .join("");
  const failures = trace.failures.length
    ? `<p class="flag">failures: ${esc(trace.failures.join("; "))}</p>`
    : "";
  return `<details class="trace">
<summary>${esc(label)}: ${esc(JSON.stringify(trace.value))} ${flag}</summary>
<p class="muted">${esc(trace.synthesis_note)}</p>
<div class="scrollx"><table>
<thead><tr><th>reasoner</th><th>proposal</th><th>score</th><th>rationale</th></tr></thead>
<tbody>${proposals}</tbody></table></div>${failures}
</details>`;
}

// --- alerts ----------------------------------------------------------------

export function alertsView(view: ConsoleView): string {
  if (view.alerts.length === 0) {
    return `<section class="card"><h2>Alerts</h2><p class="muted">no live alerts</p></section>`;
  }
  const rows = view.alerts.map(alertRow).join("");
  return `<section class="card"><h2>Alerts · ${view.alerts.length} live</h2>
<div class="scrollx"><table class="alerts">
<thead><tr><th></th><th>kind</th><th>subject</th><th>priority</th><th>days</th>
<th>trigger</th><th>recommended action</th><th></th></tr></thead>
<tbody>${rows}</tbody></table></div></section>`;
}

function alertRow(a: Alert): string {
  const ackCell =
    a.state === "Open"
      ? `<button data-action="ack" data-alert="${esc(a.id)}">ack</button>`
      : `<span class="muted">${esc(a.state)}</span>`;
  return `<tr data-alert-row="${esc(a.id)}">
<td>${esc(a.id)}</td>
<td><span class="kind k-${esc(a.kind)}">${esc(a.kind)}</span></td>
<td>${esc(a.subject)}</td>
<td>${a.priority_score}</td>
<td>${a.days_to_impact}</td>
<td class="trace-cell">${esc(a.trigger_trace)}</td>
<td class="trace-cell">${esc(a.recommended_action)}</td>
<td>${ackCell}</td></tr>`;
}

// --- plan detail -----------------------------------------------------------

export function planView(view: ConsoleView): string {
  const plan = view.plan;
  if (plan === null) {
    return `<section class="card"><h2>Plan</h2>
<p class="muted">open a plan from the approval queue to review it</p></section>`;
  }
  const gateItem = view.approvals.find(
    (i) => i.payload_ref === plan.id && i.state === "Pending",
  );
  return `<section class="card">
<h2>${esc(plan.id)} · day ${plan.day} · ${esc(plan.state)}</h2>
<p class="muted">optimized ${fmtKm(plan.optimized_km)} vs baseline ${fmtKm(plan.baseline_km)}</p>
${traceBlock("allocation weights", plan.rationale)}
${allocationsTable(plan, gateItem?.id ?? null)}
${routesBlock(plan)}
${notesBlock(plan)}
</section>`;
}

function allocationsTable(plan: Plan, gateId: string | null): string {
  const editable = gateId !== null;
  const rows = plan.allocations
    .map((r) => {
      const units = editable
        ? `<input type="number" min="0" max="${r.units}" step="1" value="${r.units}"
             data-alloc data-plan="${esc(plan.id)}"
             data-outlet="${esc(r.outlet)}" data-sku="${esc(r.sku)}">`
        : String(r.units);
      return `<tr><td>${esc(r.outlet)}</td><td>${esc(r.sku)}</td><td>${units}</td></tr>`;
    })
    .join("");
  const submit = editable
    ? `<button data-action="modify-plan" data-item="${esc(gateId)}" data-plan="${esc(plan.id)}">
submit reduced allocations</button>
<span class="muted">only reductions are accepted; the engine re-validates</span>`
    : "";
  const unalloc = Object.entries(plan.unallocated)
    .map(([sku, u]) => `${esc(sku)}: ${u}`)
    .join(", ");
  return `<h3>Allocations</h3>
<div class="scrollx"><table>
<thead><tr><th>outlet</th><th>SKU</th><th>units</th></tr></thead>
<tbody>${rows}</tbody></table></div>
${submit}
${unalloc ? `<p class="muted">held at DC: ${unalloc}</p>` : ""}`;
}

function routesBlock(plan: Plan): string {
  const routes = plan.routes
    .map((r) => {
      const stops = r.stops
        .map((s, i) => `${esc(s)}@${r.etas[i] ?? "?"}m`)
        .join(" → ");
      const feas = r.feasible
        ? ""
        : `<span class="flag">infeasible: ${esc(r.infeasibility ?? "")}</span>`;
      return `<li><b>${esc(r.vehicle_id)}</b> (${esc(r.temp_class)}) depart ${r.depart_minute}m ·
${stops} · ${fmtKm(r.total_km)} · ${r.duration_minutes} min ${feas}</li>`;
    })
    .join("");
  return `<h3>Routes</h3><ul class="routes">${routes || "<li class='muted'>none</li>"}</ul>`;
}

function notesBlock(plan: Plan): string {
  const recs = plan.consolidation_recs
    .map((r) => `<li>${esc(r)}</li>`)
    .join("");
  const notes = plan.contingency_notes
    .map((n) => `<li>${esc(n)}</li>`)
    .join("");
  const skipped = plan.infeasible_outlets.length
    ? `<p class="flag">outlets skipped: ${esc(plan.infeasible_outlets.join(", "))}</p>`
    : "";
  return `${recs ? `<h3>Consolidation recommendations</h3><ul>${recs}</ul>` : ""}
${notes ? `<h3>Contingency notes</h3><ul>${notes}</ul>` : ""}
${skipped}`;
}

// --- shell -------------------------------------------------------------

const TABS: Array<[ConsoleView["tab"], string]> = [
  ["dashboard", "Dashboard"],
  ["approvals", "Approvals"],
  ["alerts", "Alerts"],
  ["plan", "Plan"],
];

export function tabsView(view: ConsoleView): string {
  const pending = view.approvals.filter((i) => i.state === "Pending").length;
  const label = (tab: string, text: string) =>
    tab === "approvals" && pending > 0 ? `${text} (${pending})` : text;
  return TABS.map(
    ([tab, text]) =>
      `<button class="tab${view.tab === tab ? " active" : ""}"
data-action="tab" data-tab="${tab}">${esc(label(tab, text))}</button>`,
  ).join("");
}

export function mainView(view: ConsoleView): string {
  switch (view.tab) {
    case "dashboard":
      return dashboardView(view);
    case "approvals":
      return approvalsView(view);
    case "alerts":
      return alertsView(view);
    case "plan":
      return planView(view);
  }
}
