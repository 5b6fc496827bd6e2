// Browser entry: wire the API client, event feed, and store together and
// re-render on every store change. All clicks are dispatched off data-action
// attributes so the views stay plain strings.

import { ApiClient } from "./api.js";
import { EventFeed } from "./sse.js";
import { ConsoleStore, invalidModification } from "./store.js";
import type { Tab } from "./store.js";
import type { AllocationRow } from "./types.js";
import { bannerView, mainView, tabsView } from "./views.js";

function engineBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery) return fromQuery.replace(/\/$/, "");
  return "http://127.0.0.1:8000";
}

const base = engineBase();
const store = new ConsoleStore(new ApiClient(base));
const feed = new EventFeed(
  base,
  (rec) => void store.handleRecord(rec),
  (status) => store.setConnection(status),
);

const elTabs = document.getElementById("tabs")!;
const elBanner = document.getElementById("banner")!;
const elView = document.getElementById("view")!;

function render(): void {
  const view = store.current;
  elTabs.innerHTML = tabsView(view);
  elBanner.innerHTML = bannerView(view);
  elView.innerHTML = mainView(view);
}

store.subscribe(render);

function readQty(itemId: string): number {
  const input = document.querySelector<HTMLInputElement>(
    `input[data-qty-for="${itemId}"]`,
  );
  return input ? Number(input.value) : NaN;
}

function readAllocations(planId: string): AllocationRow[] {
  const inputs = document.querySelectorAll<HTMLInputElement>(
    `input[data-alloc][data-plan="${planId}"]`,
  );
  return Array.from(inputs).map((el) => ({
    outlet: el.dataset.outlet ?? "",
    sku: el.dataset.sku ?? "",
    units: Number(el.value),
  }));
}

async function dispatch(el: HTMLElement): Promise<void> {
  const action = el.dataset.action;
  switch (action) {
    case "tab":
      store.setTab(el.dataset.tab as Tab);
      return;
    case "approve":
      await store.decide(el.dataset.item!, "approve");
      return;
    case "reject":
      await store.decide(el.dataset.item!, "reject");
      return;
    case "modify-po": {
      const itemId = el.dataset.item!;
      const mod = { qty: readQty(itemId) };
      // Catch obviously bad input before it leaves the page; anything the
      // engine itself refuses still comes back as a banner via decide().
      const problem = invalidModification("purchase_order", mod);
      if (problem !== null) {
        store.reportLocalError(problem);
        return;
      }
      await store.decide(itemId, "modify", mod);
      return;
    }
    case "modify-plan": {
      const itemId = el.dataset.item!;
      const mod = { allocations: readAllocations(el.dataset.plan!) };
      const problem = invalidModification("replenishment_plan", mod);
      if (problem !== null) {
        store.reportLocalError(problem);
        return;
      }
      await store.decide(itemId, "modify", mod);
      return;
    }
    case "ack":
      await store.ack(el.dataset.alert!);
      return;
    case "open-plan":
      await store.openPlan(el.dataset.plan!);
      return;
  }
}

document.addEventListener("click", (ev) => {
  const el = (ev.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (el) void dispatch(el);
});

render();
void store.refreshAll();
void feed.run();
