// Typed client for the engine's HTTP API. Every mutation the console can
// perform goes through decide() or ack() here — there is no other write path.

import type {
  Alert,
  ApprovalItem,
  AuditRecord,
  Kpis,
  Modification,
  Plan,
  StateView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  async state(): Promise<StateView> {
    return this.request<StateView>("/api/state");
  }

  async kpis(): Promise<Kpis> {
    return this.request<Kpis>("/api/kpis");
  }

  async approvals(): Promise<ApprovalItem[]> {
    const body = await this.request<{ approvals: ApprovalItem[] }>("/api/approvals");
    return body.approvals;
  }

  async alerts(): Promise<Alert[]> {
    const body = await this.request<{ alerts: Alert[] }>("/api/alerts");
    return body.alerts;
  }

  async plan(id: string): Promise<Plan> {
    return this.request<Plan>(`/api/plans/${encodeURIComponent(id)}`);
  }

  async decide(
    itemId: string,
    decision: "approve" | "reject" | "modify",
    opts: { decider?: string; modification?: Modification } = {},
  ): Promise<ApprovalItem> {
    return this.request<ApprovalItem>(
      `/api/approvals/${encodeURIComponent(itemId)}/decision`,
      {
        decision,
        decider: opts.decider ?? "console",
        modification: opts.modification ?? null,
      },
    );
  }

  async ack(alertId: string, actor = "console"): Promise<Alert> {
    return this.request<Alert>(
      `/api/alerts/${encodeURIComponent(alertId)}/ack`,
      { actor },
    );
  }

  private async request<T>(path: string, body?: unknown): Promise<T> {
    let res: Response;
    try {
      res = await fetch(this.baseUrl + path, body === undefined
        ? undefined
        : {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
          });
    } catch {
      throw new ApiError(0, `cannot reach engine at ${this.baseUrl}`);
    }
    const parsed = await res.json().catch(() => null);
    if (!res.ok) {
      const detail =
        parsed && typeof (parsed as { error?: unknown }).error === "string"
          ? (parsed as { error: string }).error
          : `${res.status} ${res.statusText}`;
      throw new ApiError(res.status, detail);
    }
    return parsed as T;
  }
}

export type { AuditRecord };
