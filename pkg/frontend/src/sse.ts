// Server-sent-events client for /api/events, built on fetch streaming so the
// same code runs in the browser and under Node for tests. The engine frames
// each audit record as `id: <seq>` / `event: audit` / `data: <json>` and
// sends `: keepalive` comments while idle.

import type { AuditRecord } from "./types.js";

export interface SseEvent {
  id: string | null;
  event: string | null;
  data: string;
}

/**
 * Incremental text/event-stream parser. Feed it chunks as they arrive —
 * they may split anywhere, including mid-line — and it fires the callback
 * once per complete (blank-line-terminated) event. Comment lines and empty
 * events are dropped per the SSE spec; the last seen `id:` sticks across
 * events that do not carry their own.
 */
export function createSseParser(onEvent: (ev: SseEvent) => void) {
  let buf = "";
  let lastId: string | null = null;
  let eventName: string | null = null;
  let data: string[] = [];

  function dispatch() {
    if (data.length > 0) {
      onEvent({ id: lastId, event: eventName, data: data.join("\n") });
    }
    eventName = null;
    data = [];
  }

  function line(raw: string) {
    if (raw === "") {
      dispatch();
      return;
    }
    if (raw.startsWith(":")) return; // comment / keepalive
    const colon = raw.indexOf(":");
    const field = colon < 0 ? raw : raw.slice(0, colon);
    let value = colon < 0 ? "" : raw.slice(colon + 1);
    if (value.startsWith(" ")) value = value.slice(1);
    if (field === "id") lastId = value;
    else if (field === "event") eventName = value;
    else if (field === "data") data.push(value);
    // other fields (retry etc.) are ignored
  }

  return {
    feed(chunk: string) {
      buf += chunk;
      let nl: number;
      while ((nl = buf.indexOf("\n")) >= 0) {
        let l = buf.slice(0, nl);
        buf = buf.slice(nl + 1);
        if (l.endsWith("\r")) l = l.slice(0, -1);
        line(l);
      }
    },
  };
}

export type FeedStatus = "connecting" | "live" | "retrying" | "stopped";

/**
 * Audit-record feed with resume: tracks the last event id and reconnects
 * with `?since=` so no record is missed and replays are deduplicated by the
 * store's seq guard.
 */
export class EventFeed {
  lastEventId = 0;
  private stopped = false;
  private controller: AbortController | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly onRecord: (rec: AuditRecord) => void,
    private readonly onStatus: (status: FeedStatus) => void = () => {},
    private readonly retryMs = 1000,
  ) {}

  /** Runs until stop(); resolves only after a stop. */
  async run(): Promise<void> {
    while (!this.stopped) {
      this.onStatus("connecting");
      try {
        await this.consumeOnce();
      } catch {
        // fall through to retry
      }
      if (this.stopped) break;
      this.onStatus("retrying");
      await sleep(this.retryMs);
    }
    this.onStatus("stopped");
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  private async consumeOnce(): Promise<void> {
    this.controller = new AbortController();
    const url = `${this.baseUrl}/api/events?since=${this.lastEventId}`;
    const res = await fetch(url, {
      headers: { Accept: "text/event-stream" },
      signal: this.controller.signal,
    });
    if (!res.ok || !res.body) throw new Error(`event stream: ${res.status}`);
    this.onStatus("live");

    const parser = createSseParser((ev) => {
      if (ev.event !== null && ev.event !== "audit") return;
      let record: AuditRecord;
      try {
        record = JSON.parse(ev.data) as AuditRecord;
      } catch {
        return;
      }
      if (ev.id && /^\d+$/.test(ev.id)) {
        this.lastEventId = Math.max(this.lastEventId, parseInt(ev.id, 10));
      }
      this.onRecord(record);
    });

    const reader = res.body.getReader();
    const decoder = new TextDecoder("utf-8");
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      parser.feed(decoder.decode(value, { stream: true }));
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
