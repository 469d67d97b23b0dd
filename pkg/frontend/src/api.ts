// Typed client for the gateway's HTTP and event-stream contract.
// Every call goes through request(), so tests can assert the UI never
// invents a route outside the published surface.

import type {
  AgentEntry, DescribeInfo, GatewayEvent, LevelEntry, PollStarted,
  RequestType, SessionOpened, SessionSettings, ValueResult,
} from "./types.js";

export class GatewayError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class GatewayClient {
  constructor(private baseUrl: string) {}

  private async request<T>(method: string, path: string,
                           body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new GatewayError(0, `gateway unreachable: ${err}`);
    }
    const data = await response.json().catch(() => ({}));
    if (!response.ok) {
      const message = (data as { error?: string }).error ??
        `HTTP ${response.status}`;
      throw new GatewayError(response.status, message);
    }
    return data as T;
  }

  agents(): Promise<AgentEntry[]> {
    return this.request("GET", "/agents");
  }

  discover(timeoutMs = 2000): Promise<AgentEntry[]> {
    return this.request("POST", "/discover", { timeout_ms: timeoutMs });
  }

  openSession(agent: { host: string; tcp_port: number; udp_port?: number },
              settings?: Partial<SessionSettings>): Promise<SessionOpened> {
    return this.request("POST", "/sessions", {
      agent,
      transport: settings?.transport ?? "tcp",
      community: settings?.community,
      secure: settings?.secure ?? false,
    });
  }

  closeSession(sessionId: string): Promise<{ closed: boolean }> {
    return this.request("DELETE", `/sessions/${sessionId}`);
  }

  level(sessionId: string, oid: string): Promise<LevelEntry[]> {
    return this.request(
      "GET", `/sessions/${sessionId}/level?oid=${encodeURIComponent(oid)}`);
  }

  upper(sessionId: string, oid: string): Promise<LevelEntry[]> {
    return this.request(
      "GET", `/sessions/${sessionId}/upper?oid=${encodeURIComponent(oid)}`);
  }

  valueRequest(sessionId: string, type: Exclude<RequestType, "describe">,
               oid: string, value?: string): Promise<ValueResult> {
    return this.request("POST", `/sessions/${sessionId}/request`,
                        { type, oid, value });
  }

  describe(sessionId: string, oid: string): Promise<DescribeInfo> {
    return this.request("POST", `/sessions/${sessionId}/request`,
                        { type: "describe", oid });
  }

  updateSettings(sessionId: string, settings: Partial<SessionSettings>):
      Promise<SessionSettings> {
    return this.request("PUT", `/sessions/${sessionId}/settings`, settings);
  }

  startPoll(sessionId: string, oid: string,
            periodMs: number): Promise<PollStarted> {
    return this.request("POST", `/sessions/${sessionId}/polls`,
                        { oid, period_ms: periodMs });
  }

  setPollPeriod(pollId: string, periodMs: number): Promise<PollStarted> {
    return this.request("PUT", `/polls/${pollId}`, { period_ms: periodMs });
  }

  subscribeTrap(sessionId: string, oid: string, threshold: number,
                periodMs: number): Promise<{ subscribed: boolean }> {
    return this.request("POST", `/sessions/${sessionId}/traps`,
                        { oid, threshold, period_ms: periodMs });
  }

  logTail(count: number): Promise<{ lines: string[] }> {
    return this.request("GET", `/log?tail=${count}`);
  }

  events(): EventStream {
    return new EventStream(this.baseUrl);
  }
}

/** Server-sent-events reader over fetch streaming, with reconnect backoff.
 *  Works in browsers and under Node's fetch alike. */
export class EventStream {
  private handlers: Array<(event: GatewayEvent) => void> = [];
  private statusHandlers: Array<(connected: boolean) => void> = [];
  private controller: AbortController | null = null;
  private stopped = false;
  private backoffMs = 500;
  connected = false;

  constructor(private baseUrl: string) {}

  on(handler: (event: GatewayEvent) => void): this {
    this.handlers.push(handler);
    return this;
  }

  onStatus(handler: (connected: boolean) => void): this {
    this.statusHandlers.push(handler);
    return this;
  }

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
    this.setConnected(false);
  }

  private setConnected(value: boolean): void {
    if (this.connected !== value) {
      this.connected = value;
      for (const handler of this.statusHandlers) handler(value);
    }
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      this.controller = new AbortController();
      try {
        const response = await fetch(this.baseUrl + "/events",
                                     { signal: this.controller.signal });
        if (!response.ok || response.body === null) {
          throw new Error(`stream HTTP ${response.status}`);
        }
        this.setConnected(true);
        this.backoffMs = 500;
        await this.consume(response.body);
      } catch {
        // fall through to reconnect
      }
      this.setConnected(false);
      if (this.stopped) return;
      await new Promise((resolve) => setTimeout(resolve, this.backoffMs));
      this.backoffMs = Math.min(this.backoffMs * 2, 10_000);
    }
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      buffer += decoder.decode(value, { stream: true });
      let boundary;
      while ((boundary = buffer.indexOf("\n\n")) >= 0) {
        const block = buffer.slice(0, boundary);
        buffer = buffer.slice(boundary + 2);
        for (const line of block.split("\n")) {
          if (!line.startsWith("data: ")) continue; // comments/heartbeats
          try {
            const event = JSON.parse(line.slice(6)) as GatewayEvent;
            for (const handler of this.handlers) handler(event);
          } catch {
            // ignore unparseable frames
          }
        }
      }
    }
  }
}
