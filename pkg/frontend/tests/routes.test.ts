// Contract test: the client only ever issues routes from the gateway's
// published surface.  Every GatewayClient method runs against a recording
// fetch stub and its (method, path) must match the allowlist.

import { afterEach, describe, expect, it, vi } from "vitest";
import { GatewayClient } from "../src/api.js";

const ALLOWED: Array<[string, RegExp]> = [
  ["GET", /^\/agents$/],
  ["POST", /^\/discover$/],
  ["POST", /^\/sessions$/],
  ["DELETE", /^\/sessions\/[^/]+$/],
  ["GET", /^\/sessions\/[^/]+\/level\?oid=.+$/],
  ["GET", /^\/sessions\/[^/]+\/upper\?oid=.+$/],
  ["POST", /^\/sessions\/[^/]+\/request$/],
  ["PUT", /^\/sessions\/[^/]+\/settings$/],
  ["POST", /^\/sessions\/[^/]+\/polls$/],
  ["PUT", /^\/polls\/[^/]+$/],
  ["POST", /^\/sessions\/[^/]+\/traps$/],
  ["GET", /^\/events$/],
  ["GET", /^\/log\?tail=\d+$/],
];

function isAllowed(method: string, path: string): boolean {
  return ALLOWED.some(([m, re]) => m === method && re.test(path));
}

describe("gateway route allowlist", () => {
  const calls: Array<{ method: string; path: string }> = [];

  function stubFetch(payload: unknown = {}): void {
    vi.stubGlobal("fetch", async (url: string, init?: RequestInit) => {
      const path = url.replace("http://gw", "");
      calls.push({ method: init?.method ?? "GET", path });
      return new Response(JSON.stringify(payload), { status: 200 });
    });
  }

  afterEach(() => {
    vi.unstubAllGlobals();
    calls.length = 0;
  });

  it("every client method stays on the published surface", async () => {
    const client = new GatewayClient("http://gw");
    stubFetch([]);
    await client.agents();
    await client.discover(500);
    stubFetch({ session_id: "s", root_level: [] });
    await client.openSession({ host: "h", tcp_port: 1, udp_port: 2 });
    stubFetch({});
    await client.closeSession("sid");
    stubFetch([]);
    await client.level("sid", "1.3.6.1.2.1");
    await client.upper("sid", "mib-2");
    stubFetch({ oid: "x", value: "y" });
    await client.valueRequest("sid", "get", "sysDescr.0");
    await client.valueRequest("sid", "set", "sysName.0", "v");
    stubFetch({ name: "", syntax: "", access: "", status: "",
                description: "" });
    await client.describe("sid", "ifType");
    stubFetch({ transport: "tcp", secure: false, community: "public" });
    await client.updateSettings("sid", { secure: true });
    stubFetch({ poll_id: "p", period_ms: 500 });
    await client.startPoll("sid", "sysUpTime.0", 500);
    await client.setPollPeriod("p", 900);
    stubFetch({ subscribed: true });
    await client.subscribeTrap("sid", "1.3.6.1.2.1.4.3.0", 5, 1000);
    stubFetch({ lines: [] });
    await client.logTail(20);

    expect(calls.length).toBeGreaterThanOrEqual(13);
    for (const call of calls) {
      expect(isAllowed(call.method, call.path),
             `${call.method} ${call.path} is off-contract`).toBe(true);
    }
  });

  it("oid query values are url-encoded", async () => {
    const client = new GatewayClient("http://gw");
    stubFetch([]);
    await client.level("sid", "1.3.6.1 odd");
    expect(calls[0].path).toContain("oid=1.3.6.1%20odd");
  });

  it("gateway errors surface status and message", async () => {
    vi.stubGlobal("fetch", async () =>
      new Response(JSON.stringify({ error: "no such object" }),
                   { status: 404 }));
    const client = new GatewayClient("http://gw");
    await expect(client.level("sid", "bogus")).rejects.toMatchObject({
      status: 404,
      message: "no such object",
    });
  });
});
