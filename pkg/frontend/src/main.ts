// Boot: wire the gateway client, the session view and the renderer, then
// connect the live event stream.  The gateway base URL comes from the
// page's own origin unless ?gateway= overrides it.

import { GatewayClient } from "./api.js";
import { mountApp } from "./render.js";
import { SessionView } from "./state.js";

export function bootstrap(root: HTMLElement, baseUrl: string,
                          storage?: Storage): SessionView {
  const client = new GatewayClient(baseUrl);
  const view = new SessionView(client, storage);
  mountApp(root, view);
  view.connectEvents();
  void view.hydrate().then(async (restored) => {
    if (!restored) await view.discover();
    await view.refreshLog();
  });
  return view;
}

declare global {
  interface Window { nmView?: SessionView }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("gateway") ?? window.location.origin;
  window.nmView = bootstrap(document.getElementById("app") as HTMLElement,
                            base, window.sessionStorage);
}
