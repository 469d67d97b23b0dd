// DOM rendering: a single-page layout with the agent list on the left,
// the lazy tree navigator in the middle, request form and settings on the
// right, and the live event/log strip along the bottom.  The whole page
// re-renders from the controller state on every change; at this scale
// that is simpler and fast enough.

import { SessionView } from "./state.js";
import type { LevelEntry, RequestType } from "./types.js";
import { agentLabel } from "./types.js";

export function mountApp(root: HTMLElement, view: SessionView): void {
  root.innerHTML = `
    <header>
      <h1>network manager</h1>
      <span id="stream-indicator" class="indicator"></span>
      <span id="error-banner" class="error"></span>
    </header>
    <main>
      <section id="agents-pane">
        <h2>agents</h2>
        <button id="discover-button">discover</button>
        <ul id="agent-list"></ul>
      </section>
      <section id="tree-pane">
        <h2>MIB tree <span id="level-path"></span></h2>
        <div class="jump">
          <input id="jump-input" placeholder="jump to OID (e.g. mib-2)" />
          <button id="jump-go">go</button>
          <button id="up-button">up</button>
        </div>
        <ul id="level-list"></ul>
      </section>
      <section id="request-pane">
        <h2>request</h2>
        <form id="request-form">
          <select id="request-type">
            <option value="get">get</option>
            <option value="getnext">get-next</option>
            <option value="set">set</option>
            <option value="describe">describe</option>
          </select>
          <input id="request-oid" placeholder="OID" />
          <input id="request-value" placeholder="value (set only)" />
          <button id="request-send" type="submit">send</button>
        </form>
        <ul id="result-feed"></ul>
        <h2>settings</h2>
        <label>transport
          <select id="settings-transport">
            <option value="tcp">tcp</option>
            <option value="udp">udp</option>
          </select>
        </label>
        <label><input type="checkbox" id="settings-secure" /> sign + encrypt</label>
        <label>community <input id="settings-community" /></label>
        <h2>polling</h2>
        <input id="poll-oid" placeholder="instance OID" />
        <input id="poll-period" type="number" value="1000" />
        <button id="poll-start">start poll</button>
        <ul id="poll-list"></ul>
        <h2>traps</h2>
        <input id="trap-oid" placeholder="instance OID" />
        <input id="trap-threshold" type="number" value="100" />
        <input id="trap-period" type="number" value="1000" />
        <button id="trap-subscribe">watch</button>
      </section>
    </main>
    <footer>
      <section>
        <h2>events</h2>
        <ul id="event-feed"></ul>
      </section>
      <section>
        <h2>log</h2>
        <button id="log-refresh">refresh</button>
        <pre id="log-tail"></pre>
      </section>
    </footer>
    <div id="describe-popup" class="popup" hidden></div>
  `;

  const el = <T extends HTMLElement>(id: string): T => {
    const found = root.querySelector<T>(`#${id}`);
    if (!found) throw new Error(`missing element #${id}`);
    return found;
  };

  el<HTMLButtonElement>("discover-button").addEventListener("click", () => {
    void view.discover();
  });

  el<HTMLButtonElement>("jump-go").addEventListener("click", () => {
    void view.jump(el<HTMLInputElement>("jump-input").value);
  });
  el<HTMLButtonElement>("up-button").addEventListener("click", () => {
    void view.up();
  });

  el<HTMLFormElement>("request-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const type = el<HTMLSelectElement>("request-type").value as RequestType;
    const oid = el<HTMLInputElement>("request-oid").value;
    const value = el<HTMLInputElement>("request-value").value;
    void view.submitRequest(type, oid, type === "set" ? value : undefined);
  });

  el<HTMLSelectElement>("settings-transport").addEventListener("change",
    (event) => {
      const transport = (event.target as HTMLSelectElement).value;
      void view.applySettings({ transport: transport as "tcp" | "udp" });
    });
  el<HTMLInputElement>("settings-secure").addEventListener("change",
    (event) => {
      void view.applySettings(
        { secure: (event.target as HTMLInputElement).checked });
    });
  el<HTMLInputElement>("settings-community").addEventListener("change",
    (event) => {
      void view.applySettings(
        { community: (event.target as HTMLInputElement).value });
    });

  el<HTMLButtonElement>("poll-start").addEventListener("click", () => {
    void view.startPoll(el<HTMLInputElement>("poll-oid").value,
                        Number(el<HTMLInputElement>("poll-period").value));
  });

  el<HTMLButtonElement>("trap-subscribe").addEventListener("click", () => {
    void view.subscribeTrap(
      el<HTMLInputElement>("trap-oid").value,
      Number(el<HTMLInputElement>("trap-threshold").value),
      Number(el<HTMLInputElement>("trap-period").value));
  });

  el<HTMLButtonElement>("log-refresh").addEventListener("click", () => {
    void view.refreshLog();
  });

  view.onChange(() => render(root, view));
  render(root, view);
}

function render(root: HTMLElement, view: SessionView): void {
  const el = <T extends HTMLElement>(id: string): T =>
    root.querySelector<T>(`#${id}`) as T;

  el("stream-indicator").textContent =
    view.streamConnected ? "live" : "disconnected";
  el("stream-indicator").className =
    `indicator ${view.streamConnected ? "on" : "off"}`;
  el("error-banner").textContent = view.error ?? "";

  const agentList = el<HTMLUListElement>("agent-list");
  agentList.innerHTML = "";
  for (const agent of view.agents) {
    const item = document.createElement("li");
    item.className = "agent-row" +
      (agentLabel(agent) === view.agent ? " active" : "");
    item.textContent = agentLabel(agent);
    item.addEventListener("click", () => void view.openSession(agent));
    agentList.appendChild(item);
  }

  el("level-path").textContent =
    view.levelPath ? `(children of ${view.levelPath})` : "(root level)";
  const levelList = el<HTMLUListElement>("level-list");
  levelList.innerHTML = "";
  for (const entry of view.entries) {
    levelList.appendChild(levelRow(view, entry));
  }

  const results = el<HTMLUListElement>("result-feed");
  results.innerHTML = "";
  for (const row of view.results.slice(-12).reverse()) {
    const item = document.createElement("li");
    item.textContent = `${row.type} ${row.oid} -> ${row.outcome}`;
    results.appendChild(item);
  }

  (el("settings-transport") as HTMLSelectElement).value =
    view.settings.transport;
  (el("settings-secure") as HTMLInputElement).checked = view.settings.secure;
  const community = el("settings-community") as HTMLInputElement;
  if (community !== document.activeElement) {
    community.value = view.settings.community;
  }

  const pollList = el<HTMLUListElement>("poll-list");
  pollList.innerHTML = "";
  for (const poll of view.polls) {
    const item = document.createElement("li");
    item.className = "poll-row";
    item.dataset.pollId = poll.id;
    const spark = poll.samples.slice(-12).map((s) => s.value).join(" ");
    item.innerHTML =
      `<span class="poll-oid">${poll.oid}</span> every ` +
      `<input class="poll-period" type="number" value="${poll.periodMs}" />` +
      ` ms <button class="poll-apply">apply</button>` +
      `<span class="poll-last">${poll.lastValue}</span>` +
      `<span class="poll-spark">${spark}</span>`;
    const apply = item.querySelector<HTMLButtonElement>(".poll-apply");
    const input = item.querySelector<HTMLInputElement>(".poll-period");
    apply?.addEventListener("click", () => {
      void view.changePollPeriod(poll.id, Number(input?.value ?? 0));
    });
    pollList.appendChild(item);
  }

  const feed = el<HTMLUListElement>("event-feed");
  feed.innerHTML = "";
  for (const row of view.feed.slice(-15).reverse()) {
    const item = document.createElement("li");
    item.className = `feed-${row.kind}`;
    item.textContent = row.text;
    feed.appendChild(item);
  }

  el("log-tail").textContent = view.logLines.join("\n");

  const popup = el<HTMLDivElement>("describe-popup");
  if (view.describePopup) {
    const info = view.describePopup;
    popup.hidden = false;
    popup.innerHTML = `
      <div class="popup-body">
        <h3>object description</h3>
        <dl>
          <dt>name</dt><dd id="describe-name">${escapeHtml(info.name)}</dd>
          <dt>syntax</dt><dd id="describe-syntax">${escapeHtml(info.syntax)}</dd>
          <dt>access</dt><dd id="describe-access">${escapeHtml(info.access)}</dd>
          <dt>status</dt><dd id="describe-status">${escapeHtml(info.status)}</dd>
          <dt>description</dt>
          <dd id="describe-description">${escapeHtml(info.description)}</dd>
        </dl>
        <button id="describe-close">close</button>
      </div>`;
    popup.querySelector("#describe-close")?.addEventListener(
      "click", () => view.closeDescribe());
  } else {
    popup.hidden = true;
    popup.innerHTML = "";
  }
}

function levelRow(view: SessionView, entry: LevelEntry): HTMLLIElement {
  const item = document.createElement("li");
  item.className = "level-row" +
    (view.selected === entry ? " selected" : "");
  const ident = document.createElement("span");
  ident.className = "level-id";
  ident.textContent = String(entry.identifier);
  const name = document.createElement("span");
  name.className = "level-name";
  name.textContent = entry.name;
  item.append(ident, name);
  item.addEventListener("click", () => view.select(entry));
  item.addEventListener("dblclick", () => void view.descend(entry));
  const open = document.createElement("button");
  open.className = "level-open";
  open.textContent = ">";
  open.addEventListener("click", (event) => {
    event.stopPropagation();
    void view.descend(entry);
  });
  item.appendChild(open);
  return item;
}

function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;")
             .replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}
