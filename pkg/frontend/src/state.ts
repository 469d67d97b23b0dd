// The session view controller: all browser behaviour, no DOM.
// The renderer subscribes to onChange and redraws from the state snapshot;
// tests drive this class directly or through rendered controls.

import { GatewayClient, GatewayError } from "./api.js";
import type { EventStream } from "./api.js";
import {
  AgentEntry, DescribeInfo, GatewayEvent, LevelEntry, RequestType,
  SessionSettings, agentLabel,
} from "./types.js";

export interface RequestRow {
  type: string;
  oid: string;
  outcome: string;
}

export interface FeedRow {
  kind: "trap" | "poll_sample" | "directory";
  text: string;
  at: number;
}

export interface PollRow {
  id: string;
  oid: string;
  periodMs: number;
  lastValue: string;
  samples: Array<{ at: number; value: string }>;
}

const FEED_LIMIT = 200;
const SAMPLE_LIMIT = 60;

/** Serializable navigation snapshot; everything else rehydrates from the
 *  gateway on reload. */
export interface ViewSnapshot {
  sessionId: string | null;
  agent: string;
  levelPath: string;
  history: string[];
  settings: SessionSettings;
}

export class SessionView {
  agents: AgentEntry[] = [];
  sessionId: string | null = null;
  agent = "";
  levelPath = "";                 // path of the node whose children we show
  entries: LevelEntry[] = [];
  history: string[] = [];         // level paths behind the Up control
  selected: LevelEntry | null = null;
  settings: SessionSettings = { transport: "tcp", secure: false,
                                community: "public" };
  results: RequestRow[] = [];
  describePopup: DescribeInfo | null = null;
  feed: FeedRow[] = [];
  polls: PollRow[] = [];
  logLines: string[] = [];
  streamConnected = false;
  error: string | null = null;

  private listeners: Array<() => void> = [];
  private stream: EventStream | null = null;

  constructor(public client: GatewayClient,
              private storage?: Pick<Storage, "getItem" | "setItem">) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private changed(): void {
    this.persist();
    for (const listener of this.listeners) listener();
  }

  private fail(err: unknown): void {
    this.error = err instanceof Error ? err.message : String(err);
    this.changed();
  }

  private clearError(): void {
    this.error = null;
  }

  // -- live stream -------------------------------------------------------

  connectEvents(): void {
    if (this.stream) return;
    this.stream = this.client.events()
      .on((event) => this.applyEvent(event))
      .onStatus((connected) => {
        this.streamConnected = connected;
        this.changed();
      });
    this.stream.start();
  }

  disconnect(): void {
    this.stream?.stop();
    this.stream = null;
  }

  /** Tear down for tests/unmount: stop the stream and stop notifying. */
  dispose(): void {
    this.disconnect();
    this.listeners = [];
  }

  applyEvent(event: GatewayEvent): void {
    if (event.kind === "directory") {
      const label = agentLabel(event.entry);
      if (event.action === "add") {
        if (!this.agents.some((a) => agentLabel(a) === label)) {
          this.agents.push(event.entry);
        }
      } else {
        this.agents = this.agents.filter((a) => agentLabel(a) !== label);
      }
      this.pushFeed("directory", `${event.action} ${label}`);
    } else if (event.kind === "trap") {
      this.pushFeed("trap",
                    `${event.instance} = ${event.value} crossed ` +
                    `${event.threshold}`);
    } else {
      const poll = this.polls.find((p) => p.id === event.poll_id);
      if (poll) {
        poll.lastValue = event.value;
        poll.samples.push({ at: event.timestamp, value: event.value });
        if (poll.samples.length > SAMPLE_LIMIT) poll.samples.shift();
      }
      this.pushFeed("poll_sample", `${event.instance} = ${event.value}`);
    }
    this.changed();
  }

  private pushFeed(kind: FeedRow["kind"], text: string): void {
    this.feed.push({ kind, text, at: Date.now() });
    if (this.feed.length > FEED_LIMIT) this.feed.shift();
  }

  // -- discovery and sessions ---------------------------------------------

  async discover(): Promise<void> {
    this.clearError();
    try {
      await this.client.discover();
      this.agents = await this.client.agents();
      this.changed();
    } catch (err) {
      this.fail(err);
    }
  }

  async openSession(agent: AgentEntry): Promise<void> {
    this.clearError();
    try {
      const opened = await this.client.openSession(
        { host: agent.host, tcp_port: agent.tcp_port,
          udp_port: agent.udp_port },
        this.settings);
      this.sessionId = opened.session_id;
      this.agent = agentLabel(agent);
      this.levelPath = "";
      this.entries = opened.root_level;
      this.history = [];
      this.selected = null;
      this.changed();
    } catch (err) {
      this.fail(err);
    }
  }

  private get session(): string {
    if (this.sessionId === null) throw new GatewayError(0, "no session open");
    return this.sessionId;
  }

  // -- tree navigation ------------------------------------------------------
  // The displayed level is the child list of `levelPath`.  Descending into
  // an entry pushes the old path; the Up control asks the agent for the
  // upper level of a member of the current level, which is exactly the
  // inverse of the last descent.

  entryPath(entry: LevelEntry): string {
    return this.levelPath ? `${this.levelPath}.${entry.identifier}`
                          : String(entry.identifier);
  }

  select(entry: LevelEntry): void {
    this.selected = entry;
    this.changed();
  }

  async descend(entry: LevelEntry): Promise<void> {
    this.clearError();
    const target = this.entryPath(entry);
    try {
      const level = await this.client.level(this.session, target);
      this.history.push(this.levelPath);
      this.levelPath = target;
      this.entries = level;
      this.selected = null;
      this.changed();
    } catch (err) {
      this.fail(err);  // level unchanged on error
    }
  }

  async up(): Promise<void> {
    this.clearError();
    if (this.entries.length === 0 && this.history.length === 0) return;
    try {
      if (this.history.length === 0) {
        // at the root level the upper level of any member is the root
        // level again
        if (this.entries.length > 0) {
          this.entries = await this.client.upper(
            this.session, this.entryPath(this.entries[0]));
          this.changed();
        }
        return;
      }
      const member = this.selected ?? this.entries[0] ?? null;
      const level = member !== null
        ? await this.client.upper(this.session, this.entryPath(member))
        : await this.client.level(this.session,
                                  this.history[this.history.length - 1]);
      this.levelPath = this.history.pop() as string;
      this.entries = level;
      this.selected = null;
      this.changed();
    } catch (err) {
      this.fail(err);
    }
  }

  /** Jump straight to a typed path ("mib-2", "1.3.6.1.2.1"). */
  async jump(oid: string): Promise<void> {
    this.clearError();
    if (!oid.trim()) {
      this.error = "enter an OID to jump to";
      this.changed();
      return;
    }
    try {
      const level = await this.client.level(this.session, oid.trim());
      this.history.push(this.levelPath);
      this.levelPath = oid.trim();
      this.entries = level;
      this.selected = null;
      this.changed();
    } catch (err) {
      this.fail(err);
    }
  }

  // -- requests ---------------------------------------------------------------

  async submitRequest(type: RequestType, oid: string,
                      value?: string): Promise<void> {
    this.clearError();
    if (!oid.trim()) {
      this.error = "OID must not be empty";   // validated before any call
      this.changed();
      return;
    }
    try {
      if (type === "describe") {
        this.describePopup = await this.client.describe(this.session,
                                                        oid.trim());
        this.results.push({ type, oid: oid.trim(),
                            outcome: this.describePopup.name });
      } else {
        const result = await this.client.valueRequest(this.session, type,
                                                      oid.trim(), value);
        this.results.push({ type, oid: result.oid,
                            outcome: result.value });
      }
      this.changed();
    } catch (err) {
      if (err instanceof GatewayError) {
        this.results.push({ type, oid: oid.trim(),
                            outcome: `error: ${err.message}` });
      }
      this.fail(err);
    }
  }

  closeDescribe(): void {
    this.describePopup = null;
    this.changed();
  }

  // -- settings: apply to the NEXT request ---------------------------------------

  async applySettings(update: Partial<SessionSettings>): Promise<void> {
    this.clearError();
    try {
      if (this.sessionId !== null) {
        const applied = await this.client.updateSettings(this.session,
                                                         update);
        this.settings = applied;
      } else {
        this.settings = { ...this.settings, ...update };
      }
      this.changed();
    } catch (err) {
      this.fail(err);
    }
  }

  // -- polls and traps --------------------------------------------------------------

  async startPoll(oid: string, periodMs: number): Promise<void> {
    this.clearError();
    try {
      const started = await this.client.startPoll(this.session, oid,
                                                  periodMs);
      this.polls.push({ id: started.poll_id, oid,
                        periodMs: started.period_ms, lastValue: "",
                        samples: [] });
      this.changed();
    } catch (err) {
      this.fail(err);
    }
  }

  async changePollPeriod(pollId: string, periodMs: number): Promise<void> {
    this.clearError();
    try {
      const changed = await this.client.setPollPeriod(pollId, periodMs);
      const poll = this.polls.find((p) => p.id === pollId);
      if (poll) poll.periodMs = changed.period_ms;
      this.changed();
    } catch (err) {
      this.fail(err);
    }
  }

  async subscribeTrap(oid: string, threshold: number,
                      periodMs: number): Promise<void> {
    this.clearError();
    try {
      await this.client.subscribeTrap(this.session, oid, threshold,
                                      periodMs);
      this.pushFeed("directory", `watching ${oid} above ${threshold}`);
      this.changed();
    } catch (err) {
      this.fail(err);
    }
  }

  async refreshLog(count = 20): Promise<void> {
    try {
      this.logLines = (await this.client.logTail(count)).lines;
      this.changed();
    } catch (err) {
      this.fail(err);
    }
  }

  // -- reload equivalence -------------------------------------------------------------

  snapshot(): ViewSnapshot {
    return { sessionId: this.sessionId, agent: this.agent,
             levelPath: this.levelPath, history: [...this.history],
             settings: { ...this.settings } };
  }

  private persist(): void {
    this.storage?.setItem("nmlite-view", JSON.stringify(this.snapshot()));
  }

  /** Rebuild the view from a snapshot: everything displayed is re-fetched
   *  from the gateway, nothing is trusted from the stored copy but the
   *  session id and navigation position. */
  async hydrate(snapshot?: ViewSnapshot): Promise<boolean> {
    const source = snapshot ?? this.stored();
    if (!source || source.sessionId === null) return false;
    try {
      this.sessionId = source.sessionId;
      this.agent = source.agent;
      this.settings = source.settings;
      this.history = [...source.history];
      this.levelPath = source.levelPath;
      this.agents = await this.client.agents();
      this.entries = await this.client.level(
        this.session, this.levelPath === "" ? "iso" : this.levelPath);
      if (this.levelPath === "") {
        // the root level is the level that contains iso
        this.entries = await this.client.upper(this.session, "iso");
      }
      await this.refreshLog();
      this.changed();
      return true;
    } catch {
      this.sessionId = null;
      return false;
    }
  }

  private stored(): ViewSnapshot | null {
    const raw = this.storage?.getItem("nmlite-view");
    if (!raw) return null;
    try {
      return JSON.parse(raw) as ViewSnapshot;
    } catch {
      return null;
    }
  }
}
