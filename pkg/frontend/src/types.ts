// Shapes exchanged with the gateway and shared across the UI.

export interface AgentEntry {
  host: string;
  tcp_port: number;
  udp_port: number;
  first_seen: number;
  last_seen: number;
}

export interface LevelEntry {
  name: string;
  identifier: number;
}

export interface SessionOpened {
  session_id: string;
  root_level: LevelEntry[];
}

export interface ValueResult {
  oid: string;
  value: string;
}

export interface DescribeInfo {
  name: string;
  syntax: string;
  access: string;
  status: string;
  description: string;
}

export interface SessionSettings {
  transport: "tcp" | "udp";
  secure: boolean;
  community: string;
}

export interface PollStarted {
  poll_id: string;
  period_ms: number;
}

export type RequestType = "get" | "getnext" | "set" | "describe";

// events arriving on the /events stream
export interface DirectoryEvent {
  kind: "directory";
  action: "add" | "remove";
  entry: AgentEntry;
}

export interface TrapEventMsg {
  kind: "trap";
  instance: string;
  value: string;
  threshold: string;
  timestamp_ms: number;
}

export interface PollSampleEvent {
  kind: "poll_sample";
  poll_id: string;
  session_id: string;
  timestamp: number;
  instance: string;
  value: string;
}

export type GatewayEvent = DirectoryEvent | TrapEventMsg | PollSampleEvent;

export function agentLabel(entry: AgentEntry): string {
  return `${entry.host}:${entry.tcp_port}`;
}
