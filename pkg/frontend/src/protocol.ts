// Wire protocol v1: message shapes pushed by the editor server and the
// event envelopes a client sends back. Identities travel as opaque
// comma-joined strings and menu messages as opaque term objects.

export interface MenuEntry {
  label: string;
  message: unknown;
}

export interface Primitive {
  kind: "text" | "rect" | "ellipse" | "line" | "polygon" | "image";
  x: number;
  y: number;
  w: number;
  h: number;
  text?: string;
  size?: number;
  points?: number[][];
  color?: string;
  filled?: boolean;
  stroke?: number;
  concrete?: string;
  abstract?: string;
  menu?: MenuEntry[];
  selectable?: boolean;
  editable?: boolean;
  hole_clause?: string;
  node_id?: string;
  path?: string;
}

export interface GraphNode {
  node_id: string;
  node_type: string;
  abstract: unknown;
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface GraphInfo {
  edge_types: string[][];
  nodes: GraphNode[];
}

export interface SceneMessage {
  v: 1;
  type: "scene";
  revision: number;
  width: number;
  height: number;
  primitives: Primitive[];
  graphs: GraphInfo[];
}

export interface DiagnosticMessage {
  v: 1;
  type: "diagnostic";
  text: string;
  path?: string;
}

export interface MenuRequestMessage {
  v: 1;
  type: "menu-request";
  revision: number;
  choices: MenuEntry[];
}

export type ServerMessage = SceneMessage | DiagnosticMessage | MenuRequestMessage;

export function parseServerMessage(data: string): ServerMessage {
  const msg = JSON.parse(data) as { v?: number; type?: string };
  if (msg.v !== 1) throw new Error(`unsupported protocol version ${msg.v}`);
  if (msg.type === "scene" || msg.type === "diagnostic" || msg.type === "menu-request") {
    return msg as ServerMessage;
  }
  throw new Error(`unknown server message ${msg.type}`);
}

// ---------------------------------------------------------------------------
// Client -> server

export interface EventPayload {
  kind: "key" | "dblclick" | "menu" | "drag" | "edit" | "edge-drag";
  selected?: string;
  key?: string;
  target?: string;
  message?: unknown;
  label?: string;
  x?: number;
  y?: number;
  text?: string;
  node?: string;
  source?: string;
}

export interface EventEnvelope {
  v: 1;
  type: "event";
  revision: number;
  event: EventPayload;
}

export function hello(): string {
  return JSON.stringify({ v: 1, type: "hello", version: 1 });
}

export function eventEnvelope(revision: number, event: EventPayload): string {
  return JSON.stringify({ v: 1, type: "event", revision, event });
}

export function keyEvent(revision: number, selected: string | null, key: string): string {
  const event: EventPayload = { kind: "key", key };
  if (selected !== null) event.selected = selected;
  return eventEnvelope(revision, event);
}

export function doubleClickEvent(revision: number, target: string): string {
  return eventEnvelope(revision, { kind: "dblclick", target });
}

export function menuEvent(revision: number, target: string, entry: MenuEntry): string {
  return eventEnvelope(revision, {
    kind: "menu",
    target,
    message: entry.message,
    label: entry.label,
  });
}

export function dragEvent(revision: number, node: string, x: number, y: number): string {
  return eventEnvelope(revision, { kind: "drag", node, x, y });
}

export function editEvent(revision: number, target: string, text: string): string {
  return eventEnvelope(revision, { kind: "edit", target, text });
}

export function edgeDragEvent(revision: number, source: string, target: string): string {
  return eventEnvelope(revision, { kind: "edge-drag", source, target });
}

export function menuReply(label: string): string {
  return JSON.stringify({ v: 1, type: "menu-reply", label });
}

// Named keys understood by the engine; everything else must be one char.
export const NAMED_KEYS = ["up", "down", "left", "right", "enter", "backspace"] as const;

export function browserKeyName(domKey: string): string | null {
  const named: Record<string, string> = {
    ArrowUp: "up",
    ArrowDown: "down",
    ArrowLeft: "left",
    ArrowRight: "right",
    Enter: "enter",
    Backspace: "backspace",
  };
  if (domKey in named) return named[domKey];
  if (domKey.length === 1) return domKey;
  return null;
}
