// Gesture handling as a pure state machine: pointer and key inputs yield
// actions (messages to send, menus to open, selection changes) without
// touching the DOM, so every branch is unit-testable.

import type { GraphNode, MenuEntry, Primitive, SceneMessage } from "./protocol.js";
import {
  browserKeyName,
  doubleClickEvent,
  dragEvent,
  edgeDragEvent,
  editEvent,
  keyEvent,
  menuEvent,
} from "./protocol.js";

export interface OpenMenu {
  x: number;
  y: number;
  target: string;
  entries: MenuEntry[];
}

export interface ClientState {
  scene: SceneMessage | null;
  selection: string | null;
  menu: OpenMenu | null;
  drag: { node: string; startX: number; startY: number; origX: number; origY: number; moved: boolean } | null;
  edgeDrag: { source: string; x: number; y: number } | null;
  panX: number;
  panY: number;
  zoom: number;
}

export function initialState(): ClientState {
  return {
    scene: null, selection: null, menu: null, drag: null, edgeDrag: null,
    panX: 0, panY: 0, zoom: 1,
  };
}

export type Action =
  | { act: "send"; data: string }
  | { act: "render" }
  | { act: "focus-editor"; target: string; text: string };

export function applyScene(state: ClientState, scene: SceneMessage): Action[] {
  state.scene = scene;
  state.menu = null;
  if (state.selection !== null && !findSelectable(scene, state.selection)) {
    state.selection = null; // stale selection from an older revision
  }
  return [{ act: "render" }];
}

function findSelectable(scene: SceneMessage, concrete: string): Primitive | null {
  for (const p of scene.primitives) {
    if (p.selectable && p.concrete === concrete) return p;
  }
  return null;
}

export function hitPrimitive(scene: SceneMessage, x: number, y: number): Primitive | null {
  for (let i = scene.primitives.length - 1; i >= 0; i--) {
    const p = scene.primitives[i];
    if (p.selectable && x >= p.x && x <= p.x + p.w && y >= p.y && y <= p.y + p.h) return p;
  }
  return null;
}

export function nodeAt(scene: SceneMessage, x: number, y: number): GraphNode | null {
  for (const g of scene.graphs) {
    for (const n of g.nodes) {
      if (x >= n.x && x <= n.x + n.w && y >= n.y && y <= n.y + n.h) return n;
    }
  }
  return null;
}

export function toScene(state: ClientState, clientX: number, clientY: number): [number, number] {
  return [(clientX - state.panX) / state.zoom, (clientY - state.panY) / state.zoom];
}

// -- pointer -----------------------------------------------------------------

export function pointerDown(state: ClientState, x: number, y: number, shift: boolean): Action[] {
  if (state.scene === null) return [];
  if (state.menu !== null) {
    state.menu = null; // clicking outside a menu closes it
  }
  const node = nodeAt(state.scene, x, y);
  const prim = hitPrimitive(state.scene, x, y);
  state.selection = prim?.concrete ?? null;
  if (node !== null && shift) {
    state.edgeDrag = { source: node.node_id, x, y };
    return [{ act: "render" }];
  }
  if (node !== null) {
    state.drag = { node: node.node_id, startX: x, startY: y, origX: node.x, origY: node.y, moved: false };
    return [{ act: "render" }];
  }
  return [{ act: "render" }];
}

export function pointerMove(state: ClientState, x: number, y: number, revision: number): Action[] {
  if (state.drag !== null) {
    const d = state.drag;
    if (Math.abs(x - d.startX) + Math.abs(y - d.startY) > 2) d.moved = true;
    if (!d.moved) return [];
    return [{ act: "send", data: dragEvent(revision, d.node, d.origX + x - d.startX, d.origY + y - d.startY) }];
  }
  if (state.edgeDrag !== null) {
    state.edgeDrag.x = x;
    state.edgeDrag.y = y;
    return [{ act: "render" }];
  }
  return [];
}

export function pointerUp(state: ClientState, x: number, y: number, revision: number): Action[] {
  if (state.drag !== null) {
    const d = state.drag;
    state.drag = null;
    if (d.moved) {
      // final position is authoritative
      return [{ act: "send", data: dragEvent(revision, d.node, d.origX + x - d.startX, d.origY + y - d.startY) }];
    }
    return clickThrough(state, x, y);
  }
  if (state.edgeDrag !== null) {
    const source = state.edgeDrag.source;
    state.edgeDrag = null;
    const target = state.scene ? nodeAt(state.scene, x, y) : null;
    if (target !== null && target.node_id !== source) {
      return [{ act: "send", data: edgeDragEvent(revision, source, target.node_id) }, { act: "render" }];
    }
    return [{ act: "render" }];
  }
  return clickThrough(state, x, y);
}

function clickThrough(state: ClientState, x: number, y: number): Action[] {
  if (state.scene === null) return [];
  const prim = hitPrimitive(state.scene, x, y);
  if (prim?.menu && prim.menu.length > 0 && prim.concrete) {
    state.menu = { x: prim.x, y: prim.y + prim.h, target: prim.concrete, entries: prim.menu };
    return [{ act: "render" }];
  }
  if (prim?.editable && prim.concrete) {
    return [{ act: "focus-editor", target: prim.concrete, text: prim.text ?? "" }, { act: "render" }];
  }
  return [{ act: "render" }];
}

export function doubleClick(state: ClientState, x: number, y: number, revision: number): Action[] {
  if (state.scene === null) return [];
  const prim = hitPrimitive(state.scene, x, y);
  if (prim?.concrete) {
    return [{ act: "send", data: doubleClickEvent(revision, prim.concrete) }];
  }
  return [];
}

export function chooseMenuEntry(state: ClientState, index: number, revision: number): Action[] {
  if (state.menu === null || index < 0 || index >= state.menu.entries.length) return [];
  const { target, entries } = state.menu;
  state.menu = null;
  return [{ act: "send", data: menuEvent(revision, target, entries[index]) }, { act: "render" }];
}

// -- keyboard ------------------------------------------------------------------

export function keyDown(state: ClientState, domKey: string, revision: number): Action[] {
  if (domKey === "Escape") {
    state.selection = null;
    state.menu = null;
    return [{ act: "render" }];
  }
  const key = browserKeyName(domKey);
  if (key === null) return [];
  const selected = state.selection;
  if (selected !== null && state.scene !== null && key.length === 1) {
    const prim = findSelectable(state.scene, selected);
    if (prim?.editable) {
      const text = (prim.text ?? "") + key;
      return [{ act: "send", data: editEvent(revision, selected, text) }];
    }
  }
  return [{ act: "send", data: keyEvent(revision, selected, key) }];
}

export function editTo(state: ClientState, target: string, text: string, revision: number): Action[] {
  void state;
  return [{ act: "send", data: editEvent(revision, target, text) }];
}

// -- view (never sent to the server) -------------------------------------------

const MIN_ZOOM = 0.25;
const MAX_ZOOM = 4;

export function wheel(
  state: ClientState,
  dx: number,
  dy: number,
  zooming: boolean,
  atX: number,
  atY: number,
): Action[] {
  if (zooming) {
    const factor = dy < 0 ? 1.1 : 1 / 1.1;
    const next = Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, state.zoom * factor));
    // keep the scene point under the cursor fixed
    const [sx, sy] = toScene(state, atX, atY);
    state.zoom = next;
    state.panX = atX - sx * next;
    state.panY = atY - sy * next;
  } else {
    state.panX -= dx;
    state.panY -= dy;
  }
  return [{ act: "render" }];
}
