// Wires the gesture machine and the draw-op renderer to a live socket,
// a canvas, and small DOM overlays for menus, the text editor and
// diagnostics.

import { runOps, sceneToOps } from "./draw.js";
import {
  applyScene,
  chooseMenuEntry,
  doubleClick,
  editTo,
  initialState,
  keyDown,
  pointerDown,
  pointerMove,
  pointerUp,
  toScene,
  wheel,
  type Action,
  type ClientState,
} from "./interact.js";
import { hello, menuReply, parseServerMessage, type MenuEntry } from "./protocol.js";

const DRAG_THROTTLE_MS = 50;

export class Editor {
  state: ClientState = initialState();
  revision = 0;
  private lastDragSent = 0;
  private pendingDrag: string | null = null;
  private pendingMenu: MenuEntry[] | null = null;

  constructor(
    private canvas: HTMLCanvasElement,
    private socket: WebSocket,
    private menuHost: HTMLElement,
    private editorHost: HTMLInputElement,
    private statusHost: HTMLElement,
  ) {
    socket.addEventListener("open", () => socket.send(hello()));
    socket.addEventListener("message", (ev) => this.onMessage(String(ev.data)));
    socket.addEventListener("close", () => this.status("connection closed"));

    canvas.addEventListener("pointerdown", (e) => {
      canvas.setPointerCapture(e.pointerId);
      this.run(pointerDown(this.state, ...this.at(e), e.shiftKey));
    });
    canvas.addEventListener("pointermove", (e) => {
      const now = performance.now();
      const actions = pointerMove(this.state, ...this.at(e), this.revision);
      // throttle the drag stream; the final position goes out on pointerup
      for (const a of actions) {
        if (a.act === "send") {
          this.pendingDrag = a.data;
          if (now - this.lastDragSent >= DRAG_THROTTLE_MS) {
            this.lastDragSent = now;
            this.socket.send(a.data);
            this.pendingDrag = null;
          }
        } else {
          this.run([a]);
        }
      }
    });
    canvas.addEventListener("pointerup", (e) => {
      if (this.pendingDrag !== null) {
        this.socket.send(this.pendingDrag);
        this.pendingDrag = null;
      }
      this.run(pointerUp(this.state, ...this.at(e), this.revision));
    });
    canvas.addEventListener("dblclick", (e) => {
      this.run(doubleClick(this.state, ...this.at(e), this.revision));
    });
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      const rect = canvas.getBoundingClientRect();
      this.run(wheel(this.state, e.deltaX, e.deltaY, e.ctrlKey,
                     e.clientX - rect.left, e.clientY - rect.top));
    }, { passive: false });
    window.addEventListener("keydown", (e) => {
      if (document.activeElement === this.editorHost) return;
      const actions = keyDown(this.state, e.key, this.revision);
      if (actions.length > 0) e.preventDefault();
      this.run(actions);
    });
    this.editorHost.addEventListener("input", () => {
      const target = this.editorHost.dataset.target;
      if (target) this.run(editTo(this.state, target, this.editorHost.value, this.revision));
    });
    this.editorHost.addEventListener("keydown", (e) => {
      if (e.key === "Enter" || e.key === "Escape") this.editorHost.blur();
      e.stopPropagation();
    });
    this.editorHost.addEventListener("blur", () => {
      this.editorHost.classList.add("hidden");
    });
  }

  private at(e: MouseEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    return toScene(this.state, e.clientX - rect.left, e.clientY - rect.top);
  }

  private onMessage(data: string) {
    const msg = parseServerMessage(data);
    if (msg.type === "scene") {
      this.revision = msg.revision;
      this.pendingMenu = null;
      this.run(applyScene(this.state, msg));
      this.status(`revision ${msg.revision}`);
    } else if (msg.type === "diagnostic") {
      this.status(msg.text);
    } else {
      this.pendingMenu = msg.choices;
      this.showMenu(msg.choices.map((c) => c.label), (i) => {
        this.socket.send(menuReply(msg.choices[i].label));
        this.pendingMenu = null;
      });
    }
  }

  private run(actions: Action[]) {
    for (const a of actions) {
      if (a.act === "send") {
        this.socket.send(a.data);
      } else if (a.act === "focus-editor") {
        this.editorHost.classList.remove("hidden");
        this.editorHost.value = a.text;
        this.editorHost.dataset.target = a.target;
        this.editorHost.focus();
      } else {
        this.render();
      }
    }
  }

  private render() {
    const ctx = this.canvas.getContext("2d");
    if (!ctx || this.state.scene === null) return;
    const scene = this.state.scene;
    this.canvas.width = Math.max(scene.width + 40, 800);
    this.canvas.height = Math.max(scene.height + 40, 500);
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    ctx.save();
    ctx.translate(this.state.panX, this.state.panY);
    ctx.scale(this.state.zoom, this.state.zoom);
    runOps(ctx, sceneToOps(scene, this.state.selection));
    if (this.state.edgeDrag !== null) {
      ctx.strokeStyle = "#888888";
      ctx.setLineDash([5, 4]);
      ctx.beginPath();
      const src = scene.graphs.flatMap((g) => g.nodes).find((n) => n.node_id === this.state.edgeDrag!.source);
      if (src) {
        ctx.moveTo(src.x + src.w / 2, src.y + src.h / 2);
        ctx.lineTo(this.state.edgeDrag.x, this.state.edgeDrag.y);
        ctx.stroke();
      }
      ctx.setLineDash([]);
    }
    ctx.restore();
    this.renderMenu();
  }

  private renderMenu() {
    if (this.state.menu === null) {
      if (this.pendingMenu === null) this.menuHost.classList.add("hidden");
      return;
    }
    const menu = this.state.menu;
    this.showMenu(menu.entries.map((e) => e.label), (i) => {
      this.run(chooseMenuEntry(this.state, i, this.revision));
    }, menu.x + this.state.panX, menu.y + this.state.panY);
  }

  private showMenu(labels: string[], pick: (index: number) => void, x?: number, y?: number) {
    this.menuHost.innerHTML = "";
    this.menuHost.classList.remove("hidden");
    if (x !== undefined && y !== undefined) {
      this.menuHost.style.left = `${x}px`;
      this.menuHost.style.top = `${y}px`;
    }
    labels.forEach((label, i) => {
      const item = document.createElement("div");
      item.className = "menu-item";
      item.textContent = label;
      item.addEventListener("pointerdown", (e) => {
        e.stopPropagation();
        this.menuHost.classList.add("hidden");
        pick(i);
      });
      this.menuHost.appendChild(item);
    });
  }

  private status(text: string) {
    this.statusHost.textContent = text;
  }
}
