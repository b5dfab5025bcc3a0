// Scene -> draw ops. Keeping this a pure function lets tests cover
// rendering without a canvas; the thin adapter below executes the ops on
// a CanvasRenderingContext2D.

import type { Primitive, SceneMessage } from "./protocol.js";

export type DrawOp =
  | { op: "rect"; x: number; y: number; w: number; h: number; fill?: string; stroke?: string; lineWidth?: number; dashed?: boolean }
  | { op: "ellipse"; x: number; y: number; w: number; h: number; fill?: string; stroke?: string; lineWidth?: number }
  | { op: "polyline"; points: number[][]; stroke: string; lineWidth: number }
  | { op: "polygon"; points: number[][]; fill: string }
  | { op: "text"; x: number; y: number; text: string; size: number; fill: string; underline?: boolean }
  | { op: "image"; x: number; y: number; w: number; h: number; path: string };

const SELECT_COLOR = "#cc2222";

function primOps(p: Primitive): DrawOp[] {
  const color = p.color ?? "black";
  switch (p.kind) {
    case "text":
      if (!p.text) return [];
      return [{ op: "text", x: p.x, y: p.y, text: p.text, size: p.size ?? 12, fill: color }];
    case "rect":
      if (!p.stroke && !p.filled) return [];
      return [{
        op: "rect", x: p.x, y: p.y, w: p.w, h: p.h,
        fill: p.filled ? color : undefined,
        stroke: p.stroke ? color : undefined,
        lineWidth: p.stroke ?? undefined,
      }];
    case "ellipse":
      return [{
        op: "ellipse", x: p.x, y: p.y, w: p.w, h: p.h,
        fill: p.filled ? color : undefined,
        stroke: p.stroke ? color : undefined,
        lineWidth: p.stroke ?? undefined,
      }];
    case "line":
      if (!p.points || p.points.length < 2) return [];
      return [{ op: "polyline", points: p.points, stroke: color, lineWidth: p.stroke ?? 1 }];
    case "polygon":
      if (!p.points || p.points.length < 3) return [];
      return [{ op: "polygon", points: p.points, fill: color }];
    case "image":
      return [{ op: "image", x: p.x, y: p.y, w: p.w, h: p.h, path: p.path ?? "" }];
  }
}

export function sceneToOps(scene: SceneMessage, selection: string | null): DrawOp[] {
  const ops: DrawOp[] = [];
  for (const p of scene.primitives) {
    ops.push(...primOps(p));
  }
  if (selection !== null) {
    const hit = scene.primitives.filter((p) => p.selectable && p.concrete === selection);
    for (const p of hit) {
      ops.push({
        op: "rect",
        x: p.x - 2, y: p.y - 2, w: p.w + 4, h: p.h + 4,
        stroke: SELECT_COLOR, lineWidth: 1, dashed: true,
      });
    }
  }
  return ops;
}

export function runOps(ctx: CanvasRenderingContext2D, ops: DrawOp[]): void {
  for (const op of ops) {
    switch (op.op) {
      case "rect":
        ctx.setLineDash(op.dashed ? [4, 3] : []);
        if (op.fill) {
          ctx.fillStyle = op.fill;
          ctx.fillRect(op.x, op.y, op.w, op.h);
        }
        if (op.stroke) {
          ctx.strokeStyle = op.stroke;
          ctx.lineWidth = op.lineWidth ?? 1;
          ctx.strokeRect(op.x, op.y, op.w, op.h);
        }
        ctx.setLineDash([]);
        break;
      case "ellipse":
        ctx.beginPath();
        ctx.ellipse(op.x + op.w / 2, op.y + op.h / 2, op.w / 2, op.h / 2, 0, 0, Math.PI * 2);
        if (op.fill) {
          ctx.fillStyle = op.fill;
          ctx.fill();
        }
        if (op.stroke) {
          ctx.strokeStyle = op.stroke;
          ctx.lineWidth = op.lineWidth ?? 1;
          ctx.stroke();
        }
        break;
      case "polyline":
        ctx.beginPath();
        ctx.moveTo(op.points[0][0], op.points[0][1]);
        for (const [x, y] of op.points.slice(1)) ctx.lineTo(x, y);
        ctx.strokeStyle = op.stroke;
        ctx.lineWidth = op.lineWidth;
        ctx.stroke();
        break;
      case "polygon":
        ctx.beginPath();
        ctx.moveTo(op.points[0][0], op.points[0][1]);
        for (const [x, y] of op.points.slice(1)) ctx.lineTo(x, y);
        ctx.closePath();
        ctx.fillStyle = op.fill;
        ctx.fill();
        break;
      case "text":
        ctx.font = `${op.size}px monospace`;
        ctx.fillStyle = op.fill;
        ctx.textBaseline = "alphabetic";
        ctx.fillText(op.text, op.x, op.y + op.size);
        break;
      case "image":
        ctx.strokeStyle = "black";
        ctx.lineWidth = 1;
        ctx.strokeRect(op.x, op.y, op.w, op.h);
        break;
    }
  }
}
