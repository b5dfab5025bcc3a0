import { Editor } from "./client.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const proto = location.protocol === "https:" ? "wss" : "ws";
const socket = new WebSocket(`${proto}://${location.host}/ws`);

new Editor(
  el<HTMLCanvasElement>("canvas"),
  socket,
  el("menu"),
  el<HTMLInputElement>("editor"),
  el("status"),
);
