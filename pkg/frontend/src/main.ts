// App bootstrap: join or start a session, poll the event feed (1 s fallback
// cadence), paint frames, and translate input into actions. Avatar motion is
// the only optimistic update; everything else waits for server state.

import { ApiClient, ApiError } from "./api.js";
import { paint } from "./painter.js";
import { renderScene, type Viewport } from "./render.js";
import { applyEvents, applySnapshot, initialState } from "./state.js";
import { buildTutorial, shouldShowTutorial } from "./tutorial.js";
import type { HeightLayer } from "./types.js";

const POLL_MS = 1000;
const HEATMAP_MS = 2000;

const api = new ApiClient("");
const state = initialState();

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusLine = document.getElementById("status-line")!;
const deviceBar = document.getElementById("device-bar")!;

function viewport(): Viewport {
  return { widthPx: canvas.width, heightPx: canvas.height, marginPx: 24 };
}

function repaint(): void {
  paint(ctx, renderScene(state, viewport()));
  renderDeviceBar();
}

function flashError(message: string): void {
  statusLine.textContent = message;
  statusLine.classList.add("error");
  setTimeout(() => statusLine.classList.remove("error"), 2500);
}

async function act(target: string, verb: string, args: Record<string, unknown> = {}) {
  if (!state.sessionId) return;
  try {
    await api.sendAction(state.sessionId, target, verb, args);
  } catch (err) {
    if (err instanceof ApiError) flashError(`${verb}: ${err.message}`);
    else flashError(`${verb}: network error`);
  }
}

function pxToMeters(evt: MouseEvent): [number, number] | null {
  if (!state.room) return null;
  const frame = renderScene(state, viewport());
  const rect = canvas.getBoundingClientRect();
  const x = ((evt.clientX - rect.left) - frame.originPx[0]) / frame.scale;
  const y = ((evt.clientY - rect.top) - frame.originPx[1]) / frame.scale;
  const [lx, ly] = state.room.dims_m;
  if (x < 0 || y < 0 || x > lx || y > ly) return null;
  return [x, y];
}

function deviceAt(evt: MouseEvent): string | null {
  const frame = renderScene(state, viewport());
  const rect = canvas.getBoundingClientRect();
  const px = evt.clientX - rect.left;
  const py = evt.clientY - rect.top;
  for (const item of frame.items) {
    if (item.kind === "device") {
      const d2 = (item.xPx - px) ** 2 + (item.yPx - py) ** 2;
      if (d2 < 14 * 14) return item.id;
    }
  }
  return null;
}

let aiming: { deviceId: string; startPx: [number, number] } | null = null;

canvas.addEventListener("mousedown", (evt) => {
  const dev = deviceAt(evt);
  if (dev) {
    const payload = state.devices.get(dev);
    if (payload?.orientation) {
      const rect = canvas.getBoundingClientRect();
      aiming = { deviceId: dev, startPx: [evt.clientX - rect.left, evt.clientY - rect.top] };
    }
  }
});

canvas.addEventListener("mouseup", (evt) => {
  const rect = canvas.getBoundingClientRect();
  const upPx: [number, number] = [evt.clientX - rect.left, evt.clientY - rect.top];
  if (aiming) {
    const dx = upPx[0] - aiming.startPx[0];
    const dy = upPx[1] - aiming.startPx[1];
    const drag = Math.hypot(dx, dy);
    if (drag > 12) {
      void act(aiming.deviceId, "aim", { direction: [dx, dy, 0] });
    } else {
      toggleDevice(aiming.deviceId);
    }
    aiming = null;
    return;
  }
  const dev = deviceAt(evt);
  if (dev) {
    toggleDevice(dev);
    return;
  }
  const m = pxToMeters(evt);
  if (m) {
    state.avatar = { pos: state.avatar.pos, target: m }; // optimistic motion only
    repaint();
    void act(state.sessionId ?? "", "move_avatar", { to: m });
  }
});

function toggleDevice(deviceId: string): void {
  const dev = state.devices.get(deviceId);
  if (!dev) return;
  void act(deviceId, "set_state", { state: dev.state === "on" ? "off" : "on" });
}

document.addEventListener("keydown", (evt) => {
  if (evt.key === "b" || evt.key === "B") void placeBubble();
});

async function placeBubble(): Promise<void> {
  await act(state.sessionId ?? "", "place_bubble", {});
}

function renderDeviceBar(): void {
  const wanted = [...state.devices.values()]
    .map((d) => `${d.id}:${d.state}`)
    .join("|");
  if (deviceBar.dataset.sig === wanted) return;
  deviceBar.dataset.sig = wanted;
  deviceBar.textContent = "";
  for (const dev of state.devices.values()) {
    const btn = document.createElement("button");
    btn.textContent = `${dev.kind.replace(/_/g, " ")} (${dev.state})`;
    btn.className = dev.state === "on" ? "device on" : "device";
    btn.addEventListener("click", () => toggleDevice(dev.id));
    deviceBar.appendChild(btn);
  }
  const bubbleBtn = document.createElement("button");
  bubbleBtn.textContent = "Place bubble (B)";
  bubbleBtn.addEventListener("click", () => void placeBubble());
  deviceBar.appendChild(bubbleBtn);
  for (const layer of ["G", "T", "C"] as HeightLayer[]) {
    const btn = document.createElement("button");
    btn.textContent = `[${layer}]`;
    btn.className = state.selectedHeight === layer ? "layer on" : "layer";
    btn.addEventListener("click", () => {
      state.selectedHeight = layer;
      deviceBar.dataset.sig = "";
      void refreshHeatmap();
    });
    deviceBar.appendChild(btn);
  }
  const stopBtn = document.createElement("button");
  stopBtn.textContent = "Stop session";
  stopBtn.addEventListener("click", () => void act(state.sessionId ?? "", "stop"));
  deviceBar.appendChild(stopBtn);
}

async function refreshHeatmap(): Promise<void> {
  if (!state.sessionId) return;
  try {
    state.heatmap = await api.getHeatmap(state.sessionId, state.selectedHeight);
    repaint();
  } catch {
    // heatmap is decorative; ignore transient failures
  }
}

async function resync(): Promise<void> {
  if (!state.sessionId) return;
  applySnapshot(state, await api.getSession(state.sessionId));
}

async function pollLoop(): Promise<void> {
  while (!state.ended) {
    try {
      if (state.needsResync) await resync();
      const body = await api.getEvents(state.sessionId!, state.lastSeq, 0);
      applyEvents(state, body.events);
      if (state.needsResync) await resync();
      statusLine.textContent =
        `${state.scenario} | ${state.status}` + (state.completed ? " (target reached)" : "");
      repaint();
    } catch (err) {
      if (err instanceof ApiError && err.status === 410) {
        await resync();
      } else if (err instanceof ApiError && err.status === 404) {
        statusLine.textContent = "session is gone";
        break;
      }
    }
    await new Promise((resolve) => setTimeout(resolve, POLL_MS));
  }
  repaint();
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(location.search);
  const scenario = params.get("scenario") ?? "r2";
  const seed = Number(params.get("seed") ?? "0");
  const timeScale = params.get("ts") ? Number(params.get("ts")) : undefined;
  const join = params.get("session");

  const snap = join ? await api.getSession(join) : await api.startSession(scenario, "ar_bubbles", seed, timeScale);
  applySnapshot(state, snap);
  repaint();
  void refreshHeatmap();
  setInterval(() => void refreshHeatmap(), HEATMAP_MS);
  void pollLoop();
}

if (shouldShowTutorial()) {
  document.body.appendChild(buildTutorial(() => void boot()));
} else {
  void boot();
}
