// Pure scene construction: ViewState -> draw list. Bubble diameter, hue and
// opacity pass through exactly as served; the only client-side math is the
// meters->pixels transform.

import { wearableReading, type ViewState } from "./state.js";

export interface Viewport {
  widthPx: number;
  heightPx: number;
  marginPx?: number;
}

export interface RoomItem {
  kind: "room";
  xPx: number;
  yPx: number;
  wPx: number;
  hPx: number;
}

export interface PartitionItem {
  kind: "partition";
  xPx: number;
  yPx: number;
  wPx: number;
  hPx: number;
}

export interface HeatCellItem {
  kind: "heatcell";
  xPx: number;
  yPx: number;
  sizePx: number;
  hueDeg: number;
  ppm: number;
}

export interface DeviceItem {
  kind: "device";
  id: string;
  deviceKind: string;
  xPx: number;
  yPx: number;
  on: boolean;
  angleRad: number | null;
}

export interface AvatarItem {
  kind: "avatar";
  xPx: number;
  yPx: number;
  reachPx: number;
  targetPx: [number, number] | null;
}

export interface BubbleItem {
  kind: "bubble";
  id: string;
  xPx: number;
  yPx: number;
  diameterPx: number;
  hueDeg: number;
  opacity: number;
  ppm: number;
}

export interface BannerItem {
  kind: "banner";
  text: string;
}

export interface HudItem {
  kind: "hud";
  lines: string[];
}

export type DrawItem =
  | RoomItem
  | PartitionItem
  | HeatCellItem
  | DeviceItem
  | AvatarItem
  | BubbleItem
  | BannerItem
  | HudItem;

export interface Frame {
  scale: number; // pixels per meter
  originPx: [number, number];
  items: DrawItem[];
}

function formatClock(seconds: number): string {
  const m = Math.floor(seconds / 60);
  const s = Math.floor(seconds % 60);
  return `${m.toString().padStart(2, "0")}:${s.toString().padStart(2, "0")}`;
}

export function renderScene(view: ViewState, viewport: Viewport): Frame {
  const margin = viewport.marginPx ?? 20;
  const items: DrawItem[] = [];
  if (!view.room) {
    return { scale: 1, originPx: [margin, margin], items };
  }
  const [lx, ly] = view.room.dims_m;
  const scale = Math.min(
    (viewport.widthPx - 2 * margin) / lx,
    (viewport.heightPx - 2 * margin) / ly,
  );
  const origin: [number, number] = [margin, margin];
  const toPx = (x: number, y: number): [number, number] => [
    origin[0] + x * scale,
    origin[1] + y * scale,
  ];

  items.push({ kind: "room", xPx: origin[0], yPx: origin[1], wPx: lx * scale, hPx: ly * scale });

  // heatmap layer under everything else, colored with served hues
  if (view.heatmap) {
    const cellPx = 0.9 * scale;
    view.heatmap.positions.forEach(([x, y], i) => {
      const cols = view.heatmap!.values[0]!.length;
      const r = Math.floor(i / cols);
      const c = i % cols;
      const [xPx, yPx] = toPx(x, y);
      items.push({
        kind: "heatcell",
        xPx,
        yPx,
        sizePx: cellPx,
        hueDeg: view.heatmap!.hues[r]![c]!,
        ppm: view.heatmap!.values[r]![c]!,
      });
    });
  }

  for (const part of view.room.partitions ?? []) {
    const [x0, y0] = toPx(part.min[0], part.min[1]);
    items.push({
      kind: "partition",
      xPx: x0,
      yPx: y0,
      wPx: (part.max[0] - part.min[0]) * scale,
      hPx: (part.max[1] - part.min[1]) * scale,
    });
  }

  for (const dev of [...view.devices.values()].sort((a, b) => a.id.localeCompare(b.id))) {
    const [xPx, yPx] = toPx(dev.position[0], dev.position[1]);
    const angle = dev.orientation
      ? Math.atan2(dev.orientation[1], dev.orientation[0])
      : null;
    items.push({
      kind: "device",
      id: dev.id,
      deviceKind: dev.kind,
      xPx,
      yPx,
      on: dev.state === "on",
      angleRad: angle,
    });
  }

  {
    const [xPx, yPx] = toPx(view.avatar.pos[0], view.avatar.pos[1]);
    items.push({
      kind: "avatar",
      xPx,
      yPx,
      reachPx: 1.0 * scale, // the 1 m proximity ring around the wearer
      targetPx: view.avatar.target
        ? toPx(view.avatar.target[0], view.avatar.target[1])
        : null,
    });
  }

  for (const b of [...view.bubbles.values()].sort((a, c) => a.id.localeCompare(c.id))) {
    const [xPx, yPx] = toPx(b.pos[0], b.pos[1]);
    items.push({
      kind: "bubble",
      id: b.id,
      xPx,
      yPx,
      diameterPx: b.diameter_m * scale,
      hueDeg: b.hue_deg,
      opacity: b.opacity,
      ppm: b.ppm,
    });
  }

  const hud: string[] = [
    `t ${formatClock(view.clock)}`,
    `target <= ${view.targetPpm} ppm`,
    `layer [${view.selectedHeight}]`,
  ];
  const reading = wearableReading(view);
  if (reading) {
    hud.push(
      reading.status === "ok"
        ? `wrist ${reading.co2_ppm} ppm`
        : `sensor ${reading.status}...`,
    );
  } else if (view.mode === "ar_bubbles") {
    hud.push("sensor warming...");
  }
  if (view.faults.length) hud.push(`fault: ${view.faults[view.faults.length - 1]}`);
  items.push({ kind: "hud", lines: hud });

  if (view.completed) {
    items.push({
      kind: "banner",
      text: "Target reached! Air is back under 800 ppm - keep playing or stop.",
    });
  }
  if (view.ended) {
    items.push({ kind: "banner", text: `Session ended (${view.status}).` });
  }

  return { scale, originPx: origin, items };
}

export function bubbleItems(frame: Frame): BubbleItem[] {
  return frame.items.filter((i): i is BubbleItem => i.kind === "bubble");
}

export function bannerItems(frame: Frame): BannerItem[] {
  return frame.items.filter((i): i is BannerItem => i.kind === "banner");
}

/** CSS color for a served hue; saturation/lightness are fixed client theme. */
export function hueToCss(hueDeg: number, alpha = 1): string {
  return `hsla(${hueDeg}, 85%, 55%, ${alpha})`;
}
