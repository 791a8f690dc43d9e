// Canvas painter for a rendered Frame. Kept separate from render.ts so the
// scene construction stays testable without a DOM.

import { hueToCss, type Frame } from "./render.js";

const DEVICE_GLYPHS: Record<string, string> = {
  window_ventilator: "WV",
  open_window: "OW",
  ceiling_fan: "CF",
  pedestal_fan: "PF",
  hand_fan: "HF",
  split_ac: "AC",
};

export function paint(ctx: CanvasRenderingContext2D, frame: Frame): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);

  for (const item of frame.items) {
    switch (item.kind) {
      case "room":
        ctx.fillStyle = "#1d2430";
        ctx.fillRect(item.xPx, item.yPx, item.wPx, item.hPx);
        ctx.strokeStyle = "#5d6b80";
        ctx.strokeRect(item.xPx, item.yPx, item.wPx, item.hPx);
        break;
      case "heatcell":
        ctx.fillStyle = hueToCss(item.hueDeg, 0.25);
        ctx.fillRect(
          item.xPx - item.sizePx / 2,
          item.yPx - item.sizePx / 2,
          item.sizePx,
          item.sizePx,
        );
        break;
      case "partition":
        ctx.fillStyle = "#3a4252";
        ctx.fillRect(item.xPx, item.yPx, item.wPx, item.hPx);
        break;
      case "device": {
        ctx.fillStyle = item.on ? "#ffd166" : "#6c7789";
        ctx.beginPath();
        ctx.arc(item.xPx, item.yPx, 11, 0, 2 * Math.PI);
        ctx.fill();
        if (item.angleRad !== null && item.on) {
          ctx.strokeStyle = "#ffd166";
          ctx.beginPath();
          ctx.moveTo(item.xPx, item.yPx);
          ctx.lineTo(
            item.xPx + 22 * Math.cos(item.angleRad),
            item.yPx + 22 * Math.sin(item.angleRad),
          );
          ctx.stroke();
        }
        ctx.fillStyle = "#0d1117";
        ctx.font = "9px sans-serif";
        ctx.textAlign = "center";
        ctx.textBaseline = "middle";
        ctx.fillText(DEVICE_GLYPHS[item.deviceKind] ?? "?", item.xPx, item.yPx);
        break;
      }
      case "avatar":
        ctx.strokeStyle = "rgba(122, 204, 255, 0.35)";
        ctx.beginPath();
        ctx.arc(item.xPx, item.yPx, item.reachPx, 0, 2 * Math.PI);
        ctx.stroke();
        if (item.targetPx) {
          ctx.strokeStyle = "rgba(122, 204, 255, 0.5)";
          ctx.setLineDash([4, 4]);
          ctx.beginPath();
          ctx.moveTo(item.xPx, item.yPx);
          ctx.lineTo(item.targetPx[0], item.targetPx[1]);
          ctx.stroke();
          ctx.setLineDash([]);
        }
        ctx.fillStyle = "#7accff";
        ctx.beginPath();
        ctx.arc(item.xPx, item.yPx, 7, 0, 2 * Math.PI);
        ctx.fill();
        break;
      case "bubble":
        ctx.fillStyle = hueToCss(item.hueDeg, 0.55 * item.opacity);
        ctx.strokeStyle = hueToCss(item.hueDeg, item.opacity);
        ctx.beginPath();
        ctx.arc(item.xPx, item.yPx, item.diameterPx / 2, 0, 2 * Math.PI);
        ctx.fill();
        ctx.stroke();
        ctx.fillStyle = `rgba(240, 244, 250, ${item.opacity})`;
        ctx.font = "11px sans-serif";
        ctx.textAlign = "center";
        ctx.fillText(`${Math.round(item.ppm)}`, item.xPx, item.yPx);
        break;
      case "hud": {
        ctx.fillStyle = "#d7dde6";
        ctx.font = "13px monospace";
        ctx.textAlign = "left";
        ctx.textBaseline = "top";
        item.lines.forEach((line, i) => ctx.fillText(line, 8, 6 + 16 * i));
        break;
      }
      case "banner": {
        const w = ctx.canvas.width;
        ctx.fillStyle = "rgba(38, 166, 91, 0.92)";
        ctx.fillRect(0, ctx.canvas.height - 42, w, 42);
        ctx.fillStyle = "#ffffff";
        ctx.font = "bold 14px sans-serif";
        ctx.textAlign = "center";
        ctx.textBaseline = "middle";
        ctx.fillText(item.text, w / 2, ctx.canvas.height - 21);
        break;
      }
    }
  }
}
