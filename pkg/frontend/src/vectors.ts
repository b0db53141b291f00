/** Orthogonal 2D projections of the displacement field with the landmark
 * under review emphasised.  Three linked views (XY/XZ/YZ) are enough for
 * the verdict task; physical-space coordinates are shown so the reviewer
 * can cross-check in an external volume viewer. */

import { extent, fmt, linearScale } from "./scale.js";
import type { LandmarkRecord } from "./types.js";

export const VW = 230;
export const VH = 220;
const M = 26;

export type Plane = "xy" | "xz" | "yz";

const PLANE_AXES: Record<Plane, [number, number, string, string]> = {
  xy: [0, 1, "x", "y"],
  xz: [0, 2, "x", "z"],
  yz: [1, 2, "y", "z"],
};

export function vectorViewSvg(
  landmarks: LandmarkRecord[],
  plane: Plane,
  focusId: string,
): string {
  const [ax, ay, xName, yName] = PLANE_AXES[plane];
  const xs: number[] = [];
  const ys: number[] = [];
  for (const lm of landmarks) {
    xs.push(lm.fixed[ax], lm.moving[ax]);
    ys.push(lm.fixed[ay], lm.moving[ay]);
  }
  const [xLo, xHi] = extent(xs);
  const [yLo, yHi] = extent(ys);
  const sx = linearScale(xLo, xHi, M, VW - 8);
  const sy = linearScale(yLo, yHi, VH - M, 8);
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${VW} ${VH}" ` +
      `class="vec-view">`,
    `<text class="plane-label" x="${VW / 2}" y="${VH - 4}" ` +
      `text-anchor="middle">${xName}–${yName} (mm)</text>`,
  ];
  const order = [...landmarks].sort((a, b) =>
    a.id === focusId ? 1 : b.id === focusId ? -1 : 0,
  );
  for (const lm of order) {
    const focus = lm.id === focusId;
    const x1 = sx(lm.fixed[ax]);
    const y1 = sy(lm.fixed[ay]);
    const x2 = sx(lm.moving[ax]);
    const y2 = sy(lm.moving[ay]);
    const cls = focus ? "vec focus" : "vec";
    const title = `<title>${lm.id}: fixed (${lm.fixed.map(fmt).join(", ")}) ` +
      `→ moving (${lm.moving.map(fmt).join(", ")})</title>`;
    if (Math.abs(x2 - x1) < 0.3 && Math.abs(y2 - y1) < 0.3) {
      parts.push(
        `<circle class="${cls}" cx="${x1.toFixed(1)}" cy="${y1.toFixed(1)}" ` +
          `r="${focus ? 3.5 : 2}">${title}</circle>`,
      );
    } else {
      parts.push(
        `<line class="${cls}" x1="${x1.toFixed(1)}" y1="${y1.toFixed(1)}" ` +
          `x2="${x2.toFixed(1)}" y2="${y2.toFixed(1)}">${title}</line>`,
      );
      parts.push(
        `<circle class="${cls} tip" cx="${x2.toFixed(1)}" ` +
          `cy="${y2.toFixed(1)}" r="${focus ? 2.5 : 1.4}"/>`,
      );
    }
  }
  parts.push("</svg>");
  return parts.join("\n");
}
