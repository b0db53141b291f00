/** Variogram scatter built from the raw (h, eps) pairs served by the API.
 * Rendered as an SVG string so the geometry is testable without a DOM;
 * every circle corresponds to one served pair, nothing is synthesised. */
import { extent, fmt, linearScale, ticks } from "./scale.js";
export const W = 460;
export const H = 340;
const ML = 52;
const MR = 12;
const MT = 10;
const MB = 40;
function axes(sx, sy) {
    const x0 = ML;
    const x1 = W - MR;
    const y0 = H - MB;
    const y1 = MT;
    const parts = [
        `<line class="axis" x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}"/>`,
        `<line class="axis" x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}"/>`,
    ];
    for (const t of ticks(sx.domain[0], sx.domain[1])) {
        parts.push(`<text class="tick" x="${sx(t).toFixed(1)}" y="${y0 + 14}" ` +
            `text-anchor="middle">${fmt(t)}</text>`);
    }
    for (const t of ticks(sy.domain[0], sy.domain[1])) {
        parts.push(`<text class="tick" x="${x0 - 5}" y="${(sy(t) + 3).toFixed(1)}" ` +
            `text-anchor="end">${fmt(t)}</text>`);
    }
    parts.push(`<text class="label" x="${(x0 + x1) / 2}" y="${H - 8}" ` +
        `text-anchor="middle">h (mm)</text>`, `<text class="label" x="12" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
        `transform="rotate(-90 12 ${(y0 + y1) / 2})">ε (mm²)</text>`);
    return parts;
}
export function scatterSvg(cloud, opts) {
    const [hLo, hHi] = extent(cloud.map((p) => p.h));
    const [, eHi] = extent(cloud.map((p) => p.eps));
    const sx = linearScale(Math.min(0, hLo), hHi, ML, W - MR);
    const sy = linearScale(0, eHi, H - MB, MT);
    const parts = [
        `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" ` +
            `class="scatter">`,
        ...axes(sx, sy),
    ];
    // focused pairs drawn last so they sit on top
    const plain = cloud.filter((p) => p.i !== opts.focusIndex && p.j !== opts.focusIndex);
    const focused = cloud.filter((p) => p.i === opts.focusIndex || p.j === opts.focusIndex);
    for (const group of [plain, focused]) {
        for (const p of group) {
            const hi = p.i === opts.focusIndex || p.j === opts.focusIndex;
            const partner = hi
                ? opts.landmarkIds[p.i === opts.focusIndex ? p.j : p.i]
                : null;
            const title = hi
                ? `pair with ${partner}: h=${fmt(p.h)} mm, ε=${fmt(p.eps)} mm²`
                : `${opts.landmarkIds[p.i]}–${opts.landmarkIds[p.j]}: ` +
                    `h=${fmt(p.h)} mm, ε=${fmt(p.eps)} mm²`;
            parts.push(`<circle class="${hi ? "pt hi" : "pt"}" cx="${sx(p.h).toFixed(1)}" ` +
                `cy="${sy(p.eps).toFixed(1)}" r="${hi ? 4 : 2.5}">` +
                `<title>${title}</title></circle>`);
        }
    }
    parts.push("</svg>");
    return parts.join("\n");
}
