/** Linear data-to-pixel mapping with a padded domain. */

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(
  lo: number,
  hi: number,
  pxLo: number,
  pxHi: number,
  padFrac = 0.04,
): Scale {
  if (hi <= lo) {
    hi = lo + 1;
  }
  const span = hi - lo;
  const dLo = lo - padFrac * span;
  const dHi = hi + padFrac * span;
  const fn = ((v: number) =>
    pxLo + ((v - dLo) / (dHi - dLo)) * (pxHi - pxLo)) as Scale;
  fn.domain = [dLo, dHi];
  return fn;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!isFinite(lo)) {
    return [0, 1];
  }
  return [lo, hi];
}

export function ticks(lo: number, hi: number, count = 5): number[] {
  const out: number[] = [];
  for (let n = 0; n < count; n += 1) {
    out.push(lo + ((hi - lo) * n) / (count - 1));
  }
  return out;
}

export function fmt(v: number): string {
  return Number(v.toPrecision(4)).toString();
}
