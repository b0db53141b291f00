/** Linear data-to-pixel mapping with a padded domain. */
export function linearScale(lo, hi, pxLo, pxHi, padFrac = 0.04) {
    if (hi <= lo) {
        hi = lo + 1;
    }
    const span = hi - lo;
    const dLo = lo - padFrac * span;
    const dHi = hi + padFrac * span;
    const fn = ((v) => pxLo + ((v - dLo) / (dHi - dLo)) * (pxHi - pxLo));
    fn.domain = [dLo, dHi];
    return fn;
}
export function extent(values) {
    let lo = Infinity;
    let hi = -Infinity;
    for (const v of values) {
        if (v < lo)
            lo = v;
        if (v > hi)
            hi = v;
    }
    if (!isFinite(lo)) {
        return [0, 1];
    }
    return [lo, hi];
}
export function ticks(lo, hi, count = 5) {
    const out = [];
    for (let n = 0; n < count; n += 1) {
        out.push(lo + ((hi - lo) * n) / (count - 1));
    }
    return out;
}
export function fmt(v) {
    return Number(v.toPrecision(4)).toString();
}
