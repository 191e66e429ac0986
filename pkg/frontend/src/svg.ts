/**
 * Hand-rolled SVG line charts. Everything is computed from the input data
 * with fixed styling constants, so output bytes are a pure function of the
 * figure model.
 */

export interface Series {
  label: string;
  points: Array<{ x: number; y: number }>;
}

export interface FigureModel {
  title: string;
  xLabel: string;
  yLabel: string;
  xLog: boolean;
  yLog: boolean;
  series: Series[];
}

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { top: 48, right: 200, bottom: 58, left: 84 };
const PALETTE = ["#1f6fb2", "#d2622a", "#2e8b57", "#8a4fb5", "#b23a48", "#6b6b6b"];

const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

function fmt(value: number): string {
  if (!Number.isFinite(value)) throw new Error(`non-finite coordinate ${value}`);
  return value.toFixed(2);
}

function tickLabel(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 0.01 && magnitude < 10000) {
    return String(Number(value.toPrecision(4)));
  }
  return value.toExponential(1).replace("e+", "e").replace("e-", "e-");
}

interface Scale {
  (value: number): number;
  ticks: number[];
}

function makeScale(values: number[], log: boolean, rangeLo: number, rangeHi: number): Scale {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (log) {
    if (lo <= 0) throw new Error("log axis requires strictly positive values");
    let decLo = Math.floor(Math.log10(lo));
    let decHi = Math.ceil(Math.log10(hi));
    if (decLo === decHi) decHi += 1;
    const ticks: number[] = [];
    for (let d = decLo; d <= decHi; d++) ticks.push(10 ** d);
    const scale = ((value: number) =>
      rangeLo + ((Math.log10(value) - decLo) / (decHi - decLo)) * (rangeHi - rangeLo)) as Scale;
    scale.ticks = ticks;
    return scale;
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.06 * (hi - lo);
  lo -= pad;
  hi += pad;
  const step = niceStep(hi - lo);
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let t = first; t <= hi + 1e-12 * Math.abs(step); t += step) {
    ticks.push(Number(t.toPrecision(12)));
  }
  const scale = ((value: number) =>
    rangeLo + ((value - lo) / (hi - lo)) * (rangeHi - rangeLo)) as Scale;
  scale.ticks = ticks;
  return scale;
}

function niceStep(span: number): number {
  const raw = span / 6;
  const power = 10 ** Math.floor(Math.log10(raw));
  const unit = raw / power;
  if (unit < 1.5) return power;
  if (unit < 3.5) return 2 * power;
  if (unit < 7.5) return 5 * power;
  return 10 * power;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderFigure(model: FigureModel): string {
  if (model.series.length === 0) throw new Error("figure has no series");
  const xs = model.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = model.series.flatMap((s) => s.points.map((p) => p.y));
  if (xs.length === 0) throw new Error("figure has no points");
  const xScale = makeScale(xs, model.xLog, MARGIN.left, MARGIN.left + PLOT_W);
  const yScale = makeScale(ys, model.yLog, MARGIN.top + PLOT_H, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`);
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="26" text-anchor="middle" font-size="16" fill="#1a1a1a">` +
    `${escapeXml(model.title)}</text>`);

  // frame
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${PLOT_W}" height="${PLOT_H}" ` +
    `fill="none" stroke="#444444" stroke-width="1"/>`);

  for (const tick of xScale.ticks) {
    const x = xScale(tick);
    if (x < MARGIN.left - 0.5 || x > MARGIN.left + PLOT_W + 0.5) continue;
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top}" x2="${fmt(x)}" ` +
      `y2="${MARGIN.top + PLOT_H}" stroke="#dddddd" stroke-width="1"/>`);
    parts.push(
      `<text x="${fmt(x)}" y="${MARGIN.top + PLOT_H + 20}" text-anchor="middle" ` +
      `font-size="12" fill="#333333">${tickLabel(tick)}</text>`);
  }
  for (const tick of yScale.ticks) {
    const y = yScale(tick);
    if (y < MARGIN.top - 0.5 || y > MARGIN.top + PLOT_H + 0.5) continue;
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + PLOT_W}" ` +
      `y2="${fmt(y)}" stroke="#dddddd" stroke-width="1"/>`);
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" ` +
      `font-size="12" fill="#333333">${tickLabel(tick)}</text>`);
  }

  parts.push(
    `<text x="${MARGIN.left + PLOT_W / 2}" y="${HEIGHT - 14}" text-anchor="middle" ` +
    `font-size="13" fill="#1a1a1a">${escapeXml(model.xLabel)}</text>`);
  parts.push(
    `<text x="20" y="${MARGIN.top + PLOT_H / 2}" text-anchor="middle" font-size="13" ` +
    `fill="#1a1a1a" transform="rotate(-90 20 ${MARGIN.top + PLOT_H / 2})">` +
    `${escapeXml(model.yLabel)}</text>`);

  model.series.forEach((series, index) => {
    const color = PALETTE[index % PALETTE.length];
    const sorted = [...series.points].sort((a, b) => a.x - b.x);
    const coords = sorted.map((p) => `${fmt(xScale(p.x))},${fmt(yScale(p.y))}`);
    if (coords.length > 1) {
      parts.push(
        `<polyline points="${coords.join(" ")}" fill="none" stroke="${color}" ` +
        `stroke-width="2"/>`);
    }
    for (const coord of coords) {
      const [cx, cy] = coord.split(",");
      parts.push(`<circle cx="${cx}" cy="${cy}" r="3.5" fill="${color}"/>`);
    }
    const legendY = MARGIN.top + 12 + index * 22;
    const legendX = MARGIN.left + PLOT_W + 14;
    parts.push(
      `<line x1="${legendX}" y1="${legendY}" x2="${legendX + 22}" y2="${legendY}" ` +
      `stroke="${color}" stroke-width="2"/>`);
    parts.push(
      `<text x="${legendX + 28}" y="${legendY + 4}" font-size="12" fill="#1a1a1a">` +
      `${escapeXml(series.label)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
