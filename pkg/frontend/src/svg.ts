// Declarative chart spec -> standalone SVG string. Pure and deterministic so
// renders can be snapshot-tested without a DOM; the app injects the result
// via innerHTML.

import type { ChartSpec, DataBlock, Encoding } from './types.js';

const WIDTH = 640;
const HEIGHT = 400;
const MARGIN = { top: 44, right: 24, bottom: 56, left: 64 };
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

export const PALETTES: Record<string, string[]> = {
  default: ['#4c78a8', '#f58518', '#54a24b', '#e45756', '#72b7b2', '#b279a2', '#ff9da6', '#9d755d'],
  muted: ['#4878a8', '#d8a15c', '#6a9f58', '#b85c5c', '#7aa6a1', '#9a7fa8', '#c99ba4', '#8d7a68'],
  pastel: ['#a1c9f4', '#ffb482', '#8de5a1', '#ff9f9b', '#d0bbff', '#fffea3', '#b9f2f0', '#cfcfcf'],
  bright: ['#023eff', '#ff7c00', '#1ac938', '#e8000b', '#8b2be2', '#9f4800', '#f14cc1', '#ffc400'],
  dark: ['#1f3b5c', '#8a4a0e', '#2d5a2e', '#7c2529', '#3e6362', '#5e4168', '#8c5460', '#54452f'],
  colorblind: ['#0173b2', '#de8f05', '#029e73', '#d55e00', '#cc78bc', '#ca9161', '#fbafe4', '#949494'],
};

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function fmt(n: number): string {
  if (!Number.isFinite(n)) return '0';
  return Number(n.toFixed(2)).toString();
}

function fmtTick(n: number): string {
  if (Math.abs(n) >= 10000) return n.toExponential(1);
  return Number(n.toPrecision(4)).toString();
}

function numbers(data: DataBlock, field: string): number[] {
  return (data.values[field] ?? []).map((v) => (typeof v === 'number' ? v : Number(v)));
}

function labels(data: DataBlock, field: string): string[] {
  return (data.values[field] ?? []).map((v) => String(v));
}

function distinct<T>(items: T[]): T[] {
  const seen = new Set<T>();
  const out: T[] = [];
  for (const item of items) {
    if (!seen.has(item)) {
      seen.add(item);
      out.push(item);
    }
  }
  return out;
}

interface Linear {
  (value: number): number;
  min: number;
  max: number;
}

function linearScale(lo: number, hi: number, rLo: number, rHi: number): Linear {
  const span = hi - lo || 1;
  const scale = ((value: number) => rLo + ((value - lo) / span) * (rHi - rLo)) as Linear;
  scale.min = lo;
  scale.max = hi;
  return scale;
}

function extent(values: number[], includeZero: boolean): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (includeZero) {
    lo = Math.min(0, lo);
    hi = Math.max(0, hi);
  }
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  return [lo, hi];
}

function palette(spec: ChartSpec): string[] {
  return PALETTES[spec.style.palette] ?? PALETTES.default;
}

function primaryColor(spec: ChartSpec): string {
  return spec.style.mark_color ?? palette(spec)[0];
}

// --- axes ----------------------------------------------------------------

function yAxis(scale: Linear): string {
  const parts: string[] = [];
  const ticks = 5;
  for (let i = 0; i <= ticks; i += 1) {
    const value = scale.min + ((scale.max - scale.min) * i) / ticks;
    const y = scale(value);
    parts.push(`<line x1="${MARGIN.left - 4}" y1="${fmt(y)}" x2="${WIDTH - MARGIN.right}" y2="${fmt(y)}" stroke="#e3e3e3" stroke-width="1"/>`);
    parts.push(`<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-size="11" fill="#555">${esc(fmtTick(value))}</text>`);
  }
  return parts.join('');
}

function xBandAxis(categories: string[], band: (i: number) => number, bandwidth: number): string {
  const parts: string[] = [];
  const step = Math.max(1, Math.ceil(categories.length / 12));
  categories.forEach((label, i) => {
    if (i % step !== 0) return;
    const x = band(i) + bandwidth / 2;
    const y = HEIGHT - MARGIN.bottom + 16;
    const shown = label.length > 12 ? `${label.slice(0, 11)}…` : label;
    parts.push(`<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="middle" font-size="11" fill="#555">${esc(shown)}</text>`);
  });
  return parts.join('');
}

function xLinearAxis(scale: Linear): string {
  const parts: string[] = [];
  const ticks = 6;
  for (let i = 0; i <= ticks; i += 1) {
    const value = scale.min + ((scale.max - scale.min) * i) / ticks;
    const x = scale(value);
    parts.push(`<text x="${fmt(x)}" y="${HEIGHT - MARGIN.bottom + 16}" text-anchor="middle" font-size="11" fill="#555">${esc(fmtTick(value))}</text>`);
  }
  return parts.join('');
}

function frame(spec: ChartSpec): string {
  const xLabel = spec.style.x_label ?? spec.encodings.x?.field ?? '';
  const yLabel = spec.style.y_label ?? spec.encodings.y?.field ?? '';
  return [
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="15" font-weight="bold" fill="#222">${esc(spec.title)}</text>`,
    `<line x1="${MARGIN.left}" y1="${HEIGHT - MARGIN.bottom}" x2="${WIDTH - MARGIN.right}" y2="${HEIGHT - MARGIN.bottom}" stroke="#888" stroke-width="1"/>`,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${HEIGHT - MARGIN.bottom}" stroke="#888" stroke-width="1"/>`,
    xLabel ? `<text x="${WIDTH / 2}" y="${HEIGHT - 10}" text-anchor="middle" font-size="12" fill="#333">${esc(xLabel)}</text>` : '',
    yLabel ? `<text x="16" y="${HEIGHT / 2}" transform="rotate(-90 16 ${HEIGHT / 2})" text-anchor="middle" font-size="12" fill="#333">${esc(yLabel)}</text>` : '',
  ].join('');
}

function wrap(spec: ChartSpec, body: string): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" data-chart-id="${esc(spec.chart_id)}" data-mark="${spec.mark}" data-revision="${spec.revision}">` +
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>` + body + '</svg>';
}

// --- marks ----------------------------------------------------------------

function renderBar(spec: ChartSpec): string {
  const x = spec.encodings.x as Encoding;
  const y = spec.encodings.y as Encoding;
  const cats = labels(spec.data, x.field);
  const vals = numbers(spec.data, y.field);
  const [lo, hi] = extent(vals, true);
  const yScale = linearScale(lo, hi, HEIGHT - MARGIN.bottom, MARGIN.top);
  const bandwidth = PLOT_W / Math.max(1, cats.length);
  const band = (i: number) => MARGIN.left + i * bandwidth;
  const zero = yScale(Math.max(lo, Math.min(hi, 0)));
  const color = primaryColor(spec);
  const bars = vals
    .map((value, i) => {
      const top = Math.min(yScale(value), zero);
      const height = Math.abs(yScale(value) - zero);
      return `<rect class="mark" x="${fmt(band(i) + bandwidth * 0.1)}" y="${fmt(top)}" width="${fmt(bandwidth * 0.8)}" height="${fmt(height)}" fill="${color}"><title>${esc(cats[i])}: ${fmt(value)}</title></rect>`;
    })
    .join('');
  return wrap(spec, yAxis(yScale) + bars + frame(spec) + xBandAxis(cats, band, bandwidth));
}

function seriesGroups(spec: ChartSpec): Map<string, number[]> {
  // row indexes per color-series (single unnamed series without a color channel)
  const color = spec.encodings.color;
  const groups = new Map<string, number[]>();
  const n = spec.data.values[spec.data.fields[0]]?.length ?? 0;
  if (!color || spec.mark === 'heatmap') {
    groups.set('', Array.from({ length: n }, (_, i) => i));
    return groups;
  }
  const keys = labels(spec.data, color.field);
  keys.forEach((key, i) => {
    const bucket = groups.get(key) ?? [];
    bucket.push(i);
    groups.set(key, bucket);
  });
  return groups;
}

function renderLineOrArea(spec: ChartSpec, area: boolean): string {
  const x = spec.encodings.x as Encoding;
  const y = spec.encodings.y as Encoding;
  const cats = labels(spec.data, x.field);
  const order = distinct(cats);
  const position = new Map(order.map((c, i) => [c, i]));
  const vals = numbers(spec.data, y.field);
  const [lo, hi] = extent(vals, area);
  const yScale = linearScale(lo, hi, HEIGHT - MARGIN.bottom, MARGIN.top);
  const bandwidth = PLOT_W / Math.max(1, order.length);
  const xPos = (cat: string) => MARGIN.left + (position.get(cat) ?? 0) * bandwidth + bandwidth / 2;
  const colors = palette(spec);
  const baseline = yScale(Math.max(lo, Math.min(hi, 0)));

  const parts: string[] = [];
  let seriesIndex = 0;
  for (const [name, rows] of seriesGroups(spec)) {
    const stroke = spec.style.mark_color ?? colors[seriesIndex % colors.length];
    const points = rows.map((i) => `${fmt(xPos(cats[i]))},${fmt(yScale(vals[i]))}`);
    if (area) {
      const first = rows[0];
      const last = rows[rows.length - 1];
      const path = [
        `${fmt(xPos(cats[first]))},${fmt(baseline)}`,
        ...points,
        `${fmt(xPos(cats[last]))},${fmt(baseline)}`,
      ].join(' ');
      parts.push(`<polygon class="mark" points="${path}" fill="${stroke}" fill-opacity="0.35" stroke="${stroke}" stroke-width="2"/>`);
    } else {
      parts.push(`<polyline class="mark" points="${points.join(' ')}" fill="none" stroke="${stroke}" stroke-width="2"/>`);
    }
    if (name) {
      parts.push(`<text x="${WIDTH - MARGIN.right - 4}" y="${MARGIN.top + 14 * (seriesIndex + 1)}" text-anchor="end" font-size="11" fill="${stroke}">${esc(name)}</text>`);
    }
    seriesIndex += 1;
  }
  return wrap(spec, yAxis(yScale) + parts.join('') + frame(spec) +
    xBandAxis(order, (i) => MARGIN.left + i * bandwidth, bandwidth));
}

function renderScatter(spec: ChartSpec): string {
  const x = spec.encodings.x as Encoding;
  const y = spec.encodings.y as Encoding;
  const xs = numbers(spec.data, x.field);
  const ys = numbers(spec.data, y.field);
  const [xLo, xHi] = extent(xs, false);
  const [yLo, yHi] = extent(ys, false);
  const xScale = linearScale(xLo, xHi, MARGIN.left + 8, WIDTH - MARGIN.right - 8);
  const yScale = linearScale(yLo, yHi, HEIGHT - MARGIN.bottom - 8, MARGIN.top + 8);
  const color = primaryColor(spec);
  const dots = xs
    .map((value, i) => `<circle class="mark" cx="${fmt(xScale(value))}" cy="${fmt(yScale(ys[i]))}" r="3.5" fill="${color}" fill-opacity="0.7"/>`)
    .join('');
  return wrap(spec, yAxis(yScale) + dots + frame(spec) + xLinearAxis(xScale));
}

function renderHistogram(spec: ChartSpec): string {
  const x = spec.encodings.x as Encoding;
  const raw = numbers(spec.data, x.field).filter((v) => Number.isFinite(v));
  const binCount = Math.max(1, x.bin ?? 10);
  const lo = Math.min(...raw);
  const hi = Math.max(...raw);
  const span = hi - lo || 1;
  const counts = new Array<number>(binCount).fill(0);
  for (const value of raw) {
    const idx = Math.min(binCount - 1, Math.floor(((value - lo) / span) * binCount));
    counts[idx] += 1;
  }
  const yScale = linearScale(0, Math.max(...counts, 1), HEIGHT - MARGIN.bottom, MARGIN.top);
  const bandwidth = PLOT_W / binCount;
  const color = primaryColor(spec);
  const bars = counts
    .map((count, i) => {
      const left = MARGIN.left + i * bandwidth;
      return `<rect class="mark" x="${fmt(left + 1)}" y="${fmt(yScale(count))}" width="${fmt(bandwidth - 2)}" height="${fmt(HEIGHT - MARGIN.bottom - yScale(count))}" fill="${color}"><title>[${fmt(lo + (span * i) / binCount)}, ${fmt(lo + (span * (i + 1)) / binCount)}): ${count}</title></rect>`;
    })
    .join('');
  const edgeScale = linearScale(lo, hi, MARGIN.left, WIDTH - MARGIN.right);
  return wrap(spec, yAxis(yScale) + bars + frame(spec) + xLinearAxis(edgeScale));
}

function mixColor(t: number): string {
  // white -> steelblue ramp
  const from = [247, 251, 255];
  const to = [33, 102, 172];
  const channel = (i: number) => Math.round(from[i] + (to[i] - from[i]) * t);
  return `rgb(${channel(0)},${channel(1)},${channel(2)})`;
}

function renderHeatmap(spec: ChartSpec): string {
  const x = spec.encodings.x as Encoding;
  const y = spec.encodings.y as Encoding;
  const color = spec.encodings.color as Encoding;
  const xCats = labels(spec.data, x.field);
  const yCats = labels(spec.data, y.field);
  const vals = numbers(spec.data, color.field);
  const xOrder = distinct(xCats);
  const yOrder = distinct(yCats);
  const [lo, hi] = extent(vals, false);
  const cellW = PLOT_W / Math.max(1, xOrder.length);
  const cellH = PLOT_H / Math.max(1, yOrder.length);
  const xIndex = new Map(xOrder.map((c, i) => [c, i]));
  const yIndex = new Map(yOrder.map((c, i) => [c, i]));
  const cells = vals
    .map((value, i) => {
      const cx = MARGIN.left + (xIndex.get(xCats[i]) ?? 0) * cellW;
      const cy = MARGIN.top + (yIndex.get(yCats[i]) ?? 0) * cellH;
      const t = (value - lo) / (hi - lo || 1);
      return `<rect class="mark" x="${fmt(cx)}" y="${fmt(cy)}" width="${fmt(cellW - 1)}" height="${fmt(cellH - 1)}" fill="${mixColor(t)}"><title>${esc(xCats[i])} / ${esc(yCats[i])}: ${fmt(value)}</title></rect>`;
    })
    .join('');
  const legend = [
    `<rect x="${WIDTH - MARGIN.right - 110}" y="${MARGIN.top - 26}" width="70" height="10" fill="url(#heatgrad)"/>`,
    `<defs><linearGradient id="heatgrad"><stop offset="0%" stop-color="${mixColor(0)}"/><stop offset="100%" stop-color="${mixColor(1)}"/></linearGradient></defs>`,
    `<text class="legend" x="${WIDTH - MARGIN.right - 116}" y="${MARGIN.top - 17}" text-anchor="end" font-size="10" fill="#555">${esc(fmtTick(lo))}</text>`,
    `<text class="legend" x="${WIDTH - MARGIN.right - 34}" y="${MARGIN.top - 17}" font-size="10" fill="#555">${esc(fmtTick(hi))}</text>`,
  ].join('');
  const yAxisLabels = yOrder
    .map((label, i) => `<text x="${MARGIN.left - 8}" y="${fmt(MARGIN.top + i * cellH + cellH / 2 + 4)}" text-anchor="end" font-size="11" fill="#555">${esc(label)}</text>`)
    .join('');
  return wrap(spec, cells + legend + yAxisLabels + frame(spec) +
    xBandAxis(xOrder, (i) => MARGIN.left + i * cellW, cellW));
}

function renderPie(spec: ChartSpec): string {
  const x = spec.encodings.x as Encoding;
  const y = spec.encodings.y as Encoding;
  const cats = labels(spec.data, x.field);
  const vals = numbers(spec.data, y.field).map((v) => Math.max(0, v));
  const total = vals.reduce((a, b) => a + b, 0) || 1;
  const cx = WIDTH / 2;
  const cy = (HEIGHT + MARGIN.top - MARGIN.bottom) / 2 + 10;
  const radius = Math.min(PLOT_W, PLOT_H) / 2 - 10;
  const colors = palette(spec);
  let angle = -Math.PI / 2;
  const slices: string[] = [];
  vals.forEach((value, i) => {
    const sweep = (value / total) * Math.PI * 2;
    const end = angle + sweep;
    const large = sweep > Math.PI ? 1 : 0;
    const x1 = cx + radius * Math.cos(angle);
    const y1 = cy + radius * Math.sin(angle);
    const x2 = cx + radius * Math.cos(end);
    const y2 = cy + radius * Math.sin(end);
    const fill = spec.style.mark_color && i === 0 ? spec.style.mark_color : colors[i % colors.length];
    slices.push(`<path class="mark" d="M ${fmt(cx)} ${fmt(cy)} L ${fmt(x1)} ${fmt(y1)} A ${fmt(radius)} ${fmt(radius)} 0 ${large} 1 ${fmt(x2)} ${fmt(y2)} Z" fill="${fill}"><title>${esc(cats[i])}: ${fmt(value)} (${fmt((value / total) * 100)}%)</title></path>`);
    const mid = angle + sweep / 2;
    const lx = cx + (radius + 16) * Math.cos(mid);
    const ly = cy + (radius + 16) * Math.sin(mid);
    slices.push(`<text x="${fmt(lx)}" y="${fmt(ly)}" text-anchor="middle" font-size="11" fill="#333">${esc(cats[i])}</text>`);
    angle = end;
  });
  const title = `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="15" font-weight="bold" fill="#222">${esc(spec.title)}</text>`;
  return wrap(spec, title + slices.join(''));
}

export function chartToSvg(spec: ChartSpec): string {
  switch (spec.mark) {
    case 'bar':
      return renderBar(spec);
    case 'line':
      return renderLineOrArea(spec, false);
    case 'area':
      return renderLineOrArea(spec, true);
    case 'scatter':
      return renderScatter(spec);
    case 'histogram':
      return renderHistogram(spec);
    case 'heatmap':
      return renderHeatmap(spec);
    case 'pie':
      return renderPie(spec);
    default:
      throw new Error(`unsupported mark: ${String(spec.mark)}`);
  }
}
