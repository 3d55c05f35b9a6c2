// Figure renderers for the four harness CSV products.
//
// Styling follows the published figure conventions: initial profile dotted,
// intermediates thin, final solid; the substrate drawn as a heavy dark line;
// pendant profiles mirrored about x = 0; order plots in log-log with
// reference slopes 1 and 2.

import { writeFileSync, mkdirSync } from 'node:fs';
import { dirname } from 'node:path';

import { readCsv, Table } from './csv.js';
import { encodePng } from './png.js';
import { BLACK, BLUE, Color, GRAY, GREEN, LIGHT, ORANGE, RED, Raster } from './raster.js';

export const WIDTH = 720;
export const HEIGHT = 480;
const MARGIN = { left: 62, right: 16, top: 18, bottom: 40 };

export interface FigureSpec {
  kind: 'evolution' | 'angles' | 'pendant' | 'order';
  inputs: string[];
  output: string;
}

interface Axes {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
  logX?: boolean;
  logY?: boolean;
}

class Frame {
  constructor(readonly r: Raster, readonly ax: Axes) {}

  px(x: number): number {
    const { x0, x1, logX } = this.ax;
    const t = logX
      ? (Math.log10(x) - Math.log10(x0)) / (Math.log10(x1) - Math.log10(x0))
      : (x - x0) / (x1 - x0);
    return MARGIN.left + t * (WIDTH - MARGIN.left - MARGIN.right);
  }

  py(y: number): number {
    const { y0, y1, logY } = this.ax;
    const t = logY
      ? (Math.log10(y) - Math.log10(y0)) / (Math.log10(y1) - Math.log10(y0))
      : (y - y0) / (y1 - y0);
    return HEIGHT - MARGIN.bottom - t * (HEIGHT - MARGIN.top - MARGIN.bottom);
  }

  curve(xs: number[], ys: number[], c: Color, thick = 1, dotted = false): void {
    this.r.polyline(xs.map((x) => this.px(x)), ys.map((y) => this.py(y)), c, thick, dotted);
  }

  marker(x: number, y: number, c: Color): void {
    this.r.dot(Math.round(this.px(x)), Math.round(this.py(y)), c, 5);
  }
}

function fmtTick(v: number): string {
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    const s = v.toPrecision(3);
    return s.includes('.') ? s.replace(/\.?0+$/, '') : s;
  }
  return v.toExponential(0).replace('e', 'e');
}

function drawAxes(r: Raster, ax: Axes, xLabel: string, yLabel: string): Frame {
  const f = new Frame(r, ax);
  const xpix0 = MARGIN.left;
  const xpix1 = WIDTH - MARGIN.right;
  const ypix0 = HEIGHT - MARGIN.bottom;
  const ypix1 = MARGIN.top;
  // ticks: 5 linear divisions, or decades in log mode
  const xticks = ax.logX ? decades(ax.x0, ax.x1) : linspace(ax.x0, ax.x1, 5);
  const yticks = ax.logY ? decades(ax.y0, ax.y1) : linspace(ax.y0, ax.y1, 5);
  for (const t of xticks) {
    const x = f.px(t);
    r.line(x, ypix0, x, ypix1, LIGHT);
    r.line(x, ypix0, x, ypix0 + 4, BLACK);
    r.text(x - 3 * fmtTick(t).length, ypix0 + 8, fmtTick(t), BLACK);
  }
  for (const t of yticks) {
    const y = f.py(t);
    r.line(xpix0, y, xpix1, y, LIGHT);
    r.line(xpix0 - 4, y, xpix0, y, BLACK);
    const s = fmtTick(t);
    r.text(xpix0 - 8 - 6 * s.length, y - 3, s, BLACK);
  }
  r.line(xpix0, ypix0, xpix1, ypix0, BLACK);
  r.line(xpix0, ypix0, xpix0, ypix1, BLACK);
  r.text((xpix0 + xpix1) / 2 - 3 * xLabel.length, HEIGHT - 12, xLabel, BLACK);
  r.text(6, ypix1 - 4, yLabel, BLACK);
  return f;
}

function linspace(a: number, b: number, n: number): number[] {
  return Array.from({ length: n + 1 }, (_, i) => a + ((b - a) * i) / n);
}

function decades(a: number, b: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(a) - 1e-12); e <= Math.floor(Math.log10(b) + 1e-12); e++) {
    out.push(10 ** e);
  }
  return out.length >= 2 ? out : [a, b];
}

function span(vals: number[], padFrac = 0.06): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of vals) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  const pad = (hi - lo) * padFrac;
  return [lo - pad, hi + pad];
}

function groupByTime(table: Table): Map<number, { x: number[]; h: number[]; w: number[] }> {
  const groups = new Map<number, { x: number[]; h: number[]; w: number[] }>();
  const t = table.columns.get('t')!;
  const x = table.columns.get('x')!;
  const h = table.columns.get('h')!;
  const w = table.columns.get('w')!;
  for (let i = 0; i < table.rows; i++) {
    let g = groups.get(t[i]);
    if (!g) {
      g = { x: [], h: [], w: [] };
      groups.set(t[i], g);
    }
    g.x.push(x[i]);
    g.h.push(h[i]);
    g.w.push(w[i]);
  }
  return groups;
}

function renderEvolution(r: Raster, inputs: string[]): void {
  const table = readCsv(inputs[0], ['t', 'x', 'h', 'w']);
  if (table.rows === 0) return; // empty axes for a header-only file
  const groups = groupByTime(table);
  const times = [...groups.keys()].sort((a, b) => a - b);
  const allX: number[] = [];
  const allY: number[] = [];
  for (const g of groups.values()) {
    allX.push(...g.x);
    allY.push(...g.h, ...g.w);
  }
  const [x0, x1] = span(allX);
  const [y0, y1] = span(allY);
  const f = drawAxes(r, { x0, x1, y0, y1 }, 'x', 'h');
  // substrate from the densest snapshot
  const first = groups.get(times[0])!;
  f.curve(first.x, first.w, BLACK, 3);
  times.forEach((t, i) => {
    const g = groups.get(t)!;
    if (i === 0) {
      f.curve(g.x, g.h, BLUE, 1, true); // initial: dotted
    } else if (i === times.length - 1) {
      f.curve(g.x, g.h, BLUE, 3); // final: solid heavy
      f.curve(g.x, g.w, BLACK, 3); // substrate under the final footprint
    } else {
      f.curve(g.x, g.h, RED, 1); // intermediates: thin
    }
  });
}

function renderAngles(r: Raster, inputs: string[]): void {
  const table = readCsv(inputs[0], ['t', 'a', 'b', 'lambda', 'theta_a', 'theta_b', 'volume', 'energy']);
  if (table.rows === 0) return;
  const t = table.columns.get('t')!;
  const tha = table.columns.get('theta_a')!;
  const thb = table.columns.get('theta_b')!;
  const [x0, x1] = span(t);
  const [y0, y1] = span([...tha, ...thb]);
  const f = drawAxes(r, { x0, x1, y0, y1 }, 't', 'theta');
  f.curve(t, tha, RED, 2);
  f.curve(t, thb, BLUE, 2);
  r.text(WIDTH - 140, MARGIN.top + 6, 'theta a', RED);
  r.text(WIDTH - 140, MARGIN.top + 18, 'theta b', BLUE);
}

function renderPendant(r: Raster, inputs: string[]): void {
  const allX: number[] = [];
  const allU: number[] = [];
  const profiles: { u: number[]; X: number[] }[] = [];
  for (const input of inputs) {
    const table = readCsv(input, ['u', 'X']);
    if (table.rows === 0) continue;
    const u = table.columns.get('u')!;
    const X = table.columns.get('X')!;
    profiles.push({ u, X });
    allX.push(...X.map((v) => Math.abs(v)));
    allU.push(...u);
  }
  if (profiles.length === 0) return;
  const xmax = Math.max(...allX) * 1.1;
  const [u0, u1] = span(allU);
  const f = drawAxes(r, { x0: -xmax, x1: xmax, y0: u0, y1: u1 }, 'X', 'u');
  const colors = [BLUE, RED, GREEN, ORANGE];
  profiles.forEach((p, i) => {
    const c = colors[i % colors.length];
    f.curve(p.X, p.u, c, 2); // right half
    f.curve(p.X.map((v) => -v), p.u, c, 2); // mirrored about x = 0
  });
}

function renderOrder(r: Raster, inputs: string[]): void {
  const table = readCsv(inputs[0], ['order', 'M', 'error', 'alpha']);
  const labels = table.raw.get('order')!;
  const M = table.columns.get('M')!;
  const err = table.columns.get('error')!;
  if (table.rows === 0) {
    return;
  }
  const [m0, m1] = [Math.min(...M) / 1.3, Math.max(...M) * 1.3];
  const [e0, e1] = [Math.min(...err) / 3, Math.max(...err) * 3];
  const f = drawAxes(r, { x0: m0, x1: m1, y0: e0, y1: e1, logX: true, logY: true }, 'M', 'error');
  const series = new Map<string, { M: number[]; e: number[] }>();
  for (let i = 0; i < table.rows; i++) {
    let s = series.get(labels[i]);
    if (!s) {
      s = { M: [], e: [] };
      series.set(labels[i], s);
    }
    s.M.push(M[i]);
    s.e.push(err[i]);
  }
  const colors = [BLUE, RED, GREEN, ORANGE];
  let idx = 0;
  for (const [label, s] of series) {
    const c = colors[idx % colors.length];
    f.curve(s.M, s.e, c, 2);
    s.M.forEach((m, i) => f.marker(m, s.e[i], c));
    r.text(WIDTH - 170, MARGIN.top + 6 + 12 * idx, `${label} order`, c);
    idx++;
  }
  // reference slopes 1 and 2 anchored at the top-left data point
  const mRef = Math.min(...M);
  const eRef = Math.max(...err);
  const mEnd = Math.max(...M);
  for (const [slope, c] of [[1, GRAY] as const, [2, GRAY] as const]) {
    f.curve([mRef, mEnd], [eRef, eRef * (mRef / mEnd) ** slope], c, 1);
    r.text(WIDTH - 170, MARGIN.top + 6 + 12 * (idx + slope - 1), `slope ${slope}`, c);
  }
}

export function renderFigure(spec: FigureSpec): Buffer {
  const r = new Raster(WIDTH, HEIGHT);
  switch (spec.kind) {
    case 'evolution':
      renderEvolution(r, spec.inputs);
      break;
    case 'angles':
      renderAngles(r, spec.inputs);
      break;
    case 'pendant':
      renderPendant(r, spec.inputs);
      break;
    case 'order':
      renderOrder(r, spec.inputs);
      break;
    default:
      throw new Error(`unknown figure kind ${(spec as FigureSpec).kind}`);
  }
  return encodePng(WIDTH, HEIGHT, r.rgb);
}

export function writeFigure(spec: FigureSpec): string {
  const png = renderFigure(spec);
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, png);
  return spec.output;
}
