import type { Point } from "./types.js";

export interface Series {
  label: string;
  points: Point[];
  dashed?: boolean;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logY?: boolean;
  // fixed y range for probability axes; otherwise spans the data
  yRange?: [number, number];
}

const W = 420;
const H = 260;
const PAD = { left: 52, right: 12, top: 26, bottom: 34 };
const COLORS = ["#2563eb", "#dc2626", "#059669", "#9333ea", "#d97706"];

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.001) return v.toExponential(0);
  return String(Math.round(v * 1000) / 1000);
}

/**
 * Plain SVG polyline chart. The only arithmetic here maps data coordinates to
 * pixels; every plotted value arrived verbatim from the API.
 */
export function renderChart(target: HTMLElement, series: Series[], opts: ChartOptions): void {
  const all = series.flatMap((s) => s.points);
  target.innerHTML = "";
  target.classList.add("chart");
  if (all.length === 0) {
    const empty = document.createElement("p");
    empty.className = "chart-empty";
    empty.textContent = `${opts.title}: no data`;
    target.appendChild(empty);
    return;
  }

  const xs = all.map((p) => p[0]);
  const ys = all.map((p) => p[1]);
  let x0 = Math.min(...xs);
  let x1 = Math.max(...xs);
  if (x0 === x1) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  let y0: number;
  let y1: number;
  if (opts.yRange && !opts.logY) {
    [y0, y1] = opts.yRange;
  } else {
    y0 = Math.min(...ys);
    y1 = Math.max(...ys);
    if (y0 === y1) {
      y0 -= 0.5;
      y1 += 0.5;
    }
  }
  if (opts.logY) {
    const positive = ys.filter((v) => v > 0);
    y0 = Math.min(...positive);
    y1 = Math.max(...positive);
    if (y0 === y1) {
      y0 /= 2;
      y1 *= 2;
    }
  }

  const sx = (x: number) => PAD.left + ((x - x0) / (x1 - x0)) * (W - PAD.left - PAD.right);
  const sy = (y: number) => {
    const t = opts.logY
      ? (Math.log(y) - Math.log(y0)) / (Math.log(y1) - Math.log(y0))
      : (y - y0) / (y1 - y0);
    return H - PAD.bottom - t * (H - PAD.top - PAD.bottom);
  };

  const ns = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(ns, "svg");
  svg.setAttribute("viewBox", `0 0 ${W} ${H}`);
  svg.setAttribute("role", "img");
  svg.setAttribute("aria-label", opts.title);

  const frame = document.createElementNS(ns, "rect");
  frame.setAttribute("x", String(PAD.left));
  frame.setAttribute("y", String(PAD.top));
  frame.setAttribute("width", String(W - PAD.left - PAD.right));
  frame.setAttribute("height", String(H - PAD.top - PAD.bottom));
  frame.setAttribute("class", "chart-frame");
  svg.appendChild(frame);

  const title = document.createElementNS(ns, "text");
  title.setAttribute("x", String(W / 2));
  title.setAttribute("y", "16");
  title.setAttribute("class", "chart-title");
  title.textContent = opts.title;
  svg.appendChild(title);

  const labels: Array<[string, number, number, string]> = [
    [fmtTick(x0), PAD.left, H - 12, "chart-tick"],
    [fmtTick(x1), W - PAD.right, H - 12, "chart-tick chart-tick-end"],
    [fmtTick(y0), PAD.left - 6, H - PAD.bottom, "chart-tick chart-tick-y"],
    [fmtTick(y1), PAD.left - 6, PAD.top + 8, "chart-tick chart-tick-y"],
    [opts.xLabel, W / 2, H - 12, "chart-axis"],
    [opts.yLabel, 14, H / 2, "chart-axis chart-axis-y"],
  ];
  for (const [text, x, y, cls] of labels) {
    const el = document.createElementNS(ns, "text");
    el.setAttribute("x", String(x));
    el.setAttribute("y", String(y));
    el.setAttribute("class", cls);
    if (cls.includes("chart-axis-y")) {
      el.setAttribute("transform", `rotate(-90 14 ${H / 2})`);
    }
    el.textContent = text;
    svg.appendChild(el);
  }

  series.forEach((s, i) => {
    const usable = opts.logY ? s.points.filter((p) => p[1] > 0) : s.points;
    if (usable.length === 0) return;
    const line = document.createElementNS(ns, "polyline");
    line.setAttribute(
      "points",
      usable.map((p) => `${sx(p[0]).toFixed(1)},${sy(p[1]).toFixed(1)}`).join(" "),
    );
    line.setAttribute("class", "chart-line");
    line.setAttribute("stroke", COLORS[i % COLORS.length]);
    if (s.dashed) line.setAttribute("stroke-dasharray", "6 4");
    svg.appendChild(line);
  });

  const legend = document.createElement("div");
  legend.className = "chart-legend";
  series.forEach((s, i) => {
    const item = document.createElement("span");
    item.style.color = COLORS[i % COLORS.length];
    item.textContent = (s.dashed ? "┄ " : "— ") + s.label;
    legend.appendChild(item);
  });

  target.appendChild(svg);
  target.appendChild(legend);
}
