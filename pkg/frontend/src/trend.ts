import {
  ALERT_THRESHOLD,
  CLASS_COLORS,
  EPIDEMIC_THRESHOLD,
  type TrendPoint,
} from "./types.js";

export interface ChartBand {
  label: "LowRisk" | "Alert" | "Epidemic";
  yTop: number;
  yBottom: number;
}

export interface ChartPoint {
  x: number;
  y: number;
  weekEnding: string;
  rate: number;
}

export interface ChartGeometry {
  width: number;
  height: number;
  bands: ChartBand[];
  points: ChartPoint[];
  path: string;
  yTicks: { y: number; value: number }[];
  maxRate: number;
}

/** Pixel geometry for the weekly-rate chart. The class bands sit at
 * exactly rate 5 and rate 20 in value space. */
export function trendGeometry(
  series: TrendPoint[],
  width = 640,
  height = 240,
): ChartGeometry {
  const maxRate = Math.max(
    EPIDEMIC_THRESHOLD * 1.25,
    ...series.map((p) => p.rate),
  );
  const toY = (rate: number) => height - (rate / maxRate) * height;
  const n = series.length;
  const toX = (index: number) => (n <= 1 ? width / 2 : (index / (n - 1)) * width);

  const points = series.map((p, i) => ({
    x: toX(i),
    y: toY(p.rate),
    weekEnding: p.week_ending,
    rate: p.rate,
  }));
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(1)},${p.y.toFixed(1)}`)
    .join(" ");

  const bands: ChartBand[] = [
    { label: "LowRisk", yTop: toY(ALERT_THRESHOLD), yBottom: height },
    {
      label: "Alert",
      yTop: toY(EPIDEMIC_THRESHOLD),
      yBottom: toY(ALERT_THRESHOLD),
    },
    { label: "Epidemic", yTop: 0, yBottom: toY(EPIDEMIC_THRESHOLD) },
  ];
  const yTicks = [0, ALERT_THRESHOLD, EPIDEMIC_THRESHOLD, Math.round(maxRate)]
    .map((value) => ({ y: toY(value), value }));
  return { width, height, bands, points, path, yTicks, maxRate };
}

export function nearestPoint(
  geometry: ChartGeometry,
  x: number,
): ChartPoint | null {
  if (geometry.points.length === 0) return null;
  let best = geometry.points[0];
  for (const point of geometry.points) {
    if (Math.abs(point.x - x) < Math.abs(best.x - x)) best = point;
  }
  return best;
}

export function renderTrend(
  container: HTMLElement,
  series: TrendPoint[],
  state: string,
): void {
  if (series.length === 0) {
    container.innerHTML = `<p class="placeholder">no data for ${state}</p>`;
    return;
  }
  const geometry = trendGeometry(series);
  const { width, height } = geometry;
  const svg = [
    `<svg viewBox="0 0 ${width + 46} ${height + 26}" class="trend"`,
    ` role="img" aria-label="weekly rate trend for ${state}">`,
    `<g transform="translate(40, 6)">`,
  ];
  for (const band of geometry.bands) {
    svg.push(
      `<rect x="0" y="${band.yTop.toFixed(1)}" width="${width}"`,
      ` height="${(band.yBottom - band.yTop).toFixed(1)}"`,
      ` fill="${CLASS_COLORS[band.label]}" opacity="0.14"`,
      ` data-band="${band.label}"></rect>`,
    );
  }
  for (const tick of geometry.yTicks) {
    svg.push(
      `<text x="-6" y="${tick.y + 4}" text-anchor="end" font-size="10"`,
      ` fill="#555">${tick.value}</text>`,
      `<line x1="0" x2="${width}" y1="${tick.y}" y2="${tick.y}"`,
      ` stroke="#0002" stroke-dasharray="3 4"></line>`,
    );
  }
  svg.push(
    `<path d="${geometry.path}" fill="none" stroke="#2b5d8a"`,
    ` stroke-width="1.8"></path>`,
  );
  for (const point of geometry.points) {
    svg.push(
      `<circle cx="${point.x.toFixed(1)}" cy="${point.y.toFixed(1)}" r="2.4"`,
      ` fill="#2b5d8a" data-week="${point.weekEnding}"`,
      ` data-rate="${point.rate}"><title>${point.weekEnding}: ` +
        `${point.rate} per 100k</title></circle>`,
    );
  }
  svg.push("</g></svg>");
  container.innerHTML = svg.join("");
}
