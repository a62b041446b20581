import { describe, expect, it } from "vitest";
import { nearestPoint, trendGeometry } from "./trend.js";
import type { TrendPoint } from "./types.js";

function series(rates: number[]): TrendPoint[] {
  return rates.map((rate, i) => ({
    week_ending: `2023-10-${String(i + 1).padStart(2, "0")}`,
    rate,
    label: rate <= 5 ? "LowRisk" : rate < 20 ? "Alert" : "Epidemic",
  }));
}

describe("trend chart geometry", () => {
  it("draws the class band edges at exactly rate 5 and rate 20", () => {
    const geometry = trendGeometry(series([0, 10, 42]), 600, 200);
    const toRate = (y: number) => (1 - y / 200) * geometry.maxRate;
    const low = geometry.bands.find((b) => b.label === "LowRisk")!;
    const alert = geometry.bands.find((b) => b.label === "Alert")!;
    const epidemic = geometry.bands.find((b) => b.label === "Epidemic")!;
    expect(toRate(low.yTop)).toBeCloseTo(5, 10);
    expect(low.yBottom).toBe(200);
    expect(toRate(alert.yBottom)).toBeCloseTo(5, 10);
    expect(toRate(alert.yTop)).toBeCloseTo(20, 10);
    expect(toRate(epidemic.yBottom)).toBeCloseTo(20, 10);
    expect(epidemic.yTop).toBe(0);
  });

  it("orders points by week along x", () => {
    const geometry = trendGeometry(series([1, 2, 3, 4, 5]));
    const xs = geometry.points.map((p) => p.x);
    expect([...xs].sort((a, b) => a - b)).toEqual(xs);
    expect(geometry.points[0].weekEnding < geometry.points[4].weekEnding)
      .toBe(true);
  });

  it("handles a single-point series", () => {
    const geometry = trendGeometry(series([8]), 600, 200);
    expect(geometry.points).toHaveLength(1);
    expect(geometry.points[0].x).toBe(300);
    expect(geometry.path.startsWith("M")).toBe(true);
  });

  it("keeps the rate axis tall enough for the epidemic band", () => {
    const geometry = trendGeometry(series([0.5, 1]), 600, 200);
    expect(geometry.maxRate).toBeGreaterThanOrEqual(25);
  });

  it("nearestPoint resolves hover targets", () => {
    const geometry = trendGeometry(series([1, 2, 3]), 600, 200);
    expect(nearestPoint(geometry, 0)!.weekEnding).toBe("2023-10-01");
    expect(nearestPoint(geometry, 600)!.weekEnding).toBe("2023-10-03");
    expect(nearestPoint(trendGeometry([], 600, 200), 10)).toBeNull();
  });
});
