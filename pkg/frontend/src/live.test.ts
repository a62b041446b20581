// Integration against a locally running `rsv-sentinel serve` instance.
// Skipped automatically when nothing is listening.

import { describe, expect, it } from "vitest";
import { ServiceClient } from "./api.js";
import { createScheduler } from "./scheduler.js";
import { buildSliderSpecs, specsToFeatures } from "./sliders.js";
import type { PredictRequest, PredictResponse } from "./types.js";

const BASE = process.env.RSV_SERVICE_URL ?? "http://127.0.0.1:8000";

async function serviceUp(): Promise<boolean> {
  try {
    const controller = new AbortController();
    const timer = setTimeout(() => controller.abort(), 700);
    const response = await fetch(`${BASE}/health`,
      { signal: controller.signal });
    clearTimeout(timer);
    return response.ok;
  } catch {
    return false;
  }
}

describe("live service", async () => {
  const up = await serviceUp();

  it.skipIf(!up)("slider change to map update under 500 ms", async () => {
    const client = new ServiceClient(BASE);
    const schema = await client.schema();
    const states = (await client.states()).states;
    const specs = buildSliderSpecs(schema);
    const started = performance.now();
    const response = await new Promise<PredictResponse>((resolve, reject) => {
      const scheduler = createScheduler<PredictRequest, PredictResponse>({
        send: (request) => client.predict(request),
        onResult: resolve,
        onError: reject,
      }); // real 250 ms debounce, real HTTP hop
      scheduler.request({
        state: states[0],
        features: specsToFeatures(specs),
      });
    });
    const elapsed = performance.now() - started;
    expect(["LowRisk", "Alert", "Epidemic"]).toContain(response.risk_class);
    expect(elapsed).toBeLessThan(500);
  });

  it.skipIf(!up)("historical trend carries labeled weekly points", async () => {
    const client = new ServiceClient(BASE);
    const states = (await client.states()).states;
    const trend = await client.trend(states[0]);
    expect(trend.series.length).toBeGreaterThan(0);
    const point = trend.series[0];
    expect(point).toHaveProperty("week_ending");
    expect(point).toHaveProperty("rate");
    expect(["LowRisk", "Alert", "Epidemic"]).toContain(point.label);
  });
});
