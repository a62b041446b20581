// @vitest-environment jsdom
//
// Acceptance: replaying 20 labeled historical panel rows through the
// slider pipeline reproduces the service's class for every row - the
// dashboard performs no local inference, so whatever the service answers
// is what renders. Fetch is stubbed with the recorded service responses
// (captured from the real prediction service); the interception also
// proves every displayed class came from a /predict response.

import { afterEach, describe, expect, it, vi } from "vitest";
import fixture from "./fixtures/replay.json";
import { ServiceClient } from "./api.js";
import { emptyMapState, fillFor, recordPrediction } from "./map.js";
import { renderPrediction } from "./probbars.js";
import { createScheduler } from "./scheduler.js";
import { applyRow, buildSliderSpecs, specsToFeatures } from "./sliders.js";
import type {
  PredictRequest,
  PredictResponse,
  SchemaResponse,
} from "./types.js";

type FixtureRow = {
  state: string;
  panel_label: string;
  features: Record<string, number>;
  service_response: PredictResponse;
};

const rows = (fixture as { rows: FixtureRow[] }).rows;

function schemaFromFixture(): SchemaResponse {
  const names = Object.keys(rows[0].features);
  const ranges: SchemaResponse["ranges"] = {};
  for (const name of names) {
    const values = rows.map((r) => r.features[name]);
    ranges[name] = { min: Math.min(...values), max: Math.max(...values) };
  }
  return {
    names,
    units: Object.fromEntries(names.map((n) => [n, ""])),
    categorical_mask: Object.fromEntries(
      names.map((n) => [n, n === "rsv_season"]),
    ),
    ranges,
  };
}

function stubService(): { predicts: PredictRequest[] } {
  const predicts: PredictRequest[] = [];
  vi.stubGlobal("fetch", async (url: string, init?: RequestInit) => {
    if (url.endsWith("/predict")) {
      const request = JSON.parse(init!.body as string) as PredictRequest;
      predicts.push(request);
      const match = rows.find(
        (r) =>
          r.state === request.state &&
          Object.entries(r.features).every(
            ([k, v]) => Math.abs(request.features[k] - v) < 1e-9,
          ),
      );
      if (!match) {
        return new Response(JSON.stringify({ detail: "no fixture row" }),
          { status: 422 });
      }
      return new Response(JSON.stringify(match.service_response), {
        status: 200,
        headers: { "Content-Type": "application/json" },
      });
    }
    throw new Error(`unexpected fetch ${url}`);
  });
  return { predicts };
}

describe("what-if replay", () => {
  afterEach(() => vi.unstubAllGlobals());

  it("has a 20-row fixture spanning all three classes", () => {
    expect(rows).toHaveLength(20);
    expect(new Set(rows.map((r) => r.panel_label)))
      .toEqual(new Set(["LowRisk", "Alert", "Epidemic"]));
  });

  it("reproduces the service's class for all 20 rows (100% agreement)",
    async () => {
      const { predicts } = stubService();
      const client = new ServiceClient("http://svc");
      const schema = schemaFromFixture();
      const baseSpecs = buildSliderSpecs(schema);
      const classEl = document.createElement("div");
      const barsEl = document.createElement("div");
      let mapState = emptyMapState();

      let agreements = 0;
      for (const row of rows) {
        const rendered = await new Promise<string>((resolve, reject) => {
          const scheduler = createScheduler<PredictRequest, PredictResponse>({
            send: (request) => client.predict(request),
            onResult: (response) => {
              mapState = recordPrediction(mapState, response.state,
                response.risk_class);
              renderPrediction(classEl, barsEl, response);
              resolve(response.risk_class);
            },
            onError: reject,
          }, 1);
          const specs = applyRow(baseSpecs, row.features);
          scheduler.request({
            state: row.state,
            features: specsToFeatures(specs),
          });
        });
        expect(rendered).toBe(row.service_response.risk_class);
        expect(classEl.textContent).toContain(
          row.service_response.risk_class);
        expect(fillFor(row.state, mapState))
          .toBe(row.service_response.risk_class);
        agreements += 1;
      }
      expect(agreements).toBe(20);
      // every displayed class came over the wire, one request per row
      expect(predicts).toHaveLength(20);
    });

  it("probability bars mirror the service response", async () => {
    stubService();
    const classEl = document.createElement("div");
    const barsEl = document.createElement("div");
    renderPrediction(classEl, barsEl, rows[0].service_response);
    const rendered = barsEl.querySelectorAll(".bar-row");
    expect(rendered).toHaveLength(3);
    const firstWidth = (rendered[0].querySelector(".bar-fill") as HTMLElement)
      .style.width;
    const expected = rows[0].service_response.probabilities.LowRisk * 100;
    expect(parseFloat(firstWidth)).toBeCloseTo(expected, 1);
  });

  it("full debounced round trip stays under 500 ms", async () => {
    stubService();
    const client = new ServiceClient("http://svc");
    const row = rows[0];
    const started = performance.now();
    const rendered = await new Promise<string>((resolve, reject) => {
      const scheduler = createScheduler<PredictRequest, PredictResponse>({
        send: (request) => client.predict(request),
        onResult: (response) => resolve(response.risk_class),
        onError: reject,
      }); // real 250 ms debounce
      scheduler.request({ state: row.state, features: row.features });
    });
    const elapsed = performance.now() - started;
    expect(rendered).toBe(row.service_response.risk_class);
    expect(elapsed).toBeLessThan(500);
  });

  it("service failure shows NoPrediction without losing slider state", async () => {
    vi.stubGlobal("fetch", async () => {
      throw new TypeError("network down");
    });
    const client = new ServiceClient("http://svc");
    const classEl = document.createElement("div");
    const barsEl = document.createElement("div");
    const specs = applyRow(buildSliderSpecs(schemaFromFixture()),
      rows[0].features);
    const failed = await new Promise<boolean>((resolve) => {
      const scheduler = createScheduler<PredictRequest, PredictResponse>({
        send: (request) => client.predict(request),
        onResult: () => resolve(false),
        onError: () => {
          renderPrediction(classEl, barsEl, null);
          resolve(true);
        },
      }, 1);
      scheduler.request({ state: rows[0].state,
        features: specsToFeatures(specs) });
    });
    expect(failed).toBe(true);
    expect(classEl.textContent).toBe("No prediction");
    // slider state is untouched by the failure
    expect(specsToFeatures(specs)).toEqual(rows[0].features);
  });
});
