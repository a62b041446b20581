import { ApiError, ServiceClient } from "./api.js";
import { serviceBaseUrl } from "./config.js";
import {
  emptyMapState,
  recordPrediction,
  renderMap,
  selectState,
  type MapState,
} from "./map.js";
import { renderPrediction } from "./probbars.js";
import { createScheduler } from "./scheduler.js";
import {
  buildSliderSpecs,
  clampToRange,
  roundTo,
  specsToFeatures,
} from "./sliders.js";
import { renderTrend } from "./trend.js";
import type { PredictRequest, PredictResponse, SliderSpec } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const client = new ServiceClient(serviceBaseUrl());
  const banner = el<HTMLDivElement>("banner");
  const mapEl = el<HTMLDivElement>("map");
  const slidersEl = el<HTMLDivElement>("sliders");
  const classEl = el<HTMLDivElement>("predicted-class");
  const barsEl = el<HTMLDivElement>("prob-bars");
  const trendEl = el<HTMLDivElement>("trend");
  const stateSelect = el<HTMLSelectElement>("state-select");

  let specs: SliderSpec[] = [];
  let roster: string[] = [];
  let mapState: MapState = emptyMapState();

  const scheduler = createScheduler<PredictRequest, PredictResponse>({
    send: (request) => client.predict(request),
    onResult: (response) => {
      banner.hidden = true;
      mapState = recordPrediction(mapState, response.state,
        response.risk_class);
      renderPrediction(classEl, barsEl, response);
      drawMap();
    },
    onError: (error) => {
      renderPrediction(classEl, barsEl, null);
      showError(error);
    },
  });

  function showError(error: unknown): void {
    banner.hidden = false;
    banner.textContent =
      error instanceof ApiError
        ? `Service error: ${error.detail}`
        : "Service unreachable - is `rsv-sentinel serve` running? Retrying on next change.";
  }

  function drawMap(): void {
    renderMap(mapEl, roster, mapState, (state) => {
      stateSelect.value = state;
      void onStateChange(state);
    });
  }

  function requestPrediction(): void {
    if (mapState.selected === null) return;
    scheduler.request({
      state: mapState.selected,
      features: specsToFeatures(specs),
    });
  }

  async function onStateChange(state: string): Promise<void> {
    mapState = selectState(mapState, state);
    drawMap();
    // changing only the state reissues prediction with unchanged features
    requestPrediction();
    try {
      const trend = await client.trend(state);
      renderTrend(trendEl, trend.series, state);
    } catch (error) {
      showError(error);
      renderTrend(trendEl, [], state);
    }
  }

  function renderSliders(): void {
    slidersEl.innerHTML = specs
      .map((spec, index) => {
        if (spec.toggle) {
          const checked = spec.value >= 0.5 ? "checked" : "";
          return (
            `<label class="slider-row toggle" data-name="${spec.name}">` +
            `<span class="slider-name">${spec.name}</span>` +
            `<input type="checkbox" data-index="${index}" ${checked}>` +
            `<span class="slider-value">${spec.value ? "Yes" : "No"}</span>` +
            `</label>`
          );
        }
        return (
          `<label class="slider-row" data-name="${spec.name}">` +
          `<span class="slider-name">${spec.name}` +
          (spec.unit ? ` <em>(${spec.unit})</em>` : "") + `</span>` +
          `<input type="range" data-index="${index}" min="${spec.min}"` +
          ` max="${spec.max}" step="${spec.step}" value="${spec.value}">` +
          `<span class="slider-value">${spec.value}</span>` +
          `</label>`
        );
      })
      .join("");
    slidersEl.querySelectorAll("input").forEach((input) => {
      input.addEventListener("input", () => {
        const index = Number(input.dataset["index"]);
        const spec = specs[index];
        const value = spec.toggle
          ? (input as HTMLInputElement).checked ? 1 : 0
          : clampToRange(spec, roundTo(Number(input.value), spec.step));
        specs[index] = { ...spec, value };
        const label = input.closest(".slider-row")?.querySelector(
          ".slider-value",
        );
        if (label) label.textContent = spec.toggle
          ? (value ? "Yes" : "No")
          : String(value);
        requestPrediction();
      });
    });
  }

  try {
    const [schema, states] = await Promise.all([
      client.schema(),
      client.states(),
    ]);
    specs = buildSliderSpecs(schema);
    roster = states.states;
  } catch (error) {
    showError(error);
    return;
  }

  stateSelect.innerHTML = roster
    .map((s) => `<option value="${s}">${s}</option>`)
    .join("");
  stateSelect.addEventListener("change", () => {
    void onStateChange(stateSelect.value);
  });

  renderSliders();
  drawMap();
  await onStateChange(roster[0]);
}

void boot();
