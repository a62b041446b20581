import type { SchemaResponse, SliderSpec } from "./types.js";

/** One spec per schema feature, ranges straight from /schema; binary
 * features (per the categorical mask) become toggles. */
export function buildSliderSpecs(schema: SchemaResponse): SliderSpec[] {
  return schema.names.map((name) => {
    const range = schema.ranges[name] ?? { min: 0, max: 1 };
    const toggle = Boolean(schema.categorical_mask[name]);
    const span = range.max - range.min;
    return {
      name,
      unit: schema.units[name] ?? "",
      min: range.min,
      max: range.max,
      step: toggle ? 1 : niceStep(span),
      value: toggle ? 0 : roundTo((range.min + range.max) / 2, niceStep(span)),
      toggle,
    };
  });
}

/** ~200 positions across the range, snapped to a power of ten times 1/2/5. */
export function niceStep(span: number): number {
  if (span <= 0) return 1;
  const raw = span / 200;
  const magnitude = Math.pow(10, Math.floor(Math.log10(raw)));
  const normalized = raw / magnitude;
  const factor = normalized <= 1 ? 1 : normalized <= 2 ? 2 : normalized <= 5 ? 5 : 10;
  return factor * magnitude;
}

export function roundTo(value: number, step: number): number {
  const snapped = Math.round(value / step) * step;
  const decimals = Math.max(0, -Math.floor(Math.log10(step)));
  return Number(snapped.toFixed(Math.min(12, decimals + 1)));
}

export function clampToRange(spec: SliderSpec, value: number): number {
  return Math.min(spec.max, Math.max(spec.min, value));
}

export function specsToFeatures(specs: SliderSpec[]): Record<string, number> {
  const features: Record<string, number> = {};
  for (const spec of specs) features[spec.name] = spec.value;
  return features;
}

/** Preset every slider from a historical row (replay path). Values are
 * clamped into the advertised range, mirroring what the UI allows. */
export function applyRow(
  specs: SliderSpec[],
  row: Record<string, number>,
): SliderSpec[] {
  return specs.map((spec) =>
    row[spec.name] === undefined
      ? spec
      : { ...spec, value: clampToRange(spec, row[spec.name]) },
  );
}
