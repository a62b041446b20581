export type RiskLabel = "LowRisk" | "Alert" | "Epidemic";

export type FillClass = RiskLabel | "NoPrediction";

export interface SchemaResponse {
  names: string[];
  units: Record<string, string>;
  categorical_mask: Record<string, boolean>;
  ranges: Record<string, { min: number; max: number }>;
}

export interface PredictRequest {
  state: string;
  features: Record<string, number>;
}

export interface PredictResponse {
  state: string;
  risk_class: RiskLabel;
  probabilities: Record<RiskLabel, number>;
  model_id: string;
}

export interface TrendPoint {
  week_ending: string;
  rate: number;
  label: RiskLabel;
}

export interface TrendResponse {
  state: string;
  series: TrendPoint[];
}

export interface SliderSpec {
  name: string;
  unit: string;
  min: number;
  max: number;
  step: number;
  value: number;
  toggle: boolean; // binary predictors render as a toggle, not a slider
}

export const ALERT_THRESHOLD = 5;
export const EPIDEMIC_THRESHOLD = 20;

export const CLASS_COLORS: Record<FillClass, string> = {
  LowRisk: "#4f9d69",
  Alert: "#e6a817",
  Epidemic: "#c5443c",
  NoPrediction: "#b9c0c7",
};
