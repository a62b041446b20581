import { CLASS_COLORS, type PredictResponse, type RiskLabel } from "./types.js";

const ORDER: RiskLabel[] = ["LowRisk", "Alert", "Epidemic"];

export function renderPrediction(
  classEl: HTMLElement,
  barsEl: HTMLElement,
  response: PredictResponse | null,
): void {
  if (response === null) {
    classEl.textContent = "No prediction";
    classEl.style.color = CLASS_COLORS.NoPrediction;
    barsEl.innerHTML = "";
    return;
  }
  classEl.textContent = `${response.state}: ${response.risk_class}`;
  classEl.style.color = CLASS_COLORS[response.risk_class];
  barsEl.innerHTML = ORDER.map((label) => {
    const p = response.probabilities[label] ?? 0;
    const pct = (100 * p).toFixed(1);
    return (
      `<div class="bar-row" data-class="${label}">` +
      `<span class="bar-label">${label}</span>` +
      `<span class="bar-track"><span class="bar-fill" ` +
      `style="width:${pct}%;background:${CLASS_COLORS[label]}"></span></span>` +
      `<span class="bar-value">${pct}%</span></div>`
    );
  }).join("");
}
