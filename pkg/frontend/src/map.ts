import { CLASS_COLORS, type FillClass } from "./types.js";

/** Tile-grid cartogram of the 50 states plus DC (the usual newsroom
 * layout). Offline-friendly stand-in for a geographic choropleth. */
export const TILE_GRID: Record<string, [row: number, col: number]> = {
  AK: [0, 0], ME: [0, 11],
  VT: [1, 10], NH: [1, 11],
  WA: [2, 1], ID: [2, 2], MT: [2, 3], ND: [2, 4], MN: [2, 5], IL: [2, 6],
  WI: [2, 7], MI: [2, 8], NY: [2, 9], RI: [2, 10], MA: [2, 11],
  OR: [3, 1], NV: [3, 2], WY: [3, 3], SD: [3, 4], IA: [3, 5], IN: [3, 6],
  OH: [3, 7], PA: [3, 8], NJ: [3, 9], CT: [3, 10],
  CA: [4, 1], UT: [4, 2], CO: [4, 3], NE: [4, 4], MO: [4, 5], KY: [4, 6],
  WV: [4, 7], VA: [4, 8], MD: [4, 9], DE: [4, 10],
  AZ: [5, 2], NM: [5, 3], KS: [5, 4], AR: [5, 5], TN: [5, 6], NC: [5, 7],
  SC: [5, 8], DC: [5, 9],
  OK: [6, 4], LA: [6, 5], MS: [6, 6], AL: [6, 7], GA: [6, 8],
  HI: [7, 0], TX: [7, 4], FL: [7, 9],
};

export interface TileView {
  state: string;
  row: number;
  col: number;
  fill: string;
  selectable: boolean;
  selected: boolean;
}

export interface MapState {
  fills: Record<string, FillClass>;
  selected: string | null;
}

export function emptyMapState(): MapState {
  return { fills: {}, selected: null };
}

export function fillFor(state: string, mapState: MapState): FillClass {
  return mapState.fills[state] ?? "NoPrediction";
}

/** Pure view model: every tile with its color and interactivity. */
export function tileViews(roster: string[], mapState: MapState): TileView[] {
  const rosterSet = new Set(roster);
  return Object.entries(TILE_GRID).map(([state, [row, col]]) => ({
    state,
    row,
    col,
    fill: rosterSet.has(state)
      ? CLASS_COLORS[fillFor(state, mapState)]
      : "#e8eaed",
    selectable: rosterSet.has(state),
    selected: mapState.selected === state,
  }));
}

export function recordPrediction(
  mapState: MapState,
  state: string,
  fill: FillClass,
): MapState {
  return { ...mapState, fills: { ...mapState.fills, [state]: fill } };
}

export function selectState(mapState: MapState, state: string): MapState {
  return { ...mapState, selected: state };
}

const TILE = 34;
const GAP = 4;

export function renderMap(
  container: HTMLElement,
  roster: string[],
  mapState: MapState,
  onSelect: (state: string) => void,
): void {
  const views = tileViews(roster, mapState);
  const rows = Math.max(...views.map((v) => v.row)) + 1;
  const cols = Math.max(...views.map((v) => v.col)) + 1;
  const svg = [
    `<svg viewBox="0 0 ${cols * (TILE + GAP)} ${rows * (TILE + GAP)}"`,
    ` role="img" aria-label="US state risk map">`,
  ];
  for (const view of views) {
    const x = view.col * (TILE + GAP);
    const y = view.row * (TILE + GAP);
    const stroke = view.selected ? "#1a1a1a" : "transparent";
    const cursor = view.selectable ? "pointer" : "default";
    svg.push(
      `<g data-state="${view.state}" data-selectable="${view.selectable}"`,
      ` style="cursor:${cursor}">`,
      `<rect x="${x}" y="${y}" width="${TILE}" height="${TILE}" rx="4"`,
      ` fill="${view.fill}" stroke="${stroke}" stroke-width="2"></rect>`,
      `<text x="${x + TILE / 2}" y="${y + TILE / 2 + 4}"`,
      ` text-anchor="middle" font-size="12"`,
      ` fill="${view.selectable ? "#fff" : "#9aa1a8"}">${view.state}</text>`,
      `</g>`,
    );
  }
  svg.push("</svg>");
  container.innerHTML = svg.join("");
  container.querySelectorAll("g[data-selectable='true']").forEach((node) => {
    node.addEventListener("click", () => {
      const state = (node as SVGGElement).dataset["state"];
      if (state) onSelect(state);
    });
  });
}
