/**
 * Fixed visual styles so a detector renders identically in every figure.
 *
 * The five shipped detector names get pinned colors and marker shapes;
 * any other name falls back to a deterministic cycle keyed by the order
 * of first appearance. Line dash pattern is a property of the input file
 * (first file solid, later files dashed) and lives in `dashForFile`.
 */

export type MarkerShape = "circle" | "square" | "triangle" | "diamond" | "cross";

export interface CurveStyle {
  color: string;
  marker: MarkerShape;
}

export const DETECTOR_STYLES: ReadonlyMap<string, CurveStyle> = new Map([
  ["ML", { color: "#000000", marker: "circle" }],
  ["SIC", { color: "#1f77b4", marker: "square" }],
  ["MB-SIC", { color: "#ff7f0e", marker: "triangle" }],
  ["LR-SIC", { color: "#2ca02c", marker: "diamond" }],
  ["MB-LR-SIC", { color: "#d62728", marker: "cross" }],
] as const);

const FALLBACK_COLORS = [
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
  "#bcbd22",
  "#17becf",
] as const;

const FALLBACK_MARKERS: readonly MarkerShape[] = [
  "circle",
  "square",
  "triangle",
  "diamond",
  "cross",
];

/**
 * Style for a detector name. Unknown names draw from the fallback cycle;
 * `unknownIndex` is how many unknown names appeared before this one.
 */
export function styleForDetector(
  name: string,
  unknownIndex: number,
): CurveStyle {
  const pinned = DETECTOR_STYLES.get(name);
  if (pinned !== undefined) {
    return pinned;
  }
  return {
    color: FALLBACK_COLORS[unknownIndex % FALLBACK_COLORS.length] as string,
    marker: FALLBACK_MARKERS[
      unknownIndex % FALLBACK_MARKERS.length
    ] as MarkerShape,
  };
}

const DASH_PATTERNS = ["6 3", "2 2", "8 3 2 3"] as const;

/**
 * SVG stroke-dasharray for the i-th input file (0-based): the first file
 * is solid (empty string), later files cycle through dashed patterns.
 */
export function dashForFile(fileIndex: number): string {
  if (fileIndex <= 0) {
    return "";
  }
  return DASH_PATTERNS[(fileIndex - 1) % DASH_PATTERNS.length] as string;
}
