export {
  CsvError,
  SWEEP_HEADER,
  parseSweepCsv,
  type SweepRow,
} from "./csv.js";
export {
  DETECTOR_STYLES,
  dashForFile,
  styleForDetector,
  type CurveStyle,
  type MarkerShape,
} from "./style.js";
export {
  DEFAULT_HEIGHT,
  DEFAULT_WIDTH,
  FigureError,
  buildFigure,
  niceLinearTicks,
  type CurveData,
  type DroppedCell,
  type FigureInput,
  type FigureModel,
  type FigureOptions,
  type FigurePoint,
} from "./figure.js";
export { escapeXml, fmt, markerSvg, renderSvg } from "./svg.js";
export { USAGE, runCli, type Sink } from "./cli.js";
