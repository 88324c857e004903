/**
 * Figure model: turns parsed sweep rows into the data needed to draw a
 * semilog BER-vs-SNR figure — one curve per (input file, detector), with
 * zero-BER cells dropped (a bit error rate of zero has no position on a
 * log axis; those cells mean "no errors observed", not "BER = 0").
 */

import * as path from "node:path";
import type { SweepRow } from "./csv.js";
import {
  DETECTOR_STYLES,
  dashForFile,
  styleForDetector,
  type CurveStyle,
} from "./style.js";

export interface FigurePoint {
  snrDb: number;
  ber: number;
}

export interface CurveData {
  detector: string;
  /** Basename of the source CSV without extension. */
  sourceStem: string;
  fileIndex: number;
  /** Points sorted by SNR, all with ber > 0. */
  points: FigurePoint[];
  style: CurveStyle;
  /** SVG stroke-dasharray; empty string means solid. */
  dashArray: string;
  /** Legend text. */
  label: string;
}

/** A (detector, SNR) cell omitted because its BER is exactly zero. */
export interface DroppedCell {
  sourceStem: string;
  detector: string;
  snrDb: number;
}

export interface FigureOptions {
  title?: string;
  width?: number;
  height?: number;
}

export interface FigureModel {
  title?: string;
  width: number;
  height: number;
  xMin: number;
  xMax: number;
  xTicks: number[];
  /** y spans the closed decade range [10^decLo, 10^decHi]. */
  decLo: number;
  decHi: number;
  curves: CurveData[];
  dropped: DroppedCell[];
}

/** Raised when the inputs cannot produce a figure. */
export class FigureError extends Error {
  override name = "FigureError";
}

export interface FigureInput {
  /** Path or display name of the CSV this data came from. */
  source: string;
  rows: SweepRow[];
}

export const DEFAULT_WIDTH = 760;
export const DEFAULT_HEIGHT = 520;

/** Evenly spaced ticks on a 1-2-5 ladder covering [min, max]. */
export function niceLinearTicks(
  min: number,
  max: number,
  target = 9,
): number[] {
  if (!(max > min)) {
    throw new FigureError(`tick range is empty: [${min}, ${max}]`);
  }
  const rawStep = (max - min) / Math.max(1, target - 1);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = mag * (norm <= 1 ? 1 : norm <= 2 ? 2 : norm <= 5 ? 5 : 10);
  const ticks: number[] = [];
  const eps = step * 1e-9;
  for (
    let k = Math.ceil((min - eps) / step);
    k * step <= max + eps;
    k++
  ) {
    // k may be -0 (Math.ceil of a tiny negative); adding 0 normalizes.
    ticks.push(k * step + 0);
  }
  return ticks;
}

function sourceStemOf(source: string): string {
  const stem = path.parse(source).name;
  return stem === "" ? source : stem;
}

/**
 * Build the figure model from one or more parsed CSV inputs.
 *
 * Curve order is deterministic: input files in argument order, then
 * detectors in order of first appearance within each file. Throws
 * `FigureError` when no plottable (positive-BER) point remains.
 */
export function buildFigure(
  inputs: FigureInput[],
  opts: FigureOptions = {},
): FigureModel {
  if (inputs.length === 0) {
    throw new FigureError("no input CSVs given");
  }
  const multiFile = inputs.length > 1;
  const curves: CurveData[] = [];
  const dropped: DroppedCell[] = [];
  let unknownSeen = 0;
  const unknownIndexByName = new Map<string, number>();

  inputs.forEach((input, fileIndex) => {
    const stem = sourceStemOf(input.source);
    const byDetector = new Map<string, FigurePoint[]>();
    for (const row of input.rows) {
      if (row.ber === 0) {
        dropped.push({
          sourceStem: stem,
          detector: row.detector,
          snrDb: row.snrDb,
        });
        if (!byDetector.has(row.detector)) {
          byDetector.set(row.detector, []);
        }
        continue;
      }
      const points = byDetector.get(row.detector);
      if (points === undefined) {
        byDetector.set(row.detector, [{ snrDb: row.snrDb, ber: row.ber }]);
      } else {
        points.push({ snrDb: row.snrDb, ber: row.ber });
      }
    }
    for (const [detector, points] of byDetector) {
      if (points.length === 0) {
        continue; // every cell of this curve was zero-BER
      }
      points.sort((a, b) => a.snrDb - b.snrDb);
      let unknownIndex = 0;
      if (!DETECTOR_STYLES.has(detector)) {
        const seen = unknownIndexByName.get(detector);
        unknownIndex = seen ?? unknownSeen++;
        if (seen === undefined) {
          unknownIndexByName.set(detector, unknownIndex);
        }
      }
      const style = styleForDetector(detector, unknownIndex);
      curves.push({
        detector,
        sourceStem: stem,
        fileIndex,
        points,
        style,
        dashArray: dashForFile(fileIndex),
        label: multiFile ? `${detector} (${stem})` : detector,
      });
    }
  });

  if (curves.length === 0) {
    throw new FigureError(
      "no plottable points: every BER cell is zero (no errors observed)",
    );
  }

  let xMin = Infinity;
  let xMax = -Infinity;
  let berMin = Infinity;
  let berMax = -Infinity;
  for (const curve of curves) {
    for (const p of curve.points) {
      if (p.snrDb < xMin) xMin = p.snrDb;
      if (p.snrDb > xMax) xMax = p.snrDb;
      if (p.ber < berMin) berMin = p.ber;
      if (p.ber > berMax) berMax = p.ber;
    }
  }
  if (xMin === xMax) {
    xMin -= 1;
    xMax += 1;
  }
  // + 0 normalizes the -0 that ceil/floor produce for arguments in (-1, 0].
  let decLo = Math.floor(Math.log10(berMin)) + 0;
  let decHi = Math.ceil(Math.log10(berMax)) + 0;
  if (decLo === decHi) {
    decLo -= 1;
    decHi += 1;
  }

  return {
    ...(opts.title !== undefined ? { title: opts.title } : {}),
    width: opts.width ?? DEFAULT_WIDTH,
    height: opts.height ?? DEFAULT_HEIGHT,
    xMin,
    xMax,
    xTicks: niceLinearTicks(xMin, xMax),
    decLo,
    decHi,
    curves,
    dropped,
  };
}
