#!/usr/bin/env node
/**
 * plot_ber — render one or more detector sweep CSVs as a semilog BER
 * figure (SVG).
 *
 *   plot_ber <out.svg> <csv> [csv ...] [--title T]
 *
 * The first CSV draws solid lines, later CSVs dashed — so perfect-CSI and
 * estimated-CSI sweeps overlay cleanly. Zero-BER cells (no observed
 * errors) are dropped with a note on stderr. Exit codes: 0 success,
 * 1 file-system error, 2 usage error or malformed CSV (nothing is
 * written in either failure case).
 */

import * as fs from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";
import { CsvError, parseSweepCsv } from "./csv.js";
import { FigureError, buildFigure, type FigureInput } from "./figure.js";
import { fmt, renderSvg } from "./svg.js";

export const USAGE = "usage: plot_ber <out.svg> <csv> [csv ...] [--title T]";

/** Minimal sink so tests can capture output without touching process.*. */
export interface Sink {
  write(chunk: string): unknown;
}

export function runCli(
  argv: string[],
  stdout: Sink = process.stdout,
  stderr: Sink = process.stderr,
): number {
  let positionals: string[];
  let title: string | undefined;
  let wantHelp = false;
  try {
    const parsed = parseArgs({
      args: argv,
      options: {
        title: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
      allowPositionals: true,
    });
    positionals = parsed.positionals;
    title = parsed.values.title;
    wantHelp = parsed.values.help === true;
  } catch (exc) {
    stderr.write(`plot_ber: ${(exc as Error).message}\n${USAGE}\n`);
    return 2;
  }

  if (wantHelp) {
    stdout.write(`${USAGE}\n`);
    return 0;
  }
  if (positionals.length < 2) {
    stderr.write(`plot_ber: expected an output path and at least one CSV\n${USAGE}\n`);
    return 2;
  }
  const [outPath, ...csvPaths] = positionals as [string, ...string[]];

  const inputs: FigureInput[] = [];
  for (const csvPath of csvPaths) {
    let text: string;
    try {
      text = fs.readFileSync(csvPath, "utf8");
    } catch (exc) {
      stderr.write(`plot_ber: cannot read ${csvPath}: ${(exc as Error).message}\n`);
      return 1;
    }
    try {
      inputs.push({ source: csvPath, rows: parseSweepCsv(text, csvPath) });
    } catch (exc) {
      if (exc instanceof CsvError) {
        stderr.write(`plot_ber: ${exc.message}\n`);
        return 2;
      }
      throw exc;
    }
  }

  let svg: string;
  let curveCount: number;
  let pointCount: number;
  try {
    const model = buildFigure(
      inputs,
      title !== undefined ? { title } : {},
    );
    if (model.dropped.length > 0) {
      const multi = inputs.length > 1;
      const cells = model.dropped
        .map((d) =>
          multi
            ? `${d.detector}@${fmt(d.snrDb)}dB[${d.sourceStem}]`
            : `${d.detector}@${fmt(d.snrDb)}dB`,
        )
        .join(", ");
      stderr.write(
        `note: dropped ${model.dropped.length} zero-BER cell(s) (no observed errors): ${cells}\n`,
      );
    }
    svg = renderSvg(model);
    curveCount = model.curves.length;
    pointCount = model.curves.reduce((n, c) => n + c.points.length, 0);
  } catch (exc) {
    if (exc instanceof FigureError) {
      stderr.write(`plot_ber: ${exc.message}\n`);
      return 2;
    }
    throw exc;
  }

  try {
    fs.writeFileSync(outPath, svg, "utf8");
  } catch (exc) {
    stderr.write(`plot_ber: cannot write ${outPath}: ${(exc as Error).message}\n`);
    return 1;
  }
  stdout.write(`wrote ${outPath} (${curveCount} curves, ${pointCount} points)\n`);
  return 0;
}

const invokedPath = process.argv[1];
if (
  invokedPath !== undefined &&
  import.meta.url === pathToFileURL(resolveInvokedPath(invokedPath)).href
) {
  process.exit(runCli(process.argv.slice(2)));
}

function resolveInvokedPath(p: string): string {
  try {
    return fs.realpathSync(p); // bin stubs are symlinks into dist/
  } catch {
    return p;
  }
}
