/**
 * Strict parser for detector sweep CSV files.
 *
 * The producer writes one row per (detector, SNR) cell under the fixed
 * header below. Every field is validated; any deviation raises a
 * `CsvError` whose message names the source file and the 1-based line
 * number, so a caller can surface it verbatim and exit nonzero.
 */

export const SWEEP_HEADER =
  "detector,snr_db,trials,bits,bit_errors,ber,elapsed_s";

const FIELD_COUNT = 7;

/** One data row of a sweep CSV. */
export interface SweepRow {
  detector: string;
  snrDb: number;
  trials: number;
  bits: number;
  bitErrors: number;
  ber: number;
  elapsedS: number;
}

/** Raised for any malformed input; `message` names file and line. */
export class CsvError extends Error {
  override name = "CsvError";
}

const FLOAT_RE = /^[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?$/;
const UINT_RE = /^\d+$/;

function fail(source: string, line: number, detail: string): never {
  throw new CsvError(`${source}: line ${line}: ${detail}`);
}

function parseFloatField(
  source: string,
  line: number,
  field: string,
  token: string,
): number {
  if (!FLOAT_RE.test(token)) {
    fail(source, line, `invalid ${field} "${token}"`);
  }
  const value = Number(token);
  if (!Number.isFinite(value)) {
    fail(source, line, `invalid ${field} "${token}"`);
  }
  return value;
}

function parseUintField(
  source: string,
  line: number,
  field: string,
  token: string,
): number {
  if (!UINT_RE.test(token)) {
    fail(source, line, `invalid ${field} "${token}"`);
  }
  const value = Number(token);
  if (!Number.isSafeInteger(value)) {
    fail(source, line, `invalid ${field} "${token}"`);
  }
  return value;
}

/**
 * Parse the text of one sweep CSV.
 *
 * @param text   Full file contents.
 * @param source Display name for error messages (usually the path).
 * @returns Rows in file order; at least one, or a `CsvError` is thrown.
 */
export function parseSweepCsv(text: string, source: string): SweepRow[] {
  // Tolerate CRLF line endings and a single trailing newline.
  const lines = text.split("\n").map((l) => l.replace(/\r$/, ""));
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }

  if (lines.length === 0 || lines[0] !== SWEEP_HEADER) {
    const got = lines.length === 0 ? "<empty file>" : String(lines[0]);
    throw new CsvError(
      `${source}: line 1: expected header "${SWEEP_HEADER}", got "${got}"`,
    );
  }
  if (lines.length === 1) {
    throw new CsvError(`${source}: no data rows`);
  }

  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const lineNo = i + 1;
    const fields = (lines[i] as string).split(",");
    if (fields.length !== FIELD_COUNT) {
      fail(
        source,
        lineNo,
        `expected ${FIELD_COUNT} comma-separated fields, got ${fields.length}`,
      );
    }
    const [detector, snrTok, trialsTok, bitsTok, errsTok, berTok, elapsedTok] =
      fields as [string, string, string, string, string, string, string];

    if (detector === "") {
      fail(source, lineNo, "empty detector name");
    }
    const snrDb = parseFloatField(source, lineNo, "snr_db", snrTok);
    const trials = parseUintField(source, lineNo, "trials", trialsTok);
    const bits = parseUintField(source, lineNo, "bits", bitsTok);
    const bitErrors = parseUintField(source, lineNo, "bit_errors", errsTok);
    const ber = parseFloatField(source, lineNo, "ber", berTok);
    const elapsedS = parseFloatField(source, lineNo, "elapsed_s", elapsedTok);

    if (bitErrors > bits) {
      fail(source, lineNo, `bit_errors ${bitErrors} exceeds bits ${bits}`);
    }
    if (ber < 0 || ber > 1) {
      fail(source, lineNo, `ber ${berTok} outside [0, 1]`);
    }
    if (elapsedS < 0) {
      fail(source, lineNo, `negative elapsed_s "${elapsedTok}"`);
    }

    rows.push({ detector, snrDb, trials, bits, bitErrors, ber, elapsedS });
  }
  return rows;
}
