/**
 * Deterministic SVG renderer for the figure model.
 *
 * Byte-for-byte reproducibility is a contract here (golden-file tests
 * compare raw output), so every coordinate goes through one fixed
 * 2-decimal formatter, element order is fixed, and the output carries no
 * timestamps or environment-dependent metadata.
 */

import type { CurveData, FigureModel } from "./figure.js";
import type { MarkerShape } from "./style.js";

/** Format a coordinate: at most 2 decimals, no trailing zeros, no "-0". */
export function fmt(v: number): string {
  const s = v.toFixed(2);
  const trimmed = s.includes(".") ? s.replace(/\.?0+$/, "") : s;
  return trimmed === "-0" ? "0" : trimmed;
}

export function escapeXml(s: string): string {
  return s.replace(/[&<>"']/g, (c) => {
    switch (c) {
      case "&":
        return "&amp;";
      case "<":
        return "&lt;";
      case ">":
        return "&gt;";
      case '"':
        return "&quot;";
      default:
        return "&apos;";
    }
  });
}

/** One plot marker centered at (x, y); open shapes so curves stay legible. */
export function markerSvg(
  shape: MarkerShape,
  x: number,
  y: number,
  color: string,
): string {
  switch (shape) {
    case "circle":
      return `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="3.2" fill="#ffffff" stroke="${color}" stroke-width="1.4"/>`;
    case "square":
      return `<rect x="${fmt(x - 3)}" y="${fmt(y - 3)}" width="6" height="6" fill="#ffffff" stroke="${color}" stroke-width="1.4"/>`;
    case "triangle":
      return `<path d="M ${fmt(x)} ${fmt(y - 3.8)} L ${fmt(x + 3.5)} ${fmt(y + 2.6)} L ${fmt(x - 3.5)} ${fmt(y + 2.6)} Z" fill="#ffffff" stroke="${color}" stroke-width="1.4"/>`;
    case "diamond":
      return `<path d="M ${fmt(x)} ${fmt(y - 4.2)} L ${fmt(x + 4.2)} ${fmt(y)} L ${fmt(x)} ${fmt(y + 4.2)} L ${fmt(x - 4.2)} ${fmt(y)} Z" fill="#ffffff" stroke="${color}" stroke-width="1.4"/>`;
    case "cross":
      return `<path d="M ${fmt(x - 3)} ${fmt(y - 3)} L ${fmt(x + 3)} ${fmt(y + 3)} M ${fmt(x - 3)} ${fmt(y + 3)} L ${fmt(x + 3)} ${fmt(y - 3)}" fill="none" stroke="${color}" stroke-width="1.6"/>`;
  }
}

const FONT = "Helvetica, Arial, sans-serif";

/** Render the figure model to a complete SVG document. */
export function renderSvg(model: FigureModel): string {
  const { width, height, xMin, xMax, decLo, decHi } = model;
  const marginTop = model.title !== undefined ? 48 : 24;
  const marginRight = 24;
  const marginBottom = 56;
  const marginLeft = 72;
  const plotW = width - marginLeft - marginRight;
  const plotH = height - marginTop - marginBottom;
  const decSpan = decHi - decLo;

  const xPos = (v: number): number =>
    marginLeft + ((v - xMin) / (xMax - xMin)) * plotW;
  // y position from the base-10 exponent, so decade lines land exactly.
  const yPosExp = (e: number): number =>
    marginTop + ((decHi - e) / decSpan) * plotH;
  const yPos = (ber: number): number => yPosExp(Math.log10(ber));

  const out: string[] = [];
  out.push(`<?xml version="1.0" encoding="UTF-8"?>`);
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="${FONT}">`,
  );
  out.push(`<rect width="${width}" height="${height}" fill="#ffffff"/>`);

  if (model.title !== undefined) {
    out.push(
      `<text x="${fmt(width / 2)}" y="30" text-anchor="middle" font-size="16" font-weight="bold" fill="#000000">${escapeXml(model.title)}</text>`,
    );
  }

  // Gridlines: minor (within-decade) first so major lines draw over them.
  out.push(`<g class="grid">`);
  for (let e = decLo; e < decHi; e++) {
    for (let m = 2; m <= 9; m++) {
      const y = yPosExp(e + Math.log10(m));
      out.push(
        `<line x1="${fmt(marginLeft)}" y1="${fmt(y)}" x2="${fmt(marginLeft + plotW)}" y2="${fmt(y)}" stroke="#eeeeee" stroke-width="0.5"/>`,
      );
    }
  }
  for (let e = decLo; e <= decHi; e++) {
    const y = yPosExp(e);
    out.push(
      `<line x1="${fmt(marginLeft)}" y1="${fmt(y)}" x2="${fmt(marginLeft + plotW)}" y2="${fmt(y)}" stroke="#cccccc" stroke-width="1"/>`,
    );
  }
  for (const t of model.xTicks) {
    const x = xPos(t);
    out.push(
      `<line x1="${fmt(x)}" y1="${fmt(marginTop)}" x2="${fmt(x)}" y2="${fmt(marginTop + plotH)}" stroke="#cccccc" stroke-width="1"/>`,
    );
  }
  out.push(`</g>`);

  out.push(
    `<rect x="${fmt(marginLeft)}" y="${fmt(marginTop)}" width="${fmt(plotW)}" height="${fmt(plotH)}" fill="none" stroke="#333333" stroke-width="1"/>`,
  );

  // Axis tick labels and titles.
  out.push(`<g class="axes" font-size="12" fill="#222222">`);
  for (const t of model.xTicks) {
    out.push(
      `<text x="${fmt(xPos(t))}" y="${fmt(marginTop + plotH + 20)}" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (let e = decLo; e <= decHi; e++) {
    out.push(
      `<text x="${fmt(marginLeft - 10)}" y="${fmt(yPosExp(e) + 4)}" text-anchor="end">10<tspan dy="-5" font-size="9">${e}</tspan></text>`,
    );
  }
  out.push(
    `<text x="${fmt(marginLeft + plotW / 2)}" y="${fmt(height - 14)}" text-anchor="middle" font-size="13">SNR (dB)</text>`,
  );
  out.push(
    `<text x="20" y="${fmt(marginTop + plotH / 2)}" text-anchor="middle" font-size="13" transform="rotate(-90 20 ${fmt(marginTop + plotH / 2)})">BER</text>`,
  );
  out.push(`</g>`);

  // Curves: polyline first, then markers on top.
  for (const curve of model.curves) {
    out.push(renderCurve(curve, xPos, yPos));
  }

  out.push(renderLegend(model.curves, marginLeft, marginTop, plotH));
  out.push(`</svg>`);
  return out.join("\n") + "\n";
}

function renderCurve(
  curve: CurveData,
  xPos: (v: number) => number,
  yPos: (v: number) => number,
): string {
  const parts: string[] = [];
  parts.push(
    `<g class="curve" data-detector="${escapeXml(curve.detector)}" data-source="${escapeXml(curve.sourceStem)}">`,
  );
  const pts = curve.points
    .map((p) => `${fmt(xPos(p.snrDb))},${fmt(yPos(p.ber))}`)
    .join(" ");
  const dash =
    curve.dashArray === "" ? "" : ` stroke-dasharray="${curve.dashArray}"`;
  parts.push(
    `<polyline points="${pts}" fill="none" stroke="${curve.style.color}" stroke-width="1.8"${dash}/>`,
  );
  for (const p of curve.points) {
    parts.push(
      markerSvg(curve.style.marker, xPos(p.snrDb), yPos(p.ber), curve.style.color),
    );
  }
  parts.push(`</g>`);
  return parts.join("\n");
}

function renderLegend(
  curves: CurveData[],
  marginLeft: number,
  marginTop: number,
  plotH: number,
): string {
  const entryH = 18;
  const swatchW = 26;
  const charW = 6.8;
  const labelW = Math.max(...curves.map((c) => c.label.length)) * charW;
  const boxW = 10 + swatchW + 8 + labelW + 10;
  const boxH = curves.length * entryH + 12;
  const x0 = marginLeft + 12;
  const y0 = marginTop + plotH - 12 - boxH;

  const parts: string[] = [];
  parts.push(`<g class="legend" font-size="12">`);
  parts.push(
    `<rect x="${fmt(x0)}" y="${fmt(y0)}" width="${fmt(boxW)}" height="${fmt(boxH)}" fill="#ffffff" fill-opacity="0.9" stroke="#999999" stroke-width="1"/>`,
  );
  curves.forEach((curve, i) => {
    const cy = y0 + 6 + i * entryH + entryH / 2;
    const lx = x0 + 10;
    const dash =
      curve.dashArray === "" ? "" : ` stroke-dasharray="${curve.dashArray}"`;
    parts.push(
      `<line x1="${fmt(lx)}" y1="${fmt(cy)}" x2="${fmt(lx + swatchW)}" y2="${fmt(cy)}" stroke="${curve.style.color}" stroke-width="1.8"${dash}/>`,
    );
    parts.push(
      markerSvg(curve.style.marker, lx + swatchW / 2, cy, curve.style.color),
    );
    parts.push(
      `<text x="${fmt(lx + swatchW + 8)}" y="${fmt(cy + 4)}" fill="#222222">${escapeXml(curve.label)}</text>`,
    );
  });
  parts.push(`</g>`);
  return parts.join("\n");
}
