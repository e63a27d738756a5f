/**
 * Report tables and side-by-side capture comparison.
 *
 * Row order is fixed to the clinical table layout. Comparing two captures
 * lines the same cell up across reports and highlights rows whose largest
 * per-foot delta exceeds a configurable threshold.
 */

import { FootReportJson, ReportJson } from "./protocol.js";

export const ROW_ORDER = [
  "MFP",
  "Load %",
  "Mean Heel Pressure",
  "Max Heel Pressure",
  "Load % on Heel",
  "Mean Metatarsal Pressure",
  "Max Metatarsal Pressure",
  "Load % on Metatarsal",
] as const;

export type RowName = (typeof ROW_ORDER)[number];

function rowValue(foot: FootReportJson, row: RowName): number {
  switch (row) {
    case "MFP": return foot.mfp_kpa;
    case "Load %": return foot.load_pct;
    case "Mean Heel Pressure": return foot.heel.mean_kpa;
    case "Max Heel Pressure": return foot.heel.max_kpa;
    case "Load % on Heel": return foot.heel.load_pct_of_foot;
    case "Mean Metatarsal Pressure": return foot.metatarsal.mean_kpa;
    case "Max Metatarsal Pressure": return foot.metatarsal.max_kpa;
    case "Load % on Metatarsal": return foot.metatarsal.load_pct_of_foot;
  }
}

export interface ReportRow {
  name: RowName;
  left: number;
  right: number;
  unit: "kPa" | "";
}

export function reportRows(report: ReportJson): ReportRow[] {
  return ROW_ORDER.map((name) => ({
    name,
    left: rowValue(report.left, name),
    right: rowValue(report.right, name),
    unit: name.includes("Pressure") ? "kPa" : "",
  }));
}

export function formatCell(row: ReportRow, value: number): string {
  return `${value.toFixed(2)}${row.unit}`;
}

export interface ComparisonRow extends ReportRow {
  otherLeft: number;
  otherRight: number;
  deltaLeft: number;
  deltaRight: number;
  /** Largest per-foot delta for the row. */
  delta: number;
  highlighted: boolean;
}

export const DEFAULT_HIGHLIGHT_THRESHOLD = 20.0;

/** Side-by-side of two captures; |delta| >= threshold marks the row. */
export function compareReports(
  a: ReportJson,
  b: ReportJson,
  threshold = DEFAULT_HIGHLIGHT_THRESHOLD,
): ComparisonRow[] {
  return reportRows(a).map((row) => {
    const otherLeft = rowValue(b.left, row.name);
    const otherRight = rowValue(b.right, row.name);
    const deltaLeft = row.left - otherLeft;
    const deltaRight = row.right - otherRight;
    const delta = Math.max(Math.abs(deltaLeft), Math.abs(deltaRight));
    return { ...row, otherLeft, otherRight, deltaLeft, deltaRight, delta, highlighted: delta >= threshold };
  });
}
