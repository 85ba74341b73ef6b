import type { Distribution } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export function formatProbability(p: number): string {
  return p.toFixed(2);
}

export function formatScore(value: number): string {
  return value.toFixed(1);
}

export interface DistributionRow {
  label: string;
  probability: number; // verbatim service value
  display: string; // rounded for rendering
  barWidth: number; // percent, proportional to probability
  predicted: boolean;
}

export interface DistributionView {
  rows: DistributionRow[];
  displaySum: string; // sum of the *displayed* (rounded) values
}

/** Presentation model for a class distribution. Every number comes from the
 * service response; this only rounds for display and scales bar widths. */
export function distributionView(distribution: Distribution): DistributionView {
  const rows = distribution.labels.map((label, i) => {
    const probability = distribution.probabilities[i];
    return {
      label,
      probability,
      display: formatProbability(probability),
      barWidth: probability * 100,
      predicted: label === distribution.predicted,
    };
  });
  const displayed = rows.reduce((sum, row) => sum + Number(row.display), 0);
  return { rows, displaySum: displayed.toFixed(2) };
}
