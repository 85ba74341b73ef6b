import { distributionView, escapeHtml } from "./format.js";
import type { ClassifyResponse, RecordInfo, TokenSimilarity } from "./types.js";

export const MASK_TOKEN = "[MASK]";

/** Distribution bars: widths are proportional to the service-sent
 * probabilities, values are the same numbers rounded for display. */
export function renderDistribution(response: ClassifyResponse): string {
  const view = distributionView(response.distribution);
  const bars = view.rows
    .map(
      (row) =>
        `<div class="dist-row${row.predicted ? " predicted" : ""}">` +
        `<span class="dist-label">${escapeHtml(row.label)}</span>` +
        `<span class="dist-bar"><span class="dist-fill" style="width:${row.barWidth}%"></span></span>` +
        `<span class="dist-value">${row.display}</span>` +
        `</div>`,
    )
    .join("");
  return (
    `<div class="distribution" data-display-sum="${view.displaySum}">${bars}</div>`
  );
}

/** Masked preview: struck tokens carry their similarity as a tooltip. */
export function renderMaskedText(
  maskedText: string,
  perToken: TokenSimilarity[],
): string {
  const maskedPieces = maskedText.split(" ");
  const spans = perToken.map((entry, i) => {
    const struck = maskedPieces[i] === MASK_TOKEN;
    const tooltip =
      entry.similarity === null
        ? "out of vocabulary"
        : `similarity ${entry.similarity.toFixed(4)}`;
    const classes = struck ? "token masked" : "token";
    return `<span class="${classes}" title="${escapeHtml(tooltip)}">${escapeHtml(entry.token)}</span>`;
  });
  return `<p class="masked-text">${spans.join(" ")}</p>`;
}

export function struckTokenCount(maskedText: string): number {
  return maskedText.split(" ").filter((piece) => piece === MASK_TOKEN).length;
}

export function renderSample(record: RecordInfo, response: ClassifyResponse): string {
  const agreement = response.predicted === record.gold_label ? "match" : "mismatch";
  const parts = [
    `<p class="sample-text">${escapeHtml(record.text)}</p>`,
    renderDistribution(response),
    `<p class="verdict ${agreement}">predicted ` +
      `<strong>${escapeHtml(response.predicted)}</strong> / gold ` +
      `<strong>${escapeHtml(record.gold_label)}</strong></p>`,
  ];
  if (response.masked_text !== null && response.per_token_similarity !== null) {
    parts.push(renderMaskedText(response.masked_text, response.per_token_similarity));
  }
  return `<div class="sample">${parts.join("")}</div>`;
}

/** 503s mean a model backend is still loading; other errors show as-is. */
export function renderErrorBanner(status: number, detail: string): string {
  const kind = status === 503 ? "loading" : "error";
  const message =
    status === 503 ? `backend loading: ${detail}` : `request failed: ${detail}`;
  return `<div class="banner ${kind}">${escapeHtml(message)}</div>`;
}
