import { escapeHtml } from "./format.js";

export const SLOT = "{}";

export interface ValidationState {
  ok: boolean;
  diagnostic: string | null;
}

/** Client-side draft validation before anything is submitted; the service
 * re-validates on its side, this only drives inline feedback. */
export function validatePattern(pattern: string): ValidationState {
  const occurrences = pattern.split(SLOT).length - 1;
  if (occurrences === 0) {
    return { ok: false, diagnostic: "missing slot: add the {} marker" };
  }
  if (occurrences > 1) {
    return {
      ok: false,
      diagnostic: `multiple slots: found ${occurrences}, expected exactly one`,
    };
  }
  return { ok: true, diagnostic: null };
}

/** One instantiated hypothesis per candidate label, surface forms applied. */
export function previewHypotheses(
  pattern: string,
  labels: string[],
  surfaceForms: Record<string, string>,
): string[] {
  if (!validatePattern(pattern).ok) return [];
  return labels.map((label) => pattern.replace(SLOT, surfaceForms[label] ?? label));
}

/** Pattern with the slot wrapped for highlighting. */
export function highlightSlot(pattern: string): string {
  const at = pattern.indexOf(SLOT);
  if (at < 0) return escapeHtml(pattern);
  return (
    escapeHtml(pattern.slice(0, at)) +
    '<span class="slot">{}</span>' +
    escapeHtml(pattern.slice(at + SLOT.length))
  );
}

export function renderEditor(
  pattern: string,
  labels: string[],
  surfaceForms: Record<string, string>,
): string {
  const validation = validatePattern(pattern);
  if (!validation.ok) {
    return `<p class="diagnostic">${escapeHtml(validation.diagnostic ?? "")}</p>`;
  }
  const items = previewHypotheses(pattern, labels, surfaceForms)
    .map(
      (hypothesis, i) =>
        `<li><span class="label">${escapeHtml(labels[i])}</span> ` +
        `${escapeHtml(hypothesis)}</li>`,
    )
    .join("");
  return `<p class="pattern">${highlightSlot(pattern)}</p><ul class="previews">${items}</ul>`;
}
