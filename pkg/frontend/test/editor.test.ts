import { describe, expect, it } from "vitest";

import {
  highlightSlot,
  previewHypotheses,
  renderEditor,
  validatePattern,
} from "../src/editor.js";

describe("validatePattern", () => {
  it("accepts a single-slot pattern", () => {
    expect(validatePattern("this text contains {} speech.")).toEqual({
      ok: true,
      diagnostic: null,
    });
  });

  it("flags a missing slot", () => {
    const result = validatePattern("no slot here");
    expect(result.ok).toBe(false);
    expect(result.diagnostic).toContain("missing slot");
  });

  it("flags multiple slots", () => {
    const result = validatePattern("{} and {}");
    expect(result.ok).toBe(false);
    expect(result.diagnostic).toContain("multiple slots");
  });
});

describe("previewHypotheses", () => {
  it("instantiates one hypothesis per label", () => {
    expect(
      previewHypotheses("this text contains {} speech.", ["hate", "offensive", "toxic"], {}),
    ).toEqual([
      "this text contains hate speech.",
      "this text contains offensive speech.",
      "this text contains toxic speech.",
    ]);
  });

  it("applies surface forms so neither renders as neutral", () => {
    const before = previewHypotheses("this text contains {} speech.", ["neither"], {});
    const after = previewHypotheses("this text contains {} speech.", ["neither"], {
      neither: "neutral",
    });
    expect(before).toEqual(["this text contains neither speech."]);
    expect(after).toEqual(["this text contains neutral speech."]);
  });

  it("returns nothing for an invalid draft", () => {
    expect(previewHypotheses("broken", ["hate"], {})).toEqual([]);
  });
});

describe("rendering", () => {
  it("highlights the slot and escapes the rest", () => {
    const html = highlightSlot('<b> {} "quoted"');
    expect(html).toContain('<span class="slot">{}</span>');
    expect(html).toContain("&lt;b&gt;");
    expect(html).toContain("&quot;quoted&quot;");
  });

  it("shows an inline diagnostic for an invalid draft", () => {
    const html = renderEditor("nope", ["hate"], {});
    expect(html).toContain("diagnostic");
    expect(html).toContain("missing slot");
  });

  it("lists previews for a valid draft", () => {
    const html = renderEditor("is this {}?", ["hate", "neither"], { neither: "neutral" });
    expect(html).toContain("is this hate?");
    expect(html).toContain("is this neutral?");
  });
});
