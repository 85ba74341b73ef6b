import { describe, expect, it } from "vitest";

import { decodeState, DEFAULT_STATE, encodeState, WorkbenchState } from "../src/state.js";

describe("URL state", () => {
  it("round-trips a full workbench state", () => {
    const state: WorkbenchState = {
      template: "does this {} hold?",
      backendId: "bart-large-mnli",
      datasetId: "gab",
      cursor: 17,
      labels: ["hate", "neither"],
      surfaceForms: { neither: "neutral" },
      maskingEnabled: true,
      tau: 0.55,
      pinned: ["abc123", "def456"],
    };
    expect(decodeState(encodeState(state))).toEqual(state);
  });

  it("decodes an empty hash to the defaults", () => {
    expect(decodeState("")).toEqual(DEFAULT_STATE);
    expect(decodeState("#")).toEqual(DEFAULT_STATE);
  });

  it("survives special characters in the template", () => {
    const state: WorkbenchState = {
      ...DEFAULT_STATE,
      template: 'does "{}" apply? & more',
      pinned: [],
      labels: [...DEFAULT_STATE.labels],
      surfaceForms: { ...DEFAULT_STATE.surfaceForms },
    };
    expect(decodeState(`#${encodeState(state)}`).template).toBe(state.template);
  });

  it("keeps reload-safety: encode(decode(x)) is stable", () => {
    const encoded = encodeState({
      ...DEFAULT_STATE,
      datasetId: "olid",
      cursor: 3,
      maskingEnabled: true,
    });
    expect(encodeState(decodeState(encoded))).toBe(encoded);
  });
});
