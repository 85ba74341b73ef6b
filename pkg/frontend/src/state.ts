// Workbench state lives in the URL hash so a reload (or a shared link)
// reconstructs the session from URL + service state alone.

export interface WorkbenchState {
  template: string;
  backendId: string;
  datasetId: string;
  cursor: number;
  labels: string[];
  surfaceForms: Record<string, string>;
  maskingEnabled: boolean;
  tau: number;
  pinned: string[];
}

export const DEFAULT_STATE: WorkbenchState = {
  template: "this text contains {} speech.",
  backendId: "stub",
  datasetId: "",
  cursor: 0,
  labels: ["hate", "neither"],
  surfaceForms: { neither: "neutral" },
  maskingEnabled: false,
  tau: 0.4,
  pinned: [],
};

function encodeSurfaceForms(forms: Record<string, string>): string {
  return Object.entries(forms)
    .map(([label, surface]) => `${label}=${surface}`)
    .join(",");
}

function decodeSurfaceForms(encoded: string): Record<string, string> {
  const forms: Record<string, string> = {};
  for (const piece of encoded.split(",")) {
    const at = piece.indexOf("=");
    if (at > 0) forms[piece.slice(0, at)] = piece.slice(at + 1);
  }
  return forms;
}

export function encodeState(state: WorkbenchState): string {
  const params = new URLSearchParams();
  params.set("t", state.template);
  params.set("b", state.backendId);
  if (state.datasetId) params.set("d", state.datasetId);
  if (state.cursor) params.set("i", String(state.cursor));
  params.set("l", state.labels.join(","));
  const forms = encodeSurfaceForms(state.surfaceForms);
  if (forms) params.set("s", forms);
  if (state.maskingEnabled) params.set("m", "1");
  if (state.tau !== DEFAULT_STATE.tau) params.set("tau", String(state.tau));
  if (state.pinned.length) params.set("p", state.pinned.join(","));
  return params.toString();
}

export function decodeState(hash: string): WorkbenchState {
  const params = new URLSearchParams(hash.replace(/^#/, ""));
  const state: WorkbenchState = {
    ...DEFAULT_STATE,
    labels: [...DEFAULT_STATE.labels],
    surfaceForms: { ...DEFAULT_STATE.surfaceForms },
    pinned: [],
  };
  if (params.has("t")) state.template = params.get("t") as string;
  if (params.has("b")) state.backendId = params.get("b") as string;
  if (params.has("d")) state.datasetId = params.get("d") as string;
  if (params.has("i")) state.cursor = Number(params.get("i")) || 0;
  if (params.has("l")) {
    state.labels = (params.get("l") as string).split(",").filter(Boolean);
  }
  if (params.has("s")) {
    state.surfaceForms = decodeSurfaceForms(params.get("s") as string);
  }
  state.maskingEnabled = params.get("m") === "1";
  if (params.has("tau")) {
    const tau = Number(params.get("tau"));
    if (!Number.isNaN(tau)) state.tau = tau;
  }
  if (params.has("p")) {
    state.pinned = (params.get("p") as string).split(",").filter(Boolean);
  }
  return state;
}
