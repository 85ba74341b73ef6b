// Browser bootstrap: everything DOM lives here; the logic modules it wires
// together are covered by the vitest suite.

import { ServiceError, WorkbenchClient } from "./api.js";
import { renderEditor, validatePattern } from "./editor.js";
import { renderErrorBanner, renderSample } from "./inspector.js";
import { createRescorer } from "./rescore.js";
import { decodeState, encodeState, WorkbenchState } from "./state.js";
import { canLaunch, PinnedRun, renderComparison, SweepGrid } from "./sweep.js";
import type { ClassifyRequest, RecordInfo, TemplateInfo } from "./types.js";

const client = new WorkbenchClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let state: WorkbenchState = decodeState(location.hash);
let currentRecord: RecordInfo | null = null;
let builtinTemplates: TemplateInfo[] = [];
let sweepGrid: SweepGrid | null = null;
let pinnedRun: PinnedRun | null = null;

function syncHash(): void {
  history.replaceState(null, "", `#${encodeState(state)}`);
}

function classifyRequest(): ClassifyRequest {
  return {
    text: currentRecord?.text ?? el<HTMLTextAreaElement>("free-text").value,
    labels: state.labels,
    template_pattern: state.template,
    backend_id: state.backendId,
    surface_forms: state.surfaceForms,
    masking: state.maskingEnabled
      ? { mode: "threshold", tau: state.tau, k: 0, max_fraction: 0.5 }
      : null,
  };
}

const rescorer = createRescorer(client, {
  onResult: (response) => {
    const record: RecordInfo = currentRecord ?? {
      id: "(free text)",
      text: el<HTMLTextAreaElement>("free-text").value,
      gold_label: "—",
    };
    el("inspector").innerHTML = renderSample(record, response);
  },
  onError: (status, detail) => {
    el("inspector").innerHTML = renderErrorBanner(status, detail);
    if (status === 503) {
      // Backend still loading: retry the same request shortly.
      setTimeout(() => rescorer.edit(classifyRequest()), 750);
    }
  },
  onInvalidDraft: () => {
    // The editor pane already shows the diagnostic inline.
  },
});

function refreshEditorPane(): void {
  el("editor-preview").innerHTML = renderEditor(
    state.template,
    state.labels,
    state.surfaceForms,
  );
  const launch = el<HTMLButtonElement>("launch-sweep");
  launch.disabled = !canLaunch({
    kind: "sweep",
    datasets: state.datasetId ? [state.datasetId] : [],
    backends: [state.backendId],
    templates: builtinTemplates.map((t) => t.template_id),
  });
}

function onStateChanged(rescore = true): void {
  syncHash();
  refreshEditorPane();
  if (rescore && validatePattern(state.template).ok) {
    rescorer.edit(classifyRequest());
  }
}

async function loadInventories(): Promise<void> {
  builtinTemplates = await client.templates();
  const backendSelect = el<HTMLSelectElement>("backend-select");
  for (const backend of await client.backends()) {
    const option = document.createElement("option");
    option.value = backend.backend_id;
    option.textContent = `${backend.backend_id}${backend.ready ? "" : " (loading)"}`;
    backendSelect.append(option);
  }
  backendSelect.value = state.backendId;

  const datasetSelect = el<HTMLSelectElement>("dataset-select");
  const datasets = await client.datasets();
  for (const dataset of datasets) {
    const option = document.createElement("option");
    option.value = dataset.dataset_id;
    option.textContent = `${dataset.dataset_id} (${dataset.record_count})`;
    datasetSelect.append(option);
  }
  if (!state.datasetId && datasets.length) {
    state.datasetId = datasets[0].dataset_id;
  }
  datasetSelect.value = state.datasetId;
  if (state.datasetId) {
    const labels = datasets.find((d) => d.dataset_id === state.datasetId)?.label_set;
    if (labels) state.labels = labels;
  }
}

async function showRecord(): Promise<void> {
  if (!state.datasetId) {
    currentRecord = null;
    return;
  }
  const page = await client.records(state.datasetId, state.cursor, 1);
  currentRecord = page.records[0] ?? null;
  el("cursor-info").textContent = currentRecord
    ? `record ${state.cursor + 1} of ${page.total} — gold: ${currentRecord.gold_label}`
    : "no records";
}

async function launchSweep(): Promise<void> {
  const spec = {
    kind: "sweep" as const,
    datasets: state.datasetId ? [state.datasetId] : [],
    backends: [state.backendId],
    templates: builtinTemplates.map((t) => t.template_id),
    neutral_surface_form: state.surfaceForms["neither"] ?? "neutral",
  };
  if (!canLaunch(spec)) return;
  const handle = await client.submitExperiment(spec);
  sweepGrid = new SweepGrid(spec.templates, spec.backends);
  el("sweep-panel").innerHTML = sweepGrid.render();
  el("sweep-handle").textContent = `run ${handle}`;
  await client.pollExperiment(handle, (status) => {
    if (!sweepGrid) return;
    sweepGrid.applyUpdates(status.cells);
    if (status.table) sweepGrid.applyTable(status.table);
    el("sweep-panel").innerHTML = sweepGrid.render();
    if (pinnedRun) {
      el("comparison-panel").innerHTML = renderComparison(sweepGrid, pinnedRun);
    }
  });
}

function bind(): void {
  const templateInput = el<HTMLInputElement>("template-input");
  templateInput.value = state.template;
  templateInput.addEventListener("input", () => {
    state.template = templateInput.value;
    onStateChanged();
  });

  el<HTMLSelectElement>("backend-select").addEventListener("change", (event) => {
    state.backendId = (event.target as HTMLSelectElement).value;
    onStateChanged();
  });

  el<HTMLSelectElement>("dataset-select").addEventListener("change", async (event) => {
    state.datasetId = (event.target as HTMLSelectElement).value;
    state.cursor = 0;
    await showRecord();
    onStateChanged();
  });

  el<HTMLButtonElement>("prev-record").addEventListener("click", async () => {
    state.cursor = Math.max(0, state.cursor - 1);
    await showRecord();
    onStateChanged();
  });
  el<HTMLButtonElement>("next-record").addEventListener("click", async () => {
    state.cursor += 1;
    await showRecord();
    onStateChanged();
  });

  const maskingToggle = el<HTMLInputElement>("masking-toggle");
  maskingToggle.checked = state.maskingEnabled;
  maskingToggle.addEventListener("change", () => {
    state.maskingEnabled = maskingToggle.checked;
    onStateChanged();
  });

  const tauInput = el<HTMLInputElement>("tau-input");
  tauInput.value = String(state.tau);
  tauInput.addEventListener("change", () => {
    state.tau = Number(tauInput.value);
    onStateChanged();
  });

  el<HTMLTextAreaElement>("free-text").addEventListener("input", () => {
    if (!currentRecord) onStateChanged();
  });

  el<HTMLButtonElement>("launch-sweep").addEventListener("click", () => {
    void launchSweep();
  });

  el<HTMLButtonElement>("pin-run").addEventListener("click", () => {
    if (!sweepGrid) return;
    pinnedRun = {
      handle: el("sweep-handle").textContent ?? "pinned",
      label: "pinned",
      grid: sweepGrid,
    };
    el("comparison-panel").innerHTML = renderComparison(sweepGrid, pinnedRun);
  });

  window.addEventListener("hashchange", () => {
    state = decodeState(location.hash);
    templateInput.value = state.template;
    refreshEditorPane();
  });
}

async function start(): Promise<void> {
  bind();
  try {
    await loadInventories();
    await showRecord();
  } catch (error) {
    const detail =
      error instanceof ServiceError ? error.detail : String(error);
    el("inspector").innerHTML = renderErrorBanner(0, detail);
  }
  onStateChanged();
}

void start();
