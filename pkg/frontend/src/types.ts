// Wire types mirroring the service's shipped JSON schemas (snake_case keys
// come over the wire verbatim; no code is shared with the backend).

export interface Distribution {
  labels: string[];
  probabilities: number[];
  predicted: string;
  raw_entailment: number[];
}

export interface TokenSimilarity {
  token: string;
  similarity: number | null;
}

export interface MaskingOptions {
  mode: "threshold" | "top_k";
  tau: number;
  k: number;
  max_fraction: number;
}

export interface ClassifyRequest {
  text: string;
  labels: string[];
  template_pattern: string;
  backend_id: string;
  surface_forms: Record<string, string>;
  normalization?: "softmax" | "independent";
  masking?: MaskingOptions | null;
}

export interface ClassifyResponse {
  distribution: Distribution;
  predicted: string;
  masked_text: string | null;
  per_token_similarity: TokenSimilarity[] | null;
}

export interface TemplateInfo {
  template_id: string;
  pattern: string;
  description: string;
}

export interface DatasetInfo {
  dataset_id: string;
  label_set: string[];
  record_count: number;
}

export interface BackendInfo {
  backend_id: string;
  adapter: string;
  ready: boolean;
  mask_symbol: string;
}

export interface RecordInfo {
  id: string;
  text: string;
  gold_label: string;
}

export interface RecordsPage {
  dataset_id: string;
  total: number;
  offset: number;
  records: RecordInfo[];
}

export interface CellValue {
  row: string;
  col: string;
  value: number | null;
}

export interface TableData {
  kind: string;
  row_axis: string;
  col_axis: string;
  rows: string[];
  cols: string[];
  cells: (number | null)[][];
}

export interface ExperimentStatus {
  handle: string;
  status: "running" | "done" | "failed";
  cells: CellValue[];
  table: TableData | null;
  error: string | null;
}

export interface ExperimentSpecSubset {
  kind: "sweep";
  datasets: string[];
  backends: string[];
  templates: string[];
  neutral_surface_form?: string;
  subsample?: { n: number; seed: number } | null;
  output_dir?: string;
}
