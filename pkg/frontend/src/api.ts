import type {
  BackendInfo,
  ClassifyRequest,
  ClassifyResponse,
  DatasetInfo,
  ExperimentSpecSubset,
  ExperimentStatus,
  RecordsPage,
  TemplateInfo,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`service responded ${status}: ${detail}`);
  }
}

/** Thin typed client over the service endpoints; fetch is injectable. */
export class WorkbenchClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (body && body.detail !== undefined) detail = String(body.detail);
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ServiceError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  classify(body: ClassifyRequest): Promise<ClassifyResponse> {
    return this.request<ClassifyResponse>("/classify", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async templates(): Promise<TemplateInfo[]> {
    const payload = await this.request<{ templates: TemplateInfo[] }>("/templates");
    return payload.templates;
  }

  async datasets(): Promise<DatasetInfo[]> {
    const payload = await this.request<{ datasets: DatasetInfo[] }>("/datasets");
    return payload.datasets;
  }

  async backends(): Promise<BackendInfo[]> {
    const payload = await this.request<{ backends: BackendInfo[] }>("/backends");
    return payload.backends;
  }

  records(datasetId: string, offset: number, limit: number): Promise<RecordsPage> {
    const query = new URLSearchParams({
      offset: String(offset),
      limit: String(limit),
    });
    return this.request<RecordsPage>(
      `/datasets/${encodeURIComponent(datasetId)}/records?${query}`,
    );
  }

  async submitExperiment(spec: ExperimentSpecSubset): Promise<string> {
    const payload = await this.request<{ handle: string }>("/experiments", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ spec }),
    });
    return payload.handle;
  }

  experimentStatus(handle: string): Promise<ExperimentStatus> {
    return this.request<ExperimentStatus>(
      `/experiments/${encodeURIComponent(handle)}`,
    );
  }

  /** Poll until the experiment leaves the running state. */
  async pollExperiment(
    handle: string,
    onUpdate: (status: ExperimentStatus) => void,
    options: {
      intervalMs?: number;
      timeoutMs?: number;
      sleep?: (ms: number) => Promise<void>;
    } = {},
  ): Promise<ExperimentStatus> {
    const intervalMs = options.intervalMs ?? 500;
    const timeoutMs = options.timeoutMs ?? 120_000;
    const sleep =
      options.sleep ?? ((ms: number) => new Promise((r) => setTimeout(r, ms)));
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const status = await this.experimentStatus(handle);
      onUpdate(status);
      if (status.status !== "running") return status;
      if (Date.now() > deadline) {
        throw new Error(`experiment ${handle} still running after ${timeoutMs}ms`);
      }
      await sleep(intervalMs);
    }
  }
}
