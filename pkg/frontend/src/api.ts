/** Typed client for the attack service. */

export interface ModelInfo {
  input_shape: number[];
  input_range: [number, number];
  num_classes: number;
}

export interface DatasetInfo {
  size: number;
  image_shape: number[];
}

export interface DatasetImage {
  png: string; // base64
  label: number;
  prediction: number;
  shape: number[];
}

export interface ConstraintBody {
  kind: "uniform" | "region" | "ratio" | "imperceptible";
  eps?: number;
  ratio?: number;
  mask?: string; // base64 PNG, white = attackable
  adaptive?: boolean;
}

export interface AttackReport {
  success: boolean;
  norms: { l0: number; l1: number; l2: number; linf: number } | null;
  ssim: number | null;
  ciede2000: number | null;
  iterations: { deepfool: number; bb: number };
  constraint: { kind: string; params: Record<string, unknown> };
  seed: number;
  wall_ms: null;
}

export interface JobStatus {
  id: string;
  status: "queued" | "running" | "done" | "failed";
  error: string | null;
  report: AttackReport | null;
  images: Record<string, string> | null;
  wall_ms?: number;
}

export interface RegionBox {
  row: number;
  col: number;
  height: number;
  width: number;
  score: number;
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    const body = await response.text();
    throw new Error(`${response.status} ${response.statusText}: ${body}`);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  listModels(): Promise<Record<string, ModelInfo>> {
    return fetch(`${this.base}/models`).then((r) => asJson(r));
  }

  listDatasets(): Promise<Record<string, DatasetInfo>> {
    return fetch(`${this.base}/datasets`).then((r) => asJson(r));
  }

  getImage(dataset: string, index: number, model?: string): Promise<DatasetImage> {
    const query = model ? `?model=${encodeURIComponent(model)}` : "";
    return fetch(`${this.base}/datasets/${dataset}/images/${index}${query}`)
      .then((r) => asJson(r));
  }

  async submitAttack(body: {
    model: string;
    dataset: string;
    index: number;
    constraint: ConstraintBody;
    seed?: number;
  }): Promise<string> {
    const response = await fetch(`${this.base}/attacks`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const doc = await asJson<{ job_id: string }>(response);
    return doc.job_id;
  }

  getJob(jobId: string): Promise<JobStatus> {
    return fetch(`${this.base}/attacks/${jobId}`).then((r) => asJson(r));
  }

  /** Poll until the job settles; desk-scale jobs finish within seconds. */
  async pollJob(jobId: string, intervalMs = 1000,
                timeoutMs = 120000): Promise<JobStatus> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const status = await this.getJob(jobId);
      if (status.status === "done" || status.status === "failed") return status;
      if (Date.now() > deadline) throw new Error(`job ${jobId} timed out`);
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  async fetchBytes(path: string): Promise<Uint8Array> {
    const response = await fetch(`${this.base}${path}`);
    if (!response.ok) throw new Error(`${response.status} fetching ${path}`);
    return new Uint8Array(await response.arrayBuffer());
  }

  importance(body: {
    model: string;
    dataset: string;
    index: number;
    m?: number;
    n?: number;
    sigma?: number;
    window?: { h: number; w: number };
    k?: number;
  }): Promise<{ png: string; regions: RegionBox[] }> {
    return fetch(`${this.base}/importance`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => asJson(r));
  }
}
