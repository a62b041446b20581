import type {
  PredictRequest,
  PredictResponse,
  SchemaResponse,
  TrendResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`service returned ${status}: ${detail}`);
  }
}

async function getJson<T>(url: string): Promise<T> {
  const response = await fetch(url);
  if (!response.ok) {
    throw new ApiError(response.status, await describe(response));
  }
  return (await response.json()) as T;
}

async function describe(response: Response): Promise<string> {
  try {
    const body = await response.json();
    return typeof body.detail === "string"
      ? body.detail
      : JSON.stringify(body.detail ?? body);
  } catch {
    return response.statusText;
  }
}

export class ServiceClient {
  constructor(readonly base: string) {}

  health(): Promise<{ status: string }> {
    return getJson(`${this.base}/health`);
  }

  schema(): Promise<SchemaResponse> {
    return getJson(`${this.base}/schema`);
  }

  states(): Promise<{ states: string[] }> {
    return getJson(`${this.base}/states`);
  }

  trend(state: string): Promise<TrendResponse> {
    return getJson(`${this.base}/trend?state=${encodeURIComponent(state)}`);
  }

  importance(): Promise<{ entries: [string, number][] }> {
    return getJson(`${this.base}/importance`);
  }

  async predict(request: PredictRequest): Promise<PredictResponse> {
    const response = await fetch(`${this.base}/predict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await describe(response));
    }
    return (await response.json()) as PredictResponse;
  }
}
