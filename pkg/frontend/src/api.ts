import type { ApiRecord, ApiRecordDetail, QueueName, RecordPage, Stats } from "./types.js";

/** A 409: someone else finalized the record first. */
export class ConflictError extends Error {
  constructor(recordId: string) {
    super(`record ${recordId} already reviewed`);
    this.name = "ConflictError";
  }
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`API error ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin client over the review API; the only backend surface the UI touches. */
export class ReviewApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (response.status === 409) {
      const recordId = path.split("/")[2] ?? path;
      throw new ConflictError(recordId);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  async listRecords(
    queue: QueueName,
    page = 1,
    pageSize = 20,
    status = "pending",
  ): Promise<RecordPage> {
    const params = new URLSearchParams({
      status,
      queue,
      page: String(page),
      page_size: String(pageSize),
    });
    const response = await this.request(`/records?${params}`);
    return (await response.json()) as RecordPage;
  }

  async getRecord(id: string): Promise<ApiRecordDetail> {
    const response = await this.request(`/records/${encodeURIComponent(id)}`);
    return (await response.json()) as ApiRecordDetail;
  }

  async approve(id: string): Promise<ApiRecord> {
    const response = await this.request(`/records/${encodeURIComponent(id)}/approve`, {
      method: "POST",
    });
    return (await response.json()) as ApiRecord;
  }

  async amend(id: string, goldText: string): Promise<ApiRecord> {
    const response = await this.request(`/records/${encodeURIComponent(id)}/amend`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ gold_text: goldText }),
    });
    return (await response.json()) as ApiRecord;
  }

  async stats(): Promise<Stats> {
    const response = await this.request("/stats");
    return (await response.json()) as Stats;
  }

  async curveCsv(): Promise<string> {
    const response = await this.request("/stats/curve.csv");
    return await response.text();
  }
}
