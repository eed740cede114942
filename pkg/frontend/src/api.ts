/** Thin client for the three review-service endpoints.
 *
 * The fetch implementation is injected so tests can run against a fake
 * and the browser build against window.fetch.
 */

import type { AggregateReport, EvaluationRecord, QueueResponse, SubmitAck } from "./types";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Raised for any non-success response; carries the server's error text. */
export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function errorText(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { error?: string };
    if (body && typeof body.error === "string") return body.error;
  } catch {
    // fall through to the generic message
  }
  return `request failed with status ${response.status}`;
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;
  private readonly base: string;

  constructor(fetchImpl: FetchLike, base = "") {
    this.fetchImpl = fetchImpl;
    this.base = base.replace(/\/$/, "");
  }

  async nextItem(evaluatorId: string): Promise<QueueResponse> {
    const url = `${this.base}/api/queue/next?evaluator_id=${encodeURIComponent(evaluatorId)}`;
    const response = await this.fetchImpl(url);
    if (!response.ok) throw new ApiError(response.status, await errorText(response));
    return (await response.json()) as QueueResponse;
  }

  async submitRecord(record: EvaluationRecord): Promise<SubmitAck> {
    const response = await this.fetchImpl(`${this.base}/api/records`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(record),
    });
    if (response.status !== 201) throw new ApiError(response.status, await errorText(response));
    return (await response.json()) as SubmitAck;
  }

  async report(): Promise<AggregateReport> {
    const response = await this.fetchImpl(`${this.base}/api/report`);
    if (!response.ok) throw new ApiError(response.status, await errorText(response));
    return (await response.json()) as AggregateReport;
  }
}
