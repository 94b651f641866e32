// Thin client over the review service JSON API.

import { JudgmentPayload, NextSample, SummaryPayload } from "./types.js";

export type SubmitOutcome = "stored" | "duplicate";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ValidationError extends ApiError {
  constructor(
    readonly criterion: string,
    readonly allowed: string[],
    message: string,
  ) {
    super(422, message);
  }
}

export class ReviewApi {
  constructor(private readonly base: string = "") {}

  async health(): Promise<{ samples: number; judgments: number }> {
    const resp = await fetch(`${this.base}/api/health`);
    if (!resp.ok) throw new ApiError(resp.status, "service unavailable");
    return resp.json();
  }

  async nextSample(annotator: string): Promise<NextSample> {
    const resp = await fetch(
      `${this.base}/api/samples/next?annotator=${encodeURIComponent(annotator)}`,
    );
    if (resp.status === 204) return "done";
    if (!resp.ok) throw new ApiError(resp.status, `next sample failed (${resp.status})`);
    return resp.json();
  }

  /**
   * Post one judgment. A 409 means this annotator already judged the
   * criterion; callers treat that as success-and-skip, never a retry.
   */
  async postJudgment(payload: JudgmentPayload): Promise<SubmitOutcome> {
    const resp = await fetch(`${this.base}/api/judgments`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (resp.status === 409) return "duplicate";
    if (resp.status === 422) {
      const body = await resp.json().catch(() => ({ detail: {} }));
      const detail = body.detail ?? {};
      throw new ValidationError(
        detail.criterion ?? payload.criterion,
        detail.allowed ?? [],
        detail.error ?? "label rejected",
      );
    }
    if (!resp.ok) throw new ApiError(resp.status, `judgment failed (${resp.status})`);
    return "stored";
  }

  async summary(): Promise<SummaryPayload> {
    const resp = await fetch(`${this.base}/api/summary`);
    if (!resp.ok) throw new ApiError(resp.status, `summary failed (${resp.status})`);
    return resp.json();
  }
}

/** Submit a completed card; duplicates are skipped, not errors. */
export async function submitCard(
  api: ReviewApi,
  judgments: JudgmentPayload[],
): Promise<{ stored: number; duplicates: number }> {
  let stored = 0;
  let duplicates = 0;
  for (const judgment of judgments) {
    const outcome = await api.postJudgment(judgment);
    if (outcome === "stored") stored += 1;
    else duplicates += 1;
  }
  return { stored, duplicates };
}
