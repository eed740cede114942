/** Review-session state machine: one evaluator working a queue.
 *
 * Holds the current item and a draft (scores, marks, links, notes).
 * Nothing is ever submitted automatically — only submit() and
 * retryPending() talk to the service — and a submitted item leaves the
 * queue only once the service acknowledges it. Failed transports keep
 * the record in a local pending map keyed by narration+evaluator, so a
 * retry can never produce a duplicate.
 */

import { ApiClient, ApiError } from "./api";
import { ErrorMark, addMark, errorCounts, removeMark, wordAt } from "./marks";
import {
  ASPECTS,
  Aspect,
  AggregateReport,
  ErrorDimension,
  EvaluationRecord,
  QueueItem,
  SubmitAck,
  isDone,
} from "./types";

export type ScoreEntry = number | "na";

export interface Draft {
  scores: Partial<Record<Aspect, ScoreEntry>>;
  marks: ErrorMark[];
  rootCauseLinks: Partial<Record<ErrorDimension, ErrorDimension>>;
  nonHadith: boolean;
  notes: string;
}

function emptyDraft(): Draft {
  return { scores: {}, marks: [], rootCauseLinks: {}, nonHadith: false, notes: "" };
}

export class ValidationError extends Error {
  readonly aspects: Aspect[];

  constructor(message: string, aspects: Aspect[] = []) {
    super(message);
    this.aspects = aspects;
  }
}

export type SubmitResult =
  | { status: "recorded"; ack: SubmitAck }
  | { status: "queued_offline" };

export function idempotencyKey(narrationId: string, evaluatorId: string): string {
  return `${narrationId}:${evaluatorId}`;
}

export class ReviewSession {
  readonly evaluatorId: string;
  current: QueueItem | null = null;
  done = false;
  draft: Draft = emptyDraft();
  lastReport: AggregateReport | null = null;
  /** Server-side rejection text for the last submit, for inline display. */
  fieldError: string | null = null;

  private readonly api: ApiClient;
  private readonly pending = new Map<string, EvaluationRecord>();

  constructor(api: ApiClient, evaluatorId: string) {
    if (!evaluatorId) throw new ValidationError("evaluator id must be non-empty");
    this.api = api;
    this.evaluatorId = evaluatorId;
  }

  /** Fetch the next unreviewed item and reset the draft. Errors propagate
   * to the caller so the UI can show a retry affordance — never dropped. */
  async loadNext(): Promise<void> {
    const response = await this.api.nextItem(this.evaluatorId);
    if (isDone(response)) {
      this.current = null;
      this.done = true;
    } else {
      this.current = response;
      this.done = false;
    }
    this.draft = emptyDraft();
    this.fieldError = null;
  }

  async refreshReport(): Promise<AggregateReport> {
    this.lastReport = await this.api.report();
    return this.lastReport;
  }

  /** Every displayed text pane, by the name marks reference. */
  paneTexts(): Record<string, string> {
    if (!this.current) return {};
    const { narration, bundle } = this.current;
    const panes: Record<string, string> = {
      chain: narration.chain,
      text: narration.text,
    };
    if (bundle) {
      if (bundle.diacritized_chain) panes["diacritized_chain"] = bundle.diacritized_chain;
      if (bundle.diacritized_text) panes["diacritized_text"] = bundle.diacritized_text;
      if (bundle.summary) panes["summary"] = bundle.summary;
      for (const [lang, text] of Object.entries(bundle.translations)) {
        panes[`translation:${lang}`] = text;
      }
    }
    return panes;
  }

  setScore(aspect: Aspect, value: number): void {
    if (!Number.isFinite(value) || value < 0 || value > 10) {
      throw new ValidationError(`score for ${aspect} must lie within 0–10`, [aspect]);
    }
    this.draft.scores[aspect] = value;
  }

  markNotApplicable(aspect: Aspect): void {
    this.draft.scores[aspect] = "na";
  }

  clearScore(aspect: Aspect): void {
    delete this.draft.scores[aspect];
  }

  /** Snap `offset` in `pane` to its word and mark it under `dimension`. */
  markWordAt(pane: string, offset: number, dimension: ErrorDimension): ErrorMark | null {
    const text = this.paneTexts()[pane];
    if (text === undefined) throw new ValidationError(`unknown pane: ${pane}`);
    const span = wordAt(text, offset);
    if (!span) return null;
    const mark: ErrorMark = { pane, dimension, start: span.start, end: span.end };
    this.draft.marks = addMark(this.draft.marks, mark);
    return mark;
  }

  unmark(mark: ErrorMark): void {
    this.draft.marks = removeMark(this.draft.marks, mark);
  }

  /** Link every `dimension` error to a single upstream root cause. */
  linkRootCause(dimension: ErrorDimension, root: ErrorDimension): void {
    if (dimension === root) throw new ValidationError("an error cannot be its own root cause");
    const links = { ...this.draft.rootCauseLinks, [dimension]: root };
    let cursor: ErrorDimension | undefined = root;
    while (cursor !== undefined) {
      if (cursor === dimension) throw new ValidationError("root-cause links must be acyclic");
      cursor = links[cursor];
    }
    this.draft.rootCauseLinks = links;
  }

  unlinkRootCause(dimension: ErrorDimension): void {
    const links = { ...this.draft.rootCauseLinks };
    delete links[dimension];
    this.draft.rootCauseLinks = links;
  }

  setNonHadith(value: boolean): void {
    this.draft.nonHadith = value;
  }

  setNotes(value: string): void {
    this.draft.notes = value;
  }

  /** Turn the draft into a postable record; rejects unless every one of
   * the nine aspects is scored or explicitly marked not applicable. */
  buildRecord(): EvaluationRecord {
    if (!this.current) throw new ValidationError("no item loaded");
    const missing = ASPECTS.filter((aspect) => this.draft.scores[aspect] === undefined);
    if (missing.length > 0) {
      throw new ValidationError(
        `aspects must be scored or marked not applicable: ${missing.join(", ")}`,
        missing,
      );
    }
    const aspectScores: Record<string, number> = {};
    for (const aspect of ASPECTS) {
      const entry = this.draft.scores[aspect];
      if (typeof entry === "number") aspectScores[aspect] = entry;
    }
    return {
      narration_id: this.current.narration.narration_id,
      evaluator_id: this.evaluatorId,
      aspect_scores: aspectScores,
      error_counts: errorCounts(this.draft.marks, this.paneTexts()),
      is_non_hadith: this.draft.nonHadith,
      root_cause_links: { ...this.draft.rootCauseLinks } as Record<string, string>,
      free_notes: this.draft.notes,
    };
  }

  pendingCount(): number {
    return this.pending.size;
  }

  /** Submit the current draft. On acknowledgment the item leaves the
   * queue and the aggregate panel data is refreshed; on a transport
   * failure the record is queued locally under its idempotency key. */
  async submit(): Promise<SubmitResult> {
    const record = this.buildRecord();
    const key = idempotencyKey(record.narration_id, record.evaluator_id);
    this.pending.set(key, record);
    return this.flush(key);
  }

  /** Re-send every locally queued record; at most one request per key. */
  async retryPending(): Promise<SubmitResult[]> {
    const results: SubmitResult[] = [];
    for (const key of [...this.pending.keys()]) {
      results.push(await this.flush(key));
    }
    return results;
  }

  private async flush(key: string): Promise<SubmitResult> {
    const record = this.pending.get(key);
    if (!record) return { status: "queued_offline" };
    let ack: SubmitAck;
    try {
      ack = await this.api.submitRecord(record);
    } catch (err) {
      if (err instanceof ApiError) {
        // The service rejected the record itself; retrying the same
        // payload cannot succeed, so surface it and drop it from the
        // queue — the draft is still intact for correction.
        this.pending.delete(key);
        this.fieldError = err.message;
        throw err;
      }
      return { status: "queued_offline" };
    }
    this.pending.delete(key);
    this.fieldError = null;
    if (this.current && idempotencyKey(this.current.narration.narration_id, this.evaluatorId) === key) {
      await this.loadNext();
    }
    await this.refreshReport();
    return { status: "recorded", ack };
  }
}
