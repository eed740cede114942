/** Wire types for the review service, mirrored by hand from its JSON. */

/** The nine scored aspects, in form order. */
export const ASPECTS = [
  "chain_text_separation",
  "summarization",
  "grouping",
  "analytical_commentary",
  "thematic_tagging",
  "key_points",
  "thematic_similarity",
  "lexical_similarity",
  "semantic_similarity",
] as const;
export type Aspect = (typeof ASPECTS)[number];

export const ASPECT_LABELS: Record<Aspect, string> = {
  chain_text_separation: "chain/text separation",
  summarization: "summarization",
  grouping: "grouping",
  analytical_commentary: "analytical commentary",
  thematic_tagging: "thematic tagging",
  key_points: "key points",
  thematic_similarity: "thematic similarity",
  lexical_similarity: "lexical similarity",
  semantic_similarity: "semantic similarity",
};

/** The six error dimensions a word or phrase can be marked under. */
export const ERROR_DIMENSIONS = [
  "typos",
  "translation",
  "missing_words",
  "tagging",
  "key_phrases",
  "diacritization_char",
] as const;
export type ErrorDimension = (typeof ERROR_DIMENSIONS)[number];

export const DIMENSION_LABELS: Record<ErrorDimension, string> = {
  typos: "typo",
  translation: "translation",
  missing_words: "missing words",
  tagging: "tagging",
  key_phrases: "key phrases",
  diacritization_char: "diacritization",
};

export interface Narration {
  narration_id: string;
  book_id: string;
  chain: string;
  text: string;
  char_start: number;
  char_end: number;
  page_start: number;
  page_end: number;
  fidelity: number | null;
  group_id: string | null;
  qc_flags: string[];
  segment_confidence: number;
}

export interface Bundle {
  narration_id: string;
  translations: Record<string, string>;
  diacritized_chain: string | null;
  diacritized_text: string | null;
  summary: string | null;
  key_points: string[] | null;
  tags: string[] | null;
  provenance: Record<string, unknown>;
}

export interface QueueItem {
  narration: Narration;
  bundle: Bundle | null;
  neighbors: string[];
}

export type QueueResponse = QueueItem | { done: true };

export function isDone(r: QueueResponse): r is { done: true } {
  return (r as { done?: boolean }).done === true;
}

/** One evaluation as the service stores it; POST body and echo shape. */
export interface EvaluationRecord {
  narration_id: string;
  evaluator_id: string;
  aspect_scores: Record<string, number>;
  error_counts: Record<string, [number, number]>;
  is_non_hadith: boolean;
  root_cause_links: Record<string, string>;
  free_notes: string;
}

export interface SubmitAck {
  ok: boolean;
  record_key: string;
}

export interface AggregateReport {
  sample_size: number;
  n_narrations: number;
  non_hadith_count: number;
  non_hadith_rate: number;
  critical_count: number;
  critical_rate: number;
  critical_threshold: number;
  overall_mean: number | null;
  aspect_means: Record<string, number | null>;
  micro_rates: Record<string, number | null>;
  macro_rates: Record<string, number | null>;
}
