// Wire types mirroring the review API's JSON exactly.

export interface ApiReference {
  article_id: string;
  act: string;
  act_date: string | null;
  raw_span: [number, number];
}

export interface ApiRecord {
  id: string;
  instruction: string;
  input: string;
  response: string | null;
  backend: { kind: string; model: string | null };
  prediction: string | null;
  gate: { verdict: string; token_count: number | null };
  review_status: { state: ReviewState; gold_text: string | null };
  references: ApiReference[];
  error: string | null;
  prompt_tokens: number | null;
}

export interface ApiRecordDetail extends ApiRecord {
  gold: string | null;
  diff: DiffHunk[] | null;
}

export type ReviewState = "pending" | "approved" | "amended";

export interface DiffHunk {
  op: "equal" | "delete" | "insert";
  text: string;
}

export interface RecordPage {
  items: ApiRecord[];
  total: number;
  page: number;
  page_size: number;
}

export interface BackendStats {
  n_records: number;
  n_possible: number;
  possible_rate: number;
  n_correct: number;
  correctness_rate_among_possible: number | null;
}

export interface Stats {
  possible_rate: number | null;
  correctness_rate_among_possible: number | null;
  n_records: number;
  n_possible: number;
  n_correct: number;
  per_backend: Record<string, BackendStats>;
  curve: CurvePoint[];
}

export interface CurvePoint {
  length_threshold: number;
  correctness_rate: number;
  n_samples: number;
}

export type QueueName = "references" | "consolidations";

/** What the reviewer sees for one record. */
export interface ReviewItemView {
  id: string;
  modificationSection: string;
  existingArticle: string;
  prediction: string | null;
  diff: DiffHunk[] | null;
  references: { articleId: string; act: string; resolved: boolean }[];
  reviewState: ReviewState;
  backendLabel: string;
  gateVerdict: string;
  error: string | null;
}

export function toReviewItem(record: ApiRecord, detail?: ApiRecordDetail): ReviewItemView {
  return {
    id: record.id,
    modificationSection: record.instruction,
    existingArticle: record.input,
    prediction: record.prediction,
    diff: detail?.diff ?? null,
    references: record.references.map((ref) => ({
      articleId: ref.article_id,
      act: ref.act,
      resolved: ref.act !== "",
    })),
    reviewState: record.review_status.state,
    backendLabel: record.backend.model
      ? `${record.backend.kind}:${record.backend.model}`
      : record.backend.kind,
    gateVerdict: record.gate.verdict,
    error: record.error,
  };
}
