// Payload shapes of the labeling service. The console renders these
// verbatim; it never derives or recomputes a score on its own.

export interface DatasetInfo {
  name: string;
  n: number;
  r: number;
  prevalence: number | null;
  has_labels: boolean;
}

export interface CandidateRow {
  index: number;
  id: string;
  meta: string | null;
  f: number;
  im: number | null; // null for engines without a lookahead term
  score: number;
}

export interface CandidatePayload {
  candidate: CandidateRow;
  top_k: CandidateRow[];
  iteration: number;
  budget: number;
}

export interface Histogram {
  edges: number[];
  counts: number[];
}

export interface ScoreSummary {
  min: number;
  max: number;
  mean: number;
  histogram: Histogram;
}

export interface Metrics {
  iteration: number;
  budget: number;
  recall: number[];
  ideal: number[];
  random_expect: number[];
  latency_seconds: number[];
  f_summary: ScoreSummary;
  exhausted: boolean;
}

export interface HistoryRow {
  iteration: number;
  index: number;
  id: string;
  label: 0 | 1;
  f_at_query: number;
}

export interface SessionSummary {
  session: string;
  dataset: string;
  engine: string;
  hyperparams: Record<string, number>;
  budget: number;
  iteration: number;
  recall: number;
  free_label: boolean;
  seed: number | null;
  created: number;
  updated: number;
  exhausted: boolean;
  n: number;
  history: HistoryRow[];
}

export interface Hyperparams {
  lambda: number;
  w0: number;
  pi: number;
  alpha: number;
}

export interface CreateSessionRequest {
  dataset: string;
  engine: "las" | "wnas";
  budget: number;
  hyperparams: Hyperparams;
  seed?: number;
  idempotency_key?: string;
}

export interface CreateSessionResponse {
  session: string;
  existing: boolean;
}

export interface LabelResponse {
  iteration: number;
  recall: number;
  next_candidate: number | null;
  exhausted: boolean;
}
