/** Wire types mirroring the session service's JSON payloads. */

export interface RuleCounts {
  n: number;
  n_x: number;
  n_y: number;
  n_xy: number;
}

export interface RulePayload {
  rule_id: number;
  antecedent: number[];
  consequent: number[];
  counts: RuleCounts;
  /** Raw measure values keyed by measure name. */
  measures: Record<string, number>;
  /** The learner's normalized view of the same measures. */
  measures_norm: Record<string, number>;
  /** Present only in ranking payloads. */
  score?: number;
}

export interface QueryPayload {
  iteration: number;
  r_max: number;
  pair: [number, number];
  rules: [RulePayload, RulePayload];
}

export type SessionState = "selecting" | "awaiting_answer" | "finished" | "failed";

export interface SessionView {
  id: string;
  ruleset: string;
  state: SessionState;
  status: string | null;
  error: string | null;
  n_answers: number;
  config: Record<string, unknown>;
  query: QueryPayload | null;
  /** Mirrors query.iteration / query.r_max while a query is pending. */
  iteration?: number;
  r_max?: number;
  /** Echo of the answer that produced this view. */
  answered?: { iteration: number; preference: number };
}

export interface StatsRecord {
  iteration: number;
  pair: [number, number];
  answer: number;
  r_max: number;
  center: number[];
  duration_s: number;
  selection_ok?: boolean;
}

export interface SessionRequest {
  ruleset?: string;
  k?: number;
  center?: string;
  selection?: string;
  bound_mode?: string;
  iterations?: number;
  stop_on_indifference?: boolean;
  search_ratio?: number;
  margin?: number;
  seed?: number | null;
}

/** 1 = left rule preferred, -1 = right rule preferred, 0 = indifferent. */
export type Preference = 1 | -1 | 0;
