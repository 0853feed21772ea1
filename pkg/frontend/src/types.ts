/** Wire types for the gateway HTTP API. */

export interface ContextInfo {
  previous_sentence: string | null;
  masked_sentence: string;
  next_sentence: string | null;
}

export type SuggestionSource = "bibtex" | "index";

export interface Suggestion {
  rank: number;
  key: string;
  work_id: string;
  title: string;
  year: number | null;
  venue: string | null;
  source: SuggestionSource;
  score: number;
}

export interface SuggestionBatch {
  context: ContextInfo;
  suggestions: Suggestion[];
  timings_ms?: Record<string, number>;
  fabrication_failed?: boolean;
}

export interface WorkRecord {
  id: string;
  title: string;
  abstract: string | null;
  authors: string[];
  publication_year: number | null;
  venue: string | null;
  cited_by_count: number;
  language: string | null;
  referenced_works: string[];
}

export interface NoveltyVote {
  paragraph_index: number;
  reference_id: string;
  verdict: "yes" | "no";
  rationale: string;
}

export interface TraceReports {
  dropped_reference_ids: string[];
  yearless_reference_ids: string[];
  zero_vote_paragraphs: number[];
  dangling_citations: number[];
}

export interface IntroTrace {
  title: string;
  abstract: string;
  paragraphs: string[];
  canonical_refs: WorkRecord[];
  recent_refs: WorkRecord[];
  votes: NoveltyVote[];
  kept_paragraphs: string[];
  summary: string;
  intro_text: string;
  citation_map: Record<string, string>;
  y_years: number;
  keep_fraction: number;
  reports: TraceReports;
}

export interface IntroResponse {
  intro_text: string;
  trace: IntroTrace;
}

export interface IntroRequest {
  manuscript: string;
  abstract: string;
  bibtex?: string;
  title?: string;
  y_years?: number;
  keep_fraction?: number;
}
