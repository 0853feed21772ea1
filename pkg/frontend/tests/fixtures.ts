import type { IntroTrace, Suggestion, SuggestionBatch, WorkRecord } from "../src/types.js";

export function suggestion(overrides: Partial<Suggestion> = {}): Suggestion {
  return {
    rank: 1,
    key: "a1b2",
    work_id: "W00001",
    title: "Quick Brown Foxes in Retrieval",
    year: 2020,
    venue: "Conf X",
    source: "index",
    score: -0.5,
    ...overrides,
  };
}

export function batch(suggestions: Suggestion[]): SuggestionBatch {
  return {
    context: {
      previous_sentence: "Before.",
      masked_sentence: "Here CITE-HERE now.",
      next_sentence: "After.",
    },
    suggestions,
  };
}

export function workRecord(overrides: Partial<WorkRecord> = {}): WorkRecord {
  return {
    id: "W00001",
    title: "Quick Brown Foxes in Retrieval",
    abstract: "A study of fast foxes.",
    authors: ["Doe, Jane", "Roe, Rick"],
    publication_year: 2020,
    venue: "Conf X",
    cited_by_count: 12,
    language: "en",
    referenced_works: [],
    ...overrides,
  };
}

export function fixtureTrace(overrides: Partial<IntroTrace> = {}): IntroTrace {
  return {
    title: "A Manuscript",
    abstract: "We study things.",
    paragraphs: ["Paragraph zero text.", "Paragraph one text.", "Paragraph two text."],
    canonical_refs: [
      workRecord({ id: "C1", title: "Old Foundations", publication_year: 2010 }),
      workRecord({ id: "C2", title: "Older Methods", publication_year: 2008 }),
    ],
    recent_refs: [workRecord({ id: "R1", title: "Fresh Results", publication_year: 2024 })],
    votes: [
      { paragraph_index: 0, reference_id: "C1", verdict: "yes", rationale: "" },
      { paragraph_index: 0, reference_id: "C2", verdict: "yes", rationale: "" },
      { paragraph_index: 0, reference_id: "R1", verdict: "yes", rationale: "" },
      { paragraph_index: 0, reference_id: "X1", verdict: "no", rationale: "" },
      { paragraph_index: 1, reference_id: "C1", verdict: "no", rationale: "" },
      { paragraph_index: 1, reference_id: "C2", verdict: "no", rationale: "" },
    ],
    kept_paragraphs: ["Paragraph zero text."],
    summary: "Key results summarized.",
    intro_text: "Building on [1] and [3], we act. See also [9].",
    citation_map: { "1": "C1", "3": "R1" },
    y_years: 5,
    keep_fraction: 0.5,
    reports: {
      dropped_reference_ids: [],
      yearless_reference_ids: [],
      zero_vote_paragraphs: [2],
      dangling_citations: [9],
    },
    ...overrides,
  };
}

export type Route = (init?: RequestInit) => Promise<Response> | Response;

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** Tiny mock gateway: exact-path routing over fetch. */
export function mockFetch(routes: Record<string, Route>) {
  const calls: { url: string; body: unknown }[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    calls.push({ url: path, body: init?.body ? JSON.parse(String(init.body)) : null });
    const route = routes[path];
    if (!route) return jsonResponse({ error: "not_found" }, 404);
    return route(init);
  };
  return { fetchFn, calls };
}
