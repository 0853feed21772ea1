/** Editor state core: pure functions so every behavior is unit-testable.
 *
 * Citation insertion puts \cite{...} at the cursor. Index-sourced works also
 * get a generated BibTeX entry appended to the attached bibliography (cite
 * key: first-author surname + year + first title word, suffix-deduplicated);
 * bibliography-sourced works reuse their own cite key and leave the
 * bibliography untouched.
 */

import type { IntroTrace, Suggestion, SuggestionBatch, WorkRecord } from "./types.js";

export interface EditorState {
  document: string;
  cursor: number;
  bibtex: string;
  lastBatch: SuggestionBatch | null;
  lastTrace: IntroTrace | null;
}

export interface Snapshot {
  document: string;
  cursor: number;
  bibtex: string;
}

export function createState(document = "", bibtex = ""): EditorState {
  return { document, cursor: 0, bibtex, lastBatch: null, lastTrace: null };
}

export function clampCursor(state: EditorState): EditorState {
  const cursor = Math.max(0, Math.min(state.cursor, state.document.length));
  return cursor === state.cursor ? state : { ...state, cursor };
}

export function snapshot(state: EditorState): Snapshot {
  return { document: state.document, cursor: state.cursor, bibtex: state.bibtex };
}

export function restore(state: EditorState, snap: Snapshot): EditorState {
  return { ...state, ...snap };
}

const WORD = /[A-Za-z0-9]+/;

function surnameOf(author: string | undefined): string {
  if (!author) return "anon";
  const beforeComma = author.includes(",") ? author.split(",")[0] : null;
  const source = beforeComma ?? author.trim().split(/\s+/).slice(-1)[0] ?? author;
  const match = source.match(WORD);
  return (match ? match[0] : "anon").toLowerCase();
}

export function deriveCiteKey(authors: string[], year: number | null, title: string): string {
  const surname = surnameOf(authors[0]);
  const firstWord = (title.match(WORD)?.[0] ?? "untitled").toLowerCase();
  return `${surname}${year ?? ""}${firstWord}`;
}

export function existingCiteKeys(bibtex: string): Set<string> {
  const keys = new Set<string>();
  for (const match of bibtex.matchAll(/@\w+\s*\{\s*([^,\s{}]+)\s*,/g)) {
    keys.add(match[1]);
  }
  return keys;
}

export function dedupeCiteKey(base: string, taken: Set<string>): string {
  if (!taken.has(base)) return base;
  for (let i = 0; i < 26; i++) {
    const candidate = base + String.fromCharCode(97 + i);
    if (!taken.has(candidate)) return candidate;
  }
  let n = 2;
  while (taken.has(`${base}x${n}`)) n++;
  return `${base}x${n}`;
}

export function bibtexEntryFor(record: WorkRecord, citeKey: string): string {
  const lines = [`@misc{${citeKey},`, `  title = {${record.title}},`];
  if (record.authors.length) {
    lines.push(`  author = {${record.authors.join(" and ")}},`);
  }
  if (record.publication_year !== null) {
    lines.push(`  year = {${record.publication_year}},`);
  }
  if (record.venue) {
    lines.push(`  howpublished = {${record.venue}},`);
  }
  lines.push(`  note = {work ${record.id}},`, "}");
  return lines.join("\n");
}

export interface InsertResult {
  state: EditorState;
  snapshot: Snapshot;
  citeKey: string;
  appendedEntry: string | null;
}

/** Insert \cite{...} for a chosen suggestion. `record` supplies authors and
 * abstract for index-sourced works (fetched from /works/{id}); bibliography
 * sources ignore it. */
export function insertCitation(
  state: EditorState,
  suggestion: Suggestion,
  record: WorkRecord | null,
): InsertResult {
  const before = snapshot(state);
  let citeKey: string;
  let bibtex = state.bibtex;
  let appendedEntry: string | null = null;

  if (suggestion.source === "bibtex") {
    citeKey = suggestion.work_id.replace(/^bib:/, "");
  } else {
    const full: WorkRecord = record ?? {
      id: suggestion.work_id,
      title: suggestion.title,
      abstract: null,
      authors: [],
      publication_year: suggestion.year,
      venue: suggestion.venue,
      cited_by_count: 0,
      language: null,
      referenced_works: [],
    };
    const base = deriveCiteKey(full.authors, full.publication_year, full.title);
    citeKey = dedupeCiteKey(base, existingCiteKeys(bibtex));
    appendedEntry = bibtexEntryFor(full, citeKey);
    bibtex = bibtex.trimEnd();
    bibtex = bibtex ? `${bibtex}\n\n${appendedEntry}\n` : `${appendedEntry}\n`;
  }

  const marker = `\\cite{${citeKey}}`;
  const cursor = Math.max(0, Math.min(state.cursor, state.document.length));
  const document = state.document.slice(0, cursor) + marker + state.document.slice(cursor);
  return {
    state: { ...state, document, cursor: cursor + marker.length, bibtex },
    snapshot: before,
    citeKey,
    appendedEntry,
  };
}
