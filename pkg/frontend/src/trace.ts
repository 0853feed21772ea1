/** View models for the introduction-chain trace panel: the five stages from
 * reference split through the composed text, with bracket citations resolved
 * through the citation map (out-of-range brackets flagged as dangling). */

import type { IntroTrace, WorkRecord } from "./types.js";

export interface VoteCard {
  paragraphIndex: number;
  excerpt: string;
  yes: number;
  no: number;
  kept: boolean;
  label: string; // e.g. "3 yes / 1 no"
}

export type IntroSegment =
  | { kind: "text"; text: string }
  | { kind: "citation"; bracket: number; workId: string | null; dangling: boolean };

export interface StageView {
  id: "split" | "votes" | "kept" | "summary" | "compose";
  title: string;
}

export const STAGE_ORDER: StageView[] = [
  { id: "split", title: "Reference split" },
  { id: "votes", title: "Novelty votes" },
  { id: "kept", title: "Kept paragraphs" },
  { id: "summary", title: "Results summary" },
  { id: "compose", title: "Composed introduction" },
];

function excerptOf(text: string, limit = 90): string {
  return text.length <= limit ? text : `${text.slice(0, limit - 1)}…`;
}

export function voteCards(trace: IntroTrace): VoteCard[] {
  const tallies = new Map<number, { yes: number; no: number }>();
  for (const vote of trace.votes) {
    const entry = tallies.get(vote.paragraph_index) ?? { yes: 0, no: 0 };
    if (vote.verdict === "yes") entry.yes += 1;
    else entry.no += 1;
    tallies.set(vote.paragraph_index, entry);
  }
  const keptSet = new Set(trace.kept_paragraphs);
  return trace.paragraphs.map((paragraph, index) => {
    const { yes, no } = tallies.get(index) ?? { yes: 0, no: 0 };
    return {
      paragraphIndex: index,
      excerpt: excerptOf(paragraph),
      yes,
      no,
      kept: keptSet.has(paragraph),
      label: `${yes} yes / ${no} no`,
    };
  });
}

export function referenceNumber(trace: IntroTrace, index: number): WorkRecord | null {
  const ordered = [...trace.canonical_refs, ...trace.recent_refs];
  return ordered[index - 1] ?? null;
}

export function segmentIntroText(trace: IntroTrace): IntroSegment[] {
  const segments: IntroSegment[] = [];
  const pattern = /\[(\d+)\]/g;
  let last = 0;
  for (const match of trace.intro_text.matchAll(pattern)) {
    const start = match.index ?? 0;
    if (start > last) {
      segments.push({ kind: "text", text: trace.intro_text.slice(last, start) });
    }
    const bracket = Number(match[1]);
    const workId = trace.citation_map[String(bracket)] ?? null;
    segments.push({ kind: "citation", bracket, workId, dangling: workId === null });
    last = start + match[0].length;
  }
  if (last < trace.intro_text.length) {
    segments.push({ kind: "text", text: trace.intro_text.slice(last) });
  }
  return segments;
}

export function danglingBrackets(trace: IntroTrace): number[] {
  return segmentIntroText(trace)
    .filter((s): s is Extract<IntroSegment, { kind: "citation" }> => s.kind === "citation")
    .filter((s) => s.dangling)
    .map((s) => s.bracket);
}
