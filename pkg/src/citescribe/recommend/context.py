"""Cursor-context extraction: sentence segmentation and the citation-slot
window (previous sentence, masked sentence with the slot token, next
sentence)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

CITE_TOKEN = "CITE-HERE"

# tokens (sans final period) that must not end a sentence
_ABBREVIATIONS = frozenset(
    {"e.g", "i.e", "et al", "cf", "vs", "etc", "fig", "eq", "sec", "tab", "resp", "ca"}
)
_TERMINATORS = ".?!"
_OPENERS = {"(": ")", "{": "}"}


@dataclass(frozen=True)
class ContextWindow:
    previous_sentence: Optional[str]
    masked_sentence: str
    next_sentence: Optional[str]

    def __post_init__(self):
        if self.masked_sentence.count(CITE_TOKEN) != 1:
            raise ValueError(f"masked sentence must contain {CITE_TOKEN} exactly once")

    def to_dict(self) -> dict:
        return {
            "previous_sentence": self.previous_sentence,
            "masked_sentence": self.masked_sentence,
            "next_sentence": self.next_sentence,
        }

    def query_fallback_text(self) -> str:
        """Masked sentence with the slot token removed; the retrieval query of
        last resort when fabrication fails."""
        text = self.masked_sentence.replace(CITE_TOKEN, " ")
        return " ".join(text.split())


def _trailing_token(text: str, end: int) -> str:
    """Word immediately before position ``end``, including internal periods."""
    i = end
    while i > 0 and (text[i - 1].isalpha() or text[i - 1] == "."):
        i -= 1
    return text[i:end]


def _is_guarded(text: str, dot: int) -> bool:
    token = _trailing_token(text, dot).strip(".").casefold()
    if token in _ABBREVIATIONS:
        return True
    # two-word guards such as "et al"
    start = dot - len(_trailing_token(text, dot))
    j = start
    while j > 0 and text[j - 1].isspace():
        j -= 1
    previous = _trailing_token(text, j).strip(".").casefold()
    return f"{previous} {token}" in _ABBREVIATIONS


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Sentence spans as (start, end) character offsets.

    Splits at terminator runs followed by whitespace and an uppercase letter
    (or end of text), skipping abbreviation guards and anything inside
    balanced parentheses or braces.
    """
    spans: list[tuple[int, int]] = []
    n = len(text)
    start = 0
    while start < n and text[start].isspace():
        start += 1
    if start >= n:
        return spans
    depth = 0
    i = start
    while i < n:
        ch = text[i]
        if ch in _OPENERS:
            depth += 1
        elif ch in (")", "}"):
            depth = max(0, depth - 1)
        elif ch in _TERMINATORS and depth == 0:
            j = i + 1
            while j < n and text[j] in _TERMINATORS:
                j += 1
            if j >= n:
                spans.append((start, j))
                return spans
            if text[j].isspace() and not (ch == "." and _is_guarded(text, i)):
                k = j
                while k < n and text[k].isspace():
                    k += 1
                if k >= n or text[k].isupper():
                    spans.append((start, j))
                    start = k
                    i = k
                    continue
            i = j
            continue
        i += 1
    if start < n:
        end = n
        while end > start and text[end - 1].isspace():
            end -= 1
        if end > start:
            spans.append((start, end))
    return spans


def make_context(document: str, cursor: int) -> ContextWindow:
    """Build the citation-slot window around a character offset.

    The slot token lands at the cursor's position inside its sentence, padded
    with single spaces when it falls between non-space characters. A cursor in
    the gap after a sentence attaches to that sentence.
    """
    if cursor < 0 or cursor > len(document):
        raise ValueError(f"cursor {cursor} outside document of length {len(document)}")
    spans = split_sentences(document)
    if not spans:
        return ContextWindow(None, CITE_TOKEN, None)

    idx = 0
    for pos, (span_start, _) in enumerate(spans):
        if cursor >= span_start:
            idx = pos
        else:
            break
    span_start, span_end = spans[idx]
    # reserved token in source text would break the exactly-once invariant
    sentence = document[span_start:span_end].replace(CITE_TOKEN, "").rstrip()
    rel = min(max(cursor - span_start, 0), len(sentence))
    left, right = sentence[:rel], sentence[rel:]
    prefix = " " if left and not left[-1].isspace() else ""
    suffix = " " if right and not right[0].isspace() else ""
    masked = f"{left}{prefix}{CITE_TOKEN}{suffix}{right}"

    previous = document[spans[idx - 1][0] : spans[idx - 1][1]] if idx > 0 else None
    nxt = document[spans[idx + 1][0] : spans[idx + 1][1]] if idx + 1 < len(spans) else None
    return ContextWindow(previous, masked, nxt)
