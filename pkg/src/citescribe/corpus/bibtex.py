"""Hand-rolled BibTeX reader covering the common entry/field subset.

Supported: @-entries with braced or quoted field values, numeric literals,
@string macros with # concatenation (same file), @comment/@preamble skipping.
Field values are de-braced and whitespace-normalized on parse. An entry with
unbalanced braces is reported as a diagnostic and skipped; the parser never
aborts the file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .works import Work

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_.+:/-]*")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class BibEntry:
    cite_key: str
    entry_type: str
    fields: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class BibDiagnostic:
    kind: str
    message: str
    cite_key: Optional[str] = None


@dataclass
class ParsedBib:
    entries: list[BibEntry] = field(default_factory=list)
    diagnostics: list[BibDiagnostic] = field(default_factory=list)


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def read_ident(self) -> str:
        m = _IDENT_RE.match(self.text, self.pos)
        if not m:
            return ""
        self.pos = m.end()
        return m.group(0)

    def read_braced(self) -> str:
        """Read a {...} group with nesting; pos sits on the opening brace."""
        assert self.peek() == "{"
        depth = 0
        start = self.pos
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    self.pos += 1
                    return self.text[start + 1 : self.pos - 1]
            self.pos += 1
        raise _UnbalancedBraces(start)

    def read_quoted(self) -> str:
        """Read a "..." value; braces inside protect quote characters."""
        assert self.peek() == '"'
        self.pos += 1
        start = self.pos
        depth = 0
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth < 0:
                    raise _UnbalancedBraces(self.pos)
            elif ch == '"' and depth == 0:
                value = self.text[start : self.pos]
                self.pos += 1
                return value
            self.pos += 1
        raise _UnbalancedBraces(start)


class _UnbalancedBraces(Exception):
    def __init__(self, offset: int):
        super().__init__(f"unbalanced braces near offset {offset}")
        self.offset = offset


def _normalize(value: str) -> str:
    return _WS_RE.sub(" ", value.replace("{", "").replace("}", "")).strip()


def _read_value(scanner: _Scanner, macros: dict[str, str], out: ParsedBib, key: str) -> str:
    """Field value: chunks joined by '#', each braced, quoted, number, or macro."""
    parts: list[str] = []
    while True:
        scanner.skip_ws()
        ch = scanner.peek()
        if ch == "{":
            parts.append(scanner.read_braced())
        elif ch == '"':
            parts.append(scanner.read_quoted())
        elif ch.isdigit():
            start = scanner.pos
            while not scanner.eof() and scanner.peek().isdigit():
                scanner.pos += 1
            parts.append(scanner.text[start : scanner.pos])
        else:
            name = scanner.read_ident()
            if not name:
                raise _UnbalancedBraces(scanner.pos)
            expansion = macros.get(name.casefold())
            if expansion is None:
                out.diagnostics.append(
                    BibDiagnostic("unknown_macro", f"undefined @string macro {name!r}", key)
                )
                expansion = ""
            parts.append(expansion)
        scanner.skip_ws()
        if scanner.peek() == "#":
            scanner.pos += 1
            continue
        return "".join(parts)


def _parse_entry_body(
    scanner: _Scanner, entry_type: str, macros: dict[str, str], out: ParsedBib
) -> Optional[BibEntry]:
    scanner.skip_ws()
    if scanner.peek() != "{":
        out.diagnostics.append(
            BibDiagnostic("unsupported_construct", f"@{entry_type} not followed by '{{'")
        )
        return None
    scanner.pos += 1
    scanner.skip_ws()
    key_start = scanner.pos
    while not scanner.eof() and scanner.peek() not in ",}":
        scanner.pos += 1
    cite_key = scanner.text[key_start : scanner.pos].strip()
    fields: dict[str, str] = {}
    while not scanner.eof():
        if scanner.peek() == ",":
            scanner.pos += 1
        scanner.skip_ws()
        if scanner.peek() == "}":
            scanner.pos += 1
            break
        name = scanner.read_ident()
        if not name:
            raise _UnbalancedBraces(scanner.pos)
        scanner.skip_ws()
        if scanner.peek() != "=":
            raise _UnbalancedBraces(scanner.pos)
        scanner.pos += 1
        value = _read_value(scanner, macros, out, cite_key)
        fields[name.casefold()] = _normalize(value)
        scanner.skip_ws()
    if not cite_key:
        out.diagnostics.append(BibDiagnostic("missing_key", f"@{entry_type} entry without a key"))
        return None
    return BibEntry(cite_key=cite_key, entry_type=entry_type.casefold(), fields=fields)


def parse_bibtex(text: str) -> ParsedBib:
    out = ParsedBib()
    macros: dict[str, str] = {}
    scanner = _Scanner(text)
    seen_keys: set[str] = set()
    while True:
        at = scanner.text.find("@", scanner.pos)
        if at < 0:
            break
        scanner.pos = at + 1
        entry_type = scanner.read_ident()
        kind = entry_type.casefold()
        try:
            if kind in ("comment", "preamble"):
                scanner.skip_ws()
                if scanner.peek() == "{":
                    scanner.read_braced()
                continue
            if kind == "string":
                scanner.skip_ws()
                if scanner.peek() != "{":
                    out.diagnostics.append(
                        BibDiagnostic("unsupported_construct", "@string without braces")
                    )
                    continue
                scanner.pos += 1
                scanner.skip_ws()
                name = scanner.read_ident()
                scanner.skip_ws()
                if not name or scanner.peek() != "=":
                    raise _UnbalancedBraces(scanner.pos)
                scanner.pos += 1
                macros[name.casefold()] = _normalize(_read_value(scanner, macros, out, name))
                scanner.skip_ws()
                if scanner.peek() == "}":
                    scanner.pos += 1
                continue
            if not kind:
                continue
            entry = _parse_entry_body(scanner, entry_type, macros, out)
        except _UnbalancedBraces as exc:
            out.diagnostics.append(
                BibDiagnostic("unbalanced_braces", str(exc))
            )
            # resync at the next entry start
            nxt = scanner.text.find("@", at + 1)
            scanner.pos = len(scanner.text) if nxt < 0 else nxt
            continue
        if entry is None:
            continue
        if entry.cite_key in seen_keys:
            out.diagnostics.append(
                BibDiagnostic(
                    "duplicate_key", f"cite key {entry.cite_key!r} appears more than once",
                    entry.cite_key,
                )
            )
        seen_keys.add(entry.cite_key)
        out.entries.append(entry)
    return out


def serialize_bibtex(entries: list[BibEntry]) -> str:
    chunks = []
    for entry in entries:
        lines = [f"@{entry.entry_type}{{{entry.cite_key},"]
        for name, value in entry.fields.items():
            lines.append(f"  {name} = {{{value}}},")
        lines.append("}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")


def split_authors(author_field: str) -> tuple[str, ...]:
    # BibTeX convention: names joined by the literal token " and "
    return tuple(part.strip() for part in author_field.split(" and ") if part.strip())


def bib_to_work(entry: BibEntry) -> Optional[Work]:
    """Map a BibTeX entry onto the canonical record; None when untitled."""
    title = entry.fields.get("title")
    if not title:
        return None
    year: Optional[int] = None
    raw_year = entry.fields.get("year", "")
    if raw_year.strip().lstrip("-").isdigit():
        year = int(raw_year)
    venue = entry.fields.get("booktitle") or entry.fields.get("journal")
    return Work(
        id=f"bib:{entry.cite_key}",
        title=title,
        abstract=entry.fields.get("abstract") or None,
        authors=split_authors(entry.fields.get("author", "")),
        year=year,
        venue=venue,
        citation_count=0,
        language=None,
        reference_ids=(),
    )
