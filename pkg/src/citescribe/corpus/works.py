"""Canonical scholarly-work records: ingestion from line-delimited files and
inclusion filtering."""

from __future__ import annotations

import datetime as dt
import gzip
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Optional

from .language import LanguageDetector

YEAR_MIN = 1500


@dataclass(frozen=True)
class Work:
    """One scholarly record; the unit of retrieval."""

    id: str
    title: str
    abstract: Optional[str] = None
    authors: tuple[str, ...] = ()
    year: Optional[int] = None
    venue: Optional[str] = None
    citation_count: int = 0
    language: Optional[str] = None
    reference_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("work id must be non-empty")
        if not self.title:
            raise ValueError("work title must be non-empty")
        if self.citation_count < 0:
            raise ValueError("citation_count must be >= 0")

    def embedding_text(self) -> str:
        """Title, or title + single space + abstract when the abstract exists."""
        if self.abstract:
            return f"{self.title} {self.abstract}"
        return self.title

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "abstract": self.abstract,
            "authors": list(self.authors),
            "publication_year": self.year,
            "venue": self.venue,
            "cited_by_count": self.citation_count,
            "language": self.language,
            "referenced_works": list(self.reference_ids),
        }


@dataclass(frozen=True)
class FilterPolicy:
    """Inclusion policy: language plus citation-count floor, with a rescue
    window for recently published uncited works."""

    require_english: bool = False
    min_citations: int = 0
    recent_uncited_months: Optional[int] = None

    def __post_init__(self):
        if self.min_citations < 0:
            raise ValueError("min_citations must be >= 0")
        if self.recent_uncited_months is not None and self.recent_uncited_months < 0:
            raise ValueError("recent_uncited_months must be >= 0")


@dataclass
class IngestReport:
    parsed: int = 0
    skipped: int = 0
    filtered: int = 0
    retained: int = 0
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "parsed": self.parsed,
            "skipped": self.skipped,
            "filtered": self.filtered,
            "retained": self.retained,
        }


def _work_from_record(record: dict, max_year: int) -> Optional[Work]:
    work_id = record.get("id")
    title = record.get("title")
    if not isinstance(work_id, str) or not work_id or not isinstance(title, str) or not title:
        return None
    year = record.get("publication_year")
    if year is not None:
        if not isinstance(year, int) or not (YEAR_MIN <= year <= max_year):
            return None
    abstract = record.get("abstract")
    if abstract is not None and not isinstance(abstract, str):
        return None
    count = record.get("cited_by_count", 0)
    if not isinstance(count, int) or count < 0:
        return None
    authors = record.get("authors") or []
    refs = record.get("referenced_works") or []
    if not isinstance(authors, list) or not isinstance(refs, list):
        return None
    return Work(
        id=work_id,
        title=title,
        abstract=abstract,
        authors=tuple(str(a) for a in authors),
        year=year,
        venue=record.get("venue") or None,
        citation_count=count,
        language=record.get("language") or None,
        reference_ids=tuple(str(r) for r in refs),
    )


def parse_works(
    stream: IO[str] | Iterable[str], now: Optional[dt.date] = None
) -> tuple[list[Work], int]:
    """Parse line-delimited JSON records into Works.

    Malformed lines and records missing id or title are skipped, never fatal.
    Returns (works in input order, skipped count).
    """
    today = now or dt.date.today()
    max_year = today.year + 1
    works: list[Work] = []
    skipped = 0
    for line in stream:
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            skipped += 1
            continue
        if not isinstance(record, dict):
            skipped += 1
            continue
        work = _work_from_record(record, max_year)
        if work is None:
            skipped += 1
        else:
            works.append(work)
    return works, skipped


def open_records(path: str | Path) -> IO[str]:
    """Open a record file, transparently handling gzip (sniffed by magic)."""
    path = Path(path)
    with open(path, "rb") as probe:
        magic = probe.read(2)
    if magic == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def load_works(path: str | Path, now: Optional[dt.date] = None) -> tuple[list[Work], int]:
    with open_records(path) as stream:
        return parse_works(stream, now=now)


def write_works(works: Iterable[Work], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as out:
        for work in works:
            out.write(json.dumps(work.to_record(), ensure_ascii=False))
            out.write("\n")


def age_months(year: int, now: dt.date) -> int:
    # publication date is only known to year granularity; assume January 1
    return (now.year - year) * 12 + (now.month - 1)


def filter_works(
    works: list[Work],
    policy: FilterPolicy,
    now: Optional[dt.date] = None,
    detector: Optional[LanguageDetector] = None,
) -> list[Work]:
    """Apply the inclusion policy; output is an order-preserving subset.

    Language handling: a work with an unknown language passes unless a
    detector is configured, in which case detection decides (still-unknown
    counts as non-English). Citation handling: uncited works fall under the
    recency window whenever one is set; otherwise the min_citations floor
    applies.
    """
    today = now or dt.date.today()
    kept: list[Work] = []
    for work in works:
        if policy.require_english and not _passes_language(work, detector):
            continue
        if not _passes_citations(work, policy, today):
            continue
        kept.append(work)
    return kept


def _passes_language(work: Work, detector: Optional[LanguageDetector]) -> bool:
    language = work.language
    if language is None and detector is not None:
        language = detector.detect(work.embedding_text())
        if language is None:
            return False
    if language is None:
        return True
    return language == "en"


def _passes_citations(work: Work, policy: FilterPolicy, today: dt.date) -> bool:
    if work.citation_count == 0 and policy.recent_uncited_months is not None:
        if work.year is None:
            return False
        return age_months(work.year, today) <= policy.recent_uncited_months
    return work.citation_count >= policy.min_citations
