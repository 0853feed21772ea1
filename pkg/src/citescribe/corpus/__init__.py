from .bibtex import (
    BibDiagnostic,
    BibEntry,
    ParsedBib,
    bib_to_work,
    parse_bibtex,
    serialize_bibtex,
    split_authors,
)
from .language import LanguageDetector, TrigramLanguageDetector, detect_language
from .works import (
    FilterPolicy,
    IngestReport,
    Work,
    age_months,
    filter_works,
    load_works,
    open_records,
    parse_works,
    write_works,
)

__all__ = [
    "BibDiagnostic",
    "BibEntry",
    "FilterPolicy",
    "IngestReport",
    "LanguageDetector",
    "ParsedBib",
    "TrigramLanguageDetector",
    "Work",
    "age_months",
    "bib_to_work",
    "detect_language",
    "filter_works",
    "load_works",
    "open_records",
    "parse_bibtex",
    "parse_works",
    "serialize_bibtex",
    "split_authors",
    "write_works",
]
