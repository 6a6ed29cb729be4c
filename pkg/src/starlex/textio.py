"""Corpus ingestion: token normalization and clause segmentation.

Raw text is lowercased, split into clauses on delimiter characters, and
tokenized on whitespace.  Punctuation is stripped from token edges only,
so contractions ("don't") and hyphenated compounds keep their written
form.  Corpora are streamed line by line; a newline always ends a clause.
"""
from __future__ import annotations

import sys
from collections.abc import Iterable, Iterator

DEFAULT_DELIMITERS = '.,;:!?"()\n'

# Stripped from token edges only; internal apostrophes and hyphens survive.
DEFAULT_STRIP_CHARS = (
    "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"
    "«»“”‘’…¡¿"
)


def normalize_token(raw: str, strip_chars: str = DEFAULT_STRIP_CHARS) -> str | None:
    """Lowercase ``raw`` and strip edge punctuation.

    Returns None when nothing survives, e.g. for "..."; callers drop the
    token.  Normalization is idempotent: applying it twice changes nothing.
    """
    # Whitespace joins the strip set so that peeling punctuation can never
    # leave a stray edge space behind (keeps the operation idempotent).
    token = raw.lower().strip(strip_chars + " \t\r\n\v\f")
    return token if token else None


def segment_clauses(
    text: str,
    delimiters: str = DEFAULT_DELIMITERS,
    strip_chars: str = DEFAULT_STRIP_CHARS,
) -> list[list[str]]:
    """Split ``text`` into clauses of normalized tokens.

    Any character in ``delimiters`` ends the current clause.  Within a
    clause, tokens are whitespace-separated and normalized; tokens that
    normalize to nothing are dropped, and empty clauses are not emitted.
    """
    if not delimiters:
        raise ValueError("delimiter set must be non-empty")
    table = {ord(ch): "\x00" for ch in delimiters}
    clauses = []
    for piece in text.translate(table).split("\x00"):
        tokens = [t for t in (normalize_token(w, strip_chars) for w in piece.split()) if t]
        if tokens:
            clauses.append(tokens)
    return clauses


def iter_clauses(
    paths: Iterable[str],
    delimiters: str = DEFAULT_DELIMITERS,
    strip_chars: str = DEFAULT_STRIP_CHARS,
) -> Iterator[list[str]]:
    """Stream clauses from plain-text files, in path order.

    The path "-" reads standard input.  Files are decoded as UTF-8 with
    invalid bytes replaced, so a stray binary sequence cannot abort a run.
    """
    for path in paths:
        if str(path) == "-":
            for line in sys.stdin:
                yield from segment_clauses(line, delimiters, strip_chars)
        else:
            with open(path, encoding="utf-8", errors="replace") as handle:
                for line in handle:
                    yield from segment_clauses(line, delimiters, strip_chars)
