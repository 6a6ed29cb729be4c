"""Dictionary membership: the 0/1 indicator over normalized phrase keys."""
from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field


def normalize_entry(line: str) -> str | None:
    """Normalize one lexicon title: lowercase, underscores to spaces,
    whitespace collapsed to single spaces.  Punctuation is preserved, so
    multi-word titles keep their written form."""
    phrase = " ".join(line.replace("_", " ").lower().split())
    return phrase if phrase else None


@dataclass(frozen=True)
class DictionaryIndicator:
    """Set-backed indicator: 1 when a phrase has an entry (or a redirect)."""

    defined: frozenset[str]
    source: str = ""

    def __contains__(self, phrase: str) -> bool:
        return phrase in self.defined

    def __len__(self) -> int:
        return len(self.defined)

    def indicator(self, phrase: str) -> int:
        return 1 if phrase in self.defined else 0

    def content_digest(self) -> str:
        """Stable digest of the entry set, for parameter-mixing guards."""
        payload = "\n".join(sorted(self.defined)).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()[:16]


def load_lexicon(path: str) -> DictionaryIndicator:
    """Load a lexicon file: one phrase per line, UTF-8.

    An optional tab-separated second column marks a redirect target; the
    title still counts as defined, so redirects are entries too.  Duplicate
    titles collapse.  An unreadable file raises with the path in the
    message; a file with no usable lines yields an empty indicator with a
    warning.
    """
    entries = set()
    with open(path, encoding="utf-8", errors="replace") as handle:
        for line in handle:
            title = line.rstrip("\n").split("\t", 1)[0]
            phrase = normalize_entry(title)
            if phrase:
                entries.add(phrase)
    if not entries:
        warnings.warn(f"lexicon {path} contained no usable entries", stacklevel=2)
    return DictionaryIndicator(defined=frozenset(entries), source=str(path))
