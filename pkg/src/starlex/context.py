"""Star-pattern context model.

A context of an n-word phrase replaces one contiguous span of positions
with a gap, written "*" per removed word: "on the contrary" yields
"* the contrary", "on * contrary", ..., "* * *".  There are n(n+1)/2 of
them.  Each context carries weight ((j-i+1)/n) * P(span i..j is a piece),
and the weights of a phrase sum to one, so joint masses f(c, s) =
P(c|s) * f(s) conserve the phrase frequency exactly.

The all-star context (every position removed) is shared by every phrase
of the length with the same weight (1-q)**(n-1); it is tracked as a
single aggregate, never as a posting list.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from collections.abc import Iterator

from .partition import PhraseFrequencyTable, subphrase_partition_probability

__all__ = [
    "Context",
    "ContextIndex",
    "WordContextModel",
    "STAR",
    "escape_token",
    "unescape_token",
    "context_key",
    "enumerate_contexts",
    "build_context_index",
    "external_word_contexts",
    "write_context_index",
    "read_context_index",
]

STAR = "*"
ALLSTAR_ROW = "__ALL__"


def escape_token(token: str) -> str:
    """Escape a literal token for use inside a context key.

    "*" marks a removed position, so a token that is itself a star (or
    contains backslashes) must be escaped to keep keys injective.
    """
    return token.replace("\\", "\\\\").replace("*", "\\*")


def unescape_token(token: str) -> str:
    out = []
    i = 0
    while i < len(token):
        ch = token[i]
        if ch == "\\" and i + 1 < len(token) and token[i + 1] in "\\*":
            out.append(token[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


@dataclass(frozen=True)
class Context:
    """A phrase pattern with positions gap_start..gap_end (1-based) removed."""

    length: int
    gap_start: int
    gap_end: int
    fixed: tuple[str, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.gap_start <= self.gap_end <= self.length:
            raise ValueError(
                f"gap {self.gap_start}..{self.gap_end} out of range for length {self.length}"
            )
        if len(self.fixed) != self.length - (self.gap_end - self.gap_start + 1):
            raise ValueError("fixed token count does not match the gap")


def context_key(context: Context) -> str:
    """Render a context as a space-joined key, "*" at removed positions."""
    parts = []
    fixed = iter(context.fixed)
    for pos in range(1, context.length + 1):
        if context.gap_start <= pos <= context.gap_end:
            parts.append(STAR)
        else:
            parts.append(escape_token(next(fixed)))
    return " ".join(parts)


def enumerate_contexts(tokens: list[str] | tuple[str, ...], q: float) -> list[tuple[Context, float]]:
    """All contexts of a phrase with their conditional weights P(c|s).

    One entry per contiguous span i..j, weight ((j-i+1)/n) * piece
    probability; the weights sum to one.  The all-star context (i=1, j=n)
    is included.
    """
    n = len(tokens)
    if n < 1:
        raise ValueError("phrase must be non-empty")
    out = []
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            weight = (j - i + 1) / n * subphrase_partition_probability(n, i, j, q)
            fixed = tuple(tokens[: i - 1]) + tuple(tokens[j:])
            out.append((Context(n, i, j, fixed), weight))
    return out


def _context_items(tokens: list[str], q: float) -> Iterator[tuple[str, float]]:
    """Fast path of enumerate_contexts: (key, weight) pairs, all-star
    excluded.  Used by the index builder to avoid dataclass overhead."""
    n = len(tokens)
    esc = [escape_token(t) for t in tokens]
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            if i == 1 and j == n:
                continue
            weight = (j - i + 1) / n * subphrase_partition_probability(n, i, j, q)
            key = " ".join(esc[: i - 1] + [STAR] * (j - i + 1) + esc[j:])
            yield key, weight


@dataclass
class ContextIndex:
    """Inverted index from context keys to (phrase, joint mass) postings.

    ``postings`` excludes the all-star context; ``phrase_freq`` keeps the
    pool's frequencies in canonical order (frequency descending, phrase
    ascending).  ``allstar_weight`` is P(all-star | s), identical for every
    phrase of the length.
    """

    length: int
    q: float
    postings: dict[str, list[tuple[str, float]]]
    phrase_freq: dict[str, float]
    allstar_weight: float
    params_hash: str

    @property
    def allstar_key(self) -> str:
        return " ".join([STAR] * self.length)

    @property
    def allstar_mass(self) -> float:
        return self.allstar_weight * math.fsum(self.phrase_freq.values())

    def joint_normalizer(self) -> float:
        """Literal sum of all joint masses, all-star included."""
        posted = math.fsum(w for plist in self.postings.values() for _, w in plist)
        return posted + self.allstar_mass

    def joint_mass_by_phrase(self) -> dict[str, float]:
        """Per-phrase sum of joint masses; equals f(s) up to rounding."""
        sums = {phrase: [] for phrase in self.phrase_freq}
        for plist in self.postings.values():
            for phrase, w in plist:
                sums[phrase].append(w)
        star = self.allstar_weight
        return {
            phrase: math.fsum(parts) + star * self.phrase_freq[phrase]
            for phrase, parts in sums.items()
        }


def _index_params_hash(length: int, q: float) -> str:
    return hashlib.sha256(f"length={length};q={q!r}".encode()).hexdigest()[:16]


def build_context_index(
    table: PhraseFrequencyTable,
    length: int,
    q: float,
    top_n: int | None = None,
) -> ContextIndex:
    """Index every context of every phrase of ``length`` in the table.

    Phrases with zero frequency are omitted.  When ``top_n`` is given only
    the top-n phrases by frequency enter the pool; scores computed from a
    restricted index therefore describe that pool, not the full corpus.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    postings: dict[str, list[tuple[str, float]]] = {}
    phrase_freq: dict[str, float] = {}
    for phrase, freq in table.top_phrases(length, top_n):
        if freq <= 0.0:
            continue
        phrase_freq[phrase] = freq
        for key, weight in _context_items(phrase.split(" "), q):
            postings.setdefault(key, []).append((phrase, weight * freq))
    for plist in postings.values():
        plist.sort()
    return ContextIndex(
        length=length,
        q=q,
        postings=postings,
        phrase_freq=phrase_freq,
        allstar_weight=subphrase_partition_probability(length, 1, length, q),
        params_hash=_index_params_hash(length, q),
    )


@dataclass
class WordContextModel:
    """External word contexts: f(w, c) masses for single-word gaps.

    For every phrase s and every position p, the phrase's frequency is
    added at (word at p, s with position p starred).  Marginals over c
    recover the phrase-weighted word frequency exactly.
    """

    weights: dict[str, dict[str, float]]

    def contexts_of(self, word: str) -> dict[str, float]:
        return self.weights.get(word, {})

    def marginal(self, word: str) -> float:
        return math.fsum(self.contexts_of(word).values())


def external_word_contexts(table: PhraseFrequencyTable) -> WordContextModel:
    weights: dict[str, dict[str, float]] = {}
    for length in sorted(table.by_length):
        for phrase, freq in sorted(table.by_length[length].items()):
            if freq <= 0.0:
                continue
            tokens = phrase.split(" ")
            esc = [escape_token(t) for t in tokens]
            for pos, word in enumerate(tokens):
                key = " ".join(esc[:pos] + [STAR] + esc[pos + 1 :])
                slot = weights.setdefault(word, {})
                slot[key] = slot.get(key, 0.0) + freq
    return WordContextModel(weights=weights)


def write_context_index(index: ContextIndex, path: str) -> None:
    """Persist postings as ``context_key<TAB>phrase<TAB>joint_mass``.

    Rows are sorted by context key then phrase, 12 significant digits.
    The all-star context appears once as an aggregate row with the
    reserved phrase column __ALL__.
    """
    rows = [(index.allstar_key, ALLSTAR_ROW, index.allstar_mass)]
    for key, plist in index.postings.items():
        for phrase, mass in plist:
            rows.append((key, phrase, mass))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w", encoding="utf-8") as out:
        for key, phrase, mass in rows:
            out.write(f"{key}\t{phrase}\t{mass:.12g}\n")


def read_context_index(
    path: str,
    length: int,
    q: float,
    phrase_freq: dict[str, float],
) -> ContextIndex:
    """Load a persisted index and bind it to the pool ``phrase_freq``.

    The aggregate all-star row is checked against the pool: a mismatch
    beyond rounding noise means the file was produced with different
    parameters or a different phrase table, and is a hard fault.
    """
    index = ContextIndex(
        length=length,
        q=q,
        postings={},
        phrase_freq=dict(phrase_freq),
        allstar_weight=subphrase_partition_probability(length, 1, length, q),
        params_hash=_index_params_hash(length, q),
    )
    stored_allstar = None
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                key, phrase, mass_text = line.split("\t")
                mass = float(mass_text)
            except ValueError as exc:
                raise ValueError(f"{path}:{line_no}: malformed index row") from exc
            if phrase == ALLSTAR_ROW:
                stored_allstar = mass
                continue
            if phrase not in index.phrase_freq:
                raise ValueError(
                    f"{path}:{line_no}: phrase {phrase!r} not in the phrase pool; "
                    "index and phrase table disagree"
                )
            index.postings.setdefault(key, []).append((phrase, mass))
    if stored_allstar is None:
        raise ValueError(f"{path}: missing all-star aggregate row")
    expected = index.allstar_mass
    scale = max(abs(expected), abs(stored_allstar), 1e-300)
    if abs(stored_allstar - expected) / scale > 1e-6:
        raise ValueError(
            f"{path}: all-star mass {stored_allstar:.12g} does not match the pool "
            f"({expected:.12g}); parameters or phrase table differ"
        )
    return index
