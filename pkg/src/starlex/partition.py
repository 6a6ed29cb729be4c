"""Expected phrase frequencies under random clause partitioning.

Each of the ``len - 1`` gaps between adjacent words of a clause
independently receives a break with probability ``q``; the contiguous
pieces are phrases.  Rather than sampling partitions, the closed-form
probability that a given sub-span survives as one piece lets a single
pass over the corpus accumulate the exact expected frequency of every
sub-phrase.  Total mass is conserved: words in equal length-weighted
phrase mass out.

With ``q = 1`` every gap breaks, phrases are plain words, and the table
reduces to ordinary word counts.
"""
from __future__ import annotations

import math
import random
from collections.abc import Iterable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

__all__ = [
    "PartitionParams",
    "PhraseFrequencyTable",
    "subphrase_partition_probability",
    "expected_phrase_frequencies",
    "sample_partition",
    "write_phrase_tsv",
    "write_word_tsv",
    "read_phrase_tsv",
    "read_word_tsv",
]

# Clauses are processed in fixed-size shards and shard partials are merged
# in shard order, so the floating-point result never depends on the thread
# count: identical inputs give bit-identical tables.
SHARD_SIZE = 8192


def subphrase_partition_probability(length: int, i: int, j: int, q: float) -> float:
    """Probability that words ``i..j`` (1-based, inclusive) of a clause of
    ``length`` words come out as one piece of a random partition.

    A break is required at each edge of the span that is interior to the
    clause, and no break may fall inside the span:
    ``q**a * (1-q)**(j-i)`` with ``a = [i>1] + [j<length]``.
    """
    if length < 1:
        raise ValueError(f"clause length must be >= 1, got {length}")
    if not 1 <= i <= j <= length:
        raise ValueError(f"span {i}..{j} out of range for clause length {length}")
    cuts = (1 if i > 1 else 0) + (1 if j < length else 0)
    return q**cuts * (1.0 - q) ** (j - i)


@dataclass(frozen=True)
class PartitionParams:
    """Knobs for the expected-frequency pass.

    q:        break probability per gap, in (0, 1].
    max_len:  longest sub-phrase tracked in the table.
    mode:     "expected" (closed form) or "sampled" (Monte Carlo draws).
    seed:     RNG seed, used by sampled mode only.
    """

    q: float
    max_len: int = 5
    mode: str = "expected"
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.q <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {self.q}")
        if self.max_len < 1:
            raise ValueError(f"max_len must be >= 1, got {self.max_len}")
        if self.mode not in ("expected", "sampled"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class PhraseFrequencyTable:
    """Per-length phrase frequency maps plus raw word counts.

    ``by_length[n]`` maps space-joined phrases of n words to expected
    frequency.  ``word_counts`` holds raw occurrence counts (independent of
    q).  ``truncated_mass`` is the length-weighted phrase mass that fell
    beyond ``max_len``; adding it back restores the exact word/phrase
    balance on freshly built tables.
    """

    q: float
    max_len: int
    by_length: dict[int, dict[str, float]] = field(default_factory=dict)
    word_counts: dict[str, float] = field(default_factory=dict)
    total_words: float = 0.0
    truncated_mass: float = 0.0

    def phrases_of_length(self, length: int) -> dict[str, float]:
        return self.by_length.get(length, {})

    def frequency(self, phrase: str) -> float:
        return self.phrases_of_length(phrase.count(" ") + 1).get(phrase, 0.0)

    def top_phrases(self, length: int, n: int | None = None) -> list[tuple[str, float]]:
        """Phrases of ``length`` ranked by frequency descending, ties broken
        by phrase ascending; the first ``n`` of them when ``n`` is given."""
        items = sorted(self.phrases_of_length(length).items(), key=lambda kv: (-kv[1], kv[0]))
        return items if n is None else items[:n]

    def word_phrase_balance(self) -> tuple[float, float]:
        """(total word count, length-weighted phrase mass + truncated tail).

        The two sides agree to within accumulation noise on tables built by
        expected_phrase_frequencies; the check is meaningless on tables
        loaded from disk, where the truncated tail is unknown.
        """
        rhs = math.fsum(
            length * freq
            for length, phrases in self.by_length.items()
            for freq in phrases.values()
        )
        return float(self.total_words), rhs + self.truncated_mass


def _piece_weights(q: float, max_len: int) -> tuple[list[float], list[float]]:
    """Per-sub-length piece probabilities: (edge-anchored, interior).

    edge[n] applies when the n-word span touches exactly one clause edge,
    inter[n] when it touches neither.  Spans covering the whole clause are
    handled separately because the weight depends on the clause length.
    """
    edge = [0.0] * (max_len + 1)
    inter = [0.0] * (max_len + 1)
    for n in range(1, max_len + 1):
        edge[n] = subphrase_partition_probability(n + 1, 1, n, q)
        inter[n] = subphrase_partition_probability(n + 2, 2, n + 1, q)
    return edge, inter


def _captured_mass(length: int, q: float, max_len: int, edge: list[float], inter: list[float]) -> float:
    """Length-weighted phrase mass a clause of ``length`` words contributes
    to the table, i.e. the part of ``length`` not lost to truncation."""
    total = 0.0
    for n in range(1, min(max_len, length) + 1):
        if n == length:
            total += n * subphrase_partition_probability(length, 1, length, q)
        else:
            total += n * (2.0 * edge[n] + (length - n - 1) * inter[n])
    return total


def _count_shard(
    clauses: list[list[str]],
    q: float,
    max_len: int,
    edge: list[float],
    inter: list[float],
    whole: dict[int, float],
    captured: dict[int, float],
) -> tuple[dict[int, dict[str, float]], dict[str, float], int, float]:
    by_length: dict[int, dict[str, float]] = {}
    words: dict[str, float] = {}
    total_words = 0
    truncated = 0.0
    for tokens in clauses:
        length = len(tokens)
        total_words += length
        for tok in tokens:
            words[tok] = words.get(tok, 0.0) + 1.0
        if length not in whole:
            whole[length] = subphrase_partition_probability(length, 1, length, q)
            # Truncation loses mass only when the clause outgrows max_len;
            # for shorter clauses the tail is exactly zero by construction.
            captured[length] = (
                _captured_mass(length, q, max_len, edge, inter) if length > max_len else float(length)
            )
        truncated += length - captured[length]
        for n in range(1, min(max_len, length) + 1):
            tab = by_length.setdefault(n, {})
            if n == length:
                key = " ".join(tokens)
                tab[key] = tab.get(key, 0.0) + whole[length]
                continue
            w_edge = edge[n]
            first = " ".join(tokens[:n])
            tab[first] = tab.get(first, 0.0) + w_edge
            last = " ".join(tokens[length - n :])
            tab[last] = tab.get(last, 0.0) + w_edge
            w_int = inter[n]
            for start in range(1, length - n):
                key = " ".join(tokens[start : start + n])
                tab[key] = tab.get(key, 0.0) + w_int
    return by_length, words, total_words, truncated


def _shards(clauses: Iterable[list[str]], size: int) -> Iterator[list[list[str]]]:
    shard: list[list[str]] = []
    for clause in clauses:
        shard.append(clause)
        if len(shard) >= size:
            yield shard
            shard = []
    if shard:
        yield shard


def expected_phrase_frequencies(
    clauses: Iterable[list[str]],
    params: PartitionParams,
    threads: int = 1,
) -> PhraseFrequencyTable:
    """Accumulate expected sub-phrase frequencies over ``clauses``.

    Every occurrence of every sub-phrase up to ``params.max_len`` words adds
    its piece probability; word counts are raw occurrence counts.  Shard
    partials are merged in shard order regardless of ``threads``, so the
    result is bit-identical for any thread count.
    """
    q, max_len = params.q, params.max_len
    edge, inter = _piece_weights(q, max_len)
    whole: dict[int, float] = {}
    captured: dict[int, float] = {}

    table = PhraseFrequencyTable(q=q, max_len=max_len)
    by_length: dict[int, dict[str, float]] = {}

    def merge(partial):
        shard_lengths, shard_words, shard_total, shard_trunc = partial
        for n, tab in shard_lengths.items():
            master = by_length.setdefault(n, {})
            for key, value in tab.items():
                master[key] = master.get(key, 0.0) + value
        for key, value in shard_words.items():
            table.word_counts[key] = table.word_counts.get(key, 0.0) + value
        table.total_words += shard_total
        table.truncated_mass += shard_trunc

    if threads > 1:
        # Each worker keeps private whole/captured caches to stay race-free.
        def job(shard):
            return _count_shard(shard, q, max_len, edge, inter, dict(whole), dict(captured))

        with ThreadPoolExecutor(max_workers=threads) as pool:
            for partial in pool.map(job, _shards(clauses, SHARD_SIZE)):
                merge(partial)
    else:
        for shard in _shards(clauses, SHARD_SIZE):
            merge(_count_shard(shard, q, max_len, edge, inter, whole, captured))

    table.by_length = {n: by_length[n] for n in sorted(by_length)}
    return table


def sample_partition(tokens: list[str], q: float, rng: random.Random) -> list[tuple[str, ...]]:
    """Draw one random partition of a clause; returns its pieces in order.

    Pieces are full, untruncated spans: max_len plays no role here.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    if not tokens:
        raise ValueError("clause must be non-empty")
    pieces = []
    start = 0
    for gap in range(1, len(tokens)):
        if rng.random() < q:
            pieces.append(tuple(tokens[start:gap]))
            start = gap
    pieces.append(tuple(tokens[start:]))
    return pieces


def write_phrase_tsv(table: PhraseFrequencyTable, path: str) -> None:
    """Persist phrase rows as ``phrase<TAB>length<TAB>frequency``.

    Rows are sorted by length, then frequency descending, then phrase;
    frequencies carry 12 significant digits.
    """
    with open(path, "w", encoding="utf-8") as out:
        for length in sorted(table.by_length):
            rows = sorted(table.by_length[length].items(), key=lambda kv: (-kv[1], kv[0]))
            for phrase, freq in rows:
                out.write(f"{phrase}\t{length}\t{freq:.12g}\n")


def write_word_tsv(table: PhraseFrequencyTable, path: str) -> None:
    """Persist raw word counts in the same row format, with length 1."""
    with open(path, "w", encoding="utf-8") as out:
        for word, count in sorted(table.word_counts.items(), key=lambda kv: (-kv[1], kv[0])):
            out.write(f"{word}\t1\t{count:.12g}\n")


def read_phrase_tsv(path: str, q: float, max_len: int) -> PhraseFrequencyTable:
    """Load a persisted phrase table.

    Row order within each length is preserved on insertion, so iteration
    matches the canonical on-disk ranking.  Word counts and the truncated
    tail are not part of this file; load words separately when needed.
    """
    table = PhraseFrequencyTable(q=q, max_len=max_len)
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                phrase, length_text, freq_text = line.split("\t")
                length = int(length_text)
                freq = float(freq_text)
            except ValueError as exc:
                raise ValueError(f"{path}:{line_no}: malformed phrase row") from exc
            table.by_length.setdefault(length, {})[phrase] = freq
    return table


def read_word_tsv(path: str) -> tuple[dict[str, float], float]:
    """Load raw word counts; returns (counts, total)."""
    counts: dict[str, float] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                word, _, count_text = line.split("\t")
                counts[word] = float(count_text)
            except ValueError as exc:
                raise ValueError(f"{path}:{line_no}: malformed word row") from exc
    return counts, math.fsum(counts.values())
