"""Definition likelihood: how dictionary-like a phrase's contexts look.

A context's score is the definition-weighted share of its joint mass:
score(c) = sum over defined t of f(c, t) / sum over all t of f(c, t).
A phrase's score is the weight-averaged score of its own contexts.  Both
live in [0, 1]; a pool whose phrases are all defined scores exactly 1
everywhere, an all-undefined pool exactly 0.  The phrase itself is part
of its contexts' mass (no self-exclusion), which is what makes the global
balance hold: the frequency-weighted mean phrase score equals the
frequency-weighted defined fraction of the pool.
"""
from __future__ import annotations

import hashlib
import math
from collections.abc import Collection
from dataclasses import dataclass, field

from .context import ContextIndex
from .lexicon import DictionaryIndicator
from .partition import PhraseFrequencyTable

__all__ = [
    "ContextScores",
    "LikelihoodTable",
    "ShortlistEntry",
    "Shortlist",
    "context_likelihood",
    "phrase_likelihood",
    "score_index",
    "double_sort_shortlist",
    "frequency_shortlist",
    "write_scores_tsv",
    "read_scores_tsv",
    "write_shortlist_tsv",
]


@dataclass
class ContextScores:
    """Per-context definition likelihoods for one index and one labeling."""

    scores: dict[str, float]
    allstar_key: str
    index_hash: str
    lexicon_digest: str


def context_likelihood(
    index: ContextIndex,
    indicator: DictionaryIndicator,
    withheld: Collection[str] = (),
) -> ContextScores:
    """Score every context of the index under the given labeling.

    ``withheld`` phrases are treated as undefined without being removed
    from the pool, which is how cross-validation retrains per fold.
    Contexts with zero mass do not occur (zero-frequency phrases never
    enter an index).
    """
    withheld_set = frozenset(withheld)

    def defined(phrase: str) -> bool:
        return phrase in indicator and phrase not in withheld_set

    scores: dict[str, float] = {}
    for key, plist in index.postings.items():
        num = 0.0
        den = 0.0
        for phrase, mass in plist:
            den += mass
            if defined(phrase):
                num += mass
        scores[key] = num / den

    star_num = 0.0
    star_den = 0.0
    for phrase, freq in index.phrase_freq.items():
        star_den += freq
        if defined(phrase):
            star_num += freq
    if star_den > 0.0:
        scores[index.allstar_key] = star_num / star_den

    return ContextScores(
        scores=scores,
        allstar_key=index.allstar_key,
        index_hash=index.params_hash,
        lexicon_digest=indicator.content_digest(),
    )


def phrase_likelihood(
    index: ContextIndex,
    ctx_scores: ContextScores,
    q: float,
) -> dict[str, float]:
    """Weight-averaged context score for every phrase in the index.

    ``q`` and the scores' origin are checked against the index so scores
    trained at one q can never be applied at another.
    """
    if q != index.q:
        raise ValueError(f"q mismatch: scores trained at q={index.q}, asked for q={q}")
    if ctx_scores.index_hash != index.params_hash:
        raise ValueError("context scores were computed for a different index")

    num: dict[str, float] = {phrase: 0.0 for phrase in index.phrase_freq}
    den: dict[str, float] = {phrase: 0.0 for phrase in index.phrase_freq}
    for key, plist in index.postings.items():
        sigma = ctx_scores.scores[key]
        for phrase, mass in plist:
            num[phrase] += mass * sigma
            den[phrase] += mass
    star_sigma = ctx_scores.scores.get(ctx_scores.allstar_key, 0.0)
    star_w = index.allstar_weight
    out: dict[str, float] = {}
    for phrase, freq in index.phrase_freq.items():
        total_num = num[phrase] + star_w * freq * star_sigma
        total_den = den[phrase] + star_w * freq
        out[phrase] = total_num / total_den
    return out


@dataclass
class LikelihoodTable:
    """Bundle of context and phrase scores for one length and labeling."""

    length: int
    q: float
    context_scores: ContextScores
    phrase_scores: dict[str, float]
    params_hash: str


def score_index(index: ContextIndex, indicator: DictionaryIndicator) -> LikelihoodTable:
    """Train context scores and phrase scores for an index in one call."""
    ctx = context_likelihood(index, indicator)
    phrases = phrase_likelihood(index, ctx, index.q)
    digest = hashlib.sha256(
        f"{index.params_hash};{indicator.content_digest()}".encode()
    ).hexdigest()[:16]
    return LikelihoodTable(
        length=index.length,
        q=index.q,
        context_scores=ctx,
        phrase_scores=phrases,
        params_hash=digest,
    )


@dataclass(frozen=True)
class ShortlistEntry:
    rank: int
    phrase: str
    frequency: float
    likelihood: float | None
    defined: int


@dataclass
class Shortlist:
    """Ranked shortlist plus a flag for pools that ran out early."""

    entries: list[ShortlistEntry]
    truncated: bool

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def phrases(self) -> list[str]:
        return [entry.phrase for entry in self.entries]


def double_sort_shortlist(
    table: PhraseFrequencyTable,
    scores: dict[str, float],
    indicator: DictionaryIndicator,
    length: int,
    n: int = 100_000,
    k: int = 20,
) -> Shortlist:
    """Double-sorted candidates: top-n by frequency, reordered by score.

    The n most frequent phrases of the length are re-ranked by likelihood
    descending (ties: frequency descending, then phrase), phrases already
    defined are dropped, and the first k survivors are returned with ranks
    1..k.  Fewer than k survivors set the truncated flag.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < k:
        raise ValueError(f"top-n cut ({n}) must be at least k ({k})")
    pool = table.top_phrases(length, n)
    missing = [phrase for phrase, _ in pool if phrase not in scores]
    if missing:
        raise KeyError(f"no likelihood score for {missing[0]!r} (and {len(missing) - 1} more)")
    reordered = sorted(pool, key=lambda kv: (-scores[kv[0]], -kv[1], kv[0]))
    entries = []
    for phrase, freq in reordered:
        if phrase in indicator:
            continue
        entries.append(
            ShortlistEntry(
                rank=len(entries) + 1,
                phrase=phrase,
                frequency=freq,
                likelihood=scores[phrase],
                defined=0,
            )
        )
        if len(entries) == k:
            break
    return Shortlist(entries=entries, truncated=len(entries) < k)


def frequency_shortlist(
    table: PhraseFrequencyTable,
    indicator: DictionaryIndicator,
    length: int,
    k: int = 20,
    scores: dict[str, float] | None = None,
) -> Shortlist:
    """Baseline shortlist: undefined phrases ranked purely by frequency.

    ``scores`` is optional and only fills the likelihood column of the
    emitted entries; it never affects the ranking.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    entries = []
    for phrase, freq in table.top_phrases(length):
        if phrase in indicator:
            continue
        likelihood = scores.get(phrase) if scores is not None else None
        entries.append(
            ShortlistEntry(
                rank=len(entries) + 1,
                phrase=phrase,
                frequency=freq,
                likelihood=likelihood,
                defined=0,
            )
        )
        if len(entries) == k:
            break
    return Shortlist(entries=entries, truncated=len(entries) < k)


def write_scores_tsv(
    table: PhraseFrequencyTable,
    likelihoods: LikelihoodTable,
    indicator: DictionaryIndicator,
    path: str,
) -> None:
    """Persist ``phrase<TAB>length<TAB>frequency<TAB>likelihood<TAB>defined``
    for every scored phrase, in frequency-descending order."""
    length = likelihoods.length
    rows = sorted(
        likelihoods.phrase_scores.items(),
        key=lambda kv: (-table.frequency(kv[0]), kv[0]),
    )
    with open(path, "w", encoding="utf-8") as out:
        for phrase, score in rows:
            freq = table.frequency(phrase)
            out.write(
                f"{phrase}\t{length}\t{freq:.12g}\t{score:.12g}\t{indicator.indicator(phrase)}\n"
            )


def read_scores_tsv(path: str) -> list[tuple[str, int, float, float, int]]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                phrase, length_text, freq_text, score_text, defined_text = line.split("\t")
                rows.append(
                    (phrase, int(length_text), float(freq_text), float(score_text), int(defined_text))
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{line_no}: malformed score row") from exc
    return rows


def write_shortlist_tsv(shortlist: Shortlist, path: str) -> None:
    """Persist ``rank<TAB>phrase<TAB>frequency<TAB>likelihood<TAB>defined``."""
    with open(path, "w", encoding="utf-8") as out:
        for entry in shortlist.entries:
            likelihood = "" if entry.likelihood is None else f"{entry.likelihood:.12g}"
            out.write(
                f"{entry.rank}\t{entry.phrase}\t{entry.frequency:.12g}\t{likelihood}\t{entry.defined}\n"
            )
