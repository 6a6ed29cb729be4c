"""End-to-end acceptance checks, one test per criterion.

Run with ``pytest -v tests/test_acceptance.py`` to get one pass/fail line
per criterion.  Each test also prints a ``criterion N: PASS`` line on
success (visible with ``-s`` or in captured output).  Budgets and
tolerances are asserted inside the tests themselves.
"""
import json
import math
import random
import resource
import time
from collections import Counter
from pathlib import Path

import numpy as np

from starlex.cli import run
from starlex.context import build_context_index, enumerate_contexts, context_key, external_word_contexts
from starlex.evaluation import (
    emit_report,
    log_spaced_cutoffs,
    roc_auc,
    roc_points_from_ranking,
    run_crossval,
)
from starlex.lexicon import DictionaryIndicator
from starlex.likelihood import context_likelihood, double_sort_shortlist, phrase_likelihood, score_index
from starlex.partition import (
    PartitionParams,
    PhraseFrequencyTable,
    expected_phrase_frequencies,
    sample_partition,
    subphrase_partition_probability,
)

import corpora

Q_GRID = (0.1, 0.5, 0.9)


def _done(n: int, detail: str) -> None:
    print(f"criterion {n}: PASS - {detail}")


# --------------------------------------------------------------------------
# 1. Two-phrase oracle: exact context and phrase scores, end to end.
# --------------------------------------------------------------------------


def test_criterion_1_two_phrase_oracle_exact(tmp_path):
    start = time.perf_counter()

    table = PhraseFrequencyTable(
        q=0.5, max_len=3,
        by_length={3: {"in the contrary": 1.0, "on the contrary": 1.0}},
    )
    indicator = DictionaryIndicator(frozenset({"on the contrary"}), source="oracle")
    index = build_context_index(table, 3, 0.5)
    ctx = context_likelihood(index, indicator)

    expected_context_scores = {
        "* the contrary": 0.5,
        "* * contrary": 0.5,
        "* * *": 0.5,
        "on * contrary": 1.0,
        "on the *": 1.0,
        "on * *": 1.0,
        "in * contrary": 0.0,
        "in the *": 0.0,
        "in * *": 0.0,
    }
    assert set(ctx.scores) == set(expected_context_scores)
    for key, want in expected_context_scores.items():
        assert abs(ctx.scores[key] - want) <= 1e-12, key

    scores = phrase_likelihood(index, ctx, q=0.5)
    assert abs(scores["in the contrary"] - 7 / 24) <= 1e-12
    assert abs(scores["on the contrary"] - 17 / 24) <= 1e-12

    # Same answer through the command-line pipeline.
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("in the contrary\non the contrary\n", encoding="utf-8")
    lexicon = tmp_path / "titles.tsv"
    lexicon.write_text("on_the_contrary\n", encoding="utf-8")
    out = tmp_path / "out"
    status = run([
        "all", "--corpus", str(corpus), "--lexicon", str(lexicon),
        "--q", "0.5", "--max-len", "3", "--length", "3", "--k", "1",
        "--out", str(out),
    ])
    assert status == 0
    rows = (out / "shortlist_likelihood_L3.tsv").read_text(encoding="utf-8").splitlines()
    assert [line.split("\t")[1] for line in rows] == ["in the contrary"]

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"oracle check took {elapsed:.2f}s"
    _done(1, f"context scores, 7/24 and 17/24, CLI shortlist ({elapsed:.2f}s)")


# --------------------------------------------------------------------------
# 2. Conservation suite: the frequency bookkeeping never leaks mass.
# --------------------------------------------------------------------------


def test_criterion_2_conservation_suite():
    start = time.perf_counter()
    rng = random.Random(202)

    # Length identity: expected sub-phrase lengths add back up to the
    # clause length, for every clause length and break probability.
    for n in range(1, 9):
        for q in Q_GRID + (0.25, 1.0):
            total = math.fsum(
                (j - i + 1) * subphrase_partition_probability(n, i, j, q)
                for i in range(1, n + 1)
                for j in range(i, n + 1)
            )
            assert abs(total - n) <= 1e-9 * n

    # Word-phrase balance on 100 random corpora at three break rates.
    for trial in range(100):
        clauses = corpora.random_clauses(rng, n_clauses=rng.randint(5, 30), vocab=6, max_words=8)
        for q in Q_GRID:
            max_len = rng.choice((3, 8))
            table = expected_phrase_frequencies(clauses, PartitionParams(q=q, max_len=max_len))
            lhs, rhs = table.word_phrase_balance()
            assert abs(lhs - rhs) <= 1e-9 * max(lhs, 1.0)

    # Per-phrase joint masses and word-context marginals.
    clauses = corpora.random_clauses(rng, n_clauses=60, vocab=6, max_words=8)
    table = expected_phrase_frequencies(clauses, PartitionParams(q=0.5, max_len=8))
    for length in (1, 2, 3, 4):
        index = build_context_index(table, length, 0.5)
        masses = index.joint_mass_by_phrase()
        for phrase, freq in index.phrase_freq.items():
            assert abs(masses[phrase] - freq) <= 1e-9 * freq

    model = external_word_contexts(table)
    for word, count in table.word_counts.items():
        marginal = model.marginal(word)
        assert abs(marginal - count) <= 1e-9 * count

    # Global likelihood identity under random dictionary labelings.
    for length in (2, 3):
        pool = sorted(table.phrases_of_length(length))
        for _ in range(5):
            defined = frozenset(rng.sample(pool, rng.randint(1, len(pool) - 1)))
            indicator = DictionaryIndicator(defined, source="random")
            index = build_context_index(table, length, 0.5)
            ctx = context_likelihood(index, indicator)
            scores = phrase_likelihood(index, ctx, q=0.5)
            total = math.fsum(index.phrase_freq.values())
            mean_score = math.fsum(
                scores[p] * f for p, f in index.phrase_freq.items()
            ) / total
            defined_share = math.fsum(
                f for p, f in index.phrase_freq.items() if p in defined
            ) / total
            assert abs(mean_score - defined_share) <= 1e-9

    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"conservation suite took {elapsed:.2f}s"
    _done(2, f"balance, length, joint-mass, marginal, and mean-score identities ({elapsed:.2f}s)")


# --------------------------------------------------------------------------
# 3. Monte-Carlo agreement between sampled and expected frequencies.
# --------------------------------------------------------------------------


def test_criterion_3_monte_carlo_partition_agreement():
    start = time.perf_counter()
    tokens = ["t1", "t2", "t3", "t4", "t5", "t6"]
    q = 0.5
    n_draws = 100_000
    rng = random.Random(30_000)

    counts: Counter = Counter()
    for _ in range(n_draws):
        for piece in sample_partition(tokens, q, rng):
            counts[piece] += 1

    # Distinct tokens make each sub-phrase correspond to one (i, j) span,
    # an indicator event per draw, so the binomial error bar is exact.
    n = len(tokens)
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            p = subphrase_partition_probability(n, i, j, q)
            observed = counts[tuple(tokens[i - 1:j])] / n_draws
            se = math.sqrt(p * (1.0 - p) / n_draws)
            assert abs(observed - p) <= 3.0 * se, (i, j, observed, p)

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"Monte-Carlo took {elapsed:.2f}s"
    _done(3, f"{n_draws} draws within 3 standard errors for all 21 spans ({elapsed:.2f}s)")


# --------------------------------------------------------------------------
# 4. Context enumeration structure for lengths 1-4.
# --------------------------------------------------------------------------


def test_criterion_4_context_pattern_structure():
    tokens = {1: ["on"], 2: ["on", "the"], 3: ["on", "the", "contrary"],
              4: ["to", "put", "it", "mildly"]}
    expected_counts = {1: 1, 2: 3, 3: 6, 4: 10}
    expected_patterns = {
        1: {"*"},
        2: {"* the", "on *", "* *"},
        3: {"* the contrary", "on * contrary", "on the *",
            "* * contrary", "on * *", "* * *"},
        4: {"* put it mildly", "to * it mildly", "to put * mildly", "to put it *",
            "* * it mildly", "to * * mildly", "to put * *",
            "* * * mildly", "to * * *", "* * * *"},
    }
    for n, toks in tokens.items():
        keys = {context_key(c) for c, _ in enumerate_contexts(toks, 0.5)}
        assert len(keys) == expected_counts[n]
        assert keys == expected_patterns[n]
    _done(4, "pattern sets of sizes 1, 3, 6, 10 for lengths 1-4")


# --------------------------------------------------------------------------
# 5. Cross-validation protocol checks on a 10^4-phrase pool.
# --------------------------------------------------------------------------


def _synthetic_pool_table(seed: int = 55) -> PhraseFrequencyTable:
    """Exactly 10,000 length-3 phrases with heavy context sharing."""
    phrases = [
        f"h{h} m{m} t{t}"
        for h in range(50)
        for m in range(20)
        for t in range(10)
    ]
    rng = random.Random(seed)
    rng.shuffle(phrases)
    by3 = {p: 10_000.0 / (rank + 1) for rank, p in enumerate(phrases)}
    return PhraseFrequencyTable(q=0.5, max_len=3, by_length={3: by3})


def test_criterion_5_crossval_protocol(tmp_path):
    start = time.perf_counter()
    pool_size = 10_000
    cutoffs = log_spaced_cutoffs(1000, pool_size)
    assert cutoffs[0] == 1 and cutoffs[-1] == pool_size

    # Oracle ranking: every positive ahead of every negative.  The grid is
    # dense enough at the low end to sample the corner exactly.
    flags = [True] * 50 + [False] * (pool_size - 50)
    assert roc_auc(roc_points_from_ranking(flags, cutoffs)) == 1.0

    # Seeded random rankings hover at chance level.
    rng = random.Random(500)
    aucs = []
    for _ in range(30):
        shuffled = [True] * 500 + [False] * (pool_size - 500)
        rng.shuffle(shuffled)
        aucs.append(roc_auc(roc_points_from_ranking(shuffled, cutoffs)))
    assert abs(sum(aucs) / len(aucs) - 0.5) <= 0.05

    # Full protocol on the synthetic pool.
    table = _synthetic_pool_table()
    defined = frozenset(random.Random(56).sample(sorted(table.phrases_of_length(3)), 1000))
    indicator = DictionaryIndicator(defined, source="protocol")
    report = run_crossval(
        table, indicator, 3, q=0.5, top_n=pool_size, folds=10, seed=9, cutoffs=1000
    )
    assert report.pool_sizes[3] == pool_size
    for curve in report.curves.values():
        tprs = [p.tpr for p in curve.points]
        fprs = [p.fpr for p in curve.points]
        assert all(b >= a for a, b in zip(tprs, tprs[1:]))
        assert all(b >= a for a, b in zip(fprs, fprs[1:]))
        assert curve.points[-1].tpr == 1.0 and curve.points[-1].fpr == 1.0
        assert 0.0 <= curve.auc <= 1.0

    # Bit-identical reruns, in memory and on disk.
    again = run_crossval(
        table, indicator, 3, q=0.5, top_n=pool_size, folds=10, seed=9, cutoffs=1000
    )
    for key in report.curves:
        assert report.curves[key].points == again.curves[key].points
        assert report.curves[key].auc == again.curves[key].auc
    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    paths_a = emit_report(report, str(dir_a))
    paths_b = emit_report(again, str(dir_b))
    for pa, pb in zip(paths_a, paths_b):
        assert pa.read_bytes() == pb.read_bytes()

    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"protocol checks took {elapsed:.2f}s"
    _done(5, f"oracle AUC 1.0, random ~0.5, monotone curves, byte-stable reruns ({elapsed:.2f}s)")


# --------------------------------------------------------------------------
# 6. Likelihood beats frequency on a corpus built to separate them.
# --------------------------------------------------------------------------


def test_criterion_6_synthetic_separation():
    clauses, defined, siblings, noise = corpora.family_corpus(
        n_groups=100, per_group=5, n_noise=5000
    )
    assert len(defined) == 500 and len(siblings) == 500 and len(noise) == 5000

    table = expected_phrase_frequencies(clauses, PartitionParams(q=0.5, max_len=3))
    indicator = DictionaryIndicator(frozenset(defined), source="separation")
    report = run_crossval(
        table, indicator, 3, q=0.5, top_n=100_000, folds=10, seed=0, cutoffs=1000
    )
    lik = report.curves[(3, "likelihood")]
    freq = report.curves[(3, "frequency")]

    assert lik.auc >= freq.auc + 0.15, (lik.auc, freq.auc)
    assert lik.mean_discovered_at[20] >= 5.0 * freq.mean_discovered_at[20]
    assert lik.mean_discovered_at[20] > 10.0

    _done(
        6,
        f"AUC {lik.auc:.3f} vs {freq.auc:.3f}, discovered@20 "
        f"{lik.mean_discovered_at[20]:.1f} vs {freq.mean_discovered_at[20]:.1f}",
    )


# --------------------------------------------------------------------------
# 7. Scale smoke test: a million clauses through the whole pipeline.
# --------------------------------------------------------------------------


def _write_zipfish_corpus(path: Path, n_clauses: int, vocab: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    ranks = np.arange(1, vocab + 1, dtype=np.float64)
    probs = 1.0 / ranks
    probs /= probs.sum()
    lengths = rng.integers(3, 9, size=n_clauses)
    words = rng.choice(vocab, size=int(lengths.sum()), p=probs)
    names = [f"w{i}" for i in range(vocab)]
    with open(path, "w", encoding="utf-8") as out:
        pos = 0
        for n in lengths:
            end = pos + int(n)
            out.write(" ".join(names[w] for w in words[pos:end]))
            out.write("\n")
            pos = end


def _frequent_subphrases(path: Path, lengths, sample_clauses: int, per_length: int):
    counters = {length: Counter() for length in lengths}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle):
            if line_no >= sample_clauses:
                break
            toks = line.split()
            for length in lengths:
                for i in range(len(toks) - length + 1):
                    counters[length][" ".join(toks[i:i + length])] += 1
    return {
        length: [p for p, _ in counters[length].most_common(per_length)]
        for length in lengths
    }


def test_criterion_7_scale_smoke(tmp_path):
    start = time.perf_counter()
    corpus = tmp_path / "big.txt"
    _write_zipfish_corpus(corpus, n_clauses=1_000_000, vocab=800, seed=777)

    # Lexicon: frequent sub-phrases from a prefix sample, so every length
    # keeps enough defined entries inside the top-N pool to cross-validate.
    lengths = (2, 3, 4, 5)
    picks = _frequent_subphrases(corpus, lengths, sample_clauses=200_000, per_length=60)
    lexicon = tmp_path / "titles.tsv"
    lexicon.write_text(
        "".join(p.replace(" ", "_") + "\n" for ps in picks.values() for p in ps),
        encoding="utf-8",
    )

    out = tmp_path / "out"
    status = run([
        "all", "--corpus", str(corpus), "--lexicon", str(lexicon),
        "--q", "0.5", "--max-len", "5", "--lengths", "2,3,4,5",
        "--k", "20", "--folds", "10", "--cutoffs", "1000", "--seed", "1",
        "--out", str(out), "--threads", "4",
    ])
    assert status == 0

    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    for length in lengths:
        entry = summary["lengths"][str(length)]
        assert 0.0 <= entry["likelihood"]["auc"] <= 1.0
        assert entry["pool_size"] > 0
        assert (out / f"shortlist_likelihood_L{length}.tsv").exists()

    # Conservation still holds on a sampled subset of the same corpus.
    sample = []
    with open(corpus, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle):
            if line_no >= 2000:
                break
            sample.append(line.split())
    table = expected_phrase_frequencies(sample, PartitionParams(q=0.5, max_len=5))
    lhs, rhs = table.word_phrase_balance()
    assert abs(lhs - rhs) <= 1e-9 * lhs
    index = build_context_index(table, 3, 0.5)
    masses = index.joint_mass_by_phrase()
    for phrase, freq in index.phrase_freq.items():
        assert abs(masses[phrase] - freq) <= 1e-9 * freq

    elapsed = time.perf_counter() - start
    peak_gb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024 / 1024
    assert elapsed < 600.0, f"scale run took {elapsed:.1f}s"
    assert peak_gb < 4.0, f"peak memory {peak_gb:.2f} GB"
    _done(7, f"10^6 clauses, lengths 2-5, {elapsed:.0f}s, peak {peak_gb:.2f} GB")
