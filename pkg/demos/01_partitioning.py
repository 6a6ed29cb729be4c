#!/usr/bin/env python3
"""Random partitioning in a nutshell: break a clause at each gap with
probability q, keep the pieces, repeat.  Averaged over all 2^(n-1)
possible break patterns, every sub-phrase has an exact expected
frequency, and those expectations add back up to the original word count.
"""
import math
import random

from starlex import (
    PartitionParams,
    expected_phrase_frequencies,
    sample_partition,
    subphrase_partition_probability,
)


def main():
    clause = "the cat sat on the mat".split()
    q = 0.5
    rng = random.Random(0)

    print("clause:", " ".join(clause))
    print("a few random partitions at q=0.5:")
    for _ in range(5):
        pieces = sample_partition(clause, q, rng)
        print("  ", " | ".join(" ".join(p) for p in pieces))

    # The probability that a given span survives as one piece depends only
    # on the clause length, the span, and q.
    n = len(clause)
    print("\nper-span isolation probabilities:")
    for i, j in [(1, 1), (1, 3), (2, 4), (1, n), (n, n)]:
        p = subphrase_partition_probability(n, i, j, q)
        print(f"  span {i}..{j} ({' '.join(clause[i-1:j])!r}): {p:.6f}")

    # Expected sub-phrase lengths conserve the clause length exactly.
    total = math.fsum(
        (j - i + 1) * subphrase_partition_probability(n, i, j, q)
        for i in range(1, n + 1)
        for j in range(i, n + 1)
    )
    print(f"\nsum of length-weighted span probabilities: {total} (clause length {n})")

    # Same bookkeeping over a small corpus: words in, phrase mass out.
    corpus = [
        "the cat sat on the mat".split(),
        "the dog sat on the rug".split(),
        "a cat and a dog".split(),
    ]
    table = expected_phrase_frequencies(corpus, PartitionParams(q=q, max_len=6))
    lhs, rhs = table.word_phrase_balance()
    print(f"\ncorpus word count {lhs:.1f} vs phrase mass {rhs:.6f}")

    print("\nmost frequent two-word phrases:")
    for phrase, freq in table.top_phrases(2, 5):
        print(f"  {phrase:<12} {freq:.4f}")


if __name__ == "__main__":
    main()
