#!/usr/bin/env python3
"""Star-pattern contexts: remove a contiguous span from a phrase and keep
what is left.  A three-word phrase has six such patterns; their weights
are probabilities and sum to one.  Indexing contexts over a corpus links
phrases that occur in the same frames.
"""
import math

from starlex import (
    PartitionParams,
    build_context_index,
    context_key,
    enumerate_contexts,
    expected_phrase_frequencies,
)


def main():
    tokens = ["on", "the", "contrary"]
    print("phrase:", " ".join(tokens))
    print("its contexts and weights at q=0.5:")
    weights = []
    for ctx, weight in enumerate_contexts(tokens, 0.5):
        weights.append(weight)
        print(f"  {context_key(ctx):<18} {weight:.6f}")
    print(f"  total {math.fsum(weights):.6f}")

    corpus = [
        "on the contrary".split(),
        "in the contrary".split(),
        "on the whole".split(),
        "in the morning".split(),
        "on the morning train".split(),
    ]
    table = expected_phrase_frequencies(corpus, PartitionParams(q=0.5, max_len=4))
    index = build_context_index(table, 3, 0.5)

    print("\nphrases sharing the context '* the contrary':")
    for phrase, mass in index.postings["* the contrary"]:
        print(f"  {phrase:<18} joint mass {mass:.6f}")

    print("\nphrases sharing the context 'on the *':")
    for phrase, mass in index.postings["on the *"]:
        print(f"  {phrase:<18} joint mass {mass:.6f}")

    # Joint masses are a decomposition of phrase frequency: adding a
    # phrase's mass over all of its contexts gives back its frequency.
    masses = index.joint_mass_by_phrase()
    phrase = "on the contrary"
    print(f"\n{phrase!r}: frequency {index.phrase_freq[phrase]:.6f}, "
          f"context mass {masses[phrase]:.6f}")


if __name__ == "__main__":
    main()
