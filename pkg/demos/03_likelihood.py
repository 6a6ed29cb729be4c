#!/usr/bin/env python3
"""The definition-likelihood walkthrough on the smallest corpus that
shows the idea: two phrases, one with a dictionary entry, one without.

"on the contrary" is defined; "in the contrary" is not.  The two share
their suffix contexts, so each shared context is half defined.  Contexts
private to "on ..." are fully defined, those private to "in ..." fully
undefined.  Averaging context scores by context weight gives 17/24 for
the defined phrase and 7/24 for the undefined one - the undefined phrase
still inherits a substantial score from the company it keeps, which is
exactly the signal a dictionary-coverage screen wants.
"""
from starlex import (
    DictionaryIndicator,
    PhraseFrequencyTable,
    build_context_index,
    context_likelihood,
    phrase_likelihood,
)


def main():
    table = PhraseFrequencyTable(
        q=0.5,
        max_len=3,
        by_length={3: {"in the contrary": 1.0, "on the contrary": 1.0}},
    )
    indicator = DictionaryIndicator(frozenset({"on the contrary"}), source="demo")

    index = build_context_index(table, 3, 0.5)
    ctx = context_likelihood(index, indicator)

    print("context scores (share of the context's mass that is defined):")
    for key in sorted(ctx.scores):
        print(f"  {key:<18} {ctx.scores[key]:.4f}")

    scores = phrase_likelihood(index, ctx, q=0.5)
    print("\nphrase scores (weight-averaged over their contexts):")
    for phrase in sorted(scores):
        marker = "defined" if phrase in indicator else "missing?"
        print(f"  {phrase:<18} {scores[phrase]:.6f}  ({scores[phrase] * 24:.0f}/24, {marker})")

    mean = sum(scores.values()) / len(scores)
    print(f"\nfrequency-weighted mean score: {mean:.4f}")
    print("matches the defined share of the pool: 1 of 2 phrases")


if __name__ == "__main__":
    main()
