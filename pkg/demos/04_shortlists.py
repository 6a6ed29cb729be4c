#!/usr/bin/env python3
"""Double-sorted shortlists: cut to the top-N phrases by frequency, then
re-rank by definition likelihood and keep the best undefined candidates.
A pure frequency ranking is the baseline - on this corpus it surfaces
loud noise, while the likelihood re-rank surfaces the phrase that lives
in defined company.
"""
from starlex import (
    DictionaryIndicator,
    PartitionParams,
    build_context_index,
    double_sort_shortlist,
    expected_phrase_frequencies,
    frequency_shortlist,
    score_index,
)


def main():
    # "hot off the" variants share contexts with the defined entry;
    # "lorem ipsum filler" is frequent but keeps no defined company.
    corpus = (
        ["hot off the press".split()] * 4
        + ["hot off the presses".split()] * 3
        + ["hot off the grill".split()] * 2
        + ["lorem ipsum filler text".split()] * 10
        + ["more ipsum filler text".split()] * 9
    )
    table = expected_phrase_frequencies(corpus, PartitionParams(q=0.5, max_len=4))
    indicator = DictionaryIndicator(frozenset({"hot off the press"}), source="demo")

    bundle = score_index(build_context_index(table, 4, 0.5), indicator)

    ranked = double_sort_shortlist(
        table, bundle.phrase_scores, indicator, length=4, n=100, k=3
    )
    print("likelihood shortlist (undefined, best first):")
    for entry in ranked:
        print(f"  {entry.rank}. {entry.phrase:<24} "
              f"freq {entry.frequency:.3f}  score {entry.likelihood:.4f}")

    baseline = frequency_shortlist(table, indicator, length=4, k=3,
                                   scores=bundle.phrase_scores)
    print("\nfrequency baseline (undefined, loudest first):")
    for entry in baseline:
        print(f"  {entry.rank}. {entry.phrase:<24} "
              f"freq {entry.frequency:.3f}  score {entry.likelihood:.4f}")

    if ranked.truncated or baseline.truncated:
        print("\n(note: fewer undefined candidates than requested)")


if __name__ == "__main__":
    main()
