"""Cross-validated ROC evaluation of the definition-likelihood ranking.

Protocol: split the defined phrases of a ranking pool into k folds; for
each fold, retrain context scores with the withheld phrases labeled
undefined, rank the union of withheld and undefined phrases, and read
true/false positive rates off log-spaced list-length cutoffs.  Curves are
averaged across folds per cutoff, and a frequency-only ranking of the
same pools provides the baseline.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .context import ContextIndex, build_context_index
from .lexicon import DictionaryIndicator
from .partition import PhraseFrequencyTable

__all__ = [
    "FoldPlan",
    "RocPoint",
    "CurveResult",
    "CrossValReport",
    "kfold_split",
    "log_spaced_cutoffs",
    "roc_points_from_ranking",
    "roc_auc",
    "run_crossval",
    "emit_report",
]


@dataclass(frozen=True)
class RocPoint:
    cutoff: int
    tpr: float
    fpr: float
    discovered: float


@dataclass
class FoldPlan:
    k: int
    seed: int
    folds: list[list[str]]


def kfold_split(defined, k: int, seed: int) -> FoldPlan:
    """Split phrases into k folds: seeded uniform shuffle, round-robin.

    Deterministic for a given seed; fold sizes differ by at most one.
    Fewer phrases than folds is a fault.
    """
    items = sorted(defined)
    if k < 1:
        raise ValueError(f"fold count must be >= 1, got {k}")
    if len(items) < k:
        raise ValueError(f"cannot split {len(items)} defined phrases into {k} folds")
    random.Random(seed).shuffle(items)
    folds: list[list[str]] = [[] for _ in range(k)]
    for pos, phrase in enumerate(items):
        folds[pos % k].append(phrase)
    return FoldPlan(k=k, seed=seed, folds=folds)


def log_spaced_cutoffs(count: int, max_cutoff: int) -> np.ndarray:
    """``count`` geometrically spaced integer cutoffs in [1, max_cutoff].

    Rounding collapses duplicates; both endpoints are always present.
    """
    if count < 1:
        raise ValueError(f"cutoff count must be >= 1, got {count}")
    if max_cutoff < 1:
        raise ValueError(f"max cutoff must be >= 1, got {max_cutoff}")
    grid = np.geomspace(1.0, float(max_cutoff), num=count)
    cutoffs = np.unique(np.rint(grid).astype(np.int64))
    cutoffs = np.union1d(cutoffs, np.array([1, max_cutoff], dtype=np.int64))
    return np.clip(cutoffs, 1, max_cutoff)


def roc_points_from_ranking(
    flags,
    cutoffs,
    n_neg: int | None = None,
) -> list[RocPoint]:
    """ROC points for one ranked list.

    ``flags`` marks positives in rank order.  ``n_neg`` defaults to the
    negatives present in the list; pass it explicitly when the list is a
    truncated view of a larger negative pool.  Cutoffs beyond the list end
    accept the entire list.
    """
    flag_arr = np.asarray(flags, dtype=bool)
    n_pos = int(flag_arr.sum())
    negs = int(n_neg) if n_neg is not None else len(flag_arr) - n_pos
    if n_pos == 0 or negs == 0:
        raise ValueError(f"degenerate ranking: {n_pos} positives, {negs} negatives")
    cut_arr = np.asarray(cutoffs, dtype=np.int64)
    if len(flag_arr) == 0:
        raise ValueError("ranking must be non-empty")
    cum = np.cumsum(flag_arr)
    eff = np.minimum(cut_arr, len(flag_arr)) - 1
    pos_above = cum[eff]
    accepted = eff + 1
    points = []
    for cutoff, acc, pos in zip(cut_arr, accepted, pos_above):
        points.append(
            RocPoint(
                cutoff=int(cutoff),
                tpr=float(pos) / n_pos,
                fpr=float(acc - pos) / negs,
                discovered=float(pos),
            )
        )
    return points


def roc_auc(points) -> float:
    """Trapezoidal area under (fpr, tpr) points.

    Points must arrive sorted by fpr ascending (ties allowed); (0,0) and
    (1,1) are appended when absent.  A decreasing fpr sequence is a fault.
    """
    fprs = [p.fpr for p in points]
    tprs = [p.tpr for p in points]
    if any(b < a - 1e-12 for a, b in zip(fprs, fprs[1:])):
        raise ValueError("fpr sequence is not non-decreasing")
    if not fprs or fprs[0] > 0.0 or tprs[0] > 0.0:
        fprs.insert(0, 0.0)
        tprs.insert(0, 0.0)
    if fprs[-1] < 1.0 or tprs[-1] < 1.0:
        fprs.append(1.0)
        tprs.append(1.0)
    area = 0.0
    for i in range(1, len(fprs)):
        area += (fprs[i] - fprs[i - 1]) * (tprs[i] + tprs[i - 1]) / 2.0
    return area


@dataclass
class CurveResult:
    filter_name: str
    points: list[RocPoint]
    auc: float
    mean_discovered_at: dict[int, float]


@dataclass
class CrossValReport:
    q: float
    top_n: int
    folds: int
    seed: int
    cutoff_count: int
    curves: dict[tuple[int, str], CurveResult] = field(default_factory=dict)
    pool_sizes: dict[int, int] = field(default_factory=dict)
    defined_counts: dict[int, int] = field(default_factory=dict)

    def merge(self, other: "CrossValReport") -> None:
        """Fold another per-length report into this one."""
        if (self.q, self.top_n, self.folds, self.seed, self.cutoff_count) != (
            other.q,
            other.top_n,
            other.folds,
            other.seed,
            other.cutoff_count,
        ):
            raise ValueError("cannot merge reports with different parameters")
        self.curves.update(other.curves)
        self.pool_sizes.update(other.pool_sizes)
        self.defined_counts.update(other.defined_counts)


class _IndexArrays:
    """Flat numpy view of a context index for fast repeated relabeling."""

    def __init__(self, index: ContextIndex):
        self.phrases = list(index.phrase_freq)
        self.freq = np.array([index.phrase_freq[p] for p in self.phrases], dtype=np.float64)
        phrase_id = {p: i for i, p in enumerate(self.phrases)}
        ctx_ids: dict[str, int] = {}
        post_ctx: list[int] = []
        post_phr: list[int] = []
        post_w: list[float] = []
        for key, plist in index.postings.items():
            cid = ctx_ids.setdefault(key, len(ctx_ids))
            for phrase, mass in plist:
                post_ctx.append(cid)
                post_phr.append(phrase_id[phrase])
                post_w.append(mass)
        self.n_ctx = len(ctx_ids)
        self.post_ctx = np.array(post_ctx, dtype=np.int64)
        self.post_phr = np.array(post_phr, dtype=np.int64)
        self.post_w = np.array(post_w, dtype=np.float64)
        self.star_w = index.allstar_weight
        n = len(self.phrases)
        self.den_ctx = np.bincount(self.post_ctx, weights=self.post_w, minlength=self.n_ctx)
        self.den_phr = (
            np.bincount(self.post_phr, weights=self.post_w, minlength=n) + self.star_w * self.freq
        )
        self.freq_total = float(self.freq.sum())
        # Rank of each phrase in ascending lexicographic order, for tie-breaks.
        self.lex_rank = np.empty(n, dtype=np.int64)
        self.lex_rank[sorted(range(n), key=self.phrases.__getitem__)] = np.arange(n)

    def phrase_scores(self, defined_mask: np.ndarray) -> np.ndarray:
        """Phrase likelihoods under a 0/1 labeling of the pool."""
        num_ctx = np.bincount(
            self.post_ctx, weights=self.post_w * defined_mask[self.post_phr], minlength=self.n_ctx
        )
        sigma = np.divide(num_ctx, self.den_ctx)
        star_sigma = float(self.freq @ defined_mask) / self.freq_total
        num_phr = (
            np.bincount(self.post_phr, weights=self.post_w * sigma[self.post_ctx], minlength=len(self.phrases))
            + self.star_w * self.freq * star_sigma
        )
        return num_phr / self.den_phr


def run_crossval(
    table: PhraseFrequencyTable,
    indicator: DictionaryIndicator,
    length: int,
    *,
    q: float,
    top_n: int = 100_000,
    folds: int = 10,
    seed: int = 0,
    cutoffs: int = 1000,
    k_list: tuple[int, ...] = (20,),
) -> CrossValReport:
    """Cross-validate likelihood and frequency rankings for one length.

    The pool is the top-n phrases of the length by frequency.  Each fold
    withholds its defined phrases (labels only; the text stays), retrains
    the context scores, and ranks withheld plus undefined phrases.  A pool
    with no defined or no undefined phrases is a fault, as is a defined
    set smaller than the fold count.
    """
    index = build_context_index(table, length, q, top_n=top_n)
    if not index.phrase_freq:
        raise ValueError(f"no phrases of length {length} in the table")
    arrays = _IndexArrays(index)
    names = arrays.phrases
    pool_size = len(names)

    defined_idx = np.array([i for i, p in enumerate(names) if p in indicator], dtype=np.int64)
    undefined_idx = np.array([i for i, p in enumerate(names) if p not in indicator], dtype=np.int64)
    if len(defined_idx) == 0 or len(undefined_idx) == 0:
        raise ValueError(
            f"degenerate pool for length {length}: "
            f"{len(defined_idx)} defined, {len(undefined_idx)} undefined"
        )
    plan = kfold_split([names[i] for i in defined_idx], folds, seed)
    cutoff_arr = log_spaced_cutoffs(cutoffs, pool_size)
    n_neg = len(undefined_idx)
    name_to_id = {p: i for i, p in enumerate(names)}

    sums = {
        "likelihood": {"tpr": 0.0, "fpr": 0.0, "disc": 0.0},
        "frequency": {"tpr": 0.0, "fpr": 0.0, "disc": 0.0},
    }
    acc = {
        name: {
            "tpr": np.zeros(len(cutoff_arr)),
            "fpr": np.zeros(len(cutoff_arr)),
            "disc": np.zeros(len(cutoff_arr)),
            "disc_at": {k: 0.0 for k in k_list},
        }
        for name in ("likelihood", "frequency")
    }

    base_defined = np.zeros(pool_size, dtype=np.float64)
    base_defined[defined_idx] = 1.0

    for fold in plan.folds:
        withheld_idx = np.array([name_to_id[p] for p in fold], dtype=np.int64)
        mask = base_defined.copy()
        mask[withheld_idx] = 0.0
        scores = arrays.phrase_scores(mask)

        union = np.concatenate([withheld_idx, undefined_idx])
        flags = np.zeros(len(union), dtype=bool)
        flags[: len(withheld_idx)] = True
        n_pos = len(withheld_idx)

        rankings = {
            "likelihood": np.lexsort(
                (arrays.lex_rank[union], -arrays.freq[union], -scores[union])
            ),
            "frequency": np.lexsort((arrays.lex_rank[union], -arrays.freq[union])),
        }
        for name, order in rankings.items():
            ranked = flags[order]
            cum = np.cumsum(ranked)
            eff = np.minimum(cutoff_arr, len(ranked)) - 1
            pos_above = cum[eff].astype(np.float64)
            acc[name]["tpr"] += pos_above / n_pos
            acc[name]["fpr"] += (eff + 1 - pos_above) / n_neg
            acc[name]["disc"] += pos_above
            for k in k_list:
                acc[name]["disc_at"][k] += float(cum[min(k, len(ranked)) - 1])

    report = CrossValReport(
        q=q, top_n=top_n, folds=folds, seed=seed, cutoff_count=cutoffs
    )
    report.pool_sizes[length] = pool_size
    report.defined_counts[length] = len(defined_idx)
    n_folds = float(len(plan.folds))
    for name in ("likelihood", "frequency"):
        points = [
            RocPoint(
                cutoff=int(c),
                tpr=float(t) / n_folds,
                fpr=float(f) / n_folds,
                discovered=float(d) / n_folds,
            )
            for c, t, f, d in zip(
                cutoff_arr, acc[name]["tpr"], acc[name]["fpr"], acc[name]["disc"]
            )
        ]
        report.curves[(length, name)] = CurveResult(
            filter_name=name,
            points=points,
            auc=roc_auc(points),
            mean_discovered_at={k: v / n_folds for k, v in acc[name]["disc_at"].items()},
        )
    return report


def _sig6(value: float) -> float:
    return float(f"{value:.6g}")


def emit_report(report: CrossValReport, out_dir: str) -> list[Path]:
    """Write per-curve CSVs and a summary.json; returns the paths written.

    Re-emitting the same report yields byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for (length, name) in sorted(report.curves):
        curve = report.curves[(length, name)]
        path = out / f"roc_L{length}_{name}.csv"
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("cutoff,tpr,fpr,discovered\n")
            for p in curve.points:
                handle.write(f"{p.cutoff},{p.tpr:.6g},{p.fpr:.6g},{p.discovered:.6g}\n")
        written.append(path)

    lengths: dict[str, dict] = {}
    for (length, name), curve in sorted(report.curves.items()):
        slot = lengths.setdefault(
            str(length),
            {
                "pool_size": report.pool_sizes.get(length),
                "defined_in_pool": report.defined_counts.get(length),
            },
        )
        slot[name] = {
            "auc": _sig6(curve.auc),
            "mean_discovered_at": {str(k): _sig6(v) for k, v in curve.mean_discovered_at.items()},
        }
    summary = {
        "q": _sig6(report.q),
        "top_n": report.top_n,
        "folds": report.folds,
        "seed": report.seed,
        "cutoffs": report.cutoff_count,
        "lengths": lengths,
    }
    path = out / "summary.json"
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(summary, handle, indent=2, sort_keys=True)
        handle.write("\n")
    written.append(path)
    return written
