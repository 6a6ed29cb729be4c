"""Command-line pipeline: frequencies -> contexts -> score -> shortlist -> crossval.

Stages communicate only through files under --out, so a directory plus its
config.json is enough to rerun any later stage.  For every option, an
explicit flag beats a STARLEX_* environment variable, which beats the value
remembered in the output directory's config.json, which beats the default.
Options that change what the artifacts mean (corpus, lexicon, q, max-len,
delims, top-n) may not silently change between stages sharing a directory.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from .context import build_context_index, read_context_index, write_context_index
from .evaluation import CrossValReport, emit_report, run_crossval
from .lexicon import DictionaryIndicator, load_lexicon
from .likelihood import (
    double_sort_shortlist,
    frequency_shortlist,
    read_scores_tsv,
    score_index,
    write_scores_tsv,
    write_shortlist_tsv,
)
from .partition import (
    PartitionParams,
    PhraseFrequencyTable,
    expected_phrase_frequencies,
    write_phrase_tsv,
    write_word_tsv,
)
from .textio import DEFAULT_DELIMITERS, iter_clauses

ENV_PREFIX = "STARLEX_"

# Fields that define what the artifacts in a directory mean.  Muting any of
# them between stages would mix incompatible artifacts, so it is a fault.
IDENTITY_FIELDS = ("corpus", "lexicon", "q", "max_len", "delims", "top_n")


class PipelineError(RuntimeError):
    """Configuration or artifact fault that stops the pipeline."""


@dataclass
class PipelineConfig:
    corpus: list[str] = field(default_factory=list)
    lexicon: str | None = None
    q: float = 0.5
    max_len: int = 5
    lengths: list[int] = field(default_factory=lambda: [2, 3, 4, 5])
    top_n: int = 100_000
    k: int = 20
    folds: int = 10
    cutoffs: int = 1000
    seed: int = 0
    delims: str = DEFAULT_DELIMITERS
    threads: int = 1
    out: str = "."

    @property
    def effective_delims(self) -> str:
        """Newline always delimits clauses: corpora are streamed by line."""
        return self.delims if "\n" in self.delims else self.delims + "\n"

    def path(self, name: str) -> Path:
        return Path(self.out) / name


def _parse_lengths(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise PipelineError(f"bad lengths list {text!r}: expected comma-separated integers") from exc
    if not values:
        raise PipelineError(f"bad lengths list {text!r}: empty")
    return values


_ENV_PARSERS = {
    "corpus": lambda v: [p for p in v.split(os.pathsep) if p],
    "lexicon": str,
    "q": float,
    "max_len": int,
    "lengths": _parse_lengths,
    "top_n": int,
    "k": int,
    "folds": int,
    "cutoffs": int,
    "seed": int,
    "delims": str,
    "threads": int,
    "out": str,
}


def _env_value(name: str):
    raw = os.environ.get(ENV_PREFIX + name.upper())
    if raw is None:
        return None
    try:
        return _ENV_PARSERS[name](raw)
    except (ValueError, PipelineError) as exc:
        raise PipelineError(f"bad value in ${ENV_PREFIX}{name.upper()}: {raw!r}") from exc


def _stored_config(out: str) -> dict:
    path = Path(out) / "config.json"
    if not path.exists():
        return {}
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise PipelineError(f"unreadable config.json in {out}: {exc}") from exc


def _params_hash(cfg: PipelineConfig) -> str:
    identity = {name: getattr(cfg, name) for name in IDENTITY_FIELDS}
    payload = json.dumps(identity, sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:16]


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Layer flags over environment over stored config over defaults."""
    defaults = PipelineConfig()
    out = getattr(args, "out", None) or _env_value("out") or defaults.out
    stored = _stored_config(out)

    values = {"out": out}
    for f in fields(PipelineConfig):
        if f.name == "out":
            continue
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
        else:
            env = _env_value(f.name)
            if env is not None:
                values[f.name] = env
            elif f.name in stored:
                values[f.name] = stored[f.name]
            else:
                values[f.name] = getattr(defaults, f.name)
    # The stock lengths list tracks the stock max_len; when nothing chose
    # lengths explicitly, follow a lowered --max-len instead of tripping
    # validation on a flag the user never passed.
    lengths_chosen = (
        getattr(args, "lengths", None) is not None
        or _env_value("lengths") is not None
        or "lengths" in stored
    )
    if not lengths_chosen:
        top = values["max_len"]
        values["lengths"] = list(range(2, top + 1)) if top >= 2 else [1]
    if getattr(args, "length", None) is not None:
        values["lengths"] = [args.length]
    cfg = PipelineConfig(**values)

    if not 0.0 < cfg.q <= 1.0:
        raise PipelineError(f"--q must lie in (0, 1], got {cfg.q}")
    if cfg.max_len < 1:
        raise PipelineError(f"--max-len must be >= 1, got {cfg.max_len}")
    for length in cfg.lengths:
        if not 1 <= length <= cfg.max_len:
            raise PipelineError(f"--lengths entry {length} outside 1..max_len ({cfg.max_len})")
    if cfg.k < 1:
        raise PipelineError(f"--k must be >= 1, got {cfg.k}")
    if cfg.top_n < cfg.k:
        raise PipelineError(f"--top-n ({cfg.top_n}) must be at least --k ({cfg.k})")
    if cfg.folds < 1:
        raise PipelineError(f"--folds must be >= 1, got {cfg.folds}")
    if cfg.cutoffs < 1:
        raise PipelineError(f"--cutoffs must be >= 1, got {cfg.cutoffs}")
    if cfg.threads < 1:
        raise PipelineError(f"--threads must be >= 1, got {cfg.threads}")

    if stored:
        for name in IDENTITY_FIELDS:
            if name in stored and stored[name] != getattr(cfg, name):
                raise PipelineError(
                    f"config mismatch for {name!r}: directory {cfg.out} was built with "
                    f"{stored[name]!r}, now asked for {getattr(cfg, name)!r}; "
                    "use a fresh --out to change it"
                )
    return cfg


def write_config(cfg: PipelineConfig) -> Path:
    path = Path(cfg.out) / "config.json"
    payload = {f.name: getattr(cfg, f.name) for f in fields(PipelineConfig) if f.name != "out"}
    payload["params_hash"] = _params_hash(cfg)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def _require(cfg: PipelineConfig, name: str, producer: str) -> Path:
    path = cfg.path(name)
    if not path.exists():
        raise PipelineError(
            f"missing upstream artifact {path}; run the '{producer}' stage first"
        )
    return path


def _load_pool_table(cfg: PipelineConfig) -> PhraseFrequencyTable:
    """Load the top-n rows per requested length from phrases.tsv.

    Rows are written ranked (frequency descending within length), so the
    first n rows of a length block are exactly the ranking pool.
    """
    path = _require(cfg, "phrases.tsv", "frequencies")
    wanted = set(cfg.lengths)
    table = PhraseFrequencyTable(q=cfg.q, max_len=cfg.max_len)
    kept: dict[int, int] = {length: 0 for length in wanted}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                phrase, length_text, freq_text = line.split("\t")
                length = int(length_text)
            except ValueError as exc:
                raise PipelineError(f"{path}:{line_no}: malformed phrase row") from exc
            if length not in wanted or kept[length] >= cfg.top_n:
                continue
            table.by_length.setdefault(length, {})[phrase] = float(freq_text)
            kept[length] += 1
    return table


def _stage_frequencies(cfg: PipelineConfig) -> None:
    if not cfg.corpus:
        raise PipelineError("frequencies: --corpus is required")
    for path in cfg.corpus:
        if str(path) != "-" and not Path(path).exists():
            raise PipelineError(f"corpus file not found: {path}")
    params = PartitionParams(q=cfg.q, max_len=cfg.max_len)
    clauses = iter_clauses(cfg.corpus, delimiters=cfg.effective_delims)
    table = expected_phrase_frequencies(clauses, params, threads=cfg.threads)
    phrases_path = cfg.path("phrases.tsv")
    write_phrase_tsv(table, str(phrases_path))
    words_path = cfg.path("words.tsv")
    write_word_tsv(table, str(words_path))
    n_rows = sum(len(tab) for tab in table.by_length.values())
    print(f"wrote {phrases_path} ({n_rows} rows) and {words_path} ({len(table.word_counts)} rows)")


def _stage_contexts(cfg: PipelineConfig) -> None:
    table = _load_pool_table(cfg)
    for length in cfg.lengths:
        if not table.phrases_of_length(length):
            raise PipelineError(f"contexts: no phrases of length {length} in phrases.tsv")
        index = build_context_index(table, length, cfg.q, top_n=cfg.top_n)
        path = cfg.path(f"contexts_L{length}.tsv")
        write_context_index(index, str(path))
        print(f"wrote {path} ({len(index.postings)} contexts, {len(index.phrase_freq)} phrases)")


def _stage_score(cfg: PipelineConfig) -> None:
    if not cfg.lexicon:
        raise PipelineError("score: --lexicon is required")
    if not Path(cfg.lexicon).exists():
        raise PipelineError(f"lexicon file not found: {cfg.lexicon}")
    indicator = load_lexicon(cfg.lexicon)
    table = _load_pool_table(cfg)
    for length in cfg.lengths:
        ctx_path = _require(cfg, f"contexts_L{length}.tsv", "contexts")
        pool = dict(table.top_phrases(length, cfg.top_n))
        index = read_context_index(str(ctx_path), length, cfg.q, pool)
        likelihoods = score_index(index, indicator)
        path = cfg.path(f"scores_L{length}.tsv")
        write_scores_tsv(table, likelihoods, indicator, str(path))
        print(f"wrote {path} ({len(likelihoods.phrase_scores)} rows)")


def _stage_shortlist(cfg: PipelineConfig) -> None:
    for length in cfg.lengths:
        path = _require(cfg, f"scores_L{length}.tsv", "score")
        rows = read_scores_tsv(str(path))
        table = PhraseFrequencyTable(q=cfg.q, max_len=cfg.max_len)
        table.by_length[length] = {phrase: freq for phrase, _, freq, _, _ in rows}
        scores = {phrase: score for phrase, _, _, score, _ in rows}
        indicator = DictionaryIndicator(
            defined=frozenset(phrase for phrase, _, _, _, defined in rows if defined),
            source=str(path),
        )
        ranked = double_sort_shortlist(table, scores, indicator, length, n=cfg.top_n, k=cfg.k)
        baseline = frequency_shortlist(table, indicator, length, k=cfg.k, scores=scores)
        for name, shortlist in (("likelihood", ranked), ("frequency", baseline)):
            out_path = cfg.path(f"shortlist_{name}_L{length}.tsv")
            write_shortlist_tsv(shortlist, str(out_path))
            note = " (truncated)" if shortlist.truncated else ""
            print(f"wrote {out_path} ({len(shortlist)} rows){note}")


def _stage_crossval(cfg: PipelineConfig, allow_skip: bool = False) -> None:
    if not cfg.lexicon:
        raise PipelineError("crossval: --lexicon is required")
    if not Path(cfg.lexicon).exists():
        raise PipelineError(f"lexicon file not found: {cfg.lexicon}")
    indicator = load_lexicon(cfg.lexicon)
    table = _load_pool_table(cfg)
    merged = CrossValReport(
        q=cfg.q, top_n=cfg.top_n, folds=cfg.folds, seed=cfg.seed, cutoff_count=cfg.cutoffs
    )
    for length in cfg.lengths:
        try:
            report = run_crossval(
                table,
                indicator,
                length,
                q=cfg.q,
                top_n=cfg.top_n,
                folds=cfg.folds,
                seed=cfg.seed,
                cutoffs=cfg.cutoffs,
                k_list=(cfg.k,),
            )
        except ValueError as exc:
            if allow_skip:
                print(f"crossval: skipping length {length}: {exc}")
                continue
            raise PipelineError(f"crossval: {exc}") from exc
        merged.merge(report)
    written = emit_report(merged, cfg.out)
    for path in written:
        print(f"wrote {path}")


def _stage_all(cfg: PipelineConfig) -> None:
    _stage_frequencies(cfg)
    _stage_contexts(cfg)
    _stage_score(cfg)
    _stage_shortlist(cfg)
    _stage_crossval(cfg, allow_skip=True)


_STAGES = {
    "frequencies": _stage_frequencies,
    "contexts": _stage_contexts,
    "score": _stage_score,
    "shortlist": _stage_shortlist,
    "crossval": _stage_crossval,
    "all": _stage_all,
}


def _add_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", nargs="+", metavar="PATH", help="plain-text corpus files ('-' for stdin)")
    parser.add_argument("--lexicon", metavar="PATH", help="one dictionary title per line")
    parser.add_argument("--q", type=float, help="break probability per gap (default 0.5)")
    parser.add_argument("--max-len", type=int, dest="max_len", help="longest tracked phrase (default 5)")
    parser.add_argument("--lengths", type=_parse_lengths, help="comma-separated phrase lengths (default 2..max-len)")
    parser.add_argument("--length", type=int, help="single phrase length (overrides --lengths)")
    parser.add_argument("--top-n", type=int, dest="top_n", help="frequency pool size per length (default 100000)")
    parser.add_argument("--k", type=int, help="shortlist length (default 20)")
    parser.add_argument("--folds", type=int, help="cross-validation folds (default 10)")
    parser.add_argument("--cutoffs", type=int, help="log-spaced cutoff count (default 1000)")
    parser.add_argument("--seed", type=int, help="shuffle seed (default 0)")
    parser.add_argument("--delims", help="clause delimiter characters (newline always delimits)")
    parser.add_argument("--out", help="output directory (default .)")
    parser.add_argument("--threads", type=int, help="shard worker threads (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starlex",
        description="Phrase statistics, context models, and dictionary-coverage shortlists.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("frequencies", "count expected phrase frequencies from a corpus"),
        ("contexts", "build per-length context indexes"),
        ("score", "train definition likelihoods against a lexicon"),
        ("shortlist", "emit double-sorted and frequency shortlists"),
        ("crossval", "cross-validated ROC evaluation"),
        ("all", "run every stage in order"),
    ):
        _add_options(sub.add_parser(name, help=help_text))
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        write_config(cfg)
        _STAGES[args.command](cfg)
    except (PipelineError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
