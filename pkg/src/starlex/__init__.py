"""Frequency-conserving phrase statistics over random clause partitions,
star-pattern context models, and dictionary-coverage shortlists."""

from .textio import DEFAULT_DELIMITERS, iter_clauses, normalize_token, segment_clauses
from .partition import (
    PartitionParams,
    PhraseFrequencyTable,
    expected_phrase_frequencies,
    sample_partition,
    subphrase_partition_probability,
)
from .context import (
    Context,
    ContextIndex,
    WordContextModel,
    build_context_index,
    context_key,
    enumerate_contexts,
    external_word_contexts,
)
from .lexicon import DictionaryIndicator, load_lexicon
from .likelihood import (
    ContextScores,
    LikelihoodTable,
    Shortlist,
    ShortlistEntry,
    context_likelihood,
    double_sort_shortlist,
    frequency_shortlist,
    phrase_likelihood,
    score_index,
)
from .evaluation import (
    CrossValReport,
    CurveResult,
    FoldPlan,
    RocPoint,
    emit_report,
    kfold_split,
    log_spaced_cutoffs,
    roc_auc,
    roc_points_from_ranking,
    run_crossval,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_DELIMITERS",
    "iter_clauses",
    "normalize_token",
    "segment_clauses",
    "PartitionParams",
    "PhraseFrequencyTable",
    "expected_phrase_frequencies",
    "sample_partition",
    "subphrase_partition_probability",
    "Context",
    "ContextIndex",
    "WordContextModel",
    "build_context_index",
    "context_key",
    "enumerate_contexts",
    "external_word_contexts",
    "DictionaryIndicator",
    "load_lexicon",
    "ContextScores",
    "LikelihoodTable",
    "Shortlist",
    "ShortlistEntry",
    "context_likelihood",
    "double_sort_shortlist",
    "frequency_shortlist",
    "phrase_likelihood",
    "score_index",
    "CrossValReport",
    "CurveResult",
    "FoldPlan",
    "RocPoint",
    "emit_report",
    "kfold_split",
    "log_spaced_cutoffs",
    "roc_auc",
    "roc_points_from_ranking",
    "run_crossval",
    "__version__",
]
