"""linetropy: rank source lines by statistical surprise for defect localization.

The pipeline: lex files into line-tagged token streams, train cache-augmented
n-gram models with leave-one-bin-out hygiene, score every line's entropy in
bits, normalize within syntactic line types and weight by historical bug
proneness, mine version history for the buggy/fixed/unchanged ground truth,
and evaluate orderings with cost-effectiveness (lift-curve area) measures.
"""

from .evaluate import (
    CreditMode,
    EvalCurve,
    Warning,
    aucec,
    aucecl,
    compare_entropy_distributions,
    lift_curve,
    mix_order,
    simulate_sbf_order,
)
from .lexer import (
    BUILTIN_PROFILES,
    C_PROFILE,
    JAVA_PROFILE,
    LanguageProfile,
    LineType,
    Token,
    TokenizedFile,
    TokenKind,
    classify_line_type,
    load_profile,
    tokenize_file,
)
from .mining import (
    CommitRecord,
    DiffResult,
    LineSets,
    build_line_sets,
    classify_bugfix,
    diff_versions,
    extract_snapshots,
)
from .ngram import (
    Cache,
    CacheConfig,
    NgramTable,
    build_cache,
    cached_prob,
    count_ngrams,
    load_table,
    merge_tables,
    ngram_prob,
    save_table,
)
from .normalize import (
    BugWeightTable,
    TypeStats,
    apply_normalization,
    compute_type_stats,
    train_bug_weights,
    weighted_score,
    zscore,
)
from .scoring import (
    BinAssignment,
    DirectionalModel,
    LineScore,
    line_entropy,
    partition_bins,
    score_snapshot,
    sweep_cache_params,
    token_entropy,
)

__version__ = "0.1.0"
