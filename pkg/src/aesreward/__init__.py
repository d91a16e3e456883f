"""Deterministic engine for pairwise video-aesthetics judgments.

Parses structured judge outputs, synthesizes self-consistent reasoning
traces under expert-label constraints, computes verifiable rewards, and
aggregates evaluation and alignment statistics.
"""

from .rubric import (
    CRITERIA,
    DIMENSIONS,
    NUM_CRITERIA,
    CoTTrace,
    Criterion,
    CriterionUnit,
    DimSummary,
    Dimension,
    PreferenceRecord,
    Verdict,
    criterion,
    dimension_of,
    negate_verdict,
)
from .parsing import ParseReport, Violation, parse_base, parse_cot, serialize_trace
from .similarity import (
    EmbeddingProvider,
    FallbackEmbedder,
    RemoteEmbedder,
    StoreEmbedder,
    cosine,
    embed,
    mean_vector,
    provider_from_spec,
    rouge_l,
    tokenize,
)
from .synthesis import (
    SamplePool,
    SynthesisResult,
    build_pool,
    consistency_scores,
    load_pool,
    synthesize,
    synthesize_batch,
)
from .rewards import (
    DEFAULT_WEIGHTS,
    RewardBreakdown,
    RewardWeights,
    consistency_passes,
    reward_acc,
    reward_cst,
    reward_fmt_base,
    reward_fmt_cot,
    reward_prc,
    reward_total_base,
    reward_total_cot,
)
from .metrics import (
    EvalReport,
    PredictionPair,
    accuracy_suite,
    bidirectional_score,
    gsb,
    overall_preference,
    position_bias,
)
from .grouping import (
    GroupRewards,
    PairwiseMatrix,
    clamp_weight,
    group_advantages,
    rwr_weight_from_criteria,
    rwr_weight_from_score,
    win_rates,
)
from .config import EngineConfig, load_config

__version__ = "0.1.0"
