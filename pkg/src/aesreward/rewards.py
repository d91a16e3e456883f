"""Verifiable rewards for pairwise aesthetic judgments.

Four terms are computed from parsed outputs: format (protocol compliance),
accuracy (agreement with expert labels), consistency (reasoning supports the
stated conclusions), and process (similarity of the reasoning to a reference
trace).  Totals combine them with configurable weights; the defaults are
acc 1, fmt 0.1, cst 0.5, prc 1 with dimension weights (0.3, 0.2, 0.5).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .parsing import ParseReport
from .rubric import CoTTrace, DIMENSIONS, Dimension, Verdict, sign
from .similarity import EmbeddingProvider, cosine, embed, rouge_l
from .errors import ZeroNormError

VP_PARTIAL_WEIGHT = 0.5


@dataclass(frozen=True)
class RewardWeights:
    """Reward-term coefficients and per-dimension accuracy weights."""

    lambda_acc: float = 1.0
    lambda_fmt: float = 0.1
    lambda_cst: float = 0.5
    lambda_prc: float = 1.0
    dim_weights: tuple[float, float, float] = (0.3, 0.2, 0.5)

    def __post_init__(self):
        for name in ("lambda_acc", "lambda_fmt", "lambda_cst", "lambda_prc"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if any(w <= 0 for w in self.dim_weights):
            raise ValueError("dimension weights must be positive")
        if abs(sum(self.dim_weights) - 1.0) > 1e-9:
            raise ValueError("dimension weights must sum to 1")

    def dim_weight(self, dim: Dimension) -> float:
        return self.dim_weights[DIMENSIONS.index(dim)]

    def to_json(self) -> dict:
        return {
            "lambda_acc": self.lambda_acc,
            "lambda_fmt": self.lambda_fmt,
            "lambda_cst": self.lambda_cst,
            "lambda_prc": self.lambda_prc,
            "dim_weights": list(self.dim_weights),
        }


DEFAULT_WEIGHTS = RewardWeights()


@dataclass
class RewardBreakdown:
    """Per-term reward values plus the weighted total.

    ``r_cst``/``r_prc`` are None for verdict-only outputs and when no
    reference trace was supplied; absent terms contribute nothing to the
    total.  ``acc_raw`` is the unweighted 0..3 match count, kept for
    diagnostics.  ``notes`` flags fallbacks such as MISSING_VERDICT.
    """

    r_fmt: float
    r_acc: float
    total: float
    r_cst: float | None = None
    r_prc: float | None = None
    acc_raw: int | None = None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "r_fmt": self.r_fmt,
            "r_acc": self.r_acc,
            "r_cst": self.r_cst,
            "r_prc": self.r_prc,
            "acc_raw": self.acc_raw,
            "total": self.total,
            "notes": self.notes,
        }


def reward_fmt_base(report: ParseReport) -> float:
    """1 iff the answer tag is present and all three dimensions were stated
    exactly once; else 0."""
    return 1.0 if report.verdict is not None else 0.0


def accuracy_raw(pred: Verdict, gt: Verdict) -> int:
    """Unweighted match count over the three dimensions, in 0..3."""
    return sum(int(pred.component(d) == gt.component(d)) for d in DIMENSIONS)


def reward_acc(pred: Verdict, gt: Verdict, w: RewardWeights = DEFAULT_WEIGHTS) -> float:
    """Weighted sum of per-dimension match signals mapped to {-1, +1}.

    A tie prediction against a tie label counts as a match: the indicator is
    over the three-way labels, not a binarized preference.
    """
    total = 0.0
    for dim in DIMENSIONS:
        matched = pred.component(dim) == gt.component(dim)
        total += w.dim_weight(dim) * (2.0 * matched - 1.0)
    return total


def reward_fmt_cot(report: ParseReport) -> float:
    """Hierarchical format reward for reasoned outputs.

    A broken block structure (missing or misordered think/answer) zeroes the
    reward outright; otherwise the count of detected criteria is mapped
    affinely from 0..15 onto [-1, 1].
    """
    if not report.think_before_answer:
        return 0.0
    k = len(report.criteria_found)
    return 2.0 * (k / 15.0) - 1.0


def consistency_passes(trace: CoTTrace) -> dict[Dimension, bool]:
    """Per-dimension internal+external consistency checks.

    Internal: the sign of the criterion-score sum equals both the summary's
    stated conclusion and the sign of its stated sum.  External: the stated
    conclusion equals the answer's component for that dimension.
    """
    passes = {}
    for dim, scores in trace.scores_by_dimension().items():
        summary = trace.dim_summaries[dim]
        actual_sign = sign(sum(scores))
        internal = (actual_sign == summary.stated_conclusion
                    and actual_sign == sign(summary.stated_sum))
        external = summary.stated_conclusion == trace.answer.component(dim)
        passes[dim] = internal and external
    return passes


def reward_cst(trace: CoTTrace) -> float:
    """Mean dimension-consistency score mapped affinely onto [-1, 1]."""
    passes = consistency_passes(trace)
    return 2.0 * (sum(passes.values()) / 3.0) - 1.0


def _process_weight(student_score: int, teacher_score: int, dim: Dimension) -> float:
    if student_score == teacher_score:
        return 1.0
    if dim is Dimension.VP and student_score != 0 and teacher_score != 0:
        # Asymmetric shaping: a decisive-but-wrong call on a VP criterion
        # keeps partial credit so predictions do not collapse to all zeros.
        return VP_PARTIAL_WEIGHT
    return 0.0


def reward_prc(student: CoTTrace, teacher: CoTTrace,
               provider: EmbeddingProvider) -> float:
    """Mean per-criterion similarity to the reference trace, in [-1, 1].

    Each criterion contributes weight * (cosine + ROUGE-L); the mean over the
    15 criteria is mapped affinely from its natural [0, 2] range onto
    [-1, 1] and clamped (providers may return vectors with negative
    cosines).  Zero-norm embeddings contribute 0 cosine.
    """
    texts = [u.rationale for u in student.units] + [u.rationale for u in teacher.units]
    vectors = embed(provider, texts)
    student_vecs, teacher_vecs = vectors[:15], vectors[15:]

    raw_sum = 0.0
    for idx, (s_unit, t_unit) in enumerate(zip(student.units, teacher.units)):
        weight = _process_weight(s_unit.score, t_unit.score, s_unit.criterion.dimension)
        if weight == 0.0:
            continue
        try:
            cos = cosine(student_vecs[idx], teacher_vecs[idx])
        except ZeroNormError:
            cos = 0.0
        raw_sum += weight * (cos + rouge_l(s_unit.rationale, t_unit.rationale))
    value = raw_sum / 15.0 - 1.0
    return max(-1.0, min(1.0, value))


def reward_total_base(report: ParseReport, gt: Verdict,
                      w: RewardWeights = DEFAULT_WEIGHTS) -> RewardBreakdown:
    """Combined reward for a verdict-only output: acc + lambda_fmt * fmt.

    An unparseable verdict takes the worst-case accuracy of -1 so that
    malformed outputs can never outrank well-formed ones.
    """
    r_fmt = reward_fmt_base(report)
    notes = []
    if report.verdict is not None:
        r_acc = reward_acc(report.verdict, gt, w)
        acc_raw = accuracy_raw(report.verdict, gt)
    else:
        r_acc = -1.0
        acc_raw = None
        notes.append("MISSING_VERDICT")
    total = w.lambda_acc * r_acc + w.lambda_fmt * r_fmt
    return RewardBreakdown(r_fmt=r_fmt, r_acc=r_acc, acc_raw=acc_raw,
                           total=total, notes=notes)


def reward_total_cot(report: ParseReport, gt: Verdict,
                     teacher: CoTTrace | None,
                     provider: EmbeddingProvider,
                     w: RewardWeights = DEFAULT_WEIGHTS) -> RewardBreakdown:
    """Combined reward for a reasoned output.

    Terms that need a full trace (consistency, process) fall back to the
    worst case -1 when the trace is absent.  Without a reference trace the
    process term is omitted from the total and flagged in ``notes``.
    """
    r_fmt = reward_fmt_cot(report)
    notes = []
    if report.verdict is not None:
        r_acc = reward_acc(report.verdict, gt, w)
        acc_raw = accuracy_raw(report.verdict, gt)
    else:
        r_acc = -1.0
        acc_raw = None
        notes.append("MISSING_VERDICT")

    if report.trace is not None:
        r_cst = reward_cst(report.trace)
    else:
        r_cst = -1.0
        notes.append("MISSING_TRACE")

    r_prc: float | None
    if teacher is None:
        r_prc = None
        notes.append("NO_TEACHER")
    elif report.trace is not None:
        r_prc = reward_prc(report.trace, teacher, provider)
    else:
        r_prc = -1.0

    total = w.lambda_acc * r_acc + w.lambda_fmt * r_fmt + w.lambda_cst * r_cst
    if r_prc is not None:
        total += w.lambda_prc * r_prc
    return RewardBreakdown(r_fmt=r_fmt, r_acc=r_acc, r_cst=r_cst, r_prc=r_prc,
                           acc_raw=acc_raw, total=total, notes=notes)
