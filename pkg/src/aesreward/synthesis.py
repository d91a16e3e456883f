"""Self-consistency trace synthesis via constrained exhaustive selection.

Given M sampled reasoned traces for one video pair, pick one sampled unit
per criterion so that (a) within every dimension the selected score sum has
the sign the expert label demands (strictly positive for A-better, strictly
negative for B-better, exactly zero for a tie) and (b) the total
consistency score of the picked units is maximal.

The objective and constraints separate over dimensions, so each dimension is
solved independently by enumerating all M^k per-criterion choices (at most
4^6 = 4096 for M = 4).  Dimensions with no feasible combination fall back to
the unconstrained argmax and are flagged rather than dropped.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import PoolValidationError, ZeroNormError
from .parsing import parse_cot
from .rubric import (
    DIMENSIONS,
    NUM_CRITERIA,
    CoTTrace,
    DimSummary,
    Dimension,
    PreferenceRecord,
    sign,
)
from .similarity import EmbeddingProvider, cosine, embed, mean_vector, provider_from_spec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplePool:
    """M complete sampled traces for one pair plus their rationale embeddings.

    ``embeddings[j][i]`` is the vector for sample j's unit on criterion i+1;
    the grid must cover exactly M x 15.
    """

    record: PreferenceRecord
    samples: tuple[CoTTrace, ...]
    embeddings: tuple[tuple[Sequence[float], ...], ...]

    def __post_init__(self):
        if not self.samples:
            raise PoolValidationError(f"pool {self.record.pair_id}: no samples")
        if len(self.embeddings) != len(self.samples) or any(
            len(row) != NUM_CRITERIA for row in self.embeddings
        ):
            raise PoolValidationError(
                f"pool {self.record.pair_id}: embedding grid must be "
                f"{len(self.samples)} x {NUM_CRITERIA}"
            )

    @property
    def size(self) -> int:
        return len(self.samples)


def build_pool(record: PreferenceRecord, samples: Sequence[CoTTrace],
               provider: EmbeddingProvider) -> SamplePool:
    """Embed every sampled rationale and assemble the pool."""
    if not samples:
        raise PoolValidationError(f"pool {record.pair_id}: no samples")
    texts = [unit.rationale for trace in samples for unit in trace.units]
    vectors = embed(provider, texts)
    rows = tuple(
        tuple(vectors[j * NUM_CRITERIA + i] for i in range(NUM_CRITERIA))
        for j in range(len(samples))
    )
    return SamplePool(record=record, samples=tuple(samples), embeddings=rows)


def load_pool(obj: Mapping, provider: EmbeddingProvider | None = None) -> SamplePool:
    """Build a pool from one JSONL record: raw sample texts plus a provider.

    Every sample must parse into a complete trace; pools with defective
    samples are rejected here so synthesis can assume full grids.
    """
    record = PreferenceRecord.from_json(obj["record"])
    spec = obj.get("embedding_store")
    if spec is not None:
        provider = provider_from_spec(str(spec))
    if provider is None:
        raise PoolValidationError(
            f"pool {record.pair_id}: no embedding provider configured"
        )
    raw_samples = obj.get("samples", [])
    if not raw_samples:
        raise PoolValidationError(f"pool {record.pair_id}: no samples")
    traces = []
    for j, raw in enumerate(raw_samples):
        report = parse_cot(str(raw))
        if report.trace is None:
            codes = sorted({v.code for v in report.violations})
            raise PoolValidationError(
                f"pool {record.pair_id}: sample {j} is not a complete trace "
                f"(violations: {', '.join(codes)})"
            )
        traces.append(report.trace)
    return build_pool(record, traces, provider)


def consistency_scores(pool: SamplePool) -> list[list[float]]:
    """Per-cell cosine of each sample's rationale vector to the criterion mean.

    Zero-norm cells score -1 (the worst) with a logged warning; the mean is
    taken over the M samples of the same criterion.
    """
    m = pool.size
    scores = [[0.0] * NUM_CRITERIA for _ in range(m)]
    for i in range(NUM_CRITERIA):
        column = [pool.embeddings[j][i] for j in range(m)]
        centroid = mean_vector(column)
        for j in range(m):
            try:
                scores[j][i] = cosine(column[j], centroid)
            except ZeroNormError:
                logger.warning(
                    "pool %s: zero-norm embedding for sample %d criterion C%d; "
                    "scoring it -1", pool.record.pair_id, j, i + 1,
                )
                scores[j][i] = -1.0
    return scores


def _satisfies(label: int, score_sum: int) -> bool:
    if label > 0:
        return score_sum > 0
    if label < 0:
        return score_sum < 0
    return score_sum == 0


@dataclass(frozen=True)
class SynthesisResult:
    """A selection per criterion, the rebuilt trace, and feasibility flags."""

    selection: tuple[int, ...]
    synthesized: CoTTrace
    objective: float
    feasible_per_dimension: Mapping[Dimension, bool]

    @property
    def fully_feasible(self) -> bool:
        return all(self.feasible_per_dimension.values())

    def to_json(self) -> dict:
        return {
            "selection": list(self.selection),
            "objective": self.objective,
            "feasible_per_dimension": {
                dim.value: self.feasible_per_dimension[dim] for dim in DIMENSIONS
            },
            "synthesized": self.synthesized.to_json(),
        }


def _solve_dimension(pool: SamplePool, scores: list[list[float]],
                     dim: Dimension) -> tuple[tuple[int, ...], bool]:
    """Best per-criterion sample choice for one dimension.

    Enumeration runs in lexicographic order over sample indices with a
    strict improvement rule, so ties break to the smallest index tuple.
    """
    ids = dim.criterion_ids
    label = pool.record.expert_label.component(dim)
    unit_scores = [
        [pool.samples[j].unit(i).score for i in ids] for j in range(pool.size)
    ]
    cell = [[scores[j][i - 1] for i in ids] for j in range(pool.size)]

    best: tuple[int, ...] | None = None
    best_value = 0.0
    fallback: tuple[int, ...] | None = None
    fallback_value = 0.0
    for combo in itertools.product(range(pool.size), repeat=len(ids)):
        value = sum(cell[j][k] for k, j in enumerate(combo))
        if fallback is None or value > fallback_value:
            fallback, fallback_value = combo, value
        score_sum = sum(unit_scores[j][k] for k, j in enumerate(combo))
        if not _satisfies(label, score_sum):
            continue
        if best is None or value > best_value:
            best, best_value = combo, value
    if best is not None:
        return best, True
    # No combination matches the expert label: fall back to the
    # unconstrained maximum under the same tie-break.
    return fallback, False


def synthesize(pool: SamplePool) -> SynthesisResult:
    """Select, per criterion, the sampled unit maximizing total consistency
    subject to the expert label's per-dimension sign constraints."""
    scores = consistency_scores(pool)
    choice: dict[int, int] = {}
    feasible: dict[Dimension, bool] = {}
    for dim in DIMENSIONS:
        combo, ok = _solve_dimension(pool, scores, dim)
        feasible[dim] = ok
        for k, cid in enumerate(dim.criterion_ids):
            choice[cid] = combo[k]

    selection = tuple(choice[cid] for cid in range(1, NUM_CRITERIA + 1))
    units = tuple(
        pool.samples[selection[cid - 1]].unit(cid)
        for cid in range(1, NUM_CRITERIA + 1)
    )
    summaries = {}
    for dim in DIMENSIONS:
        stated_sum = sum(units[cid - 1].score for cid in dim.criterion_ids)
        summaries[dim] = DimSummary(stated_sum=stated_sum,
                                    stated_conclusion=sign(stated_sum))
    trace = CoTTrace(units=units, dim_summaries=summaries,
                     answer=pool.record.expert_label)
    objective = sum(
        scores[selection[cid - 1]][cid - 1] for cid in range(1, NUM_CRITERIA + 1)
    )
    return SynthesisResult(selection=selection, synthesized=trace,
                           objective=objective, feasible_per_dimension=feasible)


@dataclass(frozen=True)
class BatchSummary:
    n_pools: int
    n_fully_feasible: int
    n_partially_infeasible: int

    def to_json(self) -> dict:
        return {
            "n_pools": self.n_pools,
            "n_fully_feasible": self.n_fully_feasible,
            "n_partially_infeasible": self.n_partially_infeasible,
        }


def synthesize_batch(pools: Sequence[SamplePool]) -> tuple[list[SynthesisResult], BatchSummary]:
    """Synthesize each pool independently and tally feasibility."""
    results = [synthesize(pool) for pool in pools]
    feasible = sum(r.fully_feasible for r in results)
    summary = BatchSummary(
        n_pools=len(results),
        n_fully_feasible=feasible,
        n_partially_infeasible=len(results) - feasible,
    )
    return results, summary
