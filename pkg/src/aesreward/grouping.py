"""Post-training signals from pairwise judgments.

Reward-weighted-regression sample weights (exponential in the score gap) and
within-group win rates with group-relative advantage normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import BadCriteriaCountError
from .rubric import NUM_CRITERIA, PrefScore

MAX_CRITERIA_WEIGHT_EXPONENT = 15


@dataclass(frozen=True)
class GroupRewards:
    """Rewards for one group of G >= 2 generated candidates."""

    group_id: str
    rewards: tuple[float, ...]

    def __post_init__(self):
        if len(self.rewards) < 2:
            raise ValueError("a group needs at least two rewards")
        if any(not math.isfinite(r) for r in self.rewards):
            raise ValueError("rewards must be finite")


@dataclass(frozen=True)
class PairwiseMatrix:
    """Within-group pairwise outcomes; anti-symmetric by construction.

    ``entries[a][b]`` is the preference of candidate a over candidate b, so
    ``entries[a][b] == -entries[b][a]`` and the diagonal is zero.
    """

    entries: tuple[tuple[PrefScore, ...], ...]

    def __post_init__(self):
        g = len(self.entries)
        if g < 2:
            raise ValueError("a pairwise matrix needs at least two candidates")
        for a, row in enumerate(self.entries):
            if len(row) != g:
                raise ValueError(f"row {a} has length {len(row)}, expected {g}")
            for b, value in enumerate(row):
                if value not in (-1, 0, 1):
                    raise ValueError(f"entry [{a}][{b}] must be -1, 0, or 1")
                if a == b and value != 0:
                    raise ValueError("diagonal entries must be 0")
                if value != -self.entries[b][a]:
                    raise ValueError(
                        f"matrix is not anti-symmetric at [{a}][{b}]"
                    )

    @property
    def size(self) -> int:
        return len(self.entries)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "PairwiseMatrix":
        return cls(entries=tuple(tuple(int(v) for v in row) for row in rows))


def rwr_weight_from_score(s: float) -> float:
    """Sample weight exp(-s) for a bidirectional generated-vs-reference score.

    Larger gaps below the reference yield larger weights; the result is
    unclamped (see ``clamp_weight``).
    """
    return math.exp(-s)


def rwr_weight_from_criteria(scores: Sequence[PrefScore]) -> float:
    """Sample weight exp(sum of the 15 criterion scores)."""
    if len(scores) != NUM_CRITERIA:
        raise BadCriteriaCountError(
            f"expected {NUM_CRITERIA} criterion scores, got {len(scores)}"
        )
    total = 0
    for s in scores:
        if s not in (-1, 0, 1):
            raise ValueError(f"criterion score must be -1, 0, or 1, got {s!r}")
        total += s
    return math.exp(total)


def clamp_weight(w: float) -> float:
    """Optional numeric-safety clamp at exp(15), the criterion-sum maximum."""
    return min(w, math.exp(MAX_CRITERIA_WEIGHT_EXPONENT))


def win_rates(m: PairwiseMatrix) -> list[float]:
    """Per-candidate probability of being preferred within the group.

    Ties credit 0.5, so the rates always sum to G/2.
    """
    g = m.size
    rates = []
    for a in range(g):
        credit = 0.0
        for b in range(g):
            if a == b:
                continue
            outcome = m.entries[a][b]
            credit += 1.0 if outcome == 1 else (0.5 if outcome == 0 else 0.0)
        rates.append(credit / (g - 1))
    return rates


def group_advantages(rewards: Sequence[float], ddof: int = 0) -> list[float]:
    """Group-relative advantages: (r - mean) / std.

    Uses the population standard deviation by default (``ddof=1`` switches to
    the sample estimate).  Constant-reward groups carry no signal and map to
    all-zero advantages instead of dividing by zero.
    """
    if len(rewards) < 2:
        raise ValueError("a group needs at least two rewards")
    n = len(rewards)
    if all(r == rewards[0] for r in rewards):
        return [0.0] * n
    mean = math.fsum(rewards) / n
    variance = math.fsum((r - mean) ** 2 for r in rewards) / (n - ddof)
    if variance == 0.0:
        return [0.0] * n
    std = math.sqrt(variance)
    return [(r - mean) / std for r in rewards]
