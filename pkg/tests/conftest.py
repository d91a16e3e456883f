"""Shared builders and strategies for the test suite."""

from __future__ import annotations

import random

import pytest
from hypothesis import strategies as st

from aesreward.rubric import (
    CRITERIA,
    DIMENSIONS,
    CoTTrace,
    CriterionUnit,
    DimSummary,
    Dimension,
    PreferenceRecord,
    Verdict,
    sign,
)

WORDS = (
    "color", "tone", "shadow", "light", "frame", "subject", "motion", "texture",
    "warm", "cool", "sharp", "soft", "stable", "detail", "contrast", "palette",
    "depth", "angle", "bright", "dark", "smooth", "rich", "clean", "natural",
)


def rationale_text(rng: random.Random, min_words: int = 4, max_words: int = 18) -> str:
    n = rng.randint(min_words, max_words)
    return " ".join(rng.choice(WORDS) for _ in range(n))


def make_trace(scores: dict[int, int] | None = None,
               answer: Verdict | None = None,
               stated: dict[Dimension, DimSummary] | None = None,
               rng: random.Random | None = None) -> CoTTrace:
    """A complete trace; summaries and answer default to consistency."""
    rng = rng or random.Random(0)
    scores = scores or {}
    units = tuple(
        CriterionUnit(
            criterion=c,
            rationale=rationale_text(rng),
            score=scores.get(c.id, 0),
        )
        for c in CRITERIA
    )
    summaries = {}
    for dim in DIMENSIONS:
        total = sum(units[i - 1].score for i in dim.criterion_ids)
        summaries[dim] = DimSummary(stated_sum=total, stated_conclusion=sign(total))
    if stated:
        summaries.update(stated)
    if answer is None:
        answer = Verdict(*(summaries[d].stated_conclusion for d in DIMENSIONS))
    return CoTTrace(units=units, dim_summaries=summaries, answer=answer)


def random_trace(rng: random.Random) -> CoTTrace:
    scores = {c.id: rng.choice((-1, 0, 1)) for c in CRITERIA}
    return make_trace(scores=scores, rng=rng)


def make_record(pair_id: str, label: Verdict, prompt: str = "a quiet scene") -> PreferenceRecord:
    return PreferenceRecord(
        pair_id=pair_id,
        prompt=prompt,
        video_a=f"{pair_id}-a",
        video_b=f"{pair_id}-b",
        expert_label=label,
    )


pref_scores = st.sampled_from((-1, 0, 1))
verdicts = st.builds(Verdict, va=pref_scores, vf=pref_scores, vp=pref_scores)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260809)
