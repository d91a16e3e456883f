import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aesreward import parsing
from aesreward.parsing import parse_base, parse_cot, serialize_trace
from aesreward.rubric import (
    DIMENSIONS,
    CoTTrace,
    DimSummary,
    Dimension,
    Verdict,
    negate_verdict,
)
from conftest import WORDS, make_trace, pref_scores, random_trace, verdicts

DUSK_EXAMPLE_BLOCK = """<think>
[Visual Aesthetics-C2.Time Period]
- The prompt requires dusk. Dusk standard: tones lean golden/orange; the sky gradually transitions into night; cool colors emerge while warm colors fade.
- Video A: meets dusk characteristics; contains orange-gold elements; lighting is dim and gradually transitions toward night.
- Video B: does not meet dusk characteristics; lacks orange-gold elements; sky is overly dark with lost detail.
- Score (A v.s. B): 1 (A is clearly better)

[Summary of Visual Aesthetics: In Visual Aesthetics, the sum over 6 criteria is -1+1+1+1+1+1=4>0. Therefore, the Visual Aesthetics score is positive, and Video A is better than Video B in Visual Aesthetics.]
</think>"""


class TestParseBase:
    def test_mixed_sentence(self):
        report = parse_base(
            "<answer>Video A underperforms Video B in visual aesthetics, while the "
            "two are comparable in visual fidelity and visual plausibility.</answer>"
        )
        assert report.verdict == Verdict(-1, 0, 0)
        assert not report.violations

    def test_uniform_sentence(self):
        report = parse_base(
            "<answer>Video A outperforms Video B in visual aesthetics, visual "
            "fidelity, and visual plausibility.</answer>"
        )
        assert report.verdict == Verdict(1, 1, 1)

    def test_missing_answer(self):
        report = parse_base("no tags here")
        assert report.verdict is None
        assert [v.code for v in report.violations] == [parsing.MISSING_ANSWER]

    def test_unclosed_answer(self):
        report = parse_base("<answer>Video A outperforms Video B in everything")
        assert report.verdict is None
        assert report.violations[0].code == parsing.MISSING_ANSWER

    def test_missing_dimension(self):
        report = parse_base(
            "<answer>Video A outperforms Video B in visual aesthetics and visual "
            "fidelity.</answer>"
        )
        assert report.verdict is None
        assert any(v.code == parsing.MISSING_DIMENSION for v in report.violations)

    def test_conflicting_polarity(self):
        report = parse_base(
            "<answer>Video A outperforms Video B in visual aesthetics, while Video A "
            "underperforms Video B in visual aesthetics; the two are comparable in "
            "visual fidelity and visual plausibility.</answer>"
        )
        assert report.verdict is None
        assert any(v.code == parsing.AMBIGUOUS_DIMENSION for v in report.violations)

    def test_duplicate_same_polarity(self):
        report = parse_base(
            "<answer>Video A outperforms Video B in visual aesthetics and visual "
            "aesthetics, while the two are comparable in visual fidelity and visual "
            "plausibility.</answer>"
        )
        assert report.verdict is None
        assert any(v.code == parsing.DUPLICATE_DIMENSION for v in report.violations)

    @given(verdicts)
    def test_round_trips_every_canonical_sentence(self, v):
        text = f"<answer>{parsing._answer_sentence(v)}</answer>"
        assert parse_base(text).verdict == v

    @given(verdicts)
    def test_verb_flip_negates(self, v):
        text = parsing._answer_sentence(v)
        flipped = (
            text.replace("outperforms", "\x00")
            .replace("underperforms", "outperforms")
            .replace("\x00", "underperforms")
        )
        report = parse_base(f"<answer>{flipped}</answer>")
        assert report.verdict == negate_verdict(v)

    def test_swapped_subject_order_is_not_a_canonical_phrasing(self):
        report = parse_base(
            "<answer>Video B outperforms Video A in visual aesthetics, visual "
            "fidelity, and visual plausibility.</answer>"
        )
        assert report.verdict is None


class TestParseCot:
    def test_dusk_worked_example(self):
        report = parse_cot(DUSK_EXAMPLE_BLOCK)
        assert report.criteria_found == frozenset({2})
        unit = report.units[2]
        assert unit.score == 1
        assert unit.criterion.id == 2
        assert "dusk" in unit.rationale
        summary = report.summaries[Dimension.VA]
        assert summary.stated_sum == 4
        assert summary.stated_conclusion == 1

    def test_full_valid_trace_parses_clean(self):
        t = make_trace(scores={i: (1 if i % 2 else -1) for i in range(1, 16)})
        report = parse_cot(serialize_trace(t))
        assert report.violations == []
        assert report.trace is not None
        assert report.criteria_found == frozenset(range(1, 16))
        assert report.think_before_answer

    def test_answer_before_think(self):
        t = make_trace()
        text = serialize_trace(t)
        think_part = text[: text.index("</think>") + len("</think>")]
        answer_part = text[text.index("<answer>"):]
        report = parse_cot(answer_part + "\n" + think_part)
        assert not report.think_before_answer
        assert report.trace is None
        assert any(v.code == parsing.THINK_AFTER_ANSWER for v in report.violations)

    def test_missing_criterion_detected(self):
        t = make_trace()
        text = serialize_trace(t)
        # Drop the C9 block: tag line plus its four unit lines.
        lines = text.split("\n")
        start = next(i for i, ln in enumerate(lines) if ln.startswith("[Visual Fidelity-C9"))
        del lines[start:start + 5]
        report = parse_cot("\n".join(lines))
        assert 9 not in report.criteria_found
        assert report.trace is None
        assert any(
            v.code == parsing.MISSING_CRITERION and v.location == "C9"
            for v in report.violations
        )
        assert len(report.criteria_found) == 14

    def test_bad_score_line(self):
        t = make_trace()
        text = serialize_trace(t).replace("Score (A v.s. B): 0", "Score: 0", 1)
        report = parse_cot(text)
        assert any(v.code == parsing.BAD_SCORE_LINE for v in report.violations)
        assert report.trace is None

    def test_score_value_out_of_range(self):
        t = make_trace()
        text = serialize_trace(t).replace("Score (A v.s. B): 0", "Score (A v.s. B): 2", 1)
        report = parse_cot(text)
        assert any(v.code == parsing.BAD_SCORE_LINE for v in report.violations)

    def test_wrong_line_count_is_soft(self):
        t = make_trace()
        text = serialize_trace(t).replace(
            "[Visual Aesthetics-C2.Time Periods]",
            "[Visual Aesthetics-C2.Time Periods]\n- an extra stray line",
            1,
        )
        report = parse_cot(text)
        assert any(
            v.code == parsing.WRONG_LINE_COUNT and v.location == "C2"
            for v in report.violations
        )
        # the unit still parses, so the trace survives
        assert report.trace is not None

    def test_duplicate_criterion(self):
        t = make_trace()
        text = serialize_trace(t)
        block_start = text.index("[Visual Aesthetics-C3")
        block_end = text.index("[Visual Aesthetics-C4")
        dup = text[:block_end] + text[block_start:block_end] + text[block_end:]
        report = parse_cot(dup)
        assert any(v.code == parsing.DUPLICATE_CRITERION for v in report.violations)
        assert 3 in report.criteria_found

    def test_out_of_order_is_soft(self):
        t = make_trace()
        text = serialize_trace(t)
        c1_start = text.index("[Visual Aesthetics-C1")
        c2_start = text.index("[Visual Aesthetics-C2")
        c3_start = text.index("[Visual Aesthetics-C3")
        swapped = (
            text[:c1_start]
            + text[c2_start:c3_start]
            + text[c1_start:c2_start]
            + text[c3_start:]
        )
        report = parse_cot(swapped)
        assert any(v.code == parsing.OUT_OF_ORDER for v in report.violations)
        assert report.trace is not None
        assert [u.criterion.id for u in report.trace.units] == list(range(1, 16))

    def test_soft_wrapped_lines_are_rejoined(self):
        t = make_trace()
        text = serialize_trace(t)
        # Wrap a rationale line across two physical lines without a hyphen.
        target = t.unit(1).rationale.split()
        needle = " ".join(target[:2])
        wrapped = text.replace(needle, target[0] + "\n  " + target[1], 1)
        report = parse_cot(wrapped)
        assert report.trace is not None
        assert report.trace.unit(1).rationale == t.unit(1).rationale

    def test_criterion_alias_accepted(self):
        t = make_trace()
        text = serialize_trace(t).replace("C5.Light intensity", "C5.Light Intensity")
        report = parse_cot(text)
        assert report.trace is not None
        assert not any(v.code == parsing.BAD_CRITERION_TAG for v in report.violations)

    def test_unknown_criterion_name_flagged(self):
        t = make_trace()
        text = serialize_trace(t).replace("C5.Light intensity", "C5.Brightness")
        report = parse_cot(text)
        assert any(v.code == parsing.BAD_CRITERION_TAG for v in report.violations)
        assert 5 in report.criteria_found

    def test_missing_summary(self):
        t = make_trace()
        text = serialize_trace(t)
        lines = [ln for ln in text.split("\n") if not ln.startswith("[Summary of Visual Fidelity")]
        report = parse_cot("\n".join(lines))
        assert any(
            v.code == parsing.MISSING_SUMMARY and v.location == "summary:VF"
            for v in report.violations
        )
        assert report.trace is None

    def test_summary_wrapped_across_physical_lines(self):
        t = make_trace(scores={1: 1, 2: 1})
        text = serialize_trace(t)
        start = text.index("[Summary of Visual Aesthetics")
        cut = text.index("Therefore", start)
        wrapped = text[:cut] + "\n  " + text[cut:]
        report = parse_cot(wrapped)
        assert report.trace is not None
        assert report.trace.dim_summaries == t.dim_summaries

    def test_tag_and_score_whitespace_tolerance(self):
        t = make_trace(scores={3: -1})
        text = serialize_trace(t)
        text = text.replace(
            "[Visual Aesthetics-C3.Lighting Style]",
            "  [ Visual Aesthetics - C3 . Lighting Style ]  ",
        )
        text = text.replace("Score (A v.s. B): -1", "Score (A v.s. B):-1")
        report = parse_cot(text)
        assert report.trace is not None
        assert report.trace.unit(3).score == -1
        assert not any(v.code == parsing.BAD_CRITERION_TAG for v in report.violations)

    def test_totality_on_junk(self):
        for raw in ["", "<think>", "<answer>", "\x00\x01", "[Visual-C1]", "<think></think>"]:
            report = parse_cot(raw)
            assert report.trace is None
            assert report.criteria_found <= frozenset(range(1, 16))


trace_strategy = st.builds(
    lambda scores, stated_sums, conclusions, answer, seed: _build_trace(
        scores, stated_sums, conclusions, answer, seed
    ),
    scores=st.lists(pref_scores, min_size=15, max_size=15),
    stated_sums=st.lists(st.integers(-6, 6), min_size=3, max_size=3),
    conclusions=st.lists(pref_scores, min_size=3, max_size=3),
    answer=verdicts,
    seed=st.integers(0, 2**20),
)


def _build_trace(scores, stated_sums, conclusions, answer, seed):
    stated = {
        dim: DimSummary(stated_sum=stated_sums[k], stated_conclusion=conclusions[k])
        for k, dim in enumerate(DIMENSIONS)
    }
    return make_trace(
        scores={i + 1: s for i, s in enumerate(scores)},
        stated=stated,
        answer=answer,
        rng=random.Random(seed),
    )


@given(trace_strategy)
@settings(max_examples=150, deadline=None)
def test_serialize_parse_round_trip(t: CoTTrace):
    report = parse_cot(serialize_trace(t))
    assert report.violations == []
    assert report.trace is not None
    assert report.trace.units == t.units
    assert report.trace.dim_summaries == t.dim_summaries
    assert report.trace.answer == t.answer


@given(st.text(max_size=400))
@settings(max_examples=300, deadline=None)
def test_parse_cot_never_raises(raw):
    report = parse_cot(raw)
    assert report.criteria_found <= frozenset(range(1, 16))
    has_missing = any(v.code == parsing.MISSING_CRITERION for v in report.violations)
    assert (len(report.criteria_found) == 15) == (not has_missing)


def test_random_traces_round_trip(rng):
    for _ in range(25):
        t = random_trace(rng)
        report = parse_cot(serialize_trace(t))
        assert report.trace == t
        assert report.violations == []
