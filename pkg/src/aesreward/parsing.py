"""Strict rule-based parsing of pairwise aesthetic judgments.

Two output protocols are supported:

* the verdict-only protocol: a single comparison sentence wrapped in
  ``<answer>`` tags, one clause per dimension using one of three fixed
  phrasings (outperforms / underperforms / comparable);
* the reasoned protocol: a ``<think>`` block with one tagged four-line unit
  per criterion plus per-dimension summary lines, followed by the same
  ``<answer>`` sentence.

Both parsers are total: they never raise on arbitrary text and instead
accumulate violations with stable codes.  ``serialize_trace`` is the inverse
of ``parse_cot`` on well-formed traces.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .rubric import (
    CRITERIA,
    DIMENSIONS,
    NUM_CRITERIA,
    CoTTrace,
    Criterion,
    CriterionUnit,
    DimSummary,
    Dimension,
    Verdict,
    criterion,
    dimension_from_name,
)

# Violation codes are wire contract; add, never rename.
MISSING_ANSWER = "MISSING_ANSWER"
MISSING_THINK = "MISSING_THINK"
THINK_AFTER_ANSWER = "THINK_AFTER_ANSWER"
MISSING_DIMENSION = "MISSING_DIMENSION"
DUPLICATE_DIMENSION = "DUPLICATE_DIMENSION"
AMBIGUOUS_DIMENSION = "AMBIGUOUS_DIMENSION"
MISSING_CRITERION = "MISSING_CRITERION"
DUPLICATE_CRITERION = "DUPLICATE_CRITERION"
BAD_CRITERION_TAG = "BAD_CRITERION_TAG"
BAD_SCORE_LINE = "BAD_SCORE_LINE"
WRONG_LINE_COUNT = "WRONG_LINE_COUNT"
EMPTY_RATIONALE = "EMPTY_RATIONALE"
MISSING_SUMMARY = "MISSING_SUMMARY"
BAD_SUMMARY = "BAD_SUMMARY"
OUT_OF_ORDER = "OUT_OF_ORDER"


@dataclass(frozen=True)
class Violation:
    code: str
    location: str
    message: str

    def to_json(self) -> dict:
        return {"code": self.code, "location": self.location, "message": self.message}


@dataclass
class ParseReport:
    """Everything a parse recovered, valid or not.

    ``trace`` is set only when the text forms a complete reasoned output;
    ``units`` and ``summaries`` also expose partial extractions so callers
    can inspect fragments of malformed text.
    """

    trace: CoTTrace | None = None
    verdict: Verdict | None = None
    think_before_answer: bool = False
    criteria_found: frozenset[int] = frozenset()
    violations: list[Violation] = field(default_factory=list)
    units: dict[int, CriterionUnit] = field(default_factory=dict)
    summaries: dict[Dimension, DimSummary] = field(default_factory=dict)

    def add(self, code: str, location: str, message: str) -> None:
        self.violations.append(Violation(code, location, message))

    def to_json(self) -> dict:
        return {
            "trace": self.trace.to_json() if self.trace else None,
            "verdict": self.verdict.to_json() if self.verdict else None,
            "think_before_answer": self.think_before_answer,
            "criteria_found": sorted(self.criteria_found),
            "violations": [v.to_json() for v in self.violations],
        }


_ANSWER_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)
_THINK_RE = re.compile(r"<think>(.*?)</think>", re.DOTALL)

# Answer-sentence cues, matched on lower-cased whitespace-collapsed text.
_CUES = (
    (re.compile(r"video a outperforms video b"), 1),
    (re.compile(r"video a underperforms video b"), -1),
    (re.compile(r"comparable"), 0),
)
_DIM_KEYWORDS = {
    Dimension.VA: "visual aesthetics",
    Dimension.VF: "visual fidelity",
    Dimension.VP: "visual plausibility",
}


def _parse_answer_sentence(text: str, report: ParseReport) -> Verdict | None:
    """Map the one-sentence comparison to a verdict, or record why not.

    Each dimension keyword takes the polarity of the nearest cue phrase
    before it; a dimension must be resolved exactly once.
    """
    flat = re.sub(r"\s+", " ", text.lower())
    cue_hits = []
    for pattern, score in _CUES:
        for match in pattern.finditer(flat):
            cue_hits.append((match.start(), score))
    cue_hits.sort()

    resolved: dict[Dimension, list[int]] = {dim: [] for dim in DIMENSIONS}
    for dim, keyword in _DIM_KEYWORDS.items():
        for match in re.finditer(re.escape(keyword), flat):
            preceding = [score for pos, score in cue_hits if pos < match.start()]
            if preceding:
                resolved[dim].append(preceding[-1])

    scores: dict[Dimension, int] = {}
    ok = True
    for dim in DIMENSIONS:
        hits = resolved[dim]
        if not hits:
            report.add(MISSING_DIMENSION, "answer",
                       f"no {dim.full_name} comparison found")
            ok = False
        elif len(set(hits)) > 1:
            report.add(AMBIGUOUS_DIMENSION, "answer",
                       f"{dim.full_name} mentioned with conflicting polarity")
            ok = False
        elif len(hits) > 1:
            report.add(DUPLICATE_DIMENSION, "answer",
                       f"{dim.full_name} stated more than once")
            ok = False
        else:
            scores[dim] = hits[0]
    if not ok:
        return None
    return Verdict(va=scores[Dimension.VA], vf=scores[Dimension.VF],
                   vp=scores[Dimension.VP])


def parse_base(raw: str) -> ParseReport:
    """Parse a verdict-only output: extract and interpret the answer sentence."""
    report = ParseReport()
    match = _ANSWER_RE.search(raw)
    if match is None:
        report.add(MISSING_ANSWER, "answer", "no <answer>...</answer> block found")
        return report
    report.verdict = _parse_answer_sentence(match.group(1), report)
    return report


# --- reasoned-protocol machinery ------------------------------------------

_TAG_LINE_RE = re.compile(
    r"^\s*\[\s*(?P<dim>Visual Aesthetics|Visual Fidelity|Visual Plausibility)"
    r"\s*-\s*C(?P<id>\d{1,2})\s*\.\s*(?P<name>[^\]]+?)\s*\]\s*$"
)
_SUMMARY_START_RE = re.compile(
    r"^\s*\[\s*Summary of (?P<dim>Visual Aesthetics|Visual Fidelity|Visual Plausibility)\b"
)
_SCORE_LINE_RE = re.compile(
    r"^Score\s*\(\s*A\s*v\.s\.\s*B\s*\)\s*:\s*(?P<value>-1|0|1)(?!\d)\s*(?P<tail>.*)$"
)
_STATED_SUM_RE = re.compile(r"=\s*(-?\d+)")
_COMPARATOR_RE = re.compile(r"=\s*-?\d+\s*([<>])\s*0")

_NAME_TO_CRITERION: dict[str, Criterion] = {}
for _c in CRITERIA:
    for _name in _c.accepted_names:
        _NAME_TO_CRITERION[_name] = _c


def _parse_summary_text(content: str) -> tuple[int, int] | None:
    """Extract (stated_sum, stated_conclusion) from summary text, or None.

    The conclusion is read from the prose first ("Video A is better ...",
    "comparable", "score is positive"), falling back to the comparator after
    the arithmetic ("=4>0").
    """
    sum_match = _STATED_SUM_RE.search(content)
    if sum_match is None:
        return None
    stated_sum = int(sum_match.group(1))

    lowered = re.sub(r"\s+", " ", content.lower())
    conclusion: int | None = None
    if "video a is better than video b" in lowered:
        conclusion = 1
    elif "video b is better than video a" in lowered:
        conclusion = -1
    elif "comparable" in lowered:
        conclusion = 0
    elif "score is positive" in lowered:
        conclusion = 1
    elif "score is negative" in lowered:
        conclusion = -1
    elif "score is zero" in lowered:
        conclusion = 0
    else:
        cmp_match = _COMPARATOR_RE.search(content)
        if cmp_match is not None:
            conclusion = 1 if cmp_match.group(1) == ">" else -1
    if conclusion is None:
        return None
    return stated_sum, conclusion


def _logical_lines(physical: list[str]) -> list[str]:
    """Group unit lines into hyphen-led logical lines.

    A leading hyphen starts a new logical line; lines without one continue
    the current logical line (soft wrap).  Leading text before the first
    hyphen forms its own logical line.
    """
    logical: list[str] = []
    for line in physical:
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("-") and not re.match(r"^-\d", stripped):
            content = stripped[1:].strip()
            logical.append(content)
        elif logical:
            logical[-1] = (logical[-1] + " " + stripped).strip()
        else:
            logical.append(stripped)
    return logical


def _parse_unit(crit: Criterion, physical: list[str], report: ParseReport) -> None:
    location = f"C{crit.id}"
    lines = _logical_lines(physical)
    if len(lines) != 4:
        report.add(WRONG_LINE_COUNT, location,
                   f"expected exactly four lines, found {len(lines)}")

    score: int | None = None
    rationale_parts: list[str] = []
    saw_score_attempt = False
    for line in lines:
        score_match = _SCORE_LINE_RE.match(line)
        if score_match is not None and score is None:
            score = int(score_match.group("value"))
            continue
        if line.startswith("Score") and score is None:
            saw_score_attempt = True
            continue
        if len(rationale_parts) < 3 and line:
            rationale_parts.append(line)

    if score is None:
        detail = "malformed score line" if saw_score_attempt else "no score line found"
        report.add(BAD_SCORE_LINE, location, detail)
        return
    rationale = " ".join(rationale_parts)
    if not rationale.strip():
        report.add(EMPTY_RATIONALE, location, "no rationale text before the score line")
        return
    report.units[crit.id] = CriterionUnit(criterion=crit, rationale=rationale, score=score)


def _scan_think(think_text: str, report: ParseReport) -> list[int]:
    """Walk think-block lines, extracting units and summaries.

    Returns criterion ids in order of appearance (including duplicates).
    """
    lines = think_text.split("\n")
    seen_order: list[int] = []
    current: tuple[Criterion, list[str]] | None = None
    idx = 0

    def flush():
        nonlocal current
        if current is not None:
            crit, body = current
            if crit.id not in report.units:
                _parse_unit(crit, body, report)
            current = None

    while idx < len(lines):
        line = lines[idx]
        tag = _TAG_LINE_RE.match(line)
        if tag is not None:
            flush()
            cid = int(tag.group("id"))
            if not 1 <= cid <= NUM_CRITERIA:
                report.add(BAD_CRITERION_TAG, f"C{cid}",
                           f"criterion id out of range in tag {line.strip()!r}")
                idx += 1
                continue
            crit = criterion(cid)
            name = tag.group("name")
            if name not in crit.accepted_names:
                report.add(BAD_CRITERION_TAG, f"C{cid}",
                           f"criterion name {name!r} does not match {crit.name!r}")
            if dimension_from_name(tag.group("dim")) is not crit.dimension:
                report.add(BAD_CRITERION_TAG, f"C{cid}",
                           f"tag names dimension {tag.group('dim')!r} but C{cid} "
                           f"belongs to {crit.dimension.full_name}")
            if cid in seen_order:
                report.add(DUPLICATE_CRITERION, f"C{cid}",
                           "criterion tagged more than once")
            seen_order.append(cid)
            current = (crit, [])
            idx += 1
            continue

        summary_start = _SUMMARY_START_RE.match(line)
        if summary_start is not None:
            flush()
            dim = dimension_from_name(summary_start.group("dim"))
            chunk = [line]
            while "]" not in chunk[-1] and idx + 1 < len(lines):
                idx += 1
                chunk.append(lines[idx])
            content = " ".join(part.strip() for part in chunk)
            parsed = _parse_summary_text(content)
            if parsed is None:
                report.add(BAD_SUMMARY, f"summary:{dim.value}",
                           "could not extract stated sum and conclusion")
            elif dim in report.summaries:
                report.add(BAD_SUMMARY, f"summary:{dim.value}",
                           "dimension summarized more than once; first kept")
            else:
                stated_sum, conclusion = parsed
                report.summaries[dim] = DimSummary(stated_sum=stated_sum,
                                                   stated_conclusion=conclusion)
            idx += 1
            continue

        if current is not None:
            current[1].append(line)
        idx += 1
    flush()
    return seen_order


def parse_cot(raw: str) -> ParseReport:
    """Parse a reasoned output into a full trace, or report every violation.

    ``criteria_found`` records each detected criterion tag even when its unit
    is malformed, so format rewards can count partial compliance.
    """
    report = ParseReport()
    think = _THINK_RE.search(raw)
    answer = _ANSWER_RE.search(raw)
    if think is None:
        report.add(MISSING_THINK, "think", "no <think>...</think> block found")
    if answer is None:
        report.add(MISSING_ANSWER, "answer", "no <answer>...</answer> block found")
    if think is not None and answer is not None:
        if answer.start() < think.start():
            report.add(THINK_AFTER_ANSWER, "think",
                       "<answer> block appears before <think>")
        else:
            report.think_before_answer = True

    seen_order: list[int] = []
    if think is not None:
        seen_order = _scan_think(think.group(1), report)

    report.criteria_found = frozenset(seen_order)
    for cid in range(1, NUM_CRITERIA + 1):
        if cid not in report.criteria_found:
            report.add(MISSING_CRITERION, f"C{cid}", "criterion tag not found")
    unique_order = list(dict.fromkeys(seen_order))
    if len(report.criteria_found) == NUM_CRITERIA and unique_order != sorted(unique_order):
        report.add(OUT_OF_ORDER, "think", "criteria do not appear in C1..C15 order")

    for dim in DIMENSIONS:
        if dim not in report.summaries and not any(
            v.code == BAD_SUMMARY and v.location == f"summary:{dim.value}"
            for v in report.violations
        ):
            report.add(MISSING_SUMMARY, f"summary:{dim.value}",
                       f"no summary line for {dim.full_name}")

    if answer is not None:
        report.verdict = _parse_answer_sentence(answer.group(1), report)

    if (report.think_before_answer
            and len(report.units) == NUM_CRITERIA
            and len(report.summaries) == len(DIMENSIONS)
            and report.verdict is not None):
        units = tuple(report.units[cid] for cid in range(1, NUM_CRITERIA + 1))
        report.trace = CoTTrace(units=units, dim_summaries=dict(report.summaries),
                                answer=report.verdict, raw_text=raw)
    return report


# --- serialization ----------------------------------------------------------

_CONCLUSION_PROSE = {
    1: "the {dim} score is positive, and Video A is better than Video B in {dim}",
    -1: "the {dim} score is negative, and Video B is better than Video A in {dim}",
    0: "the {dim} score is zero, and the two videos are comparable in {dim}",
}


def _format_sum_expression(scores: list[int], stated_sum: int) -> str:
    parts = []
    for k, s in enumerate(scores):
        if k == 0:
            parts.append(str(s))
        else:
            parts.append(f"+{s}" if s >= 0 else str(s))
    expr = "".join(parts) + f"={stated_sum}"
    if stated_sum > 0:
        expr += ">0"
    elif stated_sum < 0:
        expr += "<0"
    return expr


def _split_rationale(rationale: str) -> list[str]:
    """Split a rationale into three chunks that rejoin with single spaces.

    Whitespace runs are collapsed first; the parser performs the same join,
    so serialization round-trips exactly on whitespace-canonical rationales.
    """
    words = rationale.split()
    if not words:
        return ["", "", ""]
    n = len(words)
    cut1 = (n + 2) // 3
    cut2 = cut1 + (n - cut1 + 1) // 2
    chunks = [" ".join(words[:cut1]), " ".join(words[cut1:cut2]), " ".join(words[cut2:])]
    return chunks


def _answer_sentence(verdict: Verdict) -> str:
    groups: dict[int, list[Dimension]] = {}
    for dim in DIMENSIONS:
        groups.setdefault(verdict.component(dim), []).append(dim)
    segments = []
    for score in (1, -1, 0):
        dims = groups.get(score)
        if not dims:
            continue
        names = [d.full_name.lower() for d in dims]
        if len(names) == 1:
            listing = names[0]
        elif len(names) == 2:
            listing = f"{names[0]} and {names[1]}"
        else:
            listing = f"{names[0]}, {names[1]}, and {names[2]}"
        if score == 1:
            segments.append(f"Video A outperforms Video B in {listing}")
        elif score == -1:
            segments.append(f"Video A underperforms Video B in {listing}")
        else:
            segments.append(f"the two are comparable in {listing}")
    if len(segments) == 1:
        sentence = segments[0]
    elif len(segments) == 2:
        sentence = f"{segments[0]}, while {segments[1]}"
    else:
        sentence = f"{segments[0]}, while {segments[1]}, and {segments[2]}"
    return sentence + "."


def serialize_trace(t: CoTTrace) -> str:
    """Emit canonical text whose ``parse_cot`` reproduces the trace exactly.

    Rationale whitespace is canonicalized (runs collapse to single spaces);
    traces built by the parser or the synthesizer are already canonical.
    """
    out: list[str] = ["<think>"]
    for dim in DIMENSIONS:
        for cid in dim.criterion_ids:
            unit = t.unit(cid)
            crit = unit.criterion
            out.append(f"[{dim.full_name}-C{cid}.{crit.name}]")
            for chunk in _split_rationale(unit.rationale):
                out.append(f"- {chunk}" if chunk else "-")
            out.append(f"- Score (A v.s. B): {unit.score}")
        summary = t.dim_summaries[dim]
        scores = [t.unit(cid).score for cid in dim.criterion_ids]
        expr = _format_sum_expression(scores, summary.stated_sum)
        prose = _CONCLUSION_PROSE[summary.stated_conclusion].format(dim=dim.full_name)
        out.append(
            f"[Summary of {dim.full_name}: In {dim.full_name}, the sum over "
            f"{len(scores)} criteria is {expr}. Therefore, {prose}.]"
        )
    out.append("</think>")
    out.append(f"<answer>{_answer_sentence(t.answer)}</answer>")
    return "\n".join(out)
