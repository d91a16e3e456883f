"""Rubric taxonomy and shared record types for pairwise video-aesthetics judgments.

The rubric decomposes aesthetics into three dimensions (VA, VF, VP) and 15
criteria (C1..C15).  Everything downstream — parsing, synthesis, rewards,
metrics — depends only on the types defined here.

All types are immutable values; they are safe to share between workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .errors import InvalidCriterionError

PrefScore = int
"""A pairwise preference in {-1, 0, +1}; positive means the first-listed
video (A) is better."""

VALID_SCORES = (-1, 0, 1)


class Dimension(Enum):
    """The three core aesthetic dimensions.

    Declaration order (VA < VF < VP) is fixed and used for serialization.
    """

    VA = "VA"
    VF = "VF"
    VP = "VP"

    @property
    def full_name(self) -> str:
        return _DIMENSION_NAMES[self]

    @property
    def criterion_ids(self) -> tuple[int, ...]:
        return _DIMENSION_CRITERIA[self]


_DIMENSION_NAMES = {
    Dimension.VA: "Visual Aesthetics",
    Dimension.VF: "Visual Fidelity",
    Dimension.VP: "Visual Plausibility",
}

_DIMENSION_CRITERIA = {
    Dimension.VA: (1, 2, 3, 4, 5, 6),
    Dimension.VF: (7, 8, 9, 10),
    Dimension.VP: (11, 12, 13, 14, 15),
}

DIMENSIONS: tuple[Dimension, ...] = (Dimension.VA, Dimension.VF, Dimension.VP)

NUM_CRITERIA = 15


def dimension_from_name(name: str) -> Dimension | None:
    """Resolve a full dimension name ("Visual Aesthetics", ...) to a Dimension."""
    for dim, full in _DIMENSION_NAMES.items():
        if full == name:
            return dim
    return None


@dataclass(frozen=True)
class Criterion:
    """One fine-grained rubric item.

    ``name`` is the canonical heading; ``aliases`` are additional spellings a
    strict parser accepts verbatim (tag lines in the wild vary in casing and
    pluralization).  ``definition`` is one-line metadata describing what the
    criterion checks.
    """

    id: int
    name: str
    dimension: Dimension
    definition: str
    aliases: tuple[str, ...] = ()

    @property
    def accepted_names(self) -> tuple[str, ...]:
        return (self.name, *self.aliases)


CRITERIA: tuple[Criterion, ...] = (
    Criterion(1, "Color Quality", Dimension.VA,
              "Brightness/contrast, saturation, and color harmony of the overall image."),
    Criterion(2, "Time Periods", Dimension.VA,
              "Lighting and palette match the required time of day (daytime, night, "
              "sunset, dusk, dawn, sunrise).",
              aliases=("Time Period",)),
    Criterion(3, "Lighting Style", Dimension.VA,
              "Practical versus scene lighting and how believably it integrates with "
              "the environment."),
    Criterion(4, "Light Source", Dimension.VA,
              "Natural or artificial source type and whether its character matches "
              "the prompt."),
    Criterion(5, "Light intensity", Dimension.VA,
              "Soft versus hard light: shadow edges, contrast, and shadow detail.",
              aliases=("Light Intensity",)),
    Criterion(6, "Light direction", Dimension.VA,
              "Direction of the key light (top, front, side, back, rim, silhouette, ...).",
              aliases=("Light Direction",)),
    Criterion(7, "Interaction Fidelity", Dimension.VF,
              "Collisions, occlusion ordering, and contact-point accuracy between objects."),
    Criterion(8, "Physical Adherence", Dimension.VF,
              "Gravity, inertia, fluid, and material dynamics follow real-world physics."),
    Criterion(9, "Structural Stability", Dimension.VF,
              "Subject and background keep stable shape, texture, and identity over time."),
    Criterion(10, "Sharpness", Dimension.VF,
              "Edge sharpness, fine texture rendering, and freedom from artifacts or noise."),
    Criterion(11, "Shot size", Dimension.VP,
              "Camera-to-subject distance category, from extreme long shot to extreme "
              "close-up.",
              aliases=("Shot Size",)),
    Criterion(12, "Shot Composition", Dimension.VP,
              "Placement of the subject: centered, thirds, symmetrical, leading lines, "
              "and so on."),
    Criterion(13, "Focal length", Dimension.VP,
              "Lens field of view and depth-of-field character, from fisheye to "
              "super-telephoto.",
              aliases=("Focal Length",)),
    Criterion(14, "Camera Angle", Dimension.VP,
              "Camera height and tilt: eye-level, low, high, bird's-eye, Dutch, "
              "over-the-shoulder."),
    Criterion(15, "Detail Richness", Dimension.VP,
              "How filled the frame is and whether environment detail is coherent "
              "with the subject."),
)

_CRITERIA_BY_ID = {c.id: c for c in CRITERIA}


def criterion(criterion_id: int) -> Criterion:
    """Look up a criterion by id; raises ``InvalidCriterionError`` out of range."""
    try:
        return _CRITERIA_BY_ID[criterion_id]
    except KeyError:
        raise InvalidCriterionError(
            f"criterion id must be in 1..{NUM_CRITERIA}, got {criterion_id!r}"
        ) from None


def dimension_of(criterion_id: int) -> Dimension:
    """Dimension owning a criterion id: VA for 1-6, VF for 7-10, VP for 11-15."""
    return criterion(criterion_id).dimension


def validate_score(value: int, what: str = "score") -> int:
    if value not in VALID_SCORES:
        raise ValueError(f"{what} must be one of -1, 0, 1, got {value!r}")
    return value


def sign(value: int | float) -> PrefScore:
    if value > 0:
        return 1
    if value < 0:
        return -1
    return 0


@dataclass(frozen=True)
class Verdict:
    """A three-dimension preference of video A relative to video B."""

    va: PrefScore
    vf: PrefScore
    vp: PrefScore

    def __post_init__(self):
        for dim_name in ("va", "vf", "vp"):
            validate_score(getattr(self, dim_name), dim_name)

    def component(self, dim: Dimension) -> PrefScore:
        return {Dimension.VA: self.va, Dimension.VF: self.vf, Dimension.VP: self.vp}[dim]

    def to_json(self) -> dict:
        return {"va": self.va, "vf": self.vf, "vp": self.vp}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Verdict":
        return cls(va=int(obj["va"]), vf=int(obj["vf"]), vp=int(obj["vp"]))


def negate_verdict(v: Verdict) -> Verdict:
    """Component-wise negation; equals swapping the roles of the two videos."""
    return Verdict(va=-v.va, vf=-v.vf, vp=-v.vp)


@dataclass(frozen=True)
class PreferenceRecord:
    """One annotated video pair: prompt, opaque video ids, and expert labels."""

    pair_id: str
    prompt: str
    video_a: str
    video_b: str
    expert_label: Verdict
    expert_reason: str | None = None

    def __post_init__(self):
        if not self.pair_id:
            raise ValueError("pair_id must be nonempty")
        if self.video_a == self.video_b:
            raise ValueError("video_a and video_b must differ")

    def to_json(self) -> dict:
        obj = {
            "pair_id": self.pair_id,
            "prompt": self.prompt,
            "video_a": self.video_a,
            "video_b": self.video_b,
            "expert_label": self.expert_label.to_json(),
        }
        if self.expert_reason is not None:
            obj["expert_reason"] = self.expert_reason
        return obj

    @classmethod
    def from_json(cls, obj: Mapping) -> "PreferenceRecord":
        return cls(
            pair_id=str(obj["pair_id"]),
            prompt=str(obj.get("prompt", "")),
            video_a=str(obj["video_a"]),
            video_b=str(obj["video_b"]),
            expert_label=Verdict.from_json(obj["expert_label"]),
            expert_reason=obj.get("expert_reason"),
        )


@dataclass(frozen=True)
class CriterionUnit:
    """One criterion's rationale text plus its score; the atom of every trace."""

    criterion: Criterion
    rationale: str
    score: PrefScore

    def __post_init__(self):
        if not self.rationale.strip():
            raise ValueError(f"C{self.criterion.id} rationale must be nonempty")
        validate_score(self.score, f"C{self.criterion.id} score")

    def to_json(self) -> dict:
        return {
            "criterion": self.criterion.id,
            "rationale": self.rationale,
            "score": self.score,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "CriterionUnit":
        return cls(
            criterion=criterion(int(obj["criterion"])),
            rationale=str(obj["rationale"]),
            score=int(obj["score"]),
        )


@dataclass(frozen=True)
class DimSummary:
    """A dimension summary as *stated* in a trace.

    ``stated_sum`` and ``stated_conclusion`` are what the text claims, not
    what the unit scores imply; consistency rewards compare the two.
    """

    stated_sum: int
    stated_conclusion: PrefScore

    def __post_init__(self):
        validate_score(self.stated_conclusion, "stated_conclusion")

    def to_json(self) -> dict:
        return {"stated_sum": self.stated_sum, "stated_conclusion": self.stated_conclusion}

    @classmethod
    def from_json(cls, obj: Mapping) -> "DimSummary":
        return cls(stated_sum=int(obj["stated_sum"]),
                   stated_conclusion=int(obj["stated_conclusion"]))


@dataclass(frozen=True)
class CoTTrace:
    """A fully parsed reasoned output: 15 units, 3 summaries, and an answer.

    Units are stored in C1..C15 order and must cover every criterion exactly
    once.  ``raw_text`` keeps the original text when the trace came from a
    parse; synthesized traces leave it empty.
    """

    units: tuple[CriterionUnit, ...]
    dim_summaries: Mapping[Dimension, DimSummary]
    answer: Verdict
    raw_text: str = field(default="", compare=False)

    def __post_init__(self):
        ids = [u.criterion.id for u in self.units]
        if ids != list(range(1, NUM_CRITERIA + 1)):
            raise ValueError(
                f"units must cover C1..C{NUM_CRITERIA} exactly once in order, got {ids}"
            )
        missing = [d.value for d in DIMENSIONS if d not in self.dim_summaries]
        if missing:
            raise ValueError(f"missing dimension summaries: {missing}")

    def unit(self, criterion_id: int) -> CriterionUnit:
        return self.units[criterion_id - 1]

    def scores_by_dimension(self) -> dict[Dimension, list[PrefScore]]:
        return {
            dim: [self.unit(i).score for i in dim.criterion_ids]
            for dim in DIMENSIONS
        }

    def to_json(self) -> dict:
        return {
            "units": [u.to_json() for u in self.units],
            "dim_summaries": {
                dim.value: self.dim_summaries[dim].to_json() for dim in DIMENSIONS
            },
            "answer": self.answer.to_json(),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "CoTTrace":
        units = tuple(CriterionUnit.from_json(u) for u in obj["units"])
        summaries = {
            Dimension(key): DimSummary.from_json(val)
            for key, val in obj["dim_summaries"].items()
        }
        return cls(units=units, dim_summaries=summaries,
                   answer=Verdict.from_json(obj["answer"]))


def make_trace(units: Iterable[CriterionUnit],
               dim_summaries: Mapping[Dimension, DimSummary],
               answer: Verdict,
               raw_text: str = "") -> CoTTrace:
    """Build a trace from units in any order, normalizing to C1..C15."""
    ordered = tuple(sorted(units, key=lambda u: u.criterion.id))
    return CoTTrace(units=ordered, dim_summaries=dict(dim_summaries),
                    answer=answer, raw_text=raw_text)
