"""Evaluation statistics over prediction/label sets.

Covers the accuracy suite (binary / three-class / per-dimension / average),
position bias under bidirectional inference, the good-same-bad score, and
bidirectional score aggregation.  All aggregations are pure and independent
of record order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import EmptyEvalSetError, MissingBackwardError
from .rubric import DIMENSIONS, Dimension, PrefScore, Verdict, negate_verdict, sign


@dataclass(frozen=True)
class PredictionPair:
    """Forward/backward predictions and the expert label for one video pair.

    ``backward`` must have been produced with the two videos swapped; it is
    stored in the swapped frame (caller contract).
    """

    pair_id: str
    forward: Verdict
    gt: Verdict
    backward: Verdict | None = None

    def to_json(self) -> dict:
        obj = {
            "pair_id": self.pair_id,
            "forward": self.forward.to_json(),
            "gt": self.gt.to_json(),
        }
        if self.backward is not None:
            obj["backward"] = self.backward.to_json()
        return obj

    @classmethod
    def from_json(cls, obj: Mapping) -> "PredictionPair":
        backward = obj.get("backward")
        return cls(
            pair_id=str(obj["pair_id"]),
            forward=Verdict.from_json(obj["forward"]),
            gt=Verdict.from_json(obj["gt"]),
            backward=Verdict.from_json(backward) if backward is not None else None,
        )


@dataclass(frozen=True)
class EvalReport:
    """Accuracy rates over an evaluation set.

    ``binary_acc_no_ties`` is None when every label is an overall tie (the
    excluded set is empty).  ``avg_acc`` is the mean of the per-dimension
    rates.
    """

    binary_acc: float
    binary_acc_no_ties: float | None
    three_class_acc: float
    avg_acc: float
    per_dim_acc: Mapping[Dimension, float]
    n_total: int
    n_ties: int

    def to_json(self) -> dict:
        return {
            "binary_acc": self.binary_acc,
            "binary_acc_no_ties": self.binary_acc_no_ties,
            "three_class_acc": self.three_class_acc,
            "avg_acc": self.avg_acc,
            "per_dim_acc": {d.value: self.per_dim_acc[d] for d in DIMENSIONS},
            "n_total": self.n_total,
            "n_ties": self.n_ties,
        }


def overall_preference(v: Verdict) -> PrefScore:
    """Sign of the summed dimension labels: the single overall preference."""
    return sign(v.va + v.vf + v.vp)


def accuracy_suite(preds: Sequence[PredictionPair], use_ties: bool = True) -> EvalReport:
    """Compute all accuracy rates over the set.

    Binary accuracy compares overall-preference signs; it is reported both
    over all records and with overall-tie labels excluded.  With
    ``use_ties=False`` the tie-excluded subset is also used for three-class,
    per-dimension, and average accuracy.
    """
    if not preds:
        raise EmptyEvalSetError("no prediction records")
    no_tie = [p for p in preds if overall_preference(p.gt) != 0]
    n_ties = len(preds) - len(no_tie)

    def binary_rate(records: Sequence[PredictionPair]) -> float:
        hits = sum(
            overall_preference(p.forward) == overall_preference(p.gt) for p in records
        )
        return hits / len(records)

    binary_acc = binary_rate(preds)
    binary_acc_no_ties = binary_rate(no_tie) if no_tie else None

    counted = preds if use_ties else no_tie
    if not counted:
        raise EmptyEvalSetError("every record is an overall tie; nothing to count")
    three_class = sum(p.forward == p.gt for p in counted) / len(counted)
    per_dim = {
        dim: sum(p.forward.component(dim) == p.gt.component(dim) for p in counted)
        / len(counted)
        for dim in DIMENSIONS
    }
    avg = sum(per_dim.values()) / len(per_dim)
    return EvalReport(
        binary_acc=binary_acc,
        binary_acc_no_ties=binary_acc_no_ties,
        three_class_acc=three_class,
        avg_acc=avg,
        per_dim_acc=per_dim,
        n_total=len(preds),
        n_ties=n_ties,
    )


def position_bias(preds: Sequence[PredictionPair], variant: str = "canonical") -> float:
    """Fraction of pairs whose overall preference flips when the input order
    is swapped; 0 means perfectly order-consistent.

    The default maps the backward pass into the forward frame by negation
    and counts sign disagreements.  ``variant="raw"`` instead counts raw
    sign equality of the two passes, for comparison.
    """
    if variant not in ("canonical", "raw"):
        raise ValueError(f"unknown position-bias variant {variant!r}")
    if not preds:
        raise EmptyEvalSetError("no prediction records")
    flips = 0
    for p in preds:
        if p.backward is None:
            raise MissingBackwardError(f"pair {p.pair_id} has no backward prediction")
        fwd = overall_preference(p.forward)
        if variant == "canonical":
            flips += fwd != overall_preference(negate_verdict(p.backward))
        else:
            flips += fwd == overall_preference(p.backward)
    return flips / len(preds)


def gsb(outcomes: Sequence[PrefScore]) -> float:
    """(good - bad) / (good + same + bad) over pairwise outcomes."""
    if not outcomes:
        raise EmptyEvalSetError("no outcomes")
    good = bad = 0
    for o in outcomes:
        if o not in (-1, 0, 1):
            raise ValueError(f"outcome must be -1, 0, or 1, got {o!r}")
        if o == 1:
            good += 1
        elif o == -1:
            bad += 1
    return (good - bad) / len(outcomes)


def bidirectional_score(s1: float, s2: float) -> float:
    """Aggregate two order-swapped scores: (s1 - s2) / 2.

    ``s1`` comes from the (new, old) presentation order and ``s2`` from
    (old, new); an anti-symmetric judge yields s1 = -s2.
    """
    return (s1 - s2) / 2.0
