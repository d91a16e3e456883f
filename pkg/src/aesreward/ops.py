"""Shared record handlers behind the batch CLI and the stream server.

Each handler takes one decoded JSON payload and returns a JSON-ready dict;
engine errors carry stable codes and are rendered inline by the callers.
"""

from __future__ import annotations

from typing import Any, Mapping

from .config import EngineConfig
from .errors import BadRequestError, EngineError
from .grouping import (
    PairwiseMatrix,
    clamp_weight,
    group_advantages,
    rwr_weight_from_criteria,
    rwr_weight_from_score,
    win_rates,
)
from .metrics import PredictionPair, accuracy_suite, position_bias
from .parsing import parse_base, parse_cot
from .rewards import reward_total_base, reward_total_cot
from .rubric import CoTTrace, Verdict
from .similarity import EmbeddingProvider, provider_from_spec
from .synthesis import load_pool, synthesize
from .parsing import serialize_trace


class Engine:
    """Configuration plus a lazily built embedding provider."""

    def __init__(self, config: EngineConfig):
        self.config = config
        self._provider: EmbeddingProvider | None = None

    @property
    def provider(self) -> EmbeddingProvider:
        if self._provider is None:
            self._provider = provider_from_spec(self.config.provider)
        return self._provider


def _require(payload: Mapping, key: str) -> Any:
    if key not in payload:
        raise BadRequestError(f"missing required field {key!r}")
    return payload[key]


def _parse_variant(payload: Mapping) -> str:
    variant = str(payload.get("variant", "cot"))
    if variant not in ("base", "cot"):
        raise BadRequestError(f"variant must be 'base' or 'cot', got {variant!r}")
    return variant


def _teacher_from_payload(payload: Mapping) -> CoTTrace | None:
    raw = payload.get("teacher_trace")
    if raw is None:
        return None
    report = parse_cot(str(raw))
    if report.trace is None:
        codes = sorted({v.code for v in report.violations})
        raise BadRequestError(
            f"teacher_trace is not a complete trace (violations: {', '.join(codes)})"
        )
    return report.trace


def op_parse(engine: Engine, payload: Mapping) -> dict:
    raw = str(_require(payload, "raw_output"))
    variant = _parse_variant(payload)
    report = parse_base(raw) if variant == "base" else parse_cot(raw)
    result = report.to_json()
    if "pair_id" in payload:
        result = {"pair_id": payload["pair_id"], **result}
    return result


def op_reward(engine: Engine, payload: Mapping) -> dict:
    raw = str(_require(payload, "raw_output"))
    variant = _parse_variant(payload)
    try:
        gt = Verdict.from_json(_require(payload, "gt"))
    except (KeyError, TypeError, ValueError) as exc:
        raise BadRequestError(f"bad gt verdict: {exc}") from exc
    weights = engine.config.weights
    if variant == "base":
        breakdown = reward_total_base(parse_base(raw), gt, weights)
    else:
        teacher = _teacher_from_payload(payload)
        breakdown = reward_total_cot(parse_cot(raw), gt, teacher,
                                     engine.provider, weights)
    result = breakdown.to_json()
    if "pair_id" in payload:
        result = {"pair_id": payload["pair_id"], **result}
    return result


def op_synthesize(engine: Engine, payload: Mapping) -> dict:
    pool = load_pool(payload, engine.provider)
    result = synthesize(pool)
    out = result.to_json()
    out["pair_id"] = pool.record.pair_id
    out["serialized"] = serialize_trace(result.synthesized)
    return out


def _pairs_from_payload(items: Any) -> list[PredictionPair]:
    if not isinstance(items, list):
        raise BadRequestError("'pairs' must be a list of prediction records")
    pairs = []
    for k, item in enumerate(items):
        try:
            pairs.append(PredictionPair.from_json(item))
        except (KeyError, TypeError, ValueError) as exc:
            raise BadRequestError(f"bad prediction record {k}: {exc}") from exc
    return pairs


def op_eval(engine: Engine, payload: Mapping) -> dict:
    pairs = _pairs_from_payload(_require(payload, "pairs"))
    report = accuracy_suite(pairs, use_ties=engine.config.use_ties)
    result: dict = {"report": report.to_json()}
    if pairs and all(p.backward is not None for p in pairs):
        result["position_bias"] = position_bias(pairs, engine.config.pb_variant)
    else:
        result["position_bias"] = None
    return result


def op_weights(engine: Engine, payload: Mapping) -> dict:
    group_id = payload.get("group_id")
    result: dict = {"group_id": group_id}
    clamp = engine.config.clamp_weights

    def weight(w: float) -> float:
        return clamp_weight(w) if clamp else w

    if "pairwise" in payload:
        try:
            matrix = PairwiseMatrix.from_rows(payload["pairwise"])
        except (TypeError, ValueError) as exc:
            raise BadRequestError(f"bad pairwise matrix: {exc}") from exc
        rates = win_rates(matrix)
        result["win_rates"] = rates
        result["advantages"] = group_advantages(rates)
    elif "rewards" in payload:
        try:
            result["advantages"] = group_advantages(
                [float(r) for r in payload["rewards"]]
            )
        except (TypeError, ValueError) as exc:
            raise BadRequestError(f"bad rewards: {exc}") from exc
    elif "scores" in payload:
        try:
            result["weights"] = [
                weight(rwr_weight_from_score(float(s))) for s in payload["scores"]
            ]
        except (TypeError, ValueError) as exc:
            raise BadRequestError(f"bad scores: {exc}") from exc
    elif "criteria_scores" in payload:
        try:
            result["weights"] = [
                weight(rwr_weight_from_criteria([int(s) for s in row]))
                for row in payload["criteria_scores"]
            ]
        except (TypeError, ValueError) as exc:
            raise BadRequestError(f"bad criteria_scores: {exc}") from exc
    else:
        raise BadRequestError(
            "weights record needs one of: pairwise, rewards, scores, criteria_scores"
        )
    return result


HANDLERS = {
    "parse": op_parse,
    "reward": op_reward,
    "synthesize": op_synthesize,
    "eval": op_eval,
    "weights": op_weights,
}


def error_json(exc: EngineError) -> dict:
    return {"code": exc.code, "message": exc.message}
