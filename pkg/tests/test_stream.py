import json
import subprocess
import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data" / "golden"


def golden_records(name: str) -> list[dict]:
    rows = []
    for line in (DATA / name).read_text().splitlines():
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError:
            continue
    return rows


def run_stream(lines: list[str]) -> tuple[list[dict], int]:
    proc = subprocess.run(
        [sys.executable, "-m", "aesreward", "serve"],
        input="".join(line + "\n" for line in lines),
        capture_output=True,
        text=True,
    )
    responses = [json.loads(line) for line in proc.stdout.splitlines()]
    return responses, proc.returncode


def request(rid, op, payload=None) -> str:
    obj = {"id": rid, "op": op}
    if payload is not None:
        obj["payload"] = payload
    return json.dumps(obj)


def test_ping_round_trip():
    responses, code = run_stream([request(1, "ping"), json.dumps({"op": "shutdown"})])
    assert code == 0
    assert responses == [{"id": 1, "ok": True, "result": {"status": "pong"}}]


def test_reward_request_matches_batch_oracle():
    record = next(r for r in golden_records("reward_records.jsonl") if r["pair_id"] == "c1")
    responses, code = run_stream([
        request("r1", "reward", record),
        json.dumps({"op": "shutdown"}),
    ])
    assert code == 0
    (resp,) = responses
    assert resp["ok"] is True
    assert resp["result"]["total"] == 2.6


def test_malformed_line_then_next_request_served():
    responses, code = run_stream([
        "{broken",
        request(7, "ping"),
        json.dumps({"op": "shutdown"}),
    ])
    assert code == 0
    assert len(responses) == 2
    assert responses[0]["ok"] is False
    assert responses[0]["id"] is None
    assert responses[0]["error"]["code"] == "BAD_REQUEST"
    assert responses[1] == {"id": 7, "ok": True, "result": {"status": "pong"}}


def test_unknown_op_is_bad_request():
    responses, _ = run_stream([request(3, "launch"), json.dumps({"op": "shutdown"})])
    assert responses[0]["id"] == 3
    assert responses[0]["error"]["code"] == "BAD_REQUEST"


def test_engine_error_codes_pass_through():
    bad_pool = {
        "record": {"pair_id": "x", "prompt": "", "video_a": "a", "video_b": "b",
                   "expert_label": {"va": 0, "vf": 0, "vp": 0}},
        "samples": ["junk"],
        "embedding_store": "fallback",
    }
    responses, _ = run_stream([
        request(9, "synthesize", bad_pool),
        json.dumps({"op": "shutdown"}),
    ])
    assert responses[0]["ok"] is False
    assert responses[0]["error"]["code"] == "BAD_POOL"


def test_exactly_one_response_per_request_before_shutdown():
    reward_rows = [r for r in golden_records("reward_records.jsonl")]
    lines = []
    expect_ids = []
    for k, row in enumerate(reward_rows):
        lines.append(request(f"id-{k}", "reward", row))
        expect_ids.append(f"id-{k}")
    lines.append(json.dumps({"op": "shutdown"}))
    responses, code = run_stream(lines)
    assert code == 0
    assert [r["id"] for r in responses] == expect_ids
    assert len(responses) == len(reward_rows)


def test_eval_and_weights_ops():
    pairs = golden_records("eval_pairs.jsonl")
    groups = golden_records("weights_records.jsonl")
    responses, code = run_stream([
        request("e", "eval", {"pairs": pairs}),
        request("w", "weights", groups[1]),
        json.dumps({"op": "shutdown"}),
    ])
    assert code == 0
    eval_resp, weights_resp = responses
    assert eval_resp["result"]["report"]["n_total"] == 10
    assert weights_resp["result"]["advantages"] == [1.0, -1.0, 1.0, -1.0]


def test_parse_op():
    record = golden_records("parse_cot_records.jsonl")[0]
    responses, _ = run_stream([
        request("p", "parse", {**record, "variant": "cot"}),
        json.dumps({"op": "shutdown"}),
    ])
    assert responses[0]["result"]["criteria_found"] == list(range(1, 16))


def test_stream_without_shutdown_drains_at_eof():
    responses, code = run_stream([request(1, "ping")])
    assert code == 0
    assert len(responses) == 1


def test_missing_payload_is_bad_request():
    responses, _ = run_stream([request(4, "reward"), json.dumps({"op": "shutdown"})])
    assert responses[0]["error"]["code"] == "BAD_REQUEST"


def test_stream_output_matches_batch_cli_numbers():
    # Cross-surface determinism: the stream's reward results serialize to the
    # same numbers the batch command emits.
    batch = subprocess.run(
        [sys.executable, "-m", "aesreward", "reward", str(DATA / "reward_records.jsonl")],
        capture_output=True, text=True, check=True,
    )
    batch_rows = [json.loads(line) for line in batch.stdout.splitlines()]
    batch_by_id = {r["pair_id"]: r for r in batch_rows if "pair_id" in r}

    rows = golden_records("reward_records.jsonl")
    lines = [request(r["pair_id"], "reward", r) for r in rows]
    lines.append(json.dumps({"op": "shutdown"}))
    responses, _ = run_stream(lines)
    for resp in responses:
        assert resp["ok"], resp
        assert resp["result"] == batch_by_id[resp["id"]]
