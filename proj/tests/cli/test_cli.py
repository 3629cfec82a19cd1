import json
import os
import re
import subprocess
from pathlib import Path

import jsonschema
import pytest

ROOT = Path(__file__).resolve().parents[2]
BIN = os.environ.get("SWAPMC_BIN", str(ROOT / "build" / "swapmc"))
SCHEMA = json.loads((ROOT / "tools" / "schema" / "swapmc-output.schema.json").read_text())

TOGGLE = """
x : Bool
init_cond = neg x
agent P "idle" (x)
transitions
begin
  x := neg x
end
spec_obs = "always x" A(G x)
protocol "idle" (y : Bool)
begin
do
  otherwise -> <<Wait>>
od
end
"""


def dot_nodes(dot):
    return len(re.findall(r"^\s*n\d+ \[label=", dot, re.M))


def run(*args):
    return subprocess.run([BIN, *args], cwd=ROOT, capture_output=True, text=True, timeout=600)


def validate(doc, kind):
    jsonschema.validate(doc, {**SCHEMA, "$ref": f"#/$defs/{kind}"})


@pytest.fixture
def toggle(tmp_path):
    p = tmp_path / "toggle.swapmc"
    p.write_text(TOGGLE)
    return str(p)


def test_escrow_exit_one_with_two_refutations():
    r = run("check", "examples/escrow.swapmc", "--all", "--json")
    assert r.returncode == 1
    doc = json.loads(r.stdout)
    validate(doc, "check")
    assert [v["outcome"] for v in doc] == ["Holds"] * 3 + ["Refuted"] * 2
    assert all("trace" in v for v in doc if v["outcome"] == "Refuted")


def test_htlc_exit_zero():
    r = run("check", "examples/htlc.swapmc", "--all")
    assert r.returncode == 0, r.stderr


def test_reversed_exit_one():
    r = run("check", "examples/htlc-reversed.swapmc", "--spec", "#3", "--json")
    assert r.returncode == 1
    doc = json.loads(r.stdout)
    validate(doc, "check")
    assert doc[0]["spec_label"] == "If Bob always cooperates, he is always eventually safe"


def test_spec_by_label_and_index_agree():
    by_index = json.loads(run("check", "examples/escrow.swapmc", "--spec", "#4", "--json").stdout)
    label = by_index[0]["spec_label"]
    by_label = json.loads(run("check", "examples/escrow.swapmc", "--spec", " ".join(label.split()), "--json").stdout)
    assert by_label[0]["outcome"] == by_index[0]["outcome"] == "Refuted"


def test_missing_file_exit_two():
    r = run("check", "missing.swapmc")
    assert r.returncode == 2
    assert "missing.swapmc" in r.stderr


def test_parse_error_exit_two_with_span(tmp_path):
    p = tmp_path / "bad.swapmc"
    p.write_text("x : Bool\ninit_cond = x /\\\n")
    r = run("check", str(p), "--all")
    assert r.returncode == 2
    assert f"{p}:" in r.stderr


def test_unknown_spec_and_bad_budget_exit_two():
    assert run("check", "examples/escrow.swapmc", "--spec", "#9").returncode == 2
    assert run("check", "examples/escrow.swapmc", "--all", "--node-budget", "0").returncode == 2
    assert run("check", "examples/escrow.swapmc", "--all", "--node-budget", "10").returncode == 2
    assert run("check", "examples/escrow.swapmc", "--all", "--product-budget", "10").returncode == 2


def test_simulate_zero_steps_is_usage_error():
    assert run("simulate", "examples/escrow.swapmc", "--steps", "0").returncode == 2


def test_simulate_same_seed_same_transcript():
    a = run("simulate", "examples/escrow.swapmc", "--seed", "1", "--steps", "25")
    b = run("simulate", "examples/escrow.swapmc", "--seed", "1", "--steps", "25")
    assert a.returncode == 0
    assert a.stdout == b.stdout and a.stdout


def test_simulate_json():
    r = run("simulate", "examples/htlc.swapmc", "--seed", "7", "--steps", "10", "--json")
    doc = json.loads(r.stdout)
    validate(doc, "simulate")
    assert len(doc) == 11


def test_simulate_all_cooperate_reaches_swap():
    start = "strategyA == Cooperate /\\ strategyB == Cooperate"
    hits = 0
    for seed in range(100):
        r = run("simulate", "examples/escrow.swapmc", "--seed", str(seed), "--steps", "30", "--start", start, "--json")
        steps = json.loads(r.stdout)
        assert steps[0]["state"]["strategyA"] == "Cooperate"
        if any(s["state"]["holdera"] == "BobH" and s["state"]["holderb"] == "AliceH" for s in steps):
            hits += 1
    assert hits > 0


def test_graph_dot_is_deterministic(tmp_path):
    a, b = tmp_path / "a.dot", tmp_path / "b.dot"
    assert run("graph", "examples/escrow.swapmc", "--dot", str(a), "--threads", "1").returncode == 0
    assert run("graph", "examples/escrow.swapmc", "--dot", str(b), "--threads", "4").returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_graph_node_count_matches_stats(tmp_path):
    out = tmp_path / "g.dot"
    r = run("graph", "examples/escrow.swapmc", "--dot", str(out))
    stats = json.loads(run("stats", "examples/escrow.swapmc", "--json").stdout)
    validate(stats, "stats")
    assert str(stats["nodes"]) in r.stdout
    dot = out.read_text()
    assert dot_nodes(dot) == stats["nodes"]


def test_stats_escrow_initial_states():
    stats = json.loads(run("stats", "examples/escrow.swapmc", "--json").stdout)
    assert stats["initial_states"] == 18
    assert stats["nodes"] == 594


def test_stats_toggle(toggle):
    stats = json.loads(run("stats", toggle, "--json").stdout)
    assert (stats["nodes"], stats["edges"]) == (2, 2)
    r = run("graph", toggle)
    assert dot_nodes(r.stdout) == 2


def test_stats_htlc_repeatable():
    a = json.loads(run("stats", "examples/htlc.swapmc", "--json").stdout)
    b = json.loads(run("stats", "examples/htlc.swapmc", "--json").stdout)
    assert (a["nodes"], a["edges"]) == (b["nodes"], b["edges"])


def test_toggle_check_exit_codes(toggle):
    r = run("check", toggle, "--all", "--json")
    assert r.returncode == 1
    validate(json.loads(r.stdout), "check")


def test_check_dot_writes_automaton(tmp_path):
    out = tmp_path / "a.dot"
    assert run("check", "examples/escrow.swapmc", "--spec", "#1", "--dot", str(out)).returncode == 0
    assert out.read_text().startswith("digraph")
    assert run("check", "examples/escrow.swapmc", "--all", "--dot", str(out)).returncode == 2


def test_exit_code_contract_on_every_bundled_spec():
    for model, expected in [("escrow", [0, 0, 0, 1, 1]), ("htlc", [0, 0, 0]), ("htlc-reversed", [0, 0, 1])]:
        for i, code in enumerate(expected, start=1):
            r = run("check", f"examples/{model}.swapmc", "--spec", f"#{i}", "--json")
            assert r.returncode == code, (model, i, r.stderr)
            validate(json.loads(r.stdout), "check")
