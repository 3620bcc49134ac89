import json

import pytest
from click.testing import CliRunner

from conftest import torus
from prymeigen.cli import (
    AssertionFailed,
    StepFailed,
    bundled_script,
    load_prototype,
    main,
    run_script,
)
from prymeigen.surface import TranslationSurface, canonical_code

PROTO = ["--w", "1", "--h", "1", "--e", "1", "--slit", "1/2"]


@pytest.fixture
def runner():
    return CliRunner()


def invoke_json(runner, args):
    res = runner.invoke(main, args + ["--json"])
    return res, (json.loads(res.output) if res.exit_code in (0, 1) and res.output.startswith("{") else None)


def test_classify_small_range(runner):
    res, rep = invoke_json(runner, ["classify", "--from", "8", "--to", "17"])
    assert res.exit_code == 0
    counts = {r["D"]: (r["status"], len(r["classes"])) for r in rep["results"]}
    assert counts[8] == ("ok", 1) and counts[9] == ("ok", 2) and counts[12] == ("ok", 1)
    assert counts[13] == ("empty", 0) and counts[16] == ("ok", 1) and counts[17] == ("ok", 2)
    assert list(rep) == sorted(rep)
    assert rep["version"] and rep["command"] == "classify"


def test_classify_parallel_keeps_order(runner):
    res, rep = invoke_json(runner, ["classify", "--from", "8", "--to", "30", "--jobs", "3"])
    assert [r["D"] for r in rep["results"]] == list(range(8, 31))


@pytest.mark.parametrize("args", [["--from", "20", "--to", "10"], ["--from", "3", "--to", "10"],
                                  ["--from", "x", "--to", "10"]])
def test_classify_usage_errors(runner, args):
    assert runner.invoke(main, ["classify", *args]).exit_code == 2


def test_prototypes_and_invariant(runner):
    _, rep = invoke_json(runner, ["prototypes", "--disc", "9"])
    assert [(r["w"], r["h"], r["e"]) for r in rep["results"]] == [(1, 1, -1), (1, 1, 1)]
    _, rep = invoke_json(runner, ["invariant", "--w", "1", "--h", "1", "--e", "1"])
    assert rep["results"]["parity"] == 1


def test_build_and_read_back(runner, tmp_path):
    out = tmp_path / "s.json"
    res = runner.invoke(main, ["build", "--kappa", "2,2", *PROTO, "--out", str(out)])
    assert res.exit_code == 0
    s = TranslationSurface.from_json(json.loads(out.read_text()))
    assert canonical_code(s) == canonical_code(load_prototype(1, 1, 1, "2,2", "1/2").surface)
    _, rep = invoke_json(runner, ["cylinders", "--dir", "1,0", "--surface", str(out)])
    assert len(rep["results"]) == 3
    lines = runner.invoke(main, ["scan", "--len", "1", "--surface", str(out), "--json"]).output.splitlines()
    rows = [json.loads(x) for x in lines]
    assert rows and all(set(r) == {"hol", "from", "to", "len2"} for r in rows)


def test_build_rejects_bad_prototype(runner):
    assert runner.invoke(main, ["build", "--w", "2", "--h", "2", "--e", "0"]).exit_code == 2


def test_involutions_command(runner):
    _, rep = invoke_json(runner, ["involutions", "--w", "1", "--h", "1", "--e", "-1"])
    assert rep["results"]["count"] == 3
    assert rep["results"]["composite_orders"] == [3, 3, 3]


def test_render_paths_and_determinism(runner, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    runner.invoke(main, ["render", "--svg", str(a), *PROTO])
    runner.invoke(main, ["render", "--svg", str(b), *PROTO])
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().count('class="polygon"') == 3
    t = tmp_path / "t.json"
    t.write_text(json.dumps(torus((1, 0), (0, 1)).to_json()))
    res = runner.invoke(main, ["render", "--svg", "-", "--surface", str(t)])
    assert res.output.count('class="polygon"') == 1


def test_bundled_d16_path(runner):
    res, rep = invoke_json(runner, ["replay", "--script", "d16-path"])
    assert res.exit_code == 0
    assert rep["results"]["final_stratum"] == "H(2,2)odd"
    assert rep["results"]["isomorphic_to"]["prototype"] == {"w": 1, "h": 2, "e": 0, "kappa": "2,2"}


def test_empty_script_echoes_initial(runner, tmp_path):
    f = tmp_path / "empty.json"
    f.write_text("[]")
    res, rep = invoke_json(runner, ["replay", "--script", str(f), *PROTO])
    assert res.exit_code == 0
    assert rep["results"]["isomorphic_to"] == "initial"
    assert rep["results"]["steps"] == []


def test_collision_script_fails(runner, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text(json.dumps([{"op": "rel", "v": ["1", "0"]}]))
    res, rep = invoke_json(runner, ["replay", "--script", str(f), *PROTO])
    assert res.exit_code == 1
    assert rep["results"]["type"] == "StepFailed"
    assert "CollisionDuringMove" in rep["results"]["error"]
    with pytest.raises(StepFailed) as err:
        run_script([{"op": "rel", "v": ["1", "0"]}], load_prototype(1, 1, 1, "2,2", "1/2"))
    assert err.value.index == 0


def test_failed_assertion():
    script = {"initial": {"prototype": {"w": 1, "h": 1, "e": 1}}, "steps": [],
              "assert": {"isomorphic_to": {"prototype": {"w": 1, "h": 1, "e": -1}}}}
    with pytest.raises(AssertionFailed):
        run_script(script)


def test_script_then_inverse_returns_home():
    start = load_prototype(1, 1, 1, "2,2", "1/2")
    steps = [{"op": "rel", "v": ["1/10", "1/20"]}, {"op": "gl2", "m": [["1", "1"], ["0", "1"]]},
             {"op": "rel", "v": ["0", "-1/15"]}]
    inverse = [{"op": "rel", "v": ["0", "1/15"]}, {"op": "gl2", "m": [["1", "-1"], ["0", "1"]]},
               {"op": "rel", "v": ["-1/10", "-1/20"]}]
    rep = run_script(steps + inverse, start)
    assert canonical_code(rep.results["final"]) == canonical_code(start.surface)


def test_bundled_script_shape():
    script = bundled_script("d16-path")
    assert [s["op"] for s in script["steps"]] == ["rel", "rel", "check", "gl2", "rel"]


def test_classify_headline_range(runner):
    res, rep = invoke_json(runner, ["classify", "--from", "8", "--to", "200"])
    assert res.exit_code == 0
    assert not [r for r in rep["results"] if r["status"] == "FAILURE"]
    assert len(rep["results"]) == 193
