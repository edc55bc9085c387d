import json
import random
import subprocess
import sys
from fractions import Fraction as F

import pytest

from condtypes import io
from condtypes.analysis import check_type_morphism, hierarchies_included
from condtypes.cli import run_command
from condtypes.cps import validate_cps
from condtypes.generators import random_structure, split_structure
from condtypes.hierarchy import check_prefix_coherence, truncate, unfold


def run(capsys, *argv):
    code = run_command(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def machine(capsys, *argv):
    code, out, err = run(capsys, "--format", "machine", *argv)
    return code, json.loads(out) if out else None


@pytest.fixture
def split_files(tmp_path):
    base = io.parse_structure(
        io.dumps(
            {
                "space": ["a", "b"],
                "players": ["1", "2"],
                "families": {"1": [["a", "b"]], "2": [["a", "b"]]},
                "types": {"1": ["t1", "t1'"], "2": ["t2"]},
                "beliefs": {
                    "1": {"t1": {"{a,b}": {"(a,t2)": "1/3", "(b,t2)": "2/3"}}, "t1'": {"{a,b}": {"(a,t2)": "1/2", "(b,t2)": "1/2"}}},
                    "2": {"t2": {"{a,b}": {"(a,t1)": "1/1"}}},
                },
            }
        )
    )
    small_doc = io.structure_to_doc(base)
    small_doc["types"]["1"] = ["t1"]
    del small_doc["beliefs"]["1"]["t1'"]
    paths = {}
    for name, doc in (("base", io.structure_to_doc(base)), ("small", small_doc)):
        p = tmp_path / f"{name}.json"
        p.write_text(io.dumps(doc))
        paths[name] = str(p)
    return paths


def test_validate_fixture(capsys):
    code, out, _ = run(capsys, "validate", "friedenberg")
    assert code == 0 and out.startswith("valid")


def test_validate_reports_violations(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(io.fixture_text("friedenberg").replace('"1/1"', '"9/10"', 1))
    code, doc = machine(capsys, "validate", str(bad))
    assert code == 1
    assert doc["result"] == "invalid"
    assert doc["violations"][0] == {**doc["violations"][0], "kind": "not-normalized", "player": "a", "type": "t'_a"}


def test_redundancy_fixture(capsys):
    code, out, _ = run(capsys, "redundancy", "friedenberg")
    assert code == 1 and "t'_a" in out and "t''_a" in out
    code, doc = machine(capsys, "redundancy", "friedenberg")
    assert doc["witness"] == {"player": "a", "types": ["t'_a", "t''_a"]}


def test_compare_reflexive(capsys, split_files):
    assert run(capsys, "compare", split_files["base"], split_files["base"], "--fixpoint")[0] == 0
    assert run(capsys, "compare", "friedenberg", "one_type")[0] == 0


def test_compare_witness_reproduces(capsys, split_files):
    code, doc = machine(capsys, "compare", split_files["base"], split_files["small"], "--depth", "1")
    assert code == 1
    assert doc["included_in"] is False and doc["reverse_included_in"] is True
    w = doc["witness"]
    assert w == {"player": "1", "type": "t1'"}
    base = io.parse_structure(open(split_files["base"]).read())
    small = io.parse_structure(open(split_files["small"]).read())
    p = unfold(base, 1)[0][w["type"]]
    assert p not in set(unfold(small, 1)[0].values())
    assert not hierarchies_included(base, small, 1)


def test_unique_hierarchy_note(capsys):
    _, out, _ = run(capsys, "compare", "friedenberg", "one_type", "--fixpoint")
    assert "terminal" in out


def test_refine_trace(capsys, split_files):
    code, doc = machine(capsys, "refine", split_files["base"])
    assert code == 0
    assert doc["fixpoint"] == 1
    assert doc["partitions"][1]["1"] == [["t1"], ["t1'"]]


def test_unfold_machine_reparses(capsys, split_files):
    code, doc = machine(capsys, "unfold", split_files["base"], "--player", "2", "--depth", "3")
    assert code == 0
    p = io.prefix_from_doc(doc["prefixes"]["t2"])
    base = io.parse_structure(open(split_files["base"]).read())
    assert p is unfold(base, 3)[1]["t2"]
    code, _, err = run(capsys, "unfold", split_files["base"], "--player", "2", "--depth", "2", "--type", "nope")
    assert code == 2 and "nope" in err


def test_completeness_witness_reparses(capsys):
    code, doc = machine(capsys, "completeness", "friedenberg")
    assert code == 1
    ts = io.load_fixture("friedenberg")
    w = io.cps_from_doc(doc["players"][1]["witness"])
    assert validate_cps(w.space, w.family, w.conditionals).valid
    assert w.conditionals[0].as_dict() == {("s", "t'_a"): F(1, 2), ("s", "t''_a"): F(1, 2)}
    assert all(w != ts.belief(1, t) for t in ts.types[1].points)


def test_morphism_commands(capsys, tmp_path):
    rng = random.Random(3)
    base = random_structure(rng, max_states=2, max_types=2)
    star, phi = split_structure(rng, base)
    bp, sp, mp = tmp_path / "b.json", tmp_path / "s.json", tmp_path / "m.json"
    bp.write_text(io.serialize_structure(base))
    sp.write_text(io.serialize_structure(star))
    mp.write_text(io.dumps({"map": {base.players[i]: phi[i] for i in (0, 1)}}))
    assert run(capsys, "morphism", str(sp), str(bp), "--map-file", str(mp))[0] == 0
    assert run(capsys, "morphism", str(sp), str(bp), "--map-file", str(mp), "--kind", "hierarchy", "--fixpoint")[0] == 0
    one = io.load_fixture("one_type")
    fmap = tmp_path / "f.json"
    fmap.write_text(io.dumps({"a": {"t'_a": "t_a", "t''_a": "t_a"}, "b": {"t_b": "t_b"}}))
    assert run(capsys, "morphism", "friedenberg", "one_type", "--map-file", str(fmap))[0] == 0
    assert check_type_morphism(io.load_fixture("friedenberg"), one, io.type_map_from_doc(io.loads(fmap.read_text()), ("a", "b")))


def test_morphism_failure_witness(capsys, tmp_path):
    s1 = {
        "space": ["a", "b"], "players": ["1", "2"],
        "families": {"1": [["a", "b"]], "2": [["a", "b"]]},
        "types": {"1": ["x"], "2": ["y"]},
        "beliefs": {"1": {"x": {"{a,b}": {"(a,y)": "1/2", "(b,y)": "1/2"}}}, "2": {"y": {"{a,b}": {"(a,x)": "1/1"}}}},
    }
    s2 = json.loads(json.dumps(s1))
    s2["beliefs"]["1"]["x"] = {"{a,b}": {"(a,y)": "1/3", "(b,y)": "2/3"}}
    for name, doc in (("one", s1), ("two", s2)):
        (tmp_path / f"{name}.json").write_text(io.dumps(doc))
    (tmp_path / "id.json").write_text(io.dumps({"1": {"x": "x"}, "2": {"y": "y"}}))
    code, doc = machine(capsys, "morphism", str(tmp_path / "two.json"), str(tmp_path / "one.json"), "--map-file", str(tmp_path / "id.json"))
    assert code == 1
    assert doc["witness"] == {"player": "1", "type": "x", "event": "{a,b}", "point": "(a,y)"}


def test_extend(capsys, tmp_path):
    ts = io.load_fixture("friedenberg")
    p = unfold(ts, 1)[0]["t'_a"]
    path = tmp_path / "p.json"
    path.write_text(io.serialize_prefix(p))
    code, doc = machine(capsys, "extend", str(path), "--order", "4")
    assert code == 0
    q = io.prefix_from_doc(doc)
    assert q.order == 4 and truncate(q, 1) is p
    assert check_prefix_coherence(q).valid
    assert run(capsys, "extend", str(path), "--order", "0")[0] == 2


def test_lift(capsys, tmp_path):
    cps = {"space": ["x"], "factor": ["z1", "z2"], "family": [["x"]], "conditionals": {"{x}": {"(x,z1)": "1/4", "(x,z2)": "3/4"}}}
    (tmp_path / "nu.json").write_text(io.dumps(cps))
    (tmp_path / "f.json").write_text(io.dumps({"domain": ["y1", "y2", "y3"], "map": {"y1": "z2", "y2": "z1", "y3": "z2"}}))
    code, doc = machine(capsys, "lift", str(tmp_path / "nu.json"), "--surjection-file", str(tmp_path / "f.json"))
    assert code == 0
    mu = io.cps_from_doc(doc)
    assert mu.conditionals[0].as_dict() == {("x", "y1"): F(3, 4), ("x", "y2"): F(1, 4)}
    (tmp_path / "g.json").write_text(io.dumps({"map": {"y1": "z1"}}))
    code, _, err = run(capsys, "lift", str(tmp_path / "nu.json"), "--surjection-file", str(tmp_path / "g.json"))
    assert code == 2 and "z2" in err


def test_ingest_signals(capsys, tmp_path):
    path = tmp_path / "sig.json"
    path.write_text(io.dumps({"space": ["s1", "s2", "s3"], "signals": {"a": {"s1": "L", "s2": "L", "s3": "R"}, "b": {"s1": 0, "s2": 0, "s3": 0}}}))
    code, doc = machine(capsys, "ingest-signals", str(path))
    assert code == 0
    assert doc["families"] == {"a": [["s1", "s2"], ["s3"]], "b": [["s1", "s2", "s3"]]}


@pytest.mark.parametrize(
    "argv",
    [["bogus"], ["validate"], ["validate", "no-such-file"], ["unfold", "friedenberg", "--depth", "2"], ["compare", "friedenberg", "one_type", "--depth", "1", "--fixpoint"]],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_syntax_error_exit(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{\n  \"space\": [\n")
    code, _, err = run(capsys, "validate", str(path))
    assert code == 2 and "line" in err


def test_outputs_are_deterministic(capsys):
    for argv in (["completeness", "friedenberg"], ["unfold", "friedenberg", "--player", "b", "--depth", "3"]):
        first = machine(capsys, *argv)
        second = machine(capsys, *argv)
        assert first == second


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "condtypes", "redundancy", "friedenberg"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "t''_a" in proc.stdout
