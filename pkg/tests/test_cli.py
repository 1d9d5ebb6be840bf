import io
import json
import subprocess
import sys

import pytest

from cpdyn.cli import emit_json, run
from cpdyn.freeness import freeness_report
from cpdyn.lattice import enumerate_ypairs
from cpdyn.sysfile import SystemFileError, parse_system

CHAIN = """\
points = ["0", "1", "2"]
domain = ["1", "2"]
map = [["2", "1"], ["1", "0"]]
hull = ["2"]
"""

LOOP = """\
points = ["0", "1", "2"]
domain = ["0", "1", "2"]
map = [["0", "0"], ["1", "0"], ["2", "1"]]
hull = ["2"]
"""

CYCLE = """\
points = ["a", "b", "c"]
map = [["a", "b"], ["b", "c"], ["c", "a"]]
hull = []
"""


@pytest.fixture
def write(tmp_path):
    def _write(text, name="sys.toml"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return _write


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_parse_chain():
    ps = parse_system(CHAIN)
    assert ps.system.n == 3 and ps.labels == ("0", "1", "2")
    assert ps.system.hull == 0b100 and ps.warnings == ()


def test_parse_errors_carry_positions():
    with pytest.raises(SystemFileError) as e:
        parse_system(CHAIN.replace('["1", "0"]', '["0", "1"]'))
    assert "non-domain point '0'" in str(e.value) and e.value.line == 3
    with pytest.raises(SystemFileError) as e:
        parse_system(CHAIN.replace('hull = ["2"]', "hull = []"))
    assert "'2'" in str(e.value) and e.value.line == 4
    with pytest.raises(SystemFileError) as e:
        parse_system(CHAIN.replace('"0", "1", "2"]', '"0", "1", "1"]'))
    assert "duplicate label '1'" in str(e.value) and (e.value.line, e.value.col) == (1, 21)
    with pytest.raises(SystemFileError) as e:
        parse_system(CHAIN.replace('hull = ["2"]', 'hull = ["q"]'))
    assert "undeclared label 'q'" in str(e.value)
    with pytest.raises(SystemFileError) as e:
        parse_system("points = [\n")
    assert e.value.line is not None


def test_hull_warning():
    ps = parse_system(CHAIN.replace('hull = ["2"]', 'hull = ["1", "2"]'))
    assert ps.warnings and "extra: 1" in ps.warnings[0]


def test_json_round_trip():
    ps = parse_system(LOOP)
    again = parse_system(emit_json(ps))
    assert again.system == ps.system and again.labels == ps.labels


def test_emit_json_shapes():
    ps = parse_system(LOOP)
    doc = json.loads(emit_json(enumerate_ypairs(ps.system), ps.labels))
    assert [(e["v"], e["vprime"]) for e in doc["elements"]] == [
        ([], []), (["0"], []), (["0", "1", "2"], ["2"])]
    doc = json.loads(emit_json(freeness_report(ps.system), ps.labels))
    assert list(doc)[0] == "f_sets" and doc["f_sets"] == {"1": [], "2": [], "3": []}
    empty = parse_system('points = []\nmap = []\nhull = []\n')
    assert json.loads(emit_json(empty)) == {"points": [], "domain": [], "map": [], "hull": []}


def test_lattice_command(write):
    code, out, _ = call("lattice", write(LOOP))
    assert code == 0 and out.startswith("3 Y-pairs") and "0 -> 1" in out and "1 -> 2" in out
    code, out, _ = call("lattice", "--output", "dot", write(LOOP))
    assert code == 0 and out.startswith("digraph") and out.count("->") == 2


def test_simplicity_command(write):
    code, out, _ = call("simplicity", write(CHAIN))
    assert code == 0 and out.splitlines()[0] == "SIMPLE: C*(A,α) ≅ M_3"
    code, out, _ = call("simplicity", write(LOOP))
    assert code == 0 and out.startswith("NOT SIMPLE")


def test_validate_broken_file(write):
    code, _, err = call("validate", write(CHAIN.replace('hull = ["2"]', "hull = []")))
    assert code == 1 and "'2'" in err


def test_bad_options_exit_one(write):
    path = write(CHAIN)
    with pytest.raises(SystemExit) as e:
        call("represent", "--z", "2,0", path)
    assert e.value.code == 1
    assert call("quotient", "--pair", "7", path)[0] == 1
    assert call("witness", "--period", "2", path)[0] == 1
    assert call("freeness", "--output", "dot", path)[0] == 1
    assert call("validate", path + ".missing")[0] == 1


@pytest.mark.parametrize("command", ["validate", "extension", "lattice", "invariant-sets",
                                     "freeness", "simplicity", "dichotomy", "reduce", "represent"])
def test_every_command_runs_and_is_deterministic(write, command):
    path = write(LOOP)
    first = call(command, "--output", "json", path)
    second = call(command, "--output", "json", path)
    assert first[0] == 0 and first == second
    json.loads(first[1])


def test_quotient_and_witness(write):
    code, out, _ = call("quotient", "--pair", "1", write(LOOP))
    assert code == 0 and "interval isomorphism: PASS" in out
    code, out, _ = call("witness", "--period", "3", "--output", "json", write(CYCLE))
    doc = json.loads(out)
    assert code == 0 and doc["witness"] and doc["defect"] == 0 and doc["cycle"] == "|a,c,b"


def test_reduce_accepts_invalid_hull(write):
    code, out, _ = call("reduce", "--output", "json", write(CHAIN.replace('hull = ["2"]', "hull = []")))
    doc = json.loads(out)
    assert code == 0 and doc["input_valid"] is False and doc["system"]["points"] == []


def test_represent_with_z(write):
    code, out, _ = call("represent", "--z", "0,1", "--output", "json", write(CYCLE))
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and doc["gauge_expectation"] is None
    assert doc["covariance"]["covariance_set"] == ["a", "b", "c"]


def test_console_entry_point(write):
    res = subprocess.run([sys.executable, "-m", "cpdyn.cli", "dichotomy", write(CHAIN)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "branch: quasinilpotent" in res.stdout
