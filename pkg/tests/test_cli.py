import csv
import io
import json
import subprocess
import sys

import pytest

from minmod import cli, gallery
from minmod.spaces import GRAMMAR


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out)


def test_compute_ex4_t(capsys):
    code, d = run_json(capsys, "compute", "--named", "ex-3.4-T", "--trunc", "64")
    assert code == 0
    ms = [lv["m"] for lv in d["levels"]]
    assert [lv["N"] for lv in d["levels"]][-1] == 64
    assert ms == sorted(ms, reverse=True)
    assert ms[-1] == pytest.approx(1.0, abs=1e-12) and d["converged"]


def test_compute_levels_literal(capsys):
    code, d = run_json(capsys, "compute", "--named", "ex-3.2.3", "--trunc", "4,8")
    assert code == 0 and [lv["N"] for lv in d["levels"]] == [4, 8]


def test_compute_params_and_spec(capsys, tmp_path):
    code, d = run_json(capsys, "compute", "--named", "psum-identity", "--param", "p=1",
                       "--param", "q=2", "--trunc", "16")
    assert code == 0 and d["m"] == pytest.approx(2 ** -0.5, abs=1e-10)
    spec = tmp_path / "op.json"
    spec.write_text(json.dumps({"domain": "flp:2:3", "range": "flp:2:3",
                                "body": {"kind": "diagonal", "entries": [3, 2, 5], "tail": 0}}))
    code, d = run_json(capsys, "compute", "--spec", str(spec), "--trunc", "3")
    assert code == 0 and d["m"] == 2.0
    assert d["levels"][-1]["certificate"] == {"2": 1.0}


def test_classify(capsys):
    code, d = run_json(capsys, "classify", "--domain", "c0", "--range", "c0")
    assert code == 0 and d["wmp"] == "no" and d["cppm"] == "unknown"
    code, d = run_json(capsys, "classify", "--domain", "sum(lp:2,lp:3;outer=3)",
                       "--range", "lp:2", "--explain")
    assert d["wmp"] == "yes" and d["moduli_chain"]
    assert d["explanation"].endswith("WmP by the moduli corollary")


def test_moduli(capsys):
    code, d = run_json(capsys, "moduli", "--space", "james", "--kind", "delta", "--t", "1")
    assert code == 0 and d["closed"] == pytest.approx(0.41421356237, abs=1e-11)
    code, d = run_json(capsys, "moduli", "--space", "lp:2", "--kind", "rho", "--t", "1",
                       "--numeric", "--trunc", "8")
    assert d["numeric"] == pytest.approx(d["closed"], abs=1e-11)
    code, d = run_json(capsys, "moduli", "--space", "tsirelson:2", "--kind", "rho", "--t", "1")
    assert d["one_sided"] == "upper"


def test_sequence_modes(capsys):
    code, d = run_json(capsys, "sequence", "--named", "ex-3.2.3", "--family",
                       "fixed+basis:1:0.5:1;offset=0", "--horizon", "32", "--trunc", "8,32")
    assert code == 0 and d["minimizing"] and d["weak_null"]["status"] == "not_weakly_null"
    code, d = run_json(capsys, "sequence", "--mode", "asymptotic", "--space", "lp:3",
                       "--family", "basis", "--x", "1:1")
    assert d["closed_form"] == pytest.approx(2 ** (1 / 3), abs=1e-11)
    code, d = run_json(capsys, "sequence", "--mode", "weak-null", "--space", "lp:1",
                       "--family", "basis")
    assert d["status"] == "not_weakly_null"


def test_gallery_and_rules(capsys):
    code, d = run_json(capsys, "gallery", "--example", "thm-psum", "--max-trunc", "16")
    assert code == 0 and d["passed"]
    code, d = run_json(capsys, "rules")
    assert code == 0 and "hilbert-pair" in [r["id"] for r in d["rules"]]


def test_attainify(capsys):
    code, d = run_json(capsys, "attainify", "--named", "ex-3.2.3", "--eps", "0.1", "--trunc", "4,8")
    assert code == 0 and d["within_eps"] and d["perturbation_norm"] <= 0.1


@pytest.mark.parametrize("argv", [
    ["classify", "--domain", "l2", "--range", "lp:2"],
    ["compute", "--named", "nope"],
    ["compute"],
    ["compute", "--named", "ex-3.2.3", "--trunc", "x"],
    ["moduli", "--space", "Lp[0,1]:3", "--kind", "delta", "--t", "1"],
    ["frobnicate"],
    ["gallery", "--example", "ex-9.9"],
])
def test_invalid_input_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert GRAMMAR in err and err.count(GRAMMAR) == 1


def test_strict_non_convergence_exit_3(capsys):
    code, out, err = run(capsys, "compute", "--named", "ex-3.2.3", "--trunc", "4,8", "--strict")
    assert code == 3 and "error" in err
    assert json.loads(out)["converged"] is False


def test_failed_check_exit_1(capsys, monkeypatch):
    def broken(cfg):
        r = gallery.GalleryReport("broken", "always fails")
        r.check("one equals two", 1 == 2, 1, 2)
        return r
    monkeypatch.setitem(gallery.EXAMPLES, "broken", broken)
    code, out, _ = run(capsys, "gallery", "--example", "broken")
    d = json.loads(out)
    assert code == 1 and not d["passed"] and d["examples"][0]["checks"][0]["passed"] is False


def test_deterministic_output(capsys):
    argv = ["compute", "--named", "ex-3.2.2", "--param", "p=3", "--trunc", "8,16", "--seed", "5"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def _numbers(rows):
    out = {}
    for k, v in rows:
        if isinstance(v, bool) or v in ("true", "false"):
            continue
        try:
            out[k] = float(v)
        except (TypeError, ValueError):
            pass
    return out


def test_table_csv_json_agree(capsys):
    argv = ["compute", "--named", "ex-3.4-T", "--trunc", "8,16"]
    _, d = run_json(capsys, *argv)
    _, table, _ = run(capsys, *argv, "--format", "table")
    _, text, _ = run(capsys, *argv, "--format", "csv")
    flat = _numbers(cli._flatten(d))
    tab = _numbers(line.split(None, 1) for line in table.splitlines())
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["key", "value"]
    assert flat == tab == _numbers(rows[1:])
    assert flat["levels[1].m"] == d["levels"][1]["m"]


def test_twelve_significant_digits(capsys):
    _, d = run_json(capsys, "moduli", "--space", "lp:3", "--kind", "delta", "--t", "1")
    assert d["closed"] == float(f"{2 ** (1 / 3) - 1:.12g}")
    assert cli._num(float("inf")) == "inf" and cli._num(float("nan")) == "nan"


def test_out_file(capsys, tmp_path):
    p = tmp_path / "r.json"
    code, out, _ = run(capsys, "rules", "--out", str(p))
    assert code == 0 and out == ""
    assert json.loads(p.read_text())["rules"]


def test_global_flags_before_command(capsys):
    code, d = run_json(capsys, "--format", "json", "--trunc", "4,8", "compute", "--named", "ex-3.2.3")
    assert code == 0 and [lv["N"] for lv in d["levels"]] == [4, 8]


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "minmod.cli", "moduli", "--space", "lp:2",
                        "--kind", "delta", "--t", "1"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["closed"] == pytest.approx(2 ** 0.5 - 1)
