import argparse
import json
import re
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from resolventlab import __version__
from resolventlab.cli import format_complex, main, parse_complex


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_region_example(capsys):
    code, out, _ = run(capsys, "region", "--m", "2", "--delta", "0.5", "--z", "1+2i")
    res = json.loads(out)
    assert code == 0
    assert res["member"] is True and res["dist"] == 2.0
    assert parse_complex(res["zeta"]) == -3 + 4j


def test_residue_example(capsys):
    code, out, _ = run(capsys, "residue", "--m", "4", "--z", "0.7071+0.7071i", "--t", "0")
    res = json.loads(out)
    assert code == 0
    assert res["value_re"] == pytest.approx(2.22144, abs=1e-4) and res["value_im"] == 0.0
    assert res["rel_err"] < 1e-6


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_bad_flag_value_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["residue", "--z", "1+2k"])
    assert exc.value.code == 2


def test_module_error_is_structured(capsys):
    code, out, err = run(capsys, "residue", "--m", "3", "--z", "1+1i")
    assert code == 1 and out == ""
    obj = json.loads(err)
    assert set(obj) == {"module", "op", "message"} and obj["module"] == "residue"


def test_csv_format_and_metadata(capsys):
    code, out, _ = run(capsys, "multiplier", "--op", "mzloc", "--z", "0+2i", "--tau-grid", "0:4:5")
    assert code == 0
    lines = out.split("\n")
    assert "\r" not in out
    assert lines[0].startswith("tau,")
    assert lines[-2] == f"# seed=42, version={__version__}"
    assert len(lines) == 1 + 5 + 1 + 1
    first = lines[1].split(",")
    assert float(first[0]) == 0.0


def test_out_dir_is_deterministic(tmp_path, capsys):
    argv = ["probe", "--what", "pq", "--model", "torus", "--n", "2", "--cutoff", "6",
            "--z", "3.2+0.4i", "--p", "1.5", "--q", "4", "--seed", "7"]
    outputs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert main(argv + ["--out", str(d)]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    capsys.readouterr()
    runs = [json.loads(o.pop("run.json")) for o in outputs]
    assert outputs[0] == outputs[1] and set(outputs[0]) == {"pq.csv", "pq.json"}
    for cfg in runs:
        cfg["config"].pop("out")
    assert runs[0] == runs[1]
    cfg = runs[0]
    assert cfg["version"] == __version__ and cfg["config"]["seed"] == 7


def test_run_json_reproduces_run(tmp_path, capsys):
    d = tmp_path / "first"
    assert main(["spectra", "--model", "zoll", "--n", "3", "--cutoff", "12", "--report", "weyl",
                 "--out", str(d)]) == 0
    cfg = json.loads((d / "run.json").read_text())["config"]
    argv = ["spectra", "--model", cfg["model"], "--n", str(cfg["n"]), "--cutoff", str(cfg["cutoff"]),
            "--report", cfg["report"], "--out", str(tmp_path / "second")]
    assert main(argv) == 0
    capsys.readouterr()
    for p in d.iterdir():
        if p.name != "run.json":
            assert (tmp_path / "second" / p.name).read_bytes() == p.read_bytes()


def test_other_subcommands_smoke(capsys):
    assert main(["spectra", "--model", "torus", "--n", "2", "--cutoff", "5", "--report", "count"]) == 0
    assert main(["probe", "--what", "blowup", "--model", "zoll", "--n", "3", "--cutoff", "30",
                 "--k-range", "5:10"]) == 0
    assert main(["oscint", "--symbol", "ellipse:1,4", "--x", "1,1", "--fit-radii", "5:50:3"]) == 0
    assert main(["oscint", "--x", "0,3", "--w", "-1", "--fit-radii", "1:4:2"]) == 0
    out = capsys.readouterr().out
    assert "k,branch,alpha_k" in out and "radius,abs_value,bound,ratio" in out


def test_suite_region(capsys):
    code, out, err = run(capsys, "suite", "region")
    assert code == 0
    assert re.match(r"\[PASS\]\s+3 ", err)
    assert out.startswith("criterion,title,passed,measured")


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "resolventlab.cli", "region", "--z", "2i"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["member"] is True


@pytest.mark.parametrize("text,value", [
    ("1+2i", 1 + 2j), ("1 - 2i", 1 - 2j), ("-3.5e-2+1E3i", -0.035 + 1000j), ("2i", 2j),
    ("-i", -1j), ("4", 4 + 0j), (" .5 + .25j ", 0.5 + 0.25j),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "i2", "1+2", "1++2i", "abc", "1+2i+3"])
def test_parse_complex_rejects(text):
    with pytest.raises(argparse.ArgumentTypeError):
        parse_complex(text)


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_complex_round_trip(z):
    assert parse_complex(format_complex(z)) == z
