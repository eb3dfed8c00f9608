import json
import subprocess
import sys

import numpy as np
import pytest

from pairsolve.cli import main

TOY_GROUND = 4.5103478446361525

TOY_DOC = """\
{
  "type": "reduced_bcs",
  "eps": [1.0, 2.0, 3.0, 4.0],
  "G": 1.0
}
"""

EIGHT_DOC = """\
{
  "type": "reduced_bcs",
  "eps": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
  "G": 0.4
}
"""


@pytest.fixture
def toy_path(tmp_path):
    p = tmp_path / "toy.json"
    p.write_text(TOY_DOC)
    return str(p)


@pytest.fixture
def eight_path(tmp_path):
    p = tmp_path / "eight.json"
    p.write_text(EIGHT_DOC)
    return str(p)


def test_build_from_family_flags(tmp_path, capsys):
    out = tmp_path / "model.json"
    code = main(
        [
            "build",
            "--family", "trigonometric",
            "--g", "0.1",
            "--epsilon=-0.1,0.9",
            "--eta", "0.3,1.0853981633974483",
            "--out", str(out),
            "--no-timestamp",
        ]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert "levels: 2" in text
    assert "free parameters (general): 6" in text
    assert "free parameters (integrable family): 5" in text
    assert "invariants: ok" in text
    doc = json.loads(out.read_text())
    assert doc["type"] == "general"
    assert doc["v1"][0][1] == pytest.approx(0.2 * np.sqrt(2.0), abs=1e-12)
    assert "generated_at" not in doc
    manifest = json.loads((tmp_path / "model.json.manifest.json").read_text())
    assert manifest["command"] == "build"
    assert manifest["output_path"] == str(out)


def test_build_reduced_bcs_and_warning(tmp_path, capsys):
    out = tmp_path / "bcs.json"
    code = main(
        ["build", "--bcs-g", "0.0", "--epsilon", "1,2,3,4", "--out", str(out), "--no-timestamp"]
    )
    assert code == 0
    assert "warning: non-interacting model" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert doc["type"] == "general"
    assert doc["n_levels"] == 4


def test_build_from_input_expands_integrable(tmp_path):
    inp = tmp_path / "spec.json"
    inp.write_text(
        json.dumps(
            {
                "type": "integrable",
                "family": "rational",
                "g": -0.2,
                "epsilon": [1.0, 2.0, 3.0],
                "eta": [1.0, 2.0, 3.0],
            }
        )
    )
    out = tmp_path / "expanded.json"
    assert main(["build", "--input", str(inp), "--out", str(out), "--no-timestamp"]) == 0
    doc = json.loads(out.read_text())
    assert doc["type"] == "general"
    assert doc["v1"][0][1] == pytest.approx(-0.4, abs=1e-13)


def test_build_duplicate_eta_fails_validation(tmp_path, capsys):
    code = main(
        [
            "build",
            "--family", "rational",
            "--g", "0.5",
            "--epsilon", "1,2,3",
            "--eta", "1,3,3",
            "--out", str(tmp_path / "x.json"),
        ]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_build_requires_a_source(tmp_path, capsys):
    assert main(["build", "--out", str(tmp_path / "x.json")]) == 2
    assert "error:" in capsys.readouterr().err


def test_ed_dense_on_toy(toy_path, tmp_path, capsys):
    out = tmp_path / "ed.json"
    code = main(
        ["ed", "--model", toy_path, "--pairs", "2", "--out", str(out), "--no-timestamp"]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert "sector dimension: 6" in text
    assert "method: dense" in text
    assert "wall seconds" not in text
    doc = json.loads(out.read_text())
    assert set(doc) == {"energies", "residual", "method", "n_levels", "n_pairs"}
    assert doc["energies"][0] == pytest.approx(TOY_GROUND, abs=1e-10)
    assert len(doc["energies"]) == 6
    manifest = json.loads((tmp_path / "ed.json.manifest.json").read_text())
    assert manifest["command"] == "ed"
    assert manifest["overrides"]["pairs"] == 2
    assert manifest["overrides"]["seed"] == 0
    assert "out" not in manifest["overrides"]


def test_ed_k_slices_dense_spectrum(toy_path, tmp_path):
    out = tmp_path / "ed.json"
    code = main(
        ["ed", "--model", toy_path, "--pairs", "2", "--k", "3", "--out", str(out), "--no-timestamp"]
    )
    assert code == 0
    assert len(json.loads(out.read_text())["energies"]) == 3


def test_ed_iterative_method(eight_path, tmp_path):
    out = tmp_path / "ed.json"
    code = main(
        [
            "ed",
            "--model", eight_path,
            "--pairs", "4",
            "--method", "iterative",
            "--out", str(out),
            "--no-timestamp",
        ]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["method"] == "iterative"
    assert doc["n_pairs"] == 4


def test_ed_too_large_prints_hint(tmp_path, capsys):
    model = tmp_path / "big.json"
    model.write_text(
        json.dumps({"type": "reduced_bcs", "eps": list(range(1, 41)), "G": 0.5})
    )
    code = main(
        ["ed", "--model", str(model), "--pairs", "20", "--out", str(tmp_path / "x.json")]
    )
    assert code == 3
    err = capsys.readouterr().err
    assert "hint:" in err
    assert "error:" in err


def test_ed_pairs_beyond_levels(toy_path, tmp_path, capsys):
    code = main(
        ["ed", "--model", toy_path, "--pairs", "9", "--out", str(tmp_path / "x.json")]
    )
    assert code == 2


def test_ed_missing_model_file(tmp_path):
    code = main(
        ["ed", "--model", str(tmp_path / "nope.json"), "--pairs", "1", "--out", str(tmp_path / "x.json")]
    )
    assert code == 2


def test_dmrg_on_toy(toy_path, tmp_path, capsys):
    out = tmp_path / "run.json"
    code = main(
        [
            "dmrg",
            "--model", toy_path,
            "--pairs", "2",
            "--m", "8",
            "--out", str(out),
            "--no-timestamp",
        ]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {
        "final_energy",
        "m",
        "n_levels",
        "total_pairs",
        "iterations",
        "memory_peak_entries",
        "wall_seconds",
    }
    assert doc["final_energy"] == pytest.approx(TOY_GROUND, abs=1e-9)
    assert doc["iterations"] == 2
    assert doc["wall_seconds"] == 0.0
    history = (tmp_path / "run.history.csv").read_text()
    lines = history.splitlines()
    assert lines[0].startswith("iteration,levels_in_superblock,target_pairs,E0,")
    assert len(lines) == 3
    text = capsys.readouterr().out
    assert "iterations: 2" in text


def test_dmrg_custom_history_path(toy_path, tmp_path):
    out = tmp_path / "run.json"
    hist = tmp_path / "conv.csv"
    code = main(
        [
            "dmrg",
            "--model", toy_path,
            "--pairs", "2",
            "--m", "4",
            "--history", str(hist),
            "--out", str(out),
            "--no-timestamp",
        ]
    )
    assert code == 0
    assert hist.exists()


def test_dmrg_odd_levels(tmp_path, capsys):
    model = tmp_path / "odd.json"
    model.write_text(json.dumps({"type": "reduced_bcs", "eps": [1.0, 2.0, 3.0], "G": 0.5}))
    code = main(
        ["dmrg", "--model", str(model), "--pairs", "1", "--m", "4", "--out", str(tmp_path / "x.json")]
    )
    assert code == 4


def test_dmrg_infeasible_pairs(toy_path, tmp_path):
    code = main(
        ["dmrg", "--model", toy_path, "--pairs", "5", "--m", "4", "--out", str(tmp_path / "x.json")]
    )
    assert code == 4


def test_compare_json(toy_path, tmp_path, capsys):
    out = tmp_path / "cmp.json"
    code = main(
        [
            "compare",
            "--model", toy_path,
            "--pairs", "2",
            "--m", "8",
            "--out", str(out),
            "--no-timestamp",
        ]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["ed_method"] == "dense"
    assert doc["sig_figs"] >= 9
    assert doc["abs_error"] == pytest.approx(abs(doc["e_dmrg"] - doc["e_ed"]), rel=1e-12)
    assert "agreement:" in capsys.readouterr().out


def test_compare_csv(toy_path, tmp_path):
    out = tmp_path / "cmp.csv"
    code = main(
        [
            "compare",
            "--model", toy_path,
            "--pairs", "2",
            "--m", "4",
            "--format", "csv",
            "--out", str(out),
            "--no-timestamp",
        ]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "m,e_ed,e_dmrg,abs_error,rel_error,sig_figs"
    assert len(lines) == 2
    assert lines[1].split(",")[0] == "4"


def test_sweep_csv(toy_path, tmp_path, monkeypatch):
    monkeypatch.setenv("PAIRSOLVE_THREADS", "1")
    out = tmp_path / "sweep.csv"
    code = main(
        [
            "sweep",
            "--model", toy_path,
            "--pairs", "2",
            "--m-list", "2,4",
            "--out", str(out),
            "--no-timestamp",
        ]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == (
        "m,E0,error_vs_best,trunc_weight,wall_seconds,"
        "peak_memory_entries,self_convergence"
    )
    assert len(lines) == 3
    last = lines[2].split(",")
    assert last[0] == "4"
    assert float(last[2]) == 0.0  # the richest run is its own reference
    assert float(last[6]) == 0.0


def test_sweep_json_format(toy_path, tmp_path, monkeypatch):
    monkeypatch.setenv("PAIRSOLVE_THREADS", "1")
    out = tmp_path / "sweep.json"
    code = main(
        [
            "sweep",
            "--model", toy_path,
            "--pairs", "2",
            "--m-list", "2,4",
            "--format", "json",
            "--out", str(out),
            "--no-timestamp",
        ]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["rows"]) == 2
    assert doc["rows"][0]["m"] == 2
    assert doc["rows"][1]["error_vs_best"] == 0.0


def test_sweep_rejects_non_ascending(toy_path, tmp_path, capsys):
    code = main(
        ["sweep", "--model", toy_path, "--pairs", "2", "--m-list", "4,2", "--out", str(tmp_path / "x.csv")]
    )
    assert code == 2
    assert "ascending" in capsys.readouterr().err


def test_sweep_rejects_bad_worker_env(toy_path, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PAIRSOLVE_THREADS", "many")
    code = main(
        ["sweep", "--model", toy_path, "--pairs", "2", "--m-list", "2,4", "--out", str(tmp_path / "x.csv")]
    )
    assert code == 2
    assert "PAIRSOLVE_THREADS" in capsys.readouterr().err


def test_outputs_are_byte_identical_across_runs(toy_path, tmp_path):
    out = tmp_path / "run.json"
    argv = [
        "dmrg",
        "--model", toy_path,
        "--pairs", "2",
        "--m", "8",
        "--out", str(out),
        "--no-timestamp",
    ]
    assert main(argv) == 0
    first = out.read_bytes()
    first_hist = (tmp_path / "run.history.csv").read_bytes()
    first_manifest = (tmp_path / "run.json.manifest.json").read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first
    assert (tmp_path / "run.history.csv").read_bytes() == first_hist
    assert (tmp_path / "run.json.manifest.json").read_bytes() == first_manifest


def test_module_entry_point(toy_path, tmp_path):
    out = tmp_path / "ed.json"
    proc = subprocess.run(
        [
            sys.executable, "-m", "pairsolve",
            "ed", "--model", toy_path, "--pairs", "2", "--out", str(out), "--no-timestamp",
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "ground energy" in proc.stdout
    assert out.exists()
