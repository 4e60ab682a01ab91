import os
import subprocess
import sys

import numpy as np
import pytest

from robust_spod import formats
from robust_spod.cli import main, read_history

# 100 x 50 keeps dt = dx on the multilinear benchmark, so shifts stay on the lattice
SMALL = ["--m", "100", "--n", "50"]


@pytest.fixture(autouse=True)
def out_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ROBUST_SPOD_OUT", str(tmp_path))


@pytest.fixture(scope="module")
def small_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    gen = root / "gen"
    assert main(["generate", "multilinear", *SMALL, "--out", str(gen)]) == 0
    runs = {}
    for method in ("jfb", "bfb", "alm"):
        runs[method] = root / method
        assert main(["decompose", str(gen), "--method", method, "--lambda", "0.3",
                     "--out", str(runs[method])]) == 0
    return gen, runs


def history_column(run, name):
    header, rows = read_history(run / "history.csv")
    i = header.index(name)
    return np.array([float(r[i]) for r in rows])


class TestGenerate:
    def test_full_size_layout(self, tmp_path):
        out = tmp_path / "ml"
        assert main(["generate", "multilinear", "--out", str(out)]) == 0
        assert formats.read_matrix(out / "Q.matrix").shape == (400, 200)
        assert sorted(p.name for p in out.glob("shift_*.txt")) == ["shift_1.txt", "shift_2.txt"]
        assert len(formats.read_vector(out / "shift_1.txt")) == 200
        meta = formats.read_kv(out / "meta.txt")
        assert meta["benchmark"] == "multilinear" and meta["true_ranks"] == "4 2"

    def test_no_noise(self, tmp_path):
        out = tmp_path / "s"
        assert main(["generate", "sine_noise", "--noise", "0", *SMALL, "--out", str(out)]) == 0
        assert formats.read_matrix(out / "mask.matrix").shape == (0, 2)

    def test_seed_reproducible(self, tmp_path):
        for name in ("a", "b"):
            assert main(["generate", "sine_noise", *SMALL, "--seed", "7",
                         "--out", str(tmp_path / name)]) == 0
        for f in ("Q.matrix", "mask.matrix", "shift_1.txt", "shift_2.txt", "times.txt"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_default_out_uses_env(self, tmp_path):
        assert main(["generate", "multilinear", *SMALL]) == 0
        assert (tmp_path / "multilinear" / "Q.matrix").exists()

    def test_bad_option(self):
        assert main(["generate", "multilinear", "--m", "3"]) == 2
        assert main(["generate", "volcano"]) == 2


class TestDecompose:
    def test_single_iteration(self, small_runs, tmp_path):
        gen, _ = small_runs
        out = tmp_path / "one"
        assert main(["decompose", str(gen), "--method", "jfb", "--max-iter", "1",
                     "--out", str(out)]) == 0
        _, rows = read_history(out / "history.csv")
        assert len(rows) == 1

    def test_outputs(self, small_runs):
        _, runs = small_runs
        run = runs["jfb"]
        for f in ("frame_1.matrix", "frame_2.matrix", "E.matrix", "spectra.txt",
                  "history.csv", "manifest.json", "summary.txt"):
            assert (run / f).exists()
        assert formats.read_matrix(run / "frame_1.matrix").shape == (100, 50)

    def test_jfb_objective_monotone(self, small_runs):
        f = history_column(small_runs[1]["jfb"], "criterion")
        assert np.all(np.diff(f) <= 1e-12 * np.abs(f[:-1]))

    def test_alm_error(self, small_runs):
        assert history_column(small_runs[1]["alm"], "rel_error")[-1] <= 1e-4

    def test_csv_input(self, small_runs, tmp_path):
        gen, _ = small_runs
        q = formats.read_matrix(gen / "Q.matrix")
        np.savetxt(tmp_path / "q.csv", q, delimiter=",", fmt="%.17g")
        out = tmp_path / "csv"
        assert main(["decompose", "--data", str(tmp_path / "q.csv"),
                     "--shifts", str(gen / "shift_1.txt"), str(gen / "shift_2.txt"),
                     "--dx", "0.01", "--x-min", "-0.5", "--method", "jfb", "--max-iter", "3",
                     "--out", str(out)]) == 0

    def test_manifest_replay(self, small_runs, tmp_path):
        _, runs = small_runs
        out = tmp_path / "replay"
        assert main(["decompose", "--manifest", str(runs["bfb"] / "manifest.json"),
                     "--out", str(out)]) == 0
        for f in ("frame_1.matrix", "frame_2.matrix", "E.matrix"):
            a = formats.read_matrix(runs["bfb"] / f)
            b = formats.read_matrix(out / f)
            assert np.max(np.abs(a - b)) <= 1e-12
        ma = formats.read_json(runs["bfb"] / "manifest.json")
        mb = formats.read_json(out / "manifest.json")
        assert ma["config"] == mb["config"] and ma["inputs"] == mb["inputs"]

    def test_flag_overrides_manifest(self, small_runs, tmp_path):
        _, runs = small_runs
        out = tmp_path / "over"
        assert main(["decompose", "--manifest", str(runs["bfb"] / "manifest.json"),
                     "--max-iter", "2", "--out", str(out)]) == 0
        assert formats.read_json(out / "manifest.json")["config"]["max_iter"] == 2

    def test_missing_file_exit_3(self, tmp_path):
        assert main(["decompose", "--data", str(tmp_path / "nope.matrix"),
                     "--shifts", str(tmp_path / "s.txt"), "--dx", "0.1"]) == 3

    def test_corrupt_matrix_exit_3(self, small_runs, tmp_path):
        gen, _ = small_runs
        bad = tmp_path / "bad.matrix"
        bad.write_bytes((gen / "Q.matrix").read_bytes()[:100])
        assert main(["decompose", "--data", str(bad), "--shifts", str(gen / "shift_1.txt"),
                     "--dx", "0.01"]) == 3

    def test_divergence_exit_4(self, small_runs, tmp_path):
        gen, _ = small_runs
        out = tmp_path / "div"
        assert main(["decompose", str(gen), "--method", "jfb", "--alpha", "1000",
                     "--out", str(out)]) == 4
        assert formats.read_kv(out / "summary.txt")["status"] == "diverged"

    def test_no_input_exit_2(self):
        assert main(["decompose"]) == 2


class TestReport:
    def test_three_methods(self, small_runs, tmp_path, capsys):
        _, runs = small_runs
        out = tmp_path / "report.csv"
        assert main(["report", *(str(runs[m]) for m in ("alm", "jfb", "bfb")),
                     "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 4
        rows = [ln.split(",") for ln in lines[1:]]
        assert [r[1] for r in rows] == ["JFB", "BFB", "ALM"]
        errors = {r[1]: float(r[2]) for r in rows}
        assert errors["ALM"] < min(errors["JFB"], errors["BFB"])
        assert "ALM" in capsys.readouterr().out

    def test_text_output_and_default_path(self, small_runs, tmp_path):
        _, runs = small_runs
        assert main(["report", str(runs["jfb"]), "--out", str(tmp_path / "r.txt")]) == 0
        assert (tmp_path / "r.txt").read_text().startswith("benchmark")
        assert main(["report", str(runs["jfb"])]) == 0
        assert (tmp_path / "report.csv").exists()

    def test_empty(self):
        assert main(["report"]) == 2


def test_entry_point_module(tmp_path):
    env = dict(os.environ, ROBUST_SPOD_OUT=str(tmp_path))
    proc = subprocess.run([sys.executable, "-m", "robust_spod", "generate", "multilinear",
                           *SMALL], env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "multilinear" / "Q.matrix").exists()
    proc = subprocess.run([sys.executable, "-m", "robust_spod", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "decompose" in proc.stdout
