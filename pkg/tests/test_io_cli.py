import json
import subprocess
import sys

import numpy as np
import pytest

from wavesplit import io
from wavesplit.cli import (
    EXIT_BAD_INPUT,
    EXIT_BUDGET,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    EXIT_VERIFY_FAILED,
    main,
    read_config,
)
from wavesplit.fock import BUDGET_ENV
from wavesplit.lattice import GOLDEN_PATTERNS, ChainSpec, CouplingPattern

from conftest import splitting_pattern


def test_pattern_round_trip_is_bit_exact(tmp_path):
    p = splitting_pattern(7)
    spec = ChainSpec(7, 1.0, np.pi / 4)
    path = tmp_path / "p.csv"
    io.write_pattern(path, p, spec)
    q, spec2 = io.read_pattern(path)
    assert q == p
    assert io.pattern_hash(q) == io.pattern_hash(p)
    assert spec2 == spec


def test_pattern_without_header_spec():
    p = GOLDEN_PATTERNS["golden-5"]
    q, spec = io.parse_pattern(io.format_pattern(p))
    assert q == p and spec is None


@pytest.mark.parametrize(
    "text",
    [
        "site,B_n\n1,0\n2,0\nbond,J_n\n",
        "# L = 3\nsite,B_n\n1,0\n2,0\nbond,J_n\n1,1\n",
        "1,0\n",
        "site,B_n\n1,0,3\n",
    ],
)
def test_malformed_patterns(text):
    with pytest.raises(ValueError):
        io.parse_pattern(text)


def test_pattern_hash_distinguishes():
    a = CouplingPattern([1.0], [0.0, 0.0])
    b = CouplingPattern([1.0], [0.0, 1e-17 + 1e-300])
    assert io.pattern_hash(a) != io.pattern_hash(b)
    assert len(io.pattern_hash(a)) == 16


def test_read_config(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# comment\nlength = 6\nslice-sites = 2, 5  # trailing\n\n")
    assert read_config(path) == {"length": "6", "slice_sites": "2, 5"}
    path.write_text("length 6\n")
    with pytest.raises(ValueError):
        read_config(path)


def test_cli_verify_golden(capsys):
    for name in ("golden-5", "golden-6"):
        assert main(["verify", "--builtin", name]) == EXIT_OK
    out = capsys.readouterr().out
    assert "verification passed" in out and "FAIL" not in out


def test_cli_verify_rejects_pst():
    assert main(["verify", "--builtin", "pst", "-L", "6"]) == EXIT_VERIFY_FAILED


def test_cli_engineer_and_verify_file(tmp_path, capsys):
    out, trace = tmp_path / "p.csv", tmp_path / "t.csv"
    assert main(["engineer", "-L", "9", "--out", str(out), "--trace", str(trace)]) == EXIT_OK
    header, rows = io.read_table(trace)
    assert header == list(io.TRACE_COLUMNS) and len(rows) >= 2
    assert main(["verify", "--pattern", str(out), "--check-tol", "1e-10"]) == EXIT_OK
    assert "converged=True" in capsys.readouterr().out


def test_cli_engineer_not_converged():
    assert main(["engineer", "-L", "20", "--max-iter", "1"]) == EXIT_NOT_CONVERGED


def test_cli_bad_input(tmp_path):
    assert main(["verify", "--pattern", str(tmp_path / "missing.csv")]) == EXIT_BAD_INPUT
    assert main(["engineer"]) == EXIT_BAD_INPUT
    with pytest.raises(SystemExit) as info:
        main(["engineer", "--length", "x"])
    assert info.value.code == EXIT_BAD_INPUT


def test_cli_evolve_raster(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["evolve", "-L", "6", "--site", "2", "--times", "0", "6", "--out", str(out)]) == EXIT_OK
    header, rows = io.read_table(out)
    assert header == list(io.RASTER_COLUMNS) and len(rows) == 12
    values = {(float(t), int(s)): float(v) for t, s, v in rows}
    assert values[(6.0, 2)] == pytest.approx(0.5, abs=1e-10)
    meta = json.loads((tmp_path / "r.csv.json").read_text())
    assert meta["L"] == 6 and meta["site"] == 2 and "pattern_hash" in meta


def test_cli_carpet_with_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("length = 6\nsites = 2 5\nsteps = 2\nslice-sites = 2\n")
    out = tmp_path / "c.csv"
    argv = ["--config", str(cfg), "carpet", "--interaction", "0", "hardcore", "--out", str(out)]
    assert main(argv) == EXIT_OK
    header, rows = io.read_table(tmp_path / "c_U0.csv")
    assert header == list(io.CARPET_COLUMNS) and len(rows) == 3 * 6
    assert (tmp_path / "c_hardcore.csv").exists()
    _, sliced = io.read_table(tmp_path / "c_U0_slices.csv")
    assert {r[1] for r in sliced} == {"2"}


def test_cli_budget_exit(monkeypatch, tmp_path):
    monkeypatch.setenv(BUDGET_ENV, "10")
    argv = ["carpet", "-L", "6", "--sites", "2", "5", "--times", "0", "--out", str(tmp_path / "c.csv")]
    assert main(argv) == EXIT_BUDGET


def test_cli_disorder_deterministic(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        argv = ["disorder", "-L", "8", "--samples", "10", "--strengths", "0.01", "0.1", "--seed", "4", "--out", str(path)]
        assert main(argv) == EXIT_OK
    assert paths[0].read_text() == paths[1].read_text()
    header, rows = io.read_table(paths[0])
    assert header == list(io.SWEEP_COLUMNS) and len(rows) == 2


def test_cli_entangle(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["entangle", "-L", "6", "--initial", "dm", "--out", str(out)]) == EXIT_OK
    header, rows = io.read_table(out)
    assert header == list(io.REPORT_COLUMNS) and len(rows) == 3
    assert min(float(r[2]) for r in rows) >= 1 - 1e-8
    single = tmp_path / "s.csv"
    assert main(["entangle", "-L", "6", "--initial", "single:2", "--out", str(single)]) == EXIT_OK
    assert float(io.read_table(single)[1][0][2]) >= 1 - 1e-10


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "wavesplit", "verify", "--builtin", "golden-6"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "verification passed" in proc.stdout
