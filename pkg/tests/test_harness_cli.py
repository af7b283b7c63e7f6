import subprocess
import sys

import numpy as np
import pytest

from aldc.bits import read_bitfile, write_bitfile
from aldc.cli import main
from aldc.errors import InvalidInput
from aldc.harness import CSV_HEADER, parse_config, records_csv, run_experiment, trial_seed

INSDEL = "[code]\nname = insdel_paldc\n"


def config(tmp_path, text):
    path = tmp_path / "cfg.ini"
    path.write_text(text)
    return str(path)


def test_zero_trials_gives_header_only(tmp_path):
    out = tmp_path / "r.csv"
    cfg = parse_config(f"[experiment]\ntrials = 0\noutput = {out}\n")
    assert run_experiment(cfg) == []
    assert out.read_text() == ",".join(CSV_HEADER) + "\n"


def test_records_are_consistent():
    cfg = parse_config("[code]\nk = 4096\n[experiment]\ntrials = 3\nkappas = 200\n"
                       "deltas = 0, 0.01\nstrategies = uniform_random, prefix_burst\n")
    recs = run_experiment(cfg, write=False)
    assert len(recs) == 3 * 2 * 2
    for r in recs:
        assert r.alpha == r.queries / r.kappa
        assert r.wall_ms is None
    assert all(r.success for r in recs if r.delta == 0)


def test_seeds_depend_on_cell_and_trial():
    seeds = {trial_seed(1, c, t) for c in range(4) for t in range(50)}
    assert len(seeds) == 200
    assert trial_seed(1, 0, 0) != trial_seed(2, 0, 0)


def test_parallel_run_matches_serial():
    text = "[code]\nk = 4096\n[experiment]\ntrials = 4\nkappas = 128, 1024\n"
    a = records_csv(run_experiment(parse_config(text), write=False))
    b = records_csv(run_experiment(parse_config(text + "workers = 2\n"), write=False))
    assert a == b


@pytest.mark.parametrize("name", ["paldc", "insdel_paldc"])
def test_alpha_does_not_grow_with_kappa(name):
    cfg = parse_config(f"[code]\nname = {name}\n[experiment]\ntrials = 20\nkappas = 128, 512, 2048\n"
                       + ("strategies = uniform_indel\n" if name != "paldc" else ""))
    recs = run_experiment(cfg, write=False)
    means = [np.mean([r.alpha for r in recs if r.kappa == kap]) for kap in (128, 512, 2048)]
    assert means[0] >= means[1] >= means[2], means


def test_bad_config_values():
    with pytest.raises(InvalidInput):
        parse_config("[code]\nname = nonsense\n")
    with pytest.raises(InvalidInput):
        parse_config("[code]\nk = many\n")
    cfg = parse_config(INSDEL + "[compiler]\ngamma = 0.9\n")
    assert cfg.problems()


# -- command line -----------------------------------------------------------

def test_validate_default_prints_constants(capsys):
    assert main(["validate"]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_insdel(tmp_path, capsys):
    assert main(["validate", "--config", config(tmp_path, INSDEL)]) == 0
    out = capsys.readouterr().out
    for word in ("rho", "c_stop", "delta_work", "query constant"):
        assert word in out


def test_validate_reports_violations(tmp_path, capsys):
    path = config(tmp_path, INSDEL + "[compiler]\ngamma = 0.9\ntheta = 1.5\n")
    assert main(["validate", "--config", path]) == 2
    err = capsys.readouterr().err
    assert err.count("  - ") >= 2


def test_usage_errors_exit_2(tmp_path):
    assert main([]) == 2
    assert main(["decode", "--in", "x"]) == 2
    assert main(["validate", "--config", str(tmp_path / "missing.ini")]) == 2
    assert main(["validate", "--config", config(tmp_path, "[code]\nname = nope\n")]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "aldc", "validate"], capture_output=True, text=True)
    assert proc.returncode == 0 and "ok" in proc.stdout


@pytest.mark.parametrize("name", ["paldc", "insdel_paldc", "raldc_hamming", "raldc_insdel"])
def test_encode_decode_identical_file(tmp_path, name):
    path = config(tmp_path, f"[code]\nname = {name}\nk = 4096\n")
    x = np.random.default_rng(5).integers(0, 2, 4096, dtype=np.uint8)
    msg, enc, dec = tmp_path / "m.bin", tmp_path / "y.bin", tmp_path / "d.bin"
    write_bitfile(msg, x)
    assert main(["encode", "--config", path, "--in", str(msg), "--out", str(enc), "--seed", "8"]) == 0
    assert main(["decode", "--config", path, "--in", str(enc), "--key", str(enc) + ".key",
                 "--out", str(dec)]) == 0
    assert dec.read_bytes() == msg.read_bytes()


def test_decode_failure_exit_1(tmp_path):
    path = config(tmp_path, "[code]\nname = raldc_hamming\nk = 4096\n")
    x = np.zeros(4096, dtype=np.uint8)
    msg, enc, dec = tmp_path / "m.bin", tmp_path / "y.bin", tmp_path / "d.bin"
    write_bitfile(msg, x)
    main(["encode", "--config", path, "--in", str(msg), "--out", str(enc)])
    y = read_bitfile(enc)
    write_bitfile(enc, np.random.default_rng(0).integers(0, 2, y.size, dtype=np.uint8))
    assert main(["decode", "--config", path, "--in", str(enc), "--out", str(dec)]) == 1


def test_burst_delete_then_decode(tmp_path):
    path = config(tmp_path, INSDEL)
    x = np.random.default_rng(0).integers(0, 2, 1 << 14, dtype=np.uint8)
    msg = tmp_path / "m.bin"
    write_bitfile(msg, x)
    ok = 0
    for s in range(200):
        enc, bad, dec = tmp_path / "y.bin", tmp_path / "z.bin", tmp_path / "d.bin"
        assert main(["encode", "--config", path, "--in", str(msg), "--out", str(enc), "--seed", str(s)]) == 0
        assert main(["corrupt", "--config", path, "--in", str(enc), "--out", str(bad), "--seed", str(s),
                     "--strategy", "burst_delete", "--delta", "0.01"]) == 0
        rc = main(["decode", "--config", path, "--in", str(bad), "--key", str(enc) + ".key",
                   "--out", str(dec), "--seed", str(s)])
        ok += rc == 0 and dec.read_bytes() == msg.read_bytes()
    assert ok / 200 >= 0.99


def test_classify_reports_bounds(tmp_path, capsys):
    path = config(tmp_path, INSDEL + "k = 4096\n")
    msg, enc, bad = tmp_path / "m.bin", tmp_path / "y.bin", tmp_path / "z.bin"
    write_bitfile(msg, np.ones(4096, dtype=np.uint8))
    main(["encode", "--config", path, "--in", str(msg), "--out", str(enc)])
    main(["corrupt", "--config", path, "--in", str(enc), "--out", str(bad), "--strategy", "uniform_indel",
          "--delta", "0.0005"])
    capsys.readouterr()
    table = tmp_path / "blocks.csv"
    assert main(["classify", "--config", path, "--clean", str(enc), "--in", str(bad),
                 "--script", str(bad) + ".edits", "--out", str(table)]) == 0
    assert "local-bad" in capsys.readouterr().out
    assert table.read_text().startswith("block,size,cost,good,local_good\n")


def test_experiment_command_is_deterministic(tmp_path):
    path = config(tmp_path, "[code]\nk = 4096\n[experiment]\ntrials = 5\nseed = 3\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["experiment", "--config", path, "--out", str(a)]) == 0
    assert main(["experiment", "--config", path, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 6


def test_experiment_overrides(tmp_path):
    path = config(tmp_path, "[code]\nk = 4096\n[experiment]\ntrials = 5\n")
    out = tmp_path / "o.csv"
    assert main(["experiment", "--config", path, "--out", str(out), "--trials", "2", "--kappa", "300",
                 "--delta", "0.01", "--strategy", "prefix_burst", "--seed", "9"]) == 0
    rows = out.read_text().splitlines()[1:]
    assert len(rows) == 2
    assert all(",300,prefix_burst," in r for r in rows)
    assert main(["experiment", "--config", path, "--strategy", "burst_delete"]) == 2
