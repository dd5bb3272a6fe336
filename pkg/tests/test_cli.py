import json
import subprocess
import sys
from pathlib import Path

import pytest

from randpres.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_walk_s3(capsys, tmp_path):
    csv = tmp_path / "s3.csv"
    code, out, _ = run(capsys, "walk", CONFIGS / "s3.perm", "--l", "1..100", "--tol", "1e-6", "--csv", csv)
    assert code == 0
    assert "irreducible: yes" in out and "period: 1" in out
    assert "mixing length" in out
    lines = csv.read_text().splitlines()
    assert lines[0] == "l,tv,target" and len(lines) == 101


def test_walk_period_two(capsys, tmp_path):
    grp = tmp_path / "z2.grp"
    grp.write_text("order 2\n0 1\n1 0\nmarks 1 1\n")
    code, out, _ = run(capsys, "walk", grp, "--l", "1..4")
    assert code == 0
    assert "period: 2" in out and "H = {0}" in out


def test_walk_reducible(capsys):
    code, out, _ = run(capsys, "walk", CONFIGS / "z4_reducible.grp", "--l", "1..3")
    assert code == 0
    assert "reducible: marks generate proper subgroup {0,2}" in out


def test_walk_parse_error_has_line_number(capsys, tmp_path):
    bad = tmp_path / "bad.grp"
    bad.write_text("order 2\n0 1\n1 x\nmarks 1 1\n")
    code, _, err = run(capsys, "walk", bad)
    assert code == 1 and ":3" in err


def test_schreier(capsys, tmp_path):
    js = tmp_path / "sys.json"
    code, out, _ = run(capsys, "schreier", "--n", 2, "--J", "cyclic 2", "--f", 1, 0, "--q", 3, "--json", js,
                       "--verbose")
    assert code == 0
    assert "D = 3" in out and "m = 2 (certified)" in out
    assert "action of 1:" in out
    data = json.loads(js.read_text())
    assert data["D"] == 3 and data["min_generators"]["exact"]


def test_schreier_trivial(capsys):
    code, out, _ = run(capsys, "schreier", "--n", 2, "--J", "trivial", "--f", 0, 0, "--q", 5)
    assert code == 0 and "D = 2" in out and "m = 2" in out


def test_schreier_q_too_small(capsys):
    code, _, err = run(capsys, "schreier", "--n", 2, "--J", "cyclic 2", "--f", 1, 0, "--q", 2)
    assert code == 1 and "q must exceed |J|" in err


def test_surject_parity_config(capsys, tmp_path):
    csv = tmp_path / "out.csv"
    code, out, _ = run(capsys, "surject", CONFIGS / "z2_parity.cfg", "--trials", 2000, "--csv", csv)
    assert code == 0
    rows = [ln.split(",") for ln in csv.read_text().splitlines()]
    assert rows[0] == ["l", "rho", "q", "estimate", "ci", "exact", "bound", "parity"]
    for r in rows[1:]:
        if int(r[0]) % 2:
            assert float(r[3]) == 0 and r[7] == "odd"
    assert (tmp_path / "out.json").exists()


def test_surject_rerun_from_manifest(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n = 2\nl = 4,5\nrho = 2\nJ = cyclic 3\nf = 1 0\nq = 5\ntrials = 3000\nseed = 9\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "surject", cfg, "--csv", a, "--threads", 3)[0] == 0
    manifest = json.loads((tmp_path / "a.json").read_text())
    assert manifest["seed"] == 9 and manifest["subcommand"] == "surject" and "version" in manifest
    assert run(capsys, "surject", tmp_path / "a.json", "--csv", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_surject_missing_seed(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n = 2\nl = 4\nrho = 2\nJ = trivial\nf = 0 0\nq = 3\ntrials = 10\n")
    code, _, err = run(capsys, "surject", cfg)
    assert code == 1 and "seed" in err


def test_capacity_exit_code(capsys, tmp_path):
    big = tmp_path / "s9.perm"
    big.write_text("perm degree 9\n1 0 2 3 4 5 6 7 8\n1 2 3 4 5 6 7 8 0\n")
    code, _, err = run(capsys, "walk", big)
    assert code == 2 and "cap" in err


def test_sample_is_reproducible(capsys):
    _, a, _ = run(capsys, "sample", "--n", 2, "--l", 6, "--rho", 3, "--seed", 4, "--count", 2)
    _, b, _ = run(capsys, "sample", "--n", 2, "--l", 6, "--rho", 3, "--seed", 4, "--count", 2)
    assert a == b
    words = [ln for ln in a.splitlines() if ln]
    assert len(words) == 6 and all(len(w.split()) == 6 for w in words)


def test_sample_requires_seed():
    with pytest.raises(SystemExit) as info:
        main(["sample", "--n", "2", "--l", "3", "--rho", "1"])
    assert info.value.code == 1


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["reduced", "3", "3"], "150"),
        (["tuples", "2", "3"], "168"),
        (["genprob", "3", "2", "2"], "0.592592592593"),
        (["cM", "6", "3"], "18"),
    ],
)
def test_count(capsys, argv, expected):
    code, out, _ = run(capsys, "count", *argv)
    assert code == 0 and out.strip() == expected


def test_count_arity_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["count", "reduced", "3"])
    assert info.value.code == 1


def test_module_entry_point_exit_codes():
    ok = subprocess.run([sys.executable, "-m", "randpres", "count", "reduced", "2", "2"],
                        capture_output=True, text=True)
    assert ok.returncode == 0 and ok.stdout.strip() == "12"
    bad = subprocess.run([sys.executable, "-m", "randpres", "nosuch"], capture_output=True, text=True)
    assert bad.returncode == 1


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.cfg")))
def test_shipped_configs_run(capsys, tmp_path, name):
    import time

    t0 = time.perf_counter()
    csv = tmp_path / "out.csv"
    code, _, _ = run(capsys, "surject", CONFIGS / name, "--csv", csv)
    assert code == 0 and time.perf_counter() - t0 < 300
    rows = [ln.split(",") for ln in csv.read_text().splitlines()[1:]]
    if name == "classical.cfg":
        last = rows[-1]
        assert last[0] == "50"
        assert abs(float(last[3]) - 11 / 27) <= float(last[4]) + 1e-3
