import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from hesvs.cli import main, theta_fraction


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text, newline="")))


def test_prob_fock_reduction(capsys):
    code, out, _ = run(capsys, "prob", "--theta", "0", "--r", "0.5", "--m", "3")
    assert code == 0
    (row,) = rows(out)
    assert float(row["p_event"]) == pytest.approx(math.tanh(0.5) ** 6 / math.cosh(0.5) ** 2, rel=1e-13)


def test_prob_defaults_and_sources_agree(capsys):
    _, a, _ = run(capsys, "prob")
    _, b, _ = run(capsys, "prob", "--source", "oracle")
    _, c, _ = run(capsys, "prob", "--path", "legendre")
    pa, pb, pc = ([float(r["p_event"]) for r in rows(t)] for t in (a, b, c))
    assert [int(r["m"]) for r in rows(a)] == [1, 2, 3, 4]
    assert float(rows(a)[0]["theta"]) == pytest.approx(math.pi / 7)
    assert pa == pytest.approx(pb, rel=1e-10)
    assert pa == pytest.approx(pc, rel=1e-10)


def test_pnd_parity_zero(capsys):
    code, out, _ = run(capsys, "pnd", "--theta", "0.448", "--r", "0.5", "--m", "1", "--n", "4")
    assert code == 0
    assert rows(out) == [{"n": "4", "P": "0.0"}]


def test_pnd_default_range_sums_close_to_one(capsys):
    code, out, _ = run(capsys, "pnd", "--format", "json")
    payload = json.loads(out)
    assert code == 0
    assert [row[0] for row in payload["rows"]] == list(range(21))
    assert sum(row[1] for row in payload["rows"]) == pytest.approx(1.0, abs=1e-6)
    assert payload["metadata"]["theta"] == pytest.approx(2 * math.pi / 7)


def test_moments(capsys):
    code, out, _ = run(capsys, "moments", "--m", "1", "2", "--k", "1", "--l", "1")
    table = rows(out)
    assert code == 0 and len(table) == 2
    for row in table:
        assert float(row["moment_1_1"]) == pytest.approx(float(row["mean_n"]) + 1, rel=1e-12)
    _, oracle_out, _ = run(capsys, "moments", "--m", "1", "2", "--source", "oracle")
    for a, b in zip(table, rows(oracle_out)):
        assert float(a["mandel_q"]) == pytest.approx(float(b["mandel_q"]), rel=1e-9)


def test_moments_requires_k_and_l_together(capsys):
    code, _, err = run(capsys, "moments", "--k", "1")
    assert code == 1
    assert "--k" in err and "--l" in err


def test_zero_probability_exit(capsys):
    code, out, err = run(capsys, "prob", "--theta-frac", "1/4", "--m", "1")
    assert code == 2
    assert out == ""
    assert "m" in err and "1" in err


@pytest.mark.parametrize(
    "argv, name",
    [
        (["prob", "--theta", "3"], "theta"),
        (["prob", "--r", "-1"], "r"),
        (["prob", "--m", "-2"], "m"),
        (["pnd", "--n", "-1"], "n"),
        (["qmap", "--n-r", "1"], "n-r"),
        (["prob", "--source", "oracle", "--n-max", "0"], "n-max"),
    ],
)
def test_invalid_parameter_exit(capsys, argv, name):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert name in err


@pytest.mark.parametrize(
    "argv",
    [["prob", "--bogus"], ["frobnicate"], [], ["prob", "--theta", "x"], ["prob", "--theta-frac", "1/0"],
     ["prob", "--theta", "0.1", "--theta-frac", "1/7"], ["sweep", "--variable", "theta", "--theta", "0.3"]],
)
def test_usage_errors_exit_one(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1
    assert capsys.readouterr().err


def test_theta_fraction():
    assert theta_fraction("2/7") == pytest.approx(2 * math.pi / 7)
    assert theta_fraction("0") == 0.0
    assert theta_fraction("1/2") == pytest.approx(math.pi / 2)


def test_theta_frac_matches_radians(capsys):
    _, a, _ = run(capsys, "prob", "--theta-frac", "1/5")
    _, b, _ = run(capsys, "prob", "--theta", repr(math.pi / 5))
    assert a == b


def test_atomic_output(capsys, tmp_path):
    target = tmp_path / "w.json"
    target.write_text("old")
    code, out, _ = run(capsys, "wigner", "--nx", "5", "--ny", "5", "--m", "1", "2", "--format", "json",
                       "--output", str(target))
    assert code == 0 and out == ""
    payload = json.loads(target.read_text())
    assert payload["columns"] == ["m", "x", "p", "wigner"]
    assert len(payload["rows"]) == 50
    assert payload["metadata"]["m_list"] == "1,2"
    assert os.listdir(tmp_path) == ["w.json"]


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "prob", "--output", str(tmp_path / "missing" / "p.csv"))
    assert code == 1
    assert "output" in err


def test_identical_invocations_are_identical(capsys):
    argv = ["husimi", "--nx", "9", "--ny", "7", "--measure", "alpha"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    assert a.startswith("m,x,p,husimi\r\n")


def test_quad_defaults(capsys):
    code, out, _ = run(capsys, "quad", "--m", "1", "--nx", "11", "--ny", "3")
    table = rows(out)
    assert code == 0 and len(table) == 33
    assert float(table[-1]["phi"]) == pytest.approx(math.pi)


def test_sweep_and_qmap(capsys):
    code, out, _ = run(capsys, "sweep", "--variable", "theta", "--points", "5", "--m", "1")
    table = rows(out)
    assert code == 0
    assert table[2]["p_event"] == ""
    code, out, _ = run(capsys, "qmap", "--m", "2", "--n-theta", "3", "--n-r", "2")
    assert code == 0 and len(rows(out)) == 6


def test_validate_exit_codes(capsys):
    small = ["--grid-theta", "0.4", "--grid-r", "0.5", "--grid-m", "1", "--grid-points", "5"]
    code, out, _ = run(capsys, "validate", *small)
    assert code == 0
    assert json.loads(out)["passed"] is True
    code, out, err = run(capsys, "validate", *small, "--perturb", "B2=1e-5", "--format", "csv")
    assert code == 3
    assert "p_event" in err
    assert any(r["check"] == "p_event" and r["passed"] == "false" for r in rows(out))


def test_threads_env_honoured(capsys, monkeypatch):
    monkeypatch.setenv("HESVS_THREADS", "0")
    code, _, err = run(capsys, "wigner", "--nx", "3", "--ny", "3")
    assert code == 1
    assert "HESVS_THREADS" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hesvs", "prob", "--m", "2", "--format", "json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rows"][0][2] == 2
