import json

import pytest

from fatpoints import cli, verify
from fatpoints.cremona import TransformLog
from fatpoints.lattice import parse_system


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("system, head", [("174; 55^10", "-1 CONJECTURAL"), ("2; 2^2", "0 PROVEN"),
                                          ("3; 1^9", "0 PROVEN")])
def test_dim(capsys, system, head):
    code, out, _ = run(capsys, "dim", system)
    assert code == 0 and out.splitlines()[0] == head


def test_reduce_table(capsys):
    code, out, _ = run(capsys, "reduce", "54; 36,15^6")
    rows = out.strip().splitlines()
    assert code == 0 and len(rows) == 4 and rows[-1] == "18; 0, 3, 3, 3, 3, 3, 3"
    _, out, _ = run(capsys, "reduce", "3; 1^9")
    assert len(out.strip().splitlines()) == 1
    _, out, _ = run(capsys, "reduce", "24; 11^4,[4,4]^2")
    assert out.strip().splitlines()[-1] == "7; 2, 2, 2, 3, [0,0], [0,0]"


def test_parse_error_exit(capsys):
    code, _, err = run(capsys, "dim", "3; 1^x")
    assert code == 2 and "position" in err


def test_oracle(capsys, tmp_path):
    code, out, _ = run(capsys, "oracle", "4; 2^5", "--cache-dir", str(tmp_path))
    assert code == 0 and out.startswith("0 UPPER-BOUND-ONLY") and "note:" in out
    code, out, _ = run(capsys, "oracle", "19; 6^10", "--cache-dir", str(tmp_path))
    assert out.startswith("-1 CERTIFIED-EMPTY")
    path = out.strip().splitlines()[-1].split()[-1]
    assert json.loads(open(path).read())["status"] == "CERTIFIED-EMPTY"


def test_oracle_refuses_large(capsys):
    code, _, err = run(capsys, "oracle", "174; 55^10", "--no-cache")
    assert code == 3 and "--long" in err


def test_oracle_reads_cached_long_run(capsys):
    code, out, _ = run(capsys, "oracle", "174; 55^10", "--long", "--trials", "1")
    assert code == 0 and out.startswith("-1 CERTIFIED-EMPTY")


def test_bad_prime(capsys):
    code, _, err = run(capsys, "oracle", "4; 2^5", "--prime", "21")
    assert code == 2 and "not prime" in err
    code, _, _ = run(capsys, "oracle", "40; 2^5", "--prime", "31")
    assert code == 2


def test_degen(capsys):
    code, out, _ = run(capsys, "degen", "174", "55", "6", "--stage", "3")
    comps = [l for l in out.splitlines() if l.startswith("[")]
    assert code == 0 and len(comps) == 5 and "PASS" in out
    code, out, _ = run(capsys, "degen", "100", "30", "0", "--stage", "1", "--ledger")
    assert code == 0 and len([l for l in out.splitlines() if l.startswith("[")]) == 2
    code, _, err = run(capsys, "degen", "174", "55", "6", "--stage", "2")
    assert code == 2 and "16/5" in err


def test_degen_case(capsys):
    code, out, _ = run(capsys, "degen", "193", "61", "7", "--stage", "3", "--case")
    assert code == 0 and "DIM-EXACT(4)" in out


def test_scan(capsys):
    code, out, _ = run(capsys, "scan", "174/55", "19/6", "--m-max", "70", "--coprime")
    assert code == 0 and "case script" in out
    code, _, _ = run(capsys, "scan", "3", "174/55", "--m-max", "60")
    assert code == 1  # the uncovered stretch is reported as open


def test_json_roundtrip_and_determinism(capsys):
    a = run(capsys, "reduce", "24; 11^4,[4,4]^2", "--format", "json")[1]
    b = run(capsys, "reduce", "24; 11^4,[4,4]^2", "--format", "json")[1]
    assert a == b
    data = json.loads(a)
    assert parse_system(data["system"]) == parse_system("24; 11^4,[4,4]^2")
    assert TransformLog.from_json(data["log"]).render().splitlines() == data["table"]
    d1 = run(capsys, "dim", "6; 2^9", "--format", "json")[1]
    assert d1 == run(capsys, "dim", "6; 2^9", "--format", "json")[1]
    s1 = run(capsys, "scan", "19/6", "10/3", "--m-max", "15", "--format", "json", "--jobs", "2")[1]
    assert s1 == run(capsys, "scan", "19/6", "10/3", "--m-max", "15", "--format", "json")[1]


def test_verify_exit_code(capsys, monkeypatch):
    ok = lambda: verify.Criterion("fine", True, "")  # noqa: E731
    bad = lambda: verify.Criterion("broken", False, "")  # noqa: E731
    monkeypatch.setattr(verify, "FAST", (ok,))
    monkeypatch.setattr(verify, "long_runs", lambda *a, **k: ok())
    assert run(capsys, "verify-paper")[0] == 0
    monkeypatch.setattr(verify, "FAST", (ok, bad))
    code, out, _ = run(capsys, "verify-paper")
    assert code == 1 and "[FAIL] broken" in out


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2
