import json

import pytest

from canosc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_json(capsys):
    code, out, err = run(capsys, "classify", "--family", "power_tail", "--c", "1", "--p", "2", "--t", "1")
    rep = json.loads(out)
    assert code == 0 and rep["command"] == "classify" and rep["result"]["kind"] == "Oscillatory"
    assert rep["system"]["family"] == "power_tail" and "Oscillatory" in err
    assert "elapsed_s" in rep["diagnostics"]


def test_estimate_section5(capsys):
    code, out, _ = run(capsys, "estimate", "--family", "section5", "--deterministic")
    m = json.loads(out)["result"]["m"]
    assert code == 0 and m["lo"] <= 0.25 <= m["hi"]


def test_estimate_one_sign(capsys):
    code, out, _ = run(capsys, "estimate", "--family", "power_tail", "--sign", "-1")
    res = json.loads(out)["result"]
    assert code == 0 and res["sign"] == -1


def test_deterministic_reports_are_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["classify", "--family", "constant_H", "--t", "0.3", "--deterministic", "--output", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "elapsed_s" not in json.loads(a.read_text())["diagnostics"]


def test_config_file_and_stdin(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"system": {"family": "power_tail", "params": {"c": 1.0, "p": 2.0}}, "t": 0.4}))
    code, out, _ = run(capsys, "classify", "--config", str(cfg))
    assert code == 0 and json.loads(out)["result"]["kind"] == "NonOscillatory"
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO(cfg.read_text()))
    code, out, _ = run(capsys, "classify", "--config", "-", "--t", "1")
    assert code == 0 and json.loads(out)["result"]["kind"] == "Oscillatory"


def test_bounds_p3_flags_discrete_spectrum(capsys):
    code, out, err = run(capsys, "bounds", "--family", "power_tail", "--p", "3")
    res = json.loads(out)["result"]
    assert code == 0 and res["discrete_spectrum"] is True and "discrete spectrum" in err


def test_schrodinger_probe_and_csv(capsys, tmp_path):
    csv = tmp_path / "zeros.csv"
    code, out, _ = run(capsys, "schrodinger", "--family", "power_tail", "--t", "1", "--csv", str(csv))
    assert code == 0 and json.loads(out)["result"]["kind"] == "Infinite"
    lines = csv.read_text().splitlines()
    assert lines[0] == "X,count" and len(lines) > 2


def test_trace_csv_to_stdout(capsys):
    code, out, _ = run(capsys, "trace", "--family", "constant_H", "--t", "1", "--horizon", "10")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "x,theta" and float(lines[-1].split(",")[0]) == pytest.approx(10.0)


def test_trace_zero_counts(capsys, tmp_path):
    csv = tmp_path / "z.csv"
    code, out, _ = run(capsys, "trace", "--family", "power_tail", "--t", "1", "--horizon", "1e6", "--zeros",
                       "--csv", str(csv))
    assert code == 0 and json.loads(out)["result"]["zero_count"] == 3


@pytest.mark.parametrize("argv", [
    ["classify", "--family", "power_tail"],                       # no --t
    ["classify", "--family", "no_such_family", "--t", "1"],
    ["classify", "--family", "power_tail", "--t", "0"],
    ["classify", "--family", "power_tail", "--p", "-1", "--t", "1"],
])
def test_config_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_bad_json_config_exits_2(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(capsys, "classify", "--config", str(p))[0] == 2


def test_unknown_flag_is_an_argparse_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--bogus"])
    assert exc.value.code == 2


def test_io_errors_exit_5(capsys, tmp_path):
    assert run(capsys, "classify", "--config", str(tmp_path / "missing.json"))[0] == 5
    out = tmp_path / "no" / "such" / "dir.json"
    assert run(capsys, "classify", "--family", "constant_H", "--t", "1", "--output", str(out))[0] == 5


def test_verify_subset(capsys):
    code, out, err = run(capsys, "verify", "--deterministic", *[f"--skip={i}" for i in (1, 2, 3, 5, 6, 8)])
    res = json.loads(out)["result"]
    assert code == 0 and res["passed"] and [c["number"] for c in res["criteria"]] == [4, 7, 9]
    assert "[PASS] 4." in err
