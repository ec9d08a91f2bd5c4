import json

import pytest

from behavmark.cli import EXIT_IO, EXIT_OK, EXIT_REJECT, EXIT_USAGE, UsageError, main, parse_grid


@pytest.fixture
def workspace(tmp_path):
    key = tmp_path / "key.hex"
    assert main(["keygen", "--seed", "3", "--out", str(key)]) == EXIT_OK
    log = tmp_path / "log.jsonl"
    rc = main(["embed", "--key", str(key), "--payload-hex", "5a", "--payload-bits", "8",
               "--trajectories", "3", "--horizon", "40", "--out", str(log)])
    assert rc == EXIT_OK
    return tmp_path, key, log


def test_parse_grid():
    assert parse_grid("0:4", int) == [0, 1, 2, 3, 4]
    assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("0.1, 0.7") == [0.1, 0.7]
    with pytest.raises(UsageError):
        parse_grid("0:1:0")


def test_decode_reports_payload(workspace, capsys):
    tmp, key, log = workspace
    out = tmp / "rep.json"
    assert main(["decode", "--key", str(key), "--log", str(log), "--payload-bits", "8", "--out", str(out)]) == EXIT_OK
    reports = json.loads(out.read_text())
    assert len(reports) == 3
    assert all(r["payload_hex"] == "5a" and r["status"] == "UNIQUE" for r in reports)


def test_verify_exit_codes(workspace):
    tmp, key, log = workspace
    common = ["--key", str(key), "--log", str(log), "--payload-bits", "8", "--out", str(tmp / "v.json")]
    assert main(["verify", "--payload-hex", "5a", *common]) == EXIT_OK
    assert main(["verify", "--payload-hex", "5b", *common]) == EXIT_REJECT


def test_global_decode_after_heavy_erasure(workspace):
    tmp, key, log = workspace
    erased = tmp / "erased.jsonl"
    assert main(["erase", "--log", str(log), "--erasure-p", "0.6", "--seed", "1", "--out", str(erased)]) == EXIT_OK
    out = tmp / "g.json"
    assert main(["decode", "--global", "--key", str(key), "--log", str(erased),
                 "--payload-bits", "8", "--out", str(out)]) == EXIT_OK
    (report,) = json.loads(out.read_text())
    assert report["scope"] == "global" and report["payload_hex"] == "5a"


def test_truncate_command(workspace):
    tmp, key, log = workspace
    cut = tmp / "cut.jsonl"
    assert main(["truncate", "--log", str(log), "--truncate", "2", "--out", str(cut)]) == EXIT_OK
    assert len(cut.read_text().splitlines()) == 6


def test_raw_mode(tmp_path):
    key = tmp_path / "k"
    main(["keygen", "--seed", "1", "--out", str(key)])
    log = tmp_path / "raw.jsonl"
    assert main(["embed", "--mode", "raw", "--key", str(key), "--payload-hex", "beef",
                 "--horizon", "60", "--out", str(log)]) == EXIT_OK
    out = tmp_path / "r.json"
    assert main(["decode", "--mode", "raw", "--key", str(key), "--log", str(log), "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())[0]["payload_hex"] == "beef"


def test_usage_errors(tmp_path, capsys):
    assert main(["decode", "--key", str(tmp_path / "missing")]) in (EXIT_USAGE, EXIT_IO)
    key = tmp_path / "k"
    main(["keygen", "--seed", "1", "--out", str(key)])
    assert main(["embed", "--key", str(key), "--out", str(tmp_path / "x")]) == EXIT_USAGE
    assert main(["embed", "--key", str(key), "--payload-hex", "abc", "--payload-bits", "4",
                 "--out", str(tmp_path / "x")]) == EXIT_USAGE
    with pytest.raises(SystemExit) as e:
        main(["no-such-command"])
    assert e.value.code == 2


def test_io_errors(tmp_path):
    key = tmp_path / "k"
    main(["keygen", "--seed", "1", "--out", str(key)])
    assert main(["decode", "--key", str(key), "--log", str(tmp_path / "absent.jsonl"),
                 "--payload-bits", "8"]) == EXIT_IO
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{oops\n")
    assert main(["decode", "--key", str(key), "--log", str(bad), "--payload-bits", "8"]) == EXIT_IO


def test_example_command(tmp_path):
    out = tmp_path / "ex.txt"
    assert main(["example", "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    assert "MISMATCH" not in text and "Check-in" in text


def test_keygen_unseeded_is_random(capsys):
    main(["keygen"])
    main(["keygen"])
    a, b = capsys.readouterr().out.split()
    assert a != b and len(a) == 64


def test_small_experiments_write_csv(tmp_path):
    out = tmp_path / "fpr.csv"
    assert main(["fpr", "--grid", "0,4", "--trials", "20", "--payload-bits", "16", "--out", str(out)]) == EXIT_OK
    assert out.read_text().startswith("series,param,estimate,ci_lo,ci_hi,trials\n")
