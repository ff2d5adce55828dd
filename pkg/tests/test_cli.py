import csv
import io
import json
import subprocess
import sys

import pytest

from mqka.cli import EXIT_ABORT, EXIT_OK, EXIT_USAGE, main
from mqka.protocol import RoundTranscript


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def test_agree_text():
    code, text = run("agree", "--participants", "3", "--key-bits", "4", "--seed", "7")
    assert code == EXIT_OK
    extracted = [line.split()[-1] for line in text.splitlines() if line.startswith("participant")]
    assert len(extracted) == 3 and len(set(extracted)) == 1
    assert "verdict: agreed" in text


def test_agree_explicit_keys():
    code, text = run("agree", "-N", "2", "--key-bits", "3", "--keys", "101,011", "--seed", "1")
    assert code == EXIT_OK
    assert "oracle key: 110" in text


@pytest.mark.parametrize(
    "argv",
    [
        ["agree", "--participants", "1"],
        ["agree", "--keys", "01,10", "--key-bits", "2"],
        ["agree", "--key-bits", "two"],
        ["attack", "--kind", "bogus"],
        ["attack", "--kind", "cnot", "--trials", "0"],
        ["cost", "--n", "1..4"],
        ["cost", "--n", "x"],
        ["cost", "--metric", "latency"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(*argv)[0] == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_agree_json_lines_transcript():
    code, text = run("agree", "--key-bits", "4", "--seed", "7", "--format", "json-lines")
    assert code == EXIT_OK
    lines = text.splitlines()
    objs = [json.loads(l) for l in lines]
    assert all(set(o) == {"seq", "sender", "kind", "payload"} for o in objs)
    assert objs[-1]["kind"] == "result"
    assert objs[-1]["payload"]["verdict"] == "agreed"
    t = RoundTranscript.read_json_lines(lines[:-1])
    assert len(t.of_kind("outcome-publish")) == 4


def test_agree_abort_exit_code(monkeypatch):
    from mqka import cli
    from mqka.protocol import AgreementResult

    def aborted(cfg, keys):
        return AgreementResult(keys=[], aborted=True, abort_phase="return"), RoundTranscript()

    monkeypatch.setattr(cli, "run_agreement", aborted)
    code, text = run("agree", "--seed", "1")
    assert code == EXIT_ABORT
    assert "abort" in text


def test_generated_seed_is_printed_and_replayable():
    code, text = run("agree", "--key-bits", "4")
    first, rest = text.split("\n", 1)
    assert first.startswith("seed: ")
    seed = first.split()[-1]
    assert run("agree", "--key-bits", "4", "--seed", seed)[1] == rest


def test_attack_intercept_resend_reports():
    code, text = run("attack", "--kind", "intercept-resend", "--decoys", "1", "--trials", "400",
                     "--seed", "3")
    assert code == EXIT_OK
    rate = float(next(l for l in text.splitlines() if l.startswith("rate:")).split()[1])
    assert abs(rate - 0.25) < 0.08
    for key in ("trials: 400", "detections:", "abort rate:", "eve-info:", "+/-"):
        assert key in text


def test_attack_leader_forge():
    code, text = run("attack", "--kind", "leader-forge", "--desired-bit", "1", "--trials", "30",
                     "--seed", "0")
    assert code == EXIT_OK
    assert "all followers report bit 1" in text


def test_attack_json_and_csv():
    _, js = run("attack", "--kind", "cnot", "--trials", "20", "--seed", "2", "--format", "json-lines")
    assert json.loads(js)["trials"] == 20
    _, c = run("attack", "--kind", "cnot", "--trials", "20", "--seed", "2", "--format", "csv")
    rows = list(csv.reader(io.StringIO(c)))
    assert rows[0][0] == "attack" and rows[1][1] == "20"


def test_attack_bad_victim():
    assert run("attack", "--kind", "fake-participant", "--victim", "5", "--trials", "2")[0] == EXIT_USAGE


def test_cost_csv():
    code, text = run("cost", "--metric", "transmissions", "--n", "2..10")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(text), strict=True))
    assert len(rows) == 10 and all(len(r) == 7 for r in rows)
    row5 = dict(zip(rows[0], rows[4]))
    assert row5["N"] == "5" and row5["Proposed"] == "16"


def test_cost_delay_row():
    _, text = run("cost", "--metric", "delay", "--n", "3..3")
    header, row = [l.split(",") for l in text.splitlines()]
    d = dict(zip(header, row))
    assert d["Liu"] == "2" and d["Proposed"] == "4"


def test_cost_other_formats():
    _, text = run("cost", "--metric", "decoys", "--n", "2..3", "--format", "json-lines")
    assert [json.loads(l)["Proposed"] for l in text.splitlines()] == [40, 80]
    _, text = run("cost", "--metric", "decoys", "--n", "2..3", "--format", "text")
    assert text.startswith("metric: decoys")


def test_output_file(tmp_path):
    path = tmp_path / "t.csv"
    code, text = run("cost", "--n", "2..4", "--output", str(path))
    assert code == EXIT_OK and text == ""
    assert path.read_text().startswith("N,ShiZhong")


def test_selftest():
    code, text = run("selftest")
    assert code == EXIT_OK
    lines = text.splitlines()
    assert len(lines) == 4 and all(l.startswith("PASS") for l in lines)
    assert "8/8" in lines[0]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "mqka", "cost", "--metric", "delay", "--n", "2..3"],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout.splitlines()[1] == "2,2,2,4,2,2,4"
