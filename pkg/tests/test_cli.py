import json
from fractions import Fraction

import pytest

from tentctl.cli import main
from tentctl.manifest import MANIFEST_SUFFIX, RunManifest, digest


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


@pytest.mark.parametrize("period, expected", [(5, "6"), (1, "2"), (12, "335")])
def test_count(capsys, period, expected):
    code, out, _ = run(capsys, "count", "--period", str(period))
    assert code == 0
    assert out == expected + "\n"


def test_enumerate_jsonl_and_csv(capsys):
    code, out, _ = run(capsys, "enumerate", "--H", "3", "--period", "2")
    assert code == 0
    assert records(out) == [{"T": 2, "symbols": "LR", "sign": -1, "points": ["3/10", "9/10"]}]

    code, out, _ = run(capsys, "enumerate", "--H", "4", "--period", "1", "--format", "csv")
    assert out.splitlines() == ["T,symbols,sign,index,point", "1,L,1,0,0", "1,R,-1,0,4/5"]


def test_find_on_cycle_seed(capsys):
    code, out, _ = run(
        capsys, "find", "--H", "3", "--period", "2", "--theta", "9/10", "--seed-value", "0.3"
    )
    assert code == 0
    [record] = records(out)
    assert record["tau"] == 2 and record["regime"] == "neg"
    assert record["theta"] == "9/10"
    assert [Fraction(p) for p in record["points"]] == [Fraction(3, 10), Fraction(9, 10)]


def test_find_preset_then_verify(capsys, tmp_path):
    found = tmp_path / "found.jsonl"
    code, _, _ = run(capsys, "find", "--preset", "worked-example", "--output", str(found))
    assert code == 0
    cycles = records(found.read_text())
    assert len(cycles) == 4
    assert all(c["T"] == 5 and c["tau"] == 5 for c in cycles)
    assert sorted(c["regime"] for c in cycles) == ["neg", "neg", "pos", "pos"]
    assert all(c["threshold"] == "1.0e-15" for c in cycles)

    code, out, _ = run(capsys, "verify", "--H", "4", "--period", "5", "--input", str(found))
    assert code == 0
    report = json.loads(out)
    assert len(report["matches"]) == len(cycles)
    assert report["unmatched"] == [] and report["ambiguous"] == []


def test_verify_flags_unmatched_cycle(capsys, tmp_path):
    bogus = tmp_path / "bogus.jsonl"
    bogus.write_text(
        json.dumps({"T": 2, "tau": 2, "theta": "9/10", "regime": "neg", "points": ["0.31", "0.93"], "max_residual": "0", "seed": "x"})
        + "\n"
    )
    code, out, _ = run(capsys, "verify", "--H", "3", "--period", "2", "--input", str(bogus))
    assert code == 1
    assert json.loads(out)["unmatched"] == [0]


def test_trace_file(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(
        capsys,
        "find", "--preset", "worked-example",
        "--regime", "neg", "--offset", "-0.4",
        "--seed-value", "0.25", "--trace", str(trace),
    )
    assert code == 0
    lines = trace.read_text().splitlines()
    assert lines[0] == "n,x,U,Uhat"
    assert lines[1].startswith("1,0.25,")
    assert len(records(out)) == 1


def test_trace_needs_a_single_seed(capsys, tmp_path):
    code, _, err = run(
        capsys, "find", "--preset", "worked-example", "--regime", "neg", "--offset", "-0.4",
        "--trace", str(tmp_path / "t.csv"),
    )
    assert code == 2
    assert "--trace" in err


def test_graph_rows(capsys):
    code, out, _ = run(capsys, "graph", "--H", "3", "--period", "1", "--theta", "3/2", "--samples", "11")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "x,f,fT,zeta,F"
    assert len(lines) == 12


def test_cantor_histograms(capsys):
    code, out, _ = run(capsys, "cantor", "--mode", "first-type", "--depth", "10", "--count", "1000")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "bin_left,bin_right,count,density"
    assert len(lines) == 51
    assert sum(int(line.split(",")[2]) for line in lines[1:]) == 1000

    code, out, _ = run(capsys, "cantor", "--mode", "cycles", "--H", "3", "--period", "5", "--bins", "9", "--no-subcycles")
    rows = [line.split(",") for line in out.splitlines()[1:]]
    assert len(rows) == 9
    assert sum(int(r[2]) for r in rows) == 30
    assert rows[4][2] == "0"


def test_bad_slope_names_the_flag(capsys):
    code, _, err = run(capsys, "find", "--H", "1.5", "--period", "2", "--regime", "neg", "--offset", "0")
    assert code == 2
    assert "error: --H:" in err


def test_theta_outside_regimes_needs_force(capsys):
    argv = ["find", "--H", "3", "--period", "2", "--theta", "1", "--seed-value", "0.3"]
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "--theta" in err
    code, out, _ = run(capsys, *argv, "--force")
    assert code == 0
    assert [r["tau"] for r in records(out)] == [2]


def test_manifest_and_replay(capsys, tmp_path):
    output = tmp_path / "count.txt"
    code, out, _ = run(capsys, "count", "--period", "7", "--output", str(output))
    assert code == 0 and out == ""
    assert output.read_text() == "18\n"

    manifest_path = str(output) + MANIFEST_SUFFIX
    manifest = RunManifest.load(manifest_path)
    assert manifest.command == "count"
    assert manifest.parameters["period"] == "7"
    assert manifest.output_digest == digest("18\n")

    code, out, _ = run(capsys, "replay", "--manifest", manifest_path)
    assert code == 0
    assert json.loads(out)["ok"] is True

    data = json.loads(open(manifest_path, encoding="utf-8").read())
    data["output_digest"] = digest("19\n")
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(data, f)
    code, out, _ = run(capsys, "replay", "--manifest", manifest_path)
    assert code == 1
    assert json.loads(out)["ok"] is False


def test_missing_manifest(capsys, tmp_path):
    code, _, err = run(capsys, "replay", "--manifest", str(tmp_path / "nope.json"))
    assert code == 2
    assert "--manifest" in err


@pytest.mark.parametrize("flag", ["--max-iters", "--precision", "--workers"])
def test_zero_counts_are_rejected(capsys, flag):
    code, _, err = run(
        capsys, "find", "--H", "3", "--period", "2", "--theta", "9/10", "--seed-value", "0.3", flag, "0"
    )
    assert code == 2
    assert f"error: {flag}:" in err


def _cycle_line(points, threshold=None):
    record = {"T": 2, "tau": 2, "theta": "9/10", "regime": "neg", "points": points, "max_residual": "0", "seed": "x"}
    if threshold is not None:
        record["threshold"] = threshold
    return json.dumps(record) + "\n"


def test_verify_tolerance_follows_recorded_threshold(capsys, tmp_path):
    near = ["0.300000000001", "0.9"]
    loose = tmp_path / "loose.jsonl"
    loose.write_text(_cycle_line(near))
    code, out, _ = run(capsys, "verify", "--H", "3", "--period", "2", "--input", str(loose))
    assert code == 0
    assert json.loads(out)["max_deviation"] == "1.000e-12"

    strict = tmp_path / "strict.jsonl"
    strict.write_text(_cycle_line(near, threshold="1.0e-15"))
    code, out, _ = run(capsys, "verify", "--H", "3", "--period", "2", "--input", str(strict))
    assert code == 1
    assert json.loads(out)["unmatched"] == [0]
