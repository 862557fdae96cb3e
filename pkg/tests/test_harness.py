import csv
import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from reclab.cli import main
from reclab.harness import (
    CHECK_NAMES,
    ConfigError,
    ExperimentConfig,
    TrialRecord,
    emit_reports,
    loads,
    read_jsonl,
    run_fixture,
    run_sweep,
    run_trial,
    summarize,
    write_jsonl,
)
from reclab.harness.records import RECORD_KEYS, status_for
from reclab.rng import mix64

SMALL = ExperimentConfig(trials=2)


def rec(check="dpi", slack=0.0, tol=1e-6, **kw):
    base = dict(check=check, trial=0, seed=1, dims=(2, 2, 2), digest="00", lhs=slack, rhs=0.0,
                slack=slack, tol=tol)
    return TrialRecord(**{**base, **kw})


# -- config --------------------------------------------------------------------


def test_config_round_trip():
    cfg = replace(ExperimentConfig(), seed=7, trials=3, q_list=(1.0, 2.0))
    assert loads(cfg.to_json()) == cfg


def test_config_requires_schema():
    with pytest.raises(ConfigError, match="schema"):
        loads('{"seed": 1}')


def test_config_unknown_field():
    with pytest.raises(ConfigError, match="'bogus'"):
        loads('{"schema": "reclab.config/1", "bogus": 1}')


def test_config_syntax_error_has_line_and_column():
    with pytest.raises(ConfigError, match=r"line 3, column \d+"):
        loads('{\n  "schema": "reclab.config/1",\n  "seed": ,\n}')


@pytest.mark.parametrize("field,value,match", [
    ("trials", 0, "trials"),
    ("dims", [[3, 1, 1]], r"dims\[0\]"),
    ("q_list", [0.5], "q_list"),
    ("s_list", [1.0], "s_list"),
    ("tolerances", {"slack_tol": -1}, "slack_tol"),
    ("tolerances", {"nope": 1}, "nope"),
    ("checks", {"nope": True}, "checks.nope"),
])
def test_config_field_errors(field, value, match):
    with pytest.raises(ConfigError, match=match):
        loads(json.dumps({"schema": "reclab.config/1", field: value}))


def test_mix64_reference_value():
    assert mix64(0, 0) == 0xE220A8397B1DCDAF
    assert mix64(1, 0) != mix64(0, 1)


# -- records -------------------------------------------------------------------


@given(st.floats(allow_nan=True, allow_infinity=True), st.floats(1e-12, 1.0))
def test_status_rule(slack, tol):
    expected = "fail" if math.isnan(slack) or slack < -tol else "pass"
    assert status_for(slack, tol) == expected
    assert rec(slack=slack, tol=tol).status == expected


def test_jsonl_round_trip_with_nonfinite(tmp_path):
    records = [rec(slack=-np.inf, lhs=np.inf, status="vacuous-infinite"), rec(slack=0.5, note="x")]
    write_jsonl(records, tmp_path / "r.jsonl")
    lines = (tmp_path / "r.jsonl").read_text().splitlines()
    assert list(json.loads(lines[0])) == list(RECORD_KEYS)
    back = read_jsonl(tmp_path / "r.jsonl")
    assert back[0].lhs == np.inf and back[0].status == "vacuous-infinite"
    assert back[1] == records[1]


def test_bad_status_rejected():
    with pytest.raises(ValueError):
        rec(status="maybe")


def test_emit_empty(tmp_path):
    assert emit_reports([], tmp_path) == 0
    assert (tmp_path / "records.jsonl").read_text() == ""
    rows = list(csv.reader(open(tmp_path / "summary.csv")))
    assert len(rows) == 1 and rows[0][0] == "check"


def test_emit_one_failure(tmp_path):
    assert emit_reports([rec(slack=0.1), rec(slack=-1.0)], tmp_path) == 1
    assert "total failures: 1" in (tmp_path / "summary.txt").read_text()


def test_emit_unwritable_path_names_it(tmp_path):
    target = tmp_path / "file"
    target.write_text("")
    with pytest.raises(OSError, match="file"):
        emit_reports([rec()], target / "sub")


def test_summary_min_slack_matches_records(tmp_path):
    records = run_sweep(SMALL.with_checks(["dpi", "thm1"]))
    emit_reports(records, tmp_path)
    back = read_jsonl(tmp_path / "records.jsonl")
    rows = {r["check"]: r for r in csv.DictReader(open(tmp_path / "summary.csv"))}
    for s in summarize(back):
        expected = min(r.slack for r in back if r.check == s.check and r.status in ("pass", "fail"))
        assert float(rows[s.check]["min_slack"]) == expected


# -- sweeps --------------------------------------------------------------------


def test_identity_fixture_passes():
    records = run_fixture("identity")
    assert {r.check.split(".")[0].split("[")[0] for r in records} >= {"dpi", "thm1", "thm2"}
    assert all(r.status in ("pass", "skipped") for r in records)
    for r in records:
        if r.check.startswith(("dpi", "thm1", "thm2[", "lemma_mon")):
            assert abs(r.slack) < 1e-9, r.check


@pytest.mark.parametrize("name", ["conditional-expectation", "davies"])
def test_example_fixtures_pass(name):
    records = run_fixture(name)
    assert records and all(r.status == "pass" for r in records)


def test_sweep_deterministic_and_ordered(tmp_path):
    cfg = SMALL.with_checks(["dpi", "thm2", "limit"])
    a, b = run_sweep(cfg), run_sweep(cfg)
    strip = lambda rs: [{**r.to_dict(), "wall_time": 0} for r in rs]
    assert strip(a) == strip(b)
    order = [CHECK_NAMES.index(r.check.split(".")[0].split("[")[0]) for r in a]
    assert order == sorted(order)


def test_worker_count_does_not_change_records(monkeypatch):
    cfg = SMALL.with_checks(["dpi", "thm1"])
    one = run_sweep(cfg, workers=1)
    three = run_sweep(cfg, workers=3)
    assert [r.to_dict() | {"wall_time": 0} for r in one] == [r.to_dict() | {"wall_time": 0} for r in three]


def test_seed_derivation():
    (r,) = run_trial(ExperimentConfig(seed=11), "dpi", 4)
    assert r.seed == mix64(11, 4)


def test_degenerate_dims_and_singular_injection():
    cfg = replace(ExperimentConfig(trials=20, dims=((1, 1, 1), (2, 1, 2)), singular_rate=1.0))
    records = run_sweep(cfg.with_checks(["dpi", "thm1", "thm2", "lemma_mon", "hirsch"]))
    assert records
    assert all(r.status in ("pass", "vacuous-infinite", "skipped") for r in records)


# -- command line --------------------------------------------------------------


def test_cli_check(tmp_path, capsys):
    code = main(["check", "dpi", "--trials", "3", "--seed", "5", "--out", str(tmp_path)])
    assert code == 0
    assert len(read_jsonl(tmp_path / "records.jsonl")) == 3
    assert "dpi" in capsys.readouterr().out


def test_cli_sweep_config(tmp_path):
    cfg = replace(ExperimentConfig(trials=2), checks={"hirsch": True})
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    assert {r.check.split("[")[0] for r in read_jsonl(tmp_path / "o" / "records.jsonl")} == {"hirsch"}


def test_cli_config_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{oops")
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_cli_fixture(tmp_path):
    assert main(["fixture", "conditional-expectation", "--out", str(tmp_path)]) == 0
