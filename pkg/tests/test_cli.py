import math

import numpy as np
import pytest

from abep import SystemParams, one_point_moment, two_point_report
from abep.cli import run

WALK_HEADER_SINGLE = "i,closed_left,closed_right,solve_left,solve_right,max_abs_diff"


def _table(capsys):
    out = capsys.readouterr().out
    return [line.split(",") for line in out.strip().splitlines()]


def test_no_arguments_prints_usage(capsys):
    assert run([]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand(capsys):
    assert run(["frobnicate"]) == 2


def test_bad_flag_value(capsys):
    assert run(["absorption", "--n", "three", "--i", "1"]) == 2


def test_absorption_single_table(capsys):
    rc = run(["absorption", "--n", "3", "--i", "2", "--no-header", "--check"])
    assert rc == 0
    rows = _table(capsys)
    assert rows[0] == WALK_HEADER_SINGLE.split(",")
    assert len(rows) == 2
    vals = rows[1]
    assert vals[0] == "2"
    assert float(vals[2]) == 0.5
    assert float(vals[1]) == 0.5
    assert float(vals[5]) < 1e-12


def test_absorption_seventeen_digit_roundtrip(capsys):
    run(["absorption", "--n", "2", "--i", "1", "--no-header"])
    vals = _table(capsys)[1]
    # closed_right is exactly 1/3; the printed text must reparse to the
    # same double
    assert float(vals[2]) == 1.0 / 3.0
    assert "0.333333333333333" in vals[2]


def test_absorption_pair_check_passes(capsys):
    rc = run(["absorption", "--n", "2", "--i", "1", "--j", "2",
              "--no-header", "--check"])
    assert rc == 0
    rows = _table(capsys)
    assert rows[0][:5] == ["i", "j", "solve_both_left", "solve_both_right",
                          "solve_split"]
    assert float(rows[1][-1]) < 1e-12


def test_absorption_unit_edge_disagrees_with_walk_closed_form(capsys):
    # the closed form targets the walk bookkeeping, so checking it against
    # the unit-edge solve at alpha != 1 must fail
    rc = run(["absorption", "--n", "2", "--i", "1", "--j", "2",
              "--alpha", "2.0", "--edge", "unit", "--no-header", "--check"])
    assert rc == 1
    assert float(_table(capsys)[1][-1]) > 1e-3


def test_absorption_out_of_range_is_a_usage_error(capsys):
    assert run(["absorption", "--n", "3", "--i", "7", "--no-header"]) == 2
    assert "error:" in capsys.readouterr().err


def test_moments_table_without_mc(capsys):
    rc = run(["moments", "--n", "2", "--sigma", "0.05", "--tl", "1.0",
              "--tr", "2.0", "--no-mc", "--no-header", "--check"])
    assert rc == 0
    rows = _table(capsys)
    assert rows[0] == ["m", "closed_form", "absorption_route", "mc_mean", "mc_se"]
    p = SystemParams(2, 0.05, 1.0, 1.0, 2.0)
    for m, row in zip((1, 2), rows[1:]):
        assert int(row[0]) == m
        assert float(row[1]) == pytest.approx(one_point_moment(m, p), abs=1e-15)
        assert math.isnan(float(row[3]))
        assert math.isnan(float(row[4]))


def test_moments_two_point_table(capsys):
    rc = run(["moments", "--n", "2", "--sigma", "0.05", "--tl", "1.0",
              "--tr", "2.0", "--two-point", "--no-header"])
    assert rc == 0
    rows = _table(capsys)
    assert rows[0] == ["m", "n", "assembly", "closed_form_display", "difference"]
    assert [(r[0], r[1]) for r in rows[1:]] == [("1", "1"), ("1", "2"), ("2", "2")]
    p = SystemParams(2, 0.05, 1.0, 1.0, 2.0)
    rep = two_point_report(1, 2, p)
    assert float(rows[2][2]) == pytest.approx(rep.assembly, abs=1e-15)
    assert abs(float(rows[2][4])) > 1e-3


def test_simulate_deterministic_bytes(capsys):
    argv = ["simulate", "--n", "2", "--model", "bep", "--dt", "0.01",
            "--t-end", "0.5", "--thinning", "0.1", "--seed", "4", "--no-header"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv) == 0
    second = capsys.readouterr().out
    assert first == second
    lines = first.strip().splitlines()
    assert lines[0] == "t,x1,x2"
    assert len(lines) == 6
    times = [float(line.split(",")[0]) for line in lines[1:]]
    assert times == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5])


def test_header_comment_by_default(capsys):
    run(["absorption", "--n", "2", "--i", "1"])
    out = capsys.readouterr().out
    assert out.startswith("# generated ")
    assert out.splitlines()[1] == WALK_HEADER_SINGLE


def test_out_writes_file(tmp_path, capsys):
    target = tmp_path / "table.csv"
    rc = run(["absorption", "--n", "2", "--i", "1", "--no-header",
              "--out", str(target)])
    assert rc == 0
    assert capsys.readouterr().out == ""
    text = target.read_text()
    assert text.splitlines()[0] == WALK_HEADER_SINGLE


def test_config_file_supplies_values_and_flags_win(tmp_path, capsys):
    cfg = tmp_path / "job.cfg"
    cfg.write_text(
        "# absorption job\n"
        "n = 3\n"
        "i = 1\n"
        "no_header = true\n"
        "check = yes\n")
    rc = run(["absorption", "--config", str(cfg), "--i", "2"])
    assert rc == 0
    rows = _table(capsys)
    assert rows[0] == WALK_HEADER_SINGLE.split(",")
    assert rows[1][0] == "2"          # flag overrode the file value
    assert float(rows[1][2]) == 0.5   # n=3 came from the file


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 2\nbogus = 1\n")
    assert run(["absorption", "--config", str(cfg), "--i", "1"]) == 2
    err = capsys.readouterr().err
    assert ":2:" in err and "bogus" in err


def test_config_malformed_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just a line without equals\n")
    assert run(["absorption", "--config", str(cfg), "--n", "2", "--i", "1"]) == 2
    assert "key=value" in capsys.readouterr().err


def test_config_bad_boolean(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("check = maybe\n")
    assert run(["absorption", "--config", str(cfg), "--n", "2", "--i", "1"]) == 2
    assert "boolean" in capsys.readouterr().err


def test_config_missing_file(capsys):
    assert run(["absorption", "--config", "/nonexistent.cfg",
                "--n", "2", "--i", "1"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_config_underscore_keys_match_hyphen_flags(tmp_path, capsys):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text("t_end = 0.3\nthinning = 0.1\nno_header = on\n")
    rc = run(["simulate", "--config", str(cfg), "--n", "1", "--dt", "0.01",
              "--seed", "0"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4


def test_verify_intertwining_small_run(capsys):
    rc = run(["verify-intertwining", "--n", "2", "--states", "5",
              "--funcs", "2", "--check", "--no-header", "--seed", "0"])
    assert rc == 0
    rows = _table(capsys)
    assert rows[0] == ["state", "max_residual"]
    assert len(rows) == 6
    assert all(float(r[1]) < 1e-4 for r in rows[1:])


def test_verify_duality_quick_run(capsys):
    rc = run(["verify-duality", "--n", "1", "--model", "bep", "--t", "0.2",
              "--runs", "400", "--dt", "0.005", "--check", "--z-max", "5",
              "--seed", "2", "--no-header"])
    assert rc == 0
    rows = _table(capsys)
    assert rows[0] == ["lhs", "lhs_se", "rhs", "rhs_se", "z_score"]
    assert float(rows[1][4]) < 5.0


def test_reversible_check_run(capsys):
    rc = run(["reversible-check", "--n", "2", "--sigma", "0.05", "--alpha", "1",
              "--t", "0.5", "--samples", "20000", "--check", "--no-header",
              "--seed", "1"])
    assert rc == 0
    rows = _table(capsys)
    assert rows[0] == ["name", "expected", "observed", "se", "z_score"]
    assert rows[1][0] == "moment_m1"
    assert rows[-1][0] == "acceptance_rate"
    # two sites: no closed-form acceptance prediction is made
    assert math.isnan(float(rows[-1][1]))


def test_reversible_check_truncation_regime_reports_failure(capsys):
    # at sigma*T = 0.2 the conditioning on the reachable domain shifts the
    # sampled moment by about five standard errors relative to the closed
    # form, and --check is expected to say so
    rc = run(["reversible-check", "--n", "1", "--sigma", "0.2", "--alpha", "1",
              "--t", "1.0", "--samples", "20000", "--check", "--no-header",
              "--seed", "1"])
    assert rc == 1
    row = _table(capsys)[1]
    observed, z = float(row[2]), float(row[4])
    assert z > 3.0
    # the shift matches the exact truncated-law expectation
    exact = 1.0 - 0.2 * (1.0 - 5.0 * math.exp(-5.0) / -math.expm1(-5.0))
    assert observed == pytest.approx(exact, abs=5 * float(row[3]))
