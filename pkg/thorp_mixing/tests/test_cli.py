"""
Unit tests for cli.py - argument handling, documents and exit codes.
"""
import json

import pytest
from unittest.mock import patch


def _run(capsys, argv):
    from thorp_mixing.cli import run

    code = run(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestArgumentHandling:
    """Test parsing failures and exit code 2."""

    def test_unknown_subcommand(self, capsys, clean_env):
        """Test an unknown subcommand exits 2."""
        code, out, _ = _run(capsys, ["shuffle-everything"])
        assert code == 2
        assert out == ""

    def test_missing_required_flag(self, capsys, clean_env):
        """Test mix without --d exits 2."""
        code, _, _ = _run(capsys, ["mix"])
        assert code == 2

    def test_version_exits_zero(self, capsys, clean_env):
        """Test --version is not an error."""
        code, out, _ = _run(capsys, ["--version"])
        assert code == 0
        assert "1.0.0" in out

    def test_capacity_violation_names_bound(self, capsys, clean_env):
        """Test mix --d 9 exits 2 with the limit in the message."""
        code, out, err = _run(capsys, ["mix", "--d", "9"])
        assert code == 2
        assert out == ""
        assert "limit: d <= 3" in err

    def test_bad_environment_seed(self, capsys, clean_env):
        """Test a malformed THORP_SEED exits 2."""
        clean_env.setenv("THORP_SEED", "-4")
        code, _, err = _run(capsys, ["mix", "--d", "1"])
        assert code == 2
        assert "THORP_SEED" in err

    def test_bad_log_level(self, capsys, clean_env):
        """Test an unknown log level exits 2."""
        code, _, _ = _run(capsys, ["mix", "--d", "1", "--log-level", "chatty"])
        assert code == 2


class TestDocuments:
    """Test the emitted documents."""

    def test_mix_two_cards(self, capsys, clean_env):
        """Test mix --d 1 reports mixing_time 1 with header fields."""
        code, out, _ = _run(capsys, ["mix", "--d", "1", "--threshold", "0.25"])
        document = json.loads(out)
        assert code == 0
        assert document["mixing_time"] == 1
        assert document["tool"] == "thorp_mixing"
        assert document["conventions"] == ["L1-unhalved", "log-natural"]
        assert document["config"] == {"d": 1, "threshold": 0.25, "seed": 0}
        assert [r["round"] for r in document["records"]] == [0, 1]
        assert "runtime_seconds" not in document

    def test_timing_flag_embeds_runtime(self, capsys, clean_env):
        """Test --timing adds runtime_seconds."""
        _, out, _ = _run(capsys, ["mix", "--d", "2", "--timing"])
        document = json.loads(out)
        assert document["mixing_time"] == 4
        assert document["runtime_seconds"] >= 0

    def test_entropy_decay_default_rounds(self, capsys, clean_env):
        """Test entropy-decay runs 2d rounds by default."""
        _, out, _ = _run(capsys, ["entropy-decay", "--d", "2"])
        assert len(json.loads(out)["records"]) == 5

    def test_csv_output(self, capsys, clean_env):
        """Test --format csv writes comment lines then a header."""
        code, out, _ = _run(capsys, ["mix", "--d", "1", "--format", "csv"])
        lines = out.split("\n")
        assert code == 0
        assert "# command: mix" in lines
        assert "round,l1,tv,entropy" in lines

    def test_out_file(self, capsys, clean_env, temp_output_file):
        """Test --out writes the document to a file."""
        code, out, _ = _run(capsys, ["mix", "--d", "1", "--out", temp_output_file])
        assert code == 0
        assert out == ""
        with open(temp_output_file, encoding="utf-8") as f:
            assert json.load(f)["mixing_time"] == 1

    def test_pair_single_d(self, capsys, clean_env):
        """Test pair --d 2 reports checks and a mixing time."""
        code, out, _ = _run(capsys, ["pair", "--d", "2"])
        (record,) = json.loads(out)["records"]
        assert code == 0
        assert record["states"] == 12
        assert record["row_sum_error"] <= 1e-12
        assert record["mixing_time"] == 4
        assert "growth_slope" not in json.loads(out)

    @pytest.mark.slow
    def test_pair_sweep_reports_slope(self, capsys, clean_env):
        """Test pair without --d covers d=2..6 and flags the slope against its ceiling."""
        code, out, _ = _run(capsys, ["pair"])
        document = json.loads(out)
        assert code == 0
        assert [r["mixing_time"] for r in document["records"]] == [4, 5, 6, 7, 8]
        assert document["slope_within_bound"] is True

    def test_couple_sweep(self, capsys, clean_env):
        """Test couple --d 2 runs the exhaustive sweep."""
        code, out, _ = _run(capsys, ["couple", "--d", "2", "--T", "1"])
        document = json.loads(out)
        assert code == 0
        assert document["sweep"]["tables"] == 16
        assert document["sweep"]["passed"] is True
        assert document["sweep"]["same_law"] is True

    def test_couple_single_table(self, capsys, clean_env):
        """Test couple --table 0 emits one trace."""
        code, out, _ = _run(capsys, ["couple", "--d", "2", "--table", "0"])
        document = json.loads(out)
        assert code == 0
        assert document["trace"]["flips"] == [[0, 0], [0, 1], [1, 1]]
        assert [r["partner"] for r in document["records"]] == [1, 0, 0, 1]

    def test_couple_geometric(self, capsys, clean_env):
        """Test --geometric records the schedule tag."""
        _, out, _ = _run(capsys, ["couple", "--d", "1", "--geometric", "--seed", "3"])
        assert json.loads(out)["schedule"]["tag"] == "geometric-half"

    def test_contract(self, capsys, clean_env):
        """Test contract reports strict contraction for d=2."""
        code, out, _ = _run(capsys, ["contract", "--d", "2", "--samples", "6"])
        document = json.loads(out)
        assert code == 0
        assert document["strict_contraction"] is True
        assert len(document["records"]) == 6
        assert document["exact_mixing_time"] == 4

    @pytest.mark.integration
    def test_lemmas_zero_violations(self, capsys, clean_env):
        """Test lemmas --trials 1000 --seed 7 passes every suite."""
        code, out, _ = _run(capsys, ["lemmas", "--trials", "1000", "--seed", "7"])
        document = json.loads(out)
        assert code == 0
        assert document["violations"] == 0
        assert {"projection", "convexity", "pinsker", "chain_rule"} <= {r["suite"] for r in document["records"]}


class TestReproducibility:
    """Test byte-identical documents for identical argv and seed."""

    @pytest.mark.parametrize("argv", [
        ["contract", "--d", "2", "--samples", "6"],
        ["lemmas", "--trials", "200", "--suite", "pinsker", "--suite", "comparison"],
        ["pair", "--d", "3"],
    ])
    def test_identical_runs(self, argv, capsys, clean_env):
        """Test two runs with the same THORP_SEED print the same bytes."""
        clean_env.setenv("THORP_SEED", "1234")
        _, first, _ = _run(capsys, argv)
        _, second, _ = _run(capsys, argv)
        assert first == second
        assert json.loads(first)["config"]["seed"] == 1234

    def test_seed_changes_output(self, capsys, clean_env):
        """Test a different seed gives a different contraction sample set."""
        _, a, _ = _run(capsys, ["contract", "--d", "2", "--samples", "6", "--seed", "1"])
        _, b, _ = _run(capsys, ["contract", "--d", "2", "--samples", "6", "--seed", "2"])
        assert a != b


class TestExitCodes:
    """Test exit code 1 paths."""

    def test_failed_suite_exits_one(self, capsys, clean_env):
        """Test a suite with violations still emits the document and exits 1."""
        from thorp_mixing.services.lemmas import SuiteResult

        failing = [SuiteResult("pinsker", 10, 2, 0.5)]
        with patch('thorp_mixing.cli.run_lemma_suites', return_value=failing):
            code, out, _ = _run(capsys, ["lemmas", "--trials", "10"])
        assert code == 1
        assert json.loads(out)["violations"] == 2

    def test_invariant_violation_exits_one(self, capsys, clean_env, mocker):
        """Test InvariantViolation during a run exits 1 without a document."""
        from thorp_mixing.cli import HANDLERS
        from thorp_mixing.exceptions import InvariantViolation

        mocker.patch.dict(HANDLERS, {"mix": mocker.Mock(side_effect=InvariantViolation("broken kernel"))})
        code, out, err = _run(capsys, ["mix", "--d", "1"])
        assert code == 1
        assert out == ""
        assert "broken kernel" in err
