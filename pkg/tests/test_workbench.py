import random
from fractions import Fraction

import pytest

from codedpir import EMatrix, NotSystematicError, OptimizerConfig, RateError, optimize_cpop
from codedpir.workbench import (
    CodeFileError,
    fixture_path,
    format_e_matrix,
    parse_code_file,
    parse_code_text,
    parse_e_matrix_text,
    serialize_code,
)
from codedpir.workbench.cli import main

from conftest import FIXTURES_DIR, c1_code


class TestCodeFileParsing:
    def test_bundled_c1(self):
        cf = parse_code_file(fixture_path("c1.pchk"))
        assert cf.name == "c1"
        assert cf.code.h == c1_code().h
        assert cf.d_min_hint is None and cf.d_tilde_min_hint is None

    def test_bundled_mds(self):
        cf = parse_code_file(fixture_path("mds53.pchk"))
        assert (cf.code.n, cf.code.k) == (5, 3)
        assert cf.code.field.width == 3

    def test_hints_and_comments(self):
        text = """# a comment
field 1
code 5 3   # trailing comment
dmin 2
dtmin 3

1 1 0 1 0
0 1 1 0 1
"""
        cf = parse_code_text(text, name="x")
        assert cf.d_min_hint == 2
        assert cf.d_tilde_min_hint == 3

    def test_large_code_hints_skip_search(self):
        cf = parse_code_file(FIXTURES_DIR / "c7_array.pchk")
        assert (cf.code.n, cf.code.k) == (187, 121)
        assert cf.d_min_hint == 7
        assert cf.d_tilde_min_hint == 16

    def test_malformed_line_reports_line_number(self):
        text = "field 1\ncode 5 3\n1 1 0 1 zebra\n0 1 1 0 1\n"
        with pytest.raises(CodeFileError, match=r":3: "):
            parse_code_text(text)

    def test_wrong_row_width_reports_line(self):
        text = "field 1\ncode 5 3\n1 1 0 1\n0 1 1 0 1\n"
        with pytest.raises(CodeFileError, match=r":3: row has 4 entries"):
            parse_code_text(text)

    def test_wrong_row_count(self):
        text = "field 1\ncode 5 3\n1 1 0 1 0\n"
        with pytest.raises(CodeFileError, match="expected 2 parity rows"):
            parse_code_text(text)

    def test_entry_outside_field(self):
        text = "field 1\ncode 5 3\n1 1 0 1 0\n0 2 1 0 1\n"
        with pytest.raises(CodeFileError, match="outside GF"):
            parse_code_text(text)

    def test_code_invariant_errors_pass_through(self):
        rate_half = "field 1\ncode 4 2\n1 0 1 0\n0 1 0 1\n"
        with pytest.raises(RateError):
            parse_code_text(rate_half)
        not_systematic = "field 1\ncode 5 3\n1 1 0 0 1\n0 1 1 1 0\n"
        with pytest.raises(NotSystematicError):
            parse_code_text(not_systematic)

    def test_round_trip(self):
        for name in ("c1.pchk", "mds53.pchk"):
            cf = parse_code_file(fixture_path(name))
            text = serialize_code(cf.code, cf.d_min_hint, cf.d_tilde_min_hint)
            again = parse_code_text(text)
            assert again.code.h == cf.code.h
            assert again.d_min_hint == cf.d_min_hint
            assert serialize_code(again.code, again.d_min_hint, again.d_tilde_min_hint) == text


class TestEMatrixFormat:
    def test_round_trip(self):
        e = EMatrix(((1, 0, 1), (1, 1, 0), (0, 1, 1)), beta=2)
        text = format_e_matrix(e)
        assert text == "101\n110\n011\n"
        assert parse_e_matrix_text(text) == e


class TestCli:
    def test_analyze_c1(self, capsys):
        assert main(["analyze", str(fixture_path("c1.pchk"))]) == 0
        out = capsys.readouterr().out
        for line in ("d_min: 2", "d_tilde_min: 3", "theta_lb: 5/2 (2.5)",
                     "theta_non_opt: 5/2 (2.5)", "rank_p: 2", "k_tilde: 1"):
            assert line in out

    def test_analyze_uses_hints(self, capsys):
        assert main(["analyze", str(FIXTURES_DIR / "c6_array.pchk")]) == 0
        out = capsys.readouterr().out
        assert "d_min: 4 (hint)" in out
        assert "d_tilde_min: 6 (hint)" in out
        assert "theta_non_opt: 154/5 (30.8)" in out
        assert "theta_lb: 14/3 (4.6667)" in out

    def test_optimize_writes_matrix(self, tmp_path, capsys):
        out_file = tmp_path / "e.txt"
        rc = main(["optimize", str(fixture_path("c1.pchk")), "--seed", "1",
                   "--out", str(out_file)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "beta_opt: 2" in out
        assert "theta_opt: 5/2 (2.5)" in out
        assert "iterations: 1" in out
        e = parse_e_matrix_text(out_file.read_text())
        assert e.k == 3 and e.beta == 2

    def test_simulate_reports_ok(self, capsys):
        rc = main(["simulate", str(fixture_path("c1.pchk")), "--seed", "5",
                   "--files", "2", "--payload", "8", "--target", "2"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "recovered: ok" in out
        assert "theta: 5/2 (2.5)" in out
        assert "downloaded: 120 field symbols" in out
        assert "retrieved: 48 field symbols" in out

    def test_privacy_passes(self, capsys):
        rc = main(["privacy", str(fixture_path("c1.pchk")), "--seed", "2",
                   "--trials", "1500"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "exact_multisets: ok" in out
        assert "verdict: pass" in out

    def test_table_c1_values(self, capsys):
        rc = main(["table", str(fixture_path("c1.pchk")), "--seed", "3", "--format", "tsv"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        header = lines[0].split("\t")
        row = dict(zip(header, lines[1].split("\t")))
        assert row["d_min"] == "2"
        assert row["dt_min"] == "3"
        assert Fraction(row["theta_non_opt"]) == Fraction(5, 2)
        assert Fraction(row["theta_opt"]) == Fraction(5, 2)
        assert Fraction(row["theta_lb"]) == Fraction(5, 2)
        assert row["exhaustive"] == "yes"

    def test_table_deterministic_output(self, capsys):
        args = ["table", str(fixture_path("c1.pchk")), str(fixture_path("mds53.pchk")),
                "--seed", "3"]
        assert main(args) == 0
        first = capsys.readouterr().out
        assert main(args) == 0
        second = capsys.readouterr().out
        assert first == second

    def test_table_reports_bad_file_and_continues(self, tmp_path, capsys):
        bad = tmp_path / "bad.pchk"
        bad.write_text("field 1\ncode 4 2\n1 0 1 0\n0 1 0 1\n")
        rc = main(["table", str(fixture_path("c1.pchk")), str(bad), "--seed", "1"])
        assert rc == 1
        out = capsys.readouterr().out
        assert "c1" in out
        assert "error:" in out and "rate" in out

    def test_domain_error_exit_code(self, tmp_path, capsys):
        missing = tmp_path / "nope.pchk"
        rc = main(["analyze", str(missing)])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_usage_errors_exit_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["optimize", str(fixture_path("c1.pchk"))])  # seed missing
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_simulate_seed_required(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", str(fixture_path("c1.pchk"))])
        assert exc.value.code == 2
