#!/usr/bin/env python3
"""
Study Layer Tests

Configuration loading, test-vector specs, report rendering, the study runner,
the acceptance suites and the command-line entry point.
"""

import math

import numpy as np
import orjson
import pytest

import main
from src.core.errors import StudyConfigError
from src.operators.diagnostics import DiagnosticCheck
from src.study import checks as checks_module
from src.study.checks import CHECK_COLUMNS, SUITES, module_invariants_suite
from src.study.config import (
    DEFAULT_RADII,
    LibrarySettings,
    build_study_config,
    load_study_config,
)
from src.study.reporting import format_float, header_block, render_csv, render_json
from src.study.runner import CommandOutput, random_bra, render_study, run_study
from src.study.vectors import parse_vector_spec, validate_vector_spec, vector_label


@pytest.fixture
def study_file(tmp_path):
    """A YAML study over the vacuum with an explicit radius list."""
    path = tmp_path / "study.yaml"
    path.write_text(
        "vector: fock 0\n"
        "dim: 16\n"
        "radii: [1.0, 2.0, 3.0]\n"
        "output:\n"
        "  format: csv\n"
    )
    return path


class TestStudyConfig:
    """Test study configuration models and YAML loading."""

    def test_defaults(self):
        """Test default dimension, radii and grid."""
        cfg = build_study_config({"vector": "fock 0"})
        assert cfg.dim == 64
        assert cfg.resolved_radii() == list(DEFAULT_RADII)
        assert cfg.output.format == "csv"
        assert not cfg.quadrature

    def test_sweep(self):
        """Test a geometric sweep expands to start * factor^i."""
        cfg = build_study_config({"vector": "fock 1", "sweep": {"start": 0.5, "factor": 2.0, "count": 4}})
        assert cfg.resolved_radii() == [0.5, 1.0, 2.0, 4.0]

    def test_radii_and_sweep_conflict(self):
        """Test that giving both radius choices is rejected."""
        with pytest.raises(StudyConfigError):
            build_study_config({"vector": "fock 0", "radii": [1.0],
                                "sweep": {"start": 1.0, "factor": 2.0, "count": 2}})

    @pytest.mark.parametrize("data", [
        {"vector": "fock 0", "radii": [2.0, 1.0]},
        {"vector": "fock 0", "radii": []},
        {"vector": "fock 0", "radii": [0.0, 1.0]},
        {"vector": "fock 0", "dim": 0},
        {"vector": "fock 0", "grid": "64"},
        {"vector": "squeezed 0.1"},
        {"vector": "fock 0", "unknown": 1},
    ])
    def test_invalid_configs(self, data):
        """Test that validation failures surface as StudyConfigError."""
        with pytest.raises(StudyConfigError):
            build_study_config(data)

    def test_load_yaml(self, study_file):
        """Test reading a YAML study."""
        cfg = load_study_config(str(study_file))
        assert cfg.vector == "fock 0"
        assert cfg.dim == 16
        assert cfg.resolved_radii() == [1.0, 2.0, 3.0]

    def test_overrides_win(self, study_file):
        """Test that non-None overrides replace file keys and None leaves them."""
        cfg = load_study_config(str(study_file), {"dim": 32, "vector": None})
        assert cfg.dim == 32
        assert cfg.vector == "fock 0"

    def test_sweep_override_replaces_radii(self, study_file):
        """Test that a sweep flag drops the file's radius list."""
        cfg = load_study_config(str(study_file), {"sweep": {"start": 1.0, "factor": 3.0, "count": 2}})
        assert cfg.radii is None
        assert cfg.resolved_radii() == [1.0, 3.0]

    def test_unreadable_and_malformed_files(self, tmp_path):
        """Test missing files, bad YAML and non-mapping documents."""
        with pytest.raises(StudyConfigError):
            load_study_config(str(tmp_path / "missing.yaml"))
        bad = tmp_path / "bad.yaml"
        bad.write_text("vector: [unclosed\n")
        with pytest.raises(StudyConfigError):
            load_study_config(str(bad))
        listing = tmp_path / "list.yaml"
        listing.write_text("- fock 0\n")
        with pytest.raises(StudyConfigError):
            load_study_config(str(listing))

    def test_library_settings_from_environment(self, monkeypatch):
        """Test CRES_* environment overrides."""
        monkeypatch.setenv("CRES_DEFAULT_GRID", "128x64")
        monkeypatch.setenv("CRES_BISECTION_STEPS", "12")
        settings = LibrarySettings()
        assert settings.default_grid == "128x64"
        assert settings.bisection_steps == 12


class TestVectorSpecs:
    """Test the test-vector grammar."""

    def test_fock(self):
        """Test fock 3 at dim 8."""
        v = parse_vector_spec("fock 3", 8)
        assert v.dim == 8
        assert v.coeffs[3] == 1.0
        assert v.norm_sq() == 1.0

    def test_geometric(self):
        """Test c_n = sqrt(1 - q^2) q^n."""
        v = parse_vector_spec("geometric 0.5", 4)
        expected = math.sqrt(0.75) * np.array([1.0, 0.5, 0.25, 0.125])
        assert np.allclose(v.coeffs, expected, rtol=1e-15, atol=0)

    def test_coherent(self):
        """Test coherent 1,0 at dim 2 gives (e^{-1/2}, e^{-1/2})."""
        v = parse_vector_spec("coherent 1,0", 2)
        assert list(v.coeffs) == pytest.approx([math.exp(-0.5), math.exp(-0.5)], rel=1e-14)

    def test_file_vector(self, tmp_path):
        """Test 're im' lines, comments and zero padding."""
        path = tmp_path / "v.txt"
        path.write_text("# two modes\n0.6 0\n\n0 0.8\n")
        v = parse_vector_spec(f"file {path}", 4)
        assert list(v.coeffs) == [0.6, 0.8j, 0, 0]

    def test_file_vector_relative_to_base_dir(self, tmp_path):
        """Test relative paths resolve against the config directory."""
        (tmp_path / "v.txt").write_text("1 0\n")
        v = parse_vector_spec("file v.txt", 2, base_dir=str(tmp_path))
        assert list(v.coeffs) == [1.0, 0.0]

    @pytest.mark.parametrize("text,dim", [
        ("fock 8", 8),
        ("fock -1", 8),
        ("coherent 1", 4),
        ("coherent nan,0", 4),
        ("geometric 1.0", 4),
        ("geometric 0", 4),
        ("vacuum", 4),
        ("fock 0", 0),
    ])
    def test_rejected_specs(self, text, dim):
        """Test malformed and out-of-range specs."""
        with pytest.raises(StudyConfigError):
            parse_vector_spec(text, dim)

    def test_rejected_files(self, tmp_path):
        """Test unreadable, malformed, oversized and zero file vectors."""
        with pytest.raises(StudyConfigError):
            parse_vector_spec(f"file {tmp_path / 'none.txt'}", 4)
        bad = tmp_path / "bad.txt"
        bad.write_text("1 2 3\n")
        with pytest.raises(StudyConfigError):
            parse_vector_spec(f"file {bad}", 4)
        long = tmp_path / "long.txt"
        long.write_text("1 0\n" * 5)
        with pytest.raises(StudyConfigError):
            parse_vector_spec(f"file {long}", 4)
        zero = tmp_path / "zero.txt"
        zero.write_text("0 0\n")
        with pytest.raises(StudyConfigError):
            parse_vector_spec(f"file {zero}", 4)

    def test_validate_without_building(self):
        """Test grammar checks that need no dimension."""
        validate_vector_spec("fock 100")
        with pytest.raises(StudyConfigError):
            validate_vector_spec("fock x")

    def test_labels(self):
        """Test report labels."""
        assert vector_label(" fock  2 ") == "fock 2"
        assert vector_label("geometric 0.5") == "geometric 0.5 (slow-tail test vector)"


class TestReporting:
    """Test CSV and JSON rendering."""

    def test_format_float_round_trips(self):
        """Test shortest round-trip decimals and non-finite values."""
        for value in (0.1, 1.0 / 3.0, math.exp(-9), 1e-300):
            assert float(format_float(value)) == value
        assert format_float(np.float64(0.5)) == "0.5"
        assert format_float(float("nan")) == "nan"
        assert format_float(float("-inf")) == "-inf"

    def test_csv_layout(self):
        """Test header lines, table header and rows."""
        header = header_block("demo", {"radius": 2.0, "radii": [1.0, 2.0]})
        text = render_csv(header, [(("n", "value", "ok"), [(0, 0.25, True), (1, 1e-20, False)])])
        lines = text.splitlines()
        assert lines[0] == "# command: demo"
        assert lines[1].startswith("# library_version: ")
        assert "# radius: 2.0" in lines
        assert '# radii: ["1.0","2.0"]' in lines
        table = lines[lines.index("n,value,ok"):]
        assert table == ["n,value,ok", "0,0.25,True", "1,1e-20,False"]

    def test_csv_separates_tables(self):
        """Test a blank line between consecutive tables."""
        text = render_csv({"command": "x"}, [(("a",), [(1,)]), (("b",), [(2,)])])
        assert text.endswith("a\n1\n\nb\n2\n")

    def test_json_strings(self):
        """Test that floats are emitted as exact decimal strings."""
        text = render_json({"command": "x"}, {"rows": (("n", "value"), [(3, 0.1)])})
        payload = orjson.loads(text)
        assert payload["header"] == {"command": "x"}
        assert payload["rows"] == [{"n": 3, "value": "0.1"}]


class TestRunStudy:
    """Test the study runner."""

    def test_vacuum_strong_errors(self):
        """Test fock 0 at r = 1, 2, 3 gives e^{-1}, e^{-4}, e^{-9}."""
        cfg = build_study_config({"vector": "fock 0", "dim": 64, "radii": [1.0, 2.0, 3.0]})
        result = run_study(cfg)
        errors = [row.strong_error for row in result.report.rows]
        assert errors == pytest.approx([math.exp(-1), math.exp(-4), math.exp(-9)], rel=1e-12)
        assert result.passed
        assert result.quadrature == []

    def test_quadrature_rows(self):
        """Test one quadrature row per radius with residual checks."""
        cfg = build_study_config({"vector": "coherent 1,0", "dim": 16, "radii": [1.0, 2.0],
                                  "grid": "64x40", "quadrature": True})
        result = run_study(cfg)
        assert [row.grid for row in result.quadrature] == ["64x40", "64x40"]
        names = [check.name for check in result.checks]
        assert "quadrature residuals r=1.0" in names
        assert result.passed

    def test_coherent_quadrature_matches_closed_form(self):
        """Test a 256x256 grid reproduces A_2 applied to coherent(1) to 1e-3."""
        cfg = build_study_config({"vector": "coherent 1,0", "dim": 64, "radii": [2.0],
                                  "grid": "256x256", "quadrature": True})
        result = run_study(cfg)
        assert len(result.quadrature) == 1
        assert result.quadrature[0].radius == 2.0
        assert result.quadrature[0].error_vs_analytic < 1e-3
        assert result.passed

    def test_rendered_header(self):
        """Test the study header records the label and the resolved radii."""
        cfg = build_study_config({"vector": "geometric 0.5", "dim": 32,
                                  "sweep": {"start": 1.0, "factor": 2.0, "count": 3}})
        text = render_study(run_study(cfg))
        assert "# command: converge" in text
        assert "# test_vector_label: geometric 0.5 (slow-tail test vector)" in text
        assert '# radii: ["1.0","2.0","4.0"]' in text
        assert "# output_format: csv" in text
        assert "# workers: 1" in text
        assert "# output:" not in text
        assert "radius,strong_error,weak_defect_self,norm_witness,paper_bound" in text

    def test_reproducible(self):
        """Test byte-identical reports for identical configs."""
        cfg = build_study_config({"vector": "coherent 2,0", "dim": 48, "radii": [0.5, 1.5, 4.0],
                                  "workers": 3})
        assert render_study(run_study(cfg)) == render_study(run_study(cfg))

    def test_random_bra(self):
        """Test the seeded bra is a unit vector and depends on the seed."""
        a, b = random_bra(10, 7), random_bra(10, 8)
        assert a.norm_sq() == pytest.approx(1.0, abs=1e-14)
        assert np.array_equal(a.coeffs, random_bra(10, 7).coeffs)
        assert not np.array_equal(a.coeffs, b.coeffs)


class TestCheckSuites:
    """Test the acceptance suites directly."""

    def test_suite_registry(self):
        """Test suite names are unique and columns fixed."""
        names = [name for name, _ in SUITES]
        assert len(names) == len(set(names))
        assert CHECK_COLUMNS == ("suite", "name", "passed", "detail")

    @pytest.mark.parametrize("suite", [suite for _, suite in SUITES], ids=[name for name, _ in SUITES])
    def test_suite_passes(self, suite):
        """Test every check of the suite passes."""
        checks = suite(np.random.default_rng(0))
        assert checks
        assert [check.name for check in checks if not check.passed] == []

    def test_module_invariants_catch_a_broken_weak_defect(self, mocker):
        """Test a nonzero off-diagonal weak defect fails the module-invariants suite."""
        mocker.patch.object(checks_module, "weak_defect", return_value=1e-3)
        checks = module_invariants_suite(np.random.default_rng(0))
        failed = [check.name for check in checks if not check.passed]
        assert failed == ["weak defect zero off the diagonal"]

    def test_module_invariants_catch_a_broken_diagonal_oracle(self, mocker):
        """Test a drifting radial integral fails the module-invariants suite."""
        mocker.patch.object(checks_module, "diagonal_element_oracle", return_value=0.5)
        checks = module_invariants_suite(np.random.default_rng(0))
        failed = [check.name for check in checks if not check.passed]
        assert failed == ["<m|A_r|m> radial integral vs I_m(r^2)"]


class TestCommandLine:
    """Test main() exit codes and output."""

    def test_gamma_table(self, capsys):
        """Test a CSV table on stdout and exit 0."""
        assert main.main(["gamma-table", "--radius-sq", "1", "--max-n", "5"]) == main.EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("# command: gamma-table\n")
        assert "n,I,Q,recurrence_residual" in out
        row = out.splitlines()[out.splitlines().index("n,I,Q,recurrence_residual") + 1].split(",")
        assert row[0] == "0"
        assert float(row[1]) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-15)

    def test_json_format(self, capsys):
        """Test --format json."""
        assert main.main(["norm-witness", "--radius", "2", "--format", "json"]) == main.EXIT_OK
        payload = orjson.loads(capsys.readouterr().out)
        assert payload["header"]["command"] == "norm-witness"
        assert float(payload["witness"][0]["witness"]) > 0.99

    def test_resolve_and_select_radius(self, capsys):
        """Test two simple pipelines end to end."""
        assert main.main(["resolve", "--vector", "fock 0", "--dim", "4", "--radius", "2"]) == 0
        header = dict(line[2:].split(": ", 1) for line in capsys.readouterr().out.splitlines()
                      if line.startswith("# "))
        assert float(header["strong_error"]) == pytest.approx(math.exp(-4.0), rel=1e-12)
        assert main.main(["select-radius", "--vector", "coherent 1,0", "--eps", "1e-3"]) == 0
        assert ",True" in capsys.readouterr().out

    def test_rejected_input_exit_code(self, capsys):
        """Test exit 2 and a JSON error object on stderr."""
        assert main.main(["resolve", "--vector", "fock 9", "--dim", "4", "--radius", "1"]) == main.EXIT_ERROR
        captured = capsys.readouterr()
        assert captured.out == ""
        error = orjson.loads(captured.err.strip().splitlines()[-1])
        assert error["error"] == "StudyConfigError"
        assert "fock 9" in error["message"]

    def test_invalid_radius_exit_code(self, capsys):
        """Test that a library rejection also maps to exit 2."""
        assert main.main(["norm-witness", "--radius", "0"]) == main.EXIT_ERROR
        error = orjson.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error["error"] == "RejectedInputError"

    def test_failed_checks_exit_code(self, capsys, mocker):
        """Test exit 1 when the report carries a failed assertion."""
        mocker.patch("main.dispatch", return_value=CommandOutput(
            "report\n", False, [DiagnosticCheck("demo", False)]))
        assert main.main(["check"]) == main.EXIT_CHECK_FAILED
        assert capsys.readouterr().out == "report\n"

    def test_check_renders_suite_results(self, capsys, mocker):
        """Test the check table with a stubbed suite run."""
        mocker.patch("main.run_check_suite", return_value=[
            ("gamma-kernel", DiagnosticCheck("I_0(1)", True, "ok")),
            ("klauder", DiagnosticCheck("fock 0", True)),
        ])
        assert main.main(["check", "--seed", "3"]) == main.EXIT_OK
        out = capsys.readouterr().out
        assert "# seed: 3" in out
        assert "# failed: 0" in out
        assert "gamma-kernel,I_0(1),True,ok" in out

    def test_check_passes_end_to_end(self, capsys):
        """Test the unstubbed acceptance suite exits 0 with every group reported."""
        assert main.main(["check", "--seed", "0"]) == main.EXIT_OK
        out = capsys.readouterr().out
        assert "# failed: 0" in out
        for name, _ in SUITES:
            assert f"\n{name}," in out

    def test_converge_from_config(self, study_file, tmp_path, capsys):
        """Test --config with flag overrides and --output."""
        report = tmp_path / "report.json"
        code = main.main(["converge", "--config", str(study_file), "--radii", "1,2",
                          "--format", "json", "--output", str(report)])
        assert code == main.EXIT_OK
        assert capsys.readouterr().out == ""
        payload = orjson.loads(report.read_text())
        assert [row["radius"] for row in payload["convergence"]] == ["1.0", "2.0"]
        assert float(payload["convergence"][1]["strong_error"]) == pytest.approx(math.exp(-4), rel=1e-12)

    def test_converge_is_deterministic(self, capsys):
        """Test byte-identical stdout across runs."""
        argv = ["converge", "--vector", "geometric 0.5", "--dim", "32", "--sweep", "1,2,4"]
        assert main.main(argv) == 0
        first = capsys.readouterr().out
        assert main.main(argv) == 0
        assert capsys.readouterr().out == first

    def test_converge_without_vector(self, capsys):
        """Test a missing vector is a configuration error."""
        assert main.main(["converge", "--dim", "8"]) == main.EXIT_ERROR
        assert "StudyConfigError" in capsys.readouterr().err
