"""Harness and CLI: CSV contracts, determinism, exit codes."""

import math
import subprocess
import sys

import numpy as np
import pytest

from tfbs.benchmarks import example1
from tfbs.bs_transform import to_ttfdr
from tfbs.cli import main
from tfbs.harness import (
    PricingConfig,
    StudyConfig,
    error_inf,
    run_convergence_study,
    run_pricing,
    soe_check,
)
from tfbs.mesh import build_graded_mesh, build_spatial_grid
from tfbs.schemes import solve


SMALL_STUDY = dict(
    example=1, alpha=0.3, gamma=4.0, lam=1.0, mode="spatial", ladder=(4, 8)
)


class TestErrorInf:
    def test_zero_when_exact_fed_back(self):
        model, exact_U = example1(0.3, 1.0)
        mesh = build_graded_mesh(1.0, 16, 2.0)
        grid = build_spatial_grid(0.0, 1.0, 8)
        sol = solve(to_ttfdr(model, mesh), mesh, grid, scheme="ds")
        # feed the numeric solution back as the "exact" field
        layer = {float(t): sol.layers[n] for n, t in enumerate(mesh.levels)}
        err = error_inf(sol, lambda x, tau: layer[tau])
        assert err == 0.0


class TestStudyConfig:
    def test_ladder_must_double(self):
        with pytest.raises(ValueError):
            StudyConfig(example=1, alpha=0.3, gamma=4.0, ladder=(4, 8, 12))

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            StudyConfig(example=1, alpha=0.3, gamma=4.0, mode="dual")


@pytest.fixture(scope="module")
def table():
    return run_convergence_study(StudyConfig(**SMALL_STUDY))


class TestConvergenceCsv:
    def test_header_and_shape(self, table):
        lines = table.to_csv().splitlines()
        assert lines[0] == "alpha,gamma,N,M,err_inf,order,time_sec,scheme"
        assert len(lines) == 1 + 4  # 2 ladder x 2 schemes

    def test_first_row_order_empty(self, table):
        for scheme_first in (1, 3):
            fields = table.to_csv().splitlines()[scheme_first].split(",")
            assert fields[5] == ""

    def test_five_significant_digits(self, table):
        row = table.to_csv().splitlines()[1].split(",")
        mantissa = row[4].split("e")[0]
        assert len(mantissa.replace(".", "").replace("-", "")) == 5

    def test_full_precision_companion(self, table, tmp_path):
        short_p, full_p = table.write(tmp_path / "study.csv")
        assert full_p.name == "study_full.csv"
        short = short_p.read_text().splitlines()
        full = full_p.read_text().splitlines()
        assert short[0] == full[0]
        err_full = float(full[1].split(",")[4])
        err_short = float(short[1].split(",")[4])
        assert err_short == pytest.approx(err_full, rel=1e-4)
        assert repr(err_full) == full[1].split(",")[4]

    def test_deterministic_modulo_timing(self, table):
        other = run_convergence_study(StudyConfig(**SMALL_STUDY))

        def strip_time(csv):
            return [
                ",".join(f for i, f in enumerate(line.split(",")) if i != 6)
                for line in csv.splitlines()
            ]

        assert strip_time(table.to_csv(full=True)) == strip_time(other.to_csv(full=True))
        assert strip_time(table.to_csv()) == strip_time(other.to_csv())


class TestPricingCsv:
    def test_files_and_metadata(self, tmp_path):
        cfg = PricingConfig(
            example=3, alphas=(0.5,), lams=(1.0,), N=8, out=tmp_path
        )
        result = run_pricing(cfg)
        case = result.cases[0]
        surface = (tmp_path / case.surface_csv).read_text().splitlines()
        assert surface[0] == "S,t,price"
        # row-major S-then-t: S constant across each M+1-line block
        S_first = surface[1].split(",")[0]
        assert surface[2].split(",")[0] == S_first
        curve = (tmp_path / case.curve_csv).read_text().splitlines()
        assert curve[0] == "S,price"
        assert len(curve) == 1 + 9  # N + 1 nodes
        meta = (tmp_path / "pricing_ex3_meta.csv").read_text().splitlines()
        assert meta[0] == "example,alpha,lambda,gamma,N,M,scheme,time_sec"
        assert meta[1].startswith("3,0.5,1,3,8,")


class TestSoeCheck:
    def test_report_and_dump(self, tmp_path):
        report = soe_check(0.5, 1e-12, 1e-6, 1.0, out=tmp_path)
        assert report.passed
        assert report.M_exp < 150
        modes = (tmp_path / "soe_modes.csv").read_text().splitlines()
        assert modes[0] == "j,s_j,w_j"
        assert len(modes) == 1 + report.M_exp
        profile = (tmp_path / "soe_error_profile.csv").read_text().splitlines()
        assert profile[0] == "tau,abs_error"
        worst = max(float(line.split(",")[1]) for line in profile[1:])
        assert worst <= report.max_error * 1.05

    def test_failing_bound_reported_not_raised(self):
        report = soe_check(0.5, 1e-19, 1e-8, 1.0)
        assert not report.passed
        assert "FAIL" in report.summary()


class TestCliExitCodes:
    def test_success(self, capsys):
        code = main(
            ["convergence", "--example", "1", "--alpha", "0.3", "--gamma", "4",
             "--ladder", "4,8", "--scheme", "ds"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("alpha,gamma,N,M,err_inf,order,time_sec,scheme")

    def test_parameter_error(self, capsys):
        code = main(
            ["convergence", "--example", "1", "--ladder", "4,9", "--scheme", "ds"]
        )
        assert code == 2

    def test_solve_failure(self, monkeypatch, capsys):
        import tfbs.cli as cli_mod

        def boom(config):
            raise RuntimeError("synthetic failure")

        monkeypatch.setattr(cli_mod, "run_pricing", boom)
        code = main(["price", "--example", "4", "--alpha", "0.5", "--lambda", "1"])
        assert code == 3

    def test_soe_bound_failure(self, capsys):
        code = main(
            ["soe-check", "--alpha", "0.5", "--eps", "1e-19", "--delta", "1e-8"]
        )
        assert code == 4

    def test_soe_degenerate_interval(self, capsys):
        code = main(["soe-check", "--alpha", "0.5", "--delta", "2.0", "--T", "1.0"])
        assert code == 2

    def test_config_file_flags_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("example = 1\nladder = 4,8\nscheme = ds\nalpha = 0.3\ngamma = 4\n")
        code = main(["convergence", "--config", str(cfg), "--scheme", "fs"])
        out = capsys.readouterr().out
        assert code == 0
        assert ",fs" in out and ",ds" not in out

    def test_config_file_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("volatility = 12\n")
        code = main(["convergence", "--config", str(cfg)])
        assert code == 2

    def test_installed_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "tfbs.cli", "soe-check", "--alpha", "0.5",
             "--delta", "1e-4"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "PASS" in proc.stdout
