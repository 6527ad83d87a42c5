"""Refinement-study drivers, config handling, and table formatting."""

import io

import numpy as np
import pytest

import kronheat.experiments as experiments
from kronheat.errors import SingularMatrix, UsageError
from kronheat.experiments import (
    BASE_TIME_NODES,
    COMPARE_HEADER,
    CONVERGENCE_HEADER,
    EIGSTUDY_HEADER,
    CompareRow,
    ConvergenceRow,
    EigRow,
    ExperimentConfig,
    compare_solvers,
    eoc,
    format_compare_row,
    format_convergence_row,
    format_eig_row,
    load_config_file,
    make_config,
    run_convergence,
    run_eigstudy,
    time_mesh_at_level,
    write_convergence_csv,
)

# small truncation budget for speed; error entries move in the sixth
# digit relative to the production default, far below test tolerances
FAST_J = 200_000


class TestEoc:
    def test_second_order_model(self):
        # halving h multiplies dof by 8 and quarters the error
        assert eoc(4.0, 1.0, 100, 800) == pytest.approx(2.0, rel=1e-14)

    def test_published_rows(self):
        # values reproduce the reported two-decimal entries
        assert round(eoc(3.326e-1, 1.089e-1, 20, 264), 2) == 1.30
        assert round(eoc(3.136e-2, 8.309e-3, 2576, 22560), 2) == 1.84


class TestExperimentConfig:
    def test_defaults(self):
        config = ExperimentConfig()
        assert config.max_level == 4
        assert config.variants == ("bs-real", "bs-complex", "fd")
        assert config.time_nodes == BASE_TIME_NODES

    @pytest.mark.parametrize("kwargs", [
        {"max_level": -1},
        {"threads": 0},
        {"j_max": -1},
        {"variants": ()},
        {"variants": ("bs-real", "qr")},
        {"time_nodes": (0.0, 0.2, 0.2, 0.5)},
        {"time_nodes": (0.1, 0.3, 0.5)},
        {"time_nodes": (0.0, 0.3)},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(UsageError):
            ExperimentConfig(**kwargs)


class TestTimeMesh:
    def test_levels_bisect(self):
        config = ExperimentConfig()
        base = time_mesh_at_level(config, 0)
        assert np.array_equal(base.nodes, np.asarray(BASE_TIME_NODES))
        fine = time_mesh_at_level(config, 2)
        assert fine.n_cells == 16
        # bisection keeps the grading ratio of the base partition
        assert fine.h_max / fine.h_min == pytest.approx(12.0, rel=1e-12)
        assert base.nodes[1] / 4 == pytest.approx(fine.nodes[1], rel=1e-14)


class TestConfigFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "study.cfg"
        path.write_text(
            "# study setup\n"
            "max_level = 1\n"
            "variants = bs-real, fd\n"
            "j_max = 50000   # truncation\n"
            "error_quad_order = none\n"
            "\n"
            "threads = 2\n"
        )
        values = load_config_file(path)
        config = make_config(values)
        assert config.max_level == 1
        assert config.variants == ("bs-real", "fd")
        assert config.j_max == 50000
        assert config.error_quad_order is None
        assert config.threads == 2

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("max_level 1\n")
        with pytest.raises(UsageError, match="bad.cfg:1"):
            load_config_file(path)

    def test_unknown_key(self):
        with pytest.raises(UsageError, match="unknown config key"):
            make_config({"levels": "3"})

    def test_bad_value(self):
        with pytest.raises(UsageError, match="bad value"):
            make_config({"max_level": "three"})

    def test_override_precedence(self):
        config = make_config({"max_level": "2", "threads": "4"},
                             max_level=0, threads=None)
        assert config.max_level == 0
        assert config.threads == 4


class TestRunEigstudy:
    def test_reference_rows(self):
        config = ExperimentConfig(max_level=1, j_max=FAST_J)
        rows = run_eigstudy(config)
        assert [r.n_t for r in rows] == [4, 8]
        first = rows[0]
        assert first.h_max == pytest.approx(0.375)
        assert first.h_min == pytest.approx(1.0 / 32.0)
        assert first.min_re_lambda == pytest.approx(1.514e-2, rel=1e-3)
        assert first.kappa2 == pytest.approx(9.576, rel=1e-3)
        assert rows[1].kappa2 == pytest.approx(76.78, rel=1e-3)


@pytest.fixture(scope="module")
def tables():
    config = ExperimentConfig(max_level=1, variants=("bs-complex",),
                              j_max=FAST_J)
    return run_convergence(config)


class TestRunConvergence:
    def test_row_fields(self, tables):
        rows = tables["bs-complex"]
        assert [r.dof for r in rows] == [20, 264]
        first, second = rows
        assert first.h_x == pytest.approx(np.sqrt(0.125), rel=1e-12)
        assert first.h_t_max == pytest.approx(0.375)
        assert first.h_t_min == pytest.approx(1.0 / 32.0)
        assert first.l2_eoc == 0.0 and first.h1_eoc == 0.0
        assert 0 < second.l2_error < first.l2_error
        assert 0 < second.h1_error < first.h1_error
        assert second.l2_eoc > 1.0
        assert second.seconds >= 0.0

    def test_level0_errors(self, tables):
        # converged level-0 values of the measured protocol
        first = tables["bs-complex"][0]
        assert first.l2_error == pytest.approx(3.70134e-1, rel=1e-4)
        assert first.h1_error == pytest.approx(4.67519e0, rel=1e-4)

    def test_failing_variant_is_dropped(self, monkeypatch):
        real_solve = experiments.solve
        calls = []

        def flaky(system, variant, threads=1):
            calls.append(variant)
            if variant == "fd":
                raise SingularMatrix("synthetic failure")
            return real_solve(system, variant, threads=threads)

        monkeypatch.setattr(experiments, "solve", flaky)
        log = io.StringIO()
        config = ExperimentConfig(max_level=1, j_max=FAST_J,
                                  variants=("bs-complex", "fd"))
        tables = run_convergence(config, log=log)
        assert len(tables["bs-complex"]) == 2
        assert tables["fd"] == []
        assert calls.count("fd") == 1  # dropped after the first failure
        assert "SingularMatrix" in log.getvalue()


class TestCompareSolvers:
    def test_needs_two_variants(self):
        with pytest.raises(UsageError):
            compare_solvers(ExperimentConfig(variants=("fd",)))

    def test_level0_agreement(self):
        config = ExperimentConfig(max_level=0, j_max=FAST_J)
        rows, residuals = compare_solvers(config)
        assert len(rows) == 3  # three unordered pairs
        assert not any(r.flagged for r in rows)
        assert all(r.threshold == 1e-8 for r in rows)
        assert set(residuals) == {(0, v) for v in config.variants}
        assert all(res < 1e-9 for res in residuals.values())


class TestFormatting:
    def test_convergence_row(self):
        row = ConvergenceRow(dof=264, h_x=0.17678, h_t_max=0.1875,
                             h_t_min=0.015625, l2_error=1.089e-1,
                             l2_eoc=1.2984, h1_error=2.702, h1_eoc=0.54,
                             seconds=0.04)
        assert format_convergence_row(row) == (
            "264,0.17678,0.18750,0.01562,1.089e-01,1.30,2.702e+00,0.54,0.0")

    def test_eig_row(self):
        row = EigRow(n_t=4, h_max=0.375, h_min=0.03125,
                     min_re_lambda=1.514e-2, sigma_min=2.041e-1,
                     sigma_max=1.954, kappa2=9.576)
        assert format_eig_row(row) == (
            "4,0.37500,0.03125,1.514e-02,2.041e-01,1.954e+00,9.576e+00")

    def test_compare_row(self):
        row = CompareRow(level=2, dof=2576, variant_a="bs-real",
                         variant_b="fd", diff=3.2e-11, threshold=1e-8,
                         flagged=False)
        assert format_compare_row(row) == (
            "2,2576,bs-real,fd,3.200e-11,1.0e-08,no")

    def test_csv_writer(self, tmp_path):
        row = ConvergenceRow(dof=20, h_x=0.35355, h_t_max=0.375,
                             h_t_min=0.03125, l2_error=3.701e-1, l2_eoc=0.0,
                             h1_error=4.675, h1_eoc=0.0, seconds=0.0)
        path = tmp_path / "table.csv"
        write_convergence_csv([row], path)
        text = path.read_text()
        assert text.splitlines()[0] == CONVERGENCE_HEADER
        assert text.endswith("\n")
        assert EIGSTUDY_HEADER.startswith("N_t")
        assert COMPARE_HEADER.split(",")[0] == "level"
