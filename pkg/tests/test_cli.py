"""End-to-end runs of the command-line driver."""

import pytest

from kronheat.cli import _variant_path, build_parser, config_from_args, main

FAST = ["--jmax", "200000"]


class TestParsing:
    def test_requires_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
        assert "convergence" in capsys.readouterr().err

    def test_solver_flag_splits(self):
        args = build_parser().parse_args(
            ["compare", "--solver", "bs-real,fd", "--solver", "bs-complex"])
        config = config_from_args(args)
        assert config.variants == ("bs-real", "fd", "bs-complex")

    def test_unknown_solver_exits_2(self, capsys):
        assert main(["eigstudy", "--solver", "cholesky"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_config_file_with_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("max_level = 3\nj_max = 200000\n")
        args = build_parser().parse_args(
            ["eigstudy", "--config", str(cfg), "--max-level", "0"])
        config = config_from_args(args)
        assert config.max_level == 0  # flag wins
        assert config.j_max == 200000

    def test_variant_path_suffix(self):
        assert _variant_path("out.csv", "fd", many=True) == "out-fd.csv"
        assert _variant_path("out.csv", "fd", many=False) == "out.csv"
        assert _variant_path("table", "fd", many=True) == "table-fd"


class TestEigstudy:
    def test_prints_table(self, capsys):
        assert main(["eigstudy", "--max-level", "1", *FAST]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0].startswith("N_t,")
        assert out[1].startswith("4,0.37500,0.03125,1.514e-02")
        assert out[2].startswith("8,")

    def test_writes_csv(self, tmp_path, capsys):
        dest = tmp_path / "eig.csv"
        assert main(["eigstudy", "--max-level", "0", *FAST,
                     "--out", str(dest)]) == 0
        capsys.readouterr()
        lines = dest.read_text().splitlines()
        assert lines[0].startswith("N_t,")
        assert len(lines) == 2


class TestConvergence:
    def test_single_variant(self, capsys):
        assert main(["convergence", "--max-level", "0",
                     "--solver", "bs-complex", *FAST]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "# bs-complex"
        assert out[1].startswith("dof,")
        assert out[2].startswith("20,0.35355,0.37500,0.03125,3.701e-01,0.00")

    def test_per_variant_csv(self, tmp_path, capsys):
        dest = tmp_path / "conv.csv"
        assert main(["convergence", "--max-level", "0", *FAST,
                     "--solver", "bs-real", "--solver", "fd",
                     "--out", str(dest)]) == 0
        capsys.readouterr()
        for variant in ("bs-real", "fd"):
            lines = (tmp_path / f"conv-{variant}.csv").read_text().splitlines()
            assert lines[0].startswith("dof,")
            assert lines[1].startswith("20,")


class TestCompare:
    def test_agreeing_variants_exit_0(self, capsys):
        assert main(["compare", "--max-level", "0", *FAST]) == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0].startswith("level,")
        assert all(line.endswith(",no") for line in lines[1:4])
        assert "# residual level 0 bs-real:" in out

    def test_single_variant_exit_2(self, capsys):
        assert main(["compare", "--solver", "fd"]) == 2
        assert "two solver variants" in capsys.readouterr().err
