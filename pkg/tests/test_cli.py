import pytest

from compnovel import cli
from compnovel.cli import (
    CliError,
    aggregate_stats,
    load_run_config,
    load_sweep_spec,
    main,
    manifest_text,
    read_csv_with_schema,
)
from compnovel.engine import MethodKind
from compnovel.network import parse_network, evaluate

RUN_CONFIG = """\
[run]
method = cmo
lines = 4
population_size = 60
generations = 25
seed = 11

[selection]
elite_fraction = 0.2
"""

SWEEP_SPEC = """\
[sweep]
methods = so cmo
line_sizes = 3 4
repetitions = 2
base_seed = 500

[run]
population_size = 40
generations = 15
"""


@pytest.fixture
def run_config_path(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(RUN_CONFIG)
    return path


class TestConfigLoading:
    def test_basic(self, run_config_path):
        config = load_run_config(run_config_path)
        assert config.method is MethodKind.COMPOSITE
        assert (config.lines, config.population_size, config.seed) == (4, 60, 11)
        assert config.elite_fraction == 0.2

    def test_defaults_without_file(self):
        config = load_run_config(None)
        assert config.population_size == 1000
        assert config.generations == 1000
        assert config.elite_fraction == 0.1
        assert config.novelty.selection_multiplier == 2
        assert (config.weights.alpha1, config.weights.alpha2,
                config.weights.alpha3, config.weights.alpha4) == (1, 10, 1, 10)

    def test_overrides(self, run_config_path):
        config = load_run_config(run_config_path, ["run.lines=5", "novelty.distance_metric=l2"])
        assert config.lines == 5
        assert config.novelty.distance_metric == "l2"

    def test_bad_elite_fraction_names_key(self, run_config_path):
        with pytest.raises(CliError, match="elite_fraction"):
            load_run_config(run_config_path, ["selection.elite_fraction=0"])

    def test_unknown_key_rejected(self, run_config_path):
        with pytest.raises(CliError, match="run.turbo"):
            load_run_config(run_config_path, ["run.turbo=1"])

    def test_env_seed_override(self, run_config_path, monkeypatch):
        monkeypatch.setenv("COMPNOVEL_SEED", "999")
        assert load_run_config(run_config_path).seed == 999

    def test_manifest_round_trips(self, run_config_path, tmp_path):
        config = load_run_config(run_config_path)
        manifest = tmp_path / "manifest"
        manifest.write_text(manifest_text(config))
        assert load_run_config(manifest) == config


class TestCmdRun:
    def test_artifacts(self, run_config_path, tmp_path, capsys):
        outdir = tmp_path / "out"
        assert main(["run", "--config", str(run_config_path), "--out", str(outdir)]) == 0
        assert (outdir / "run.csv").exists()
        assert (outdir / "manifest").exists()
        net = parse_network((outdir / "best_c.net").read_text())
        ev = evaluate(net)
        assert (ev.mistakes, ev.comparators, ev.layers) == (0, 5, 3)

    def test_rerun_from_manifest_identical(self, run_config_path, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(run_config_path), "--out", str(out1)])
        main(["run", "--config", str(out1 / "manifest"), "--out", str(out2)])
        assert (out1 / "run.csv").read_bytes() == (out2 / "run.csv").read_bytes()

    def test_invalid_config_nonzero_exit(self, run_config_path, tmp_path, capsys):
        code = main(["run", "--config", str(run_config_path), "--out", str(tmp_path / "x"),
                     "--set", "selection.elite_fraction=0"])
        assert code != 0
        assert "elite_fraction" in capsys.readouterr().err

    def test_run_csv_round_trips_with_verify(self, run_config_path, tmp_path, capsys):
        outdir = tmp_path / "out"
        main(["run", "--config", str(run_config_path), "--out", str(outdir)])
        assert main(["verify", str(outdir / "best_c.net")]) == 0
        out = capsys.readouterr().out
        assert "lines=4 c=5 l=3 m=0" in out


class TestCmdVerify:
    def test_correct_network(self, tmp_path, capsys, four_line_minimal):
        from compnovel.network import serialize_network
        path = tmp_path / "net.net"
        path.write_text(serialize_network(four_line_minimal))
        assert main(["verify", str(path)]) == 0
        assert "lines=4 c=5 l=3 m=0" in capsys.readouterr().out

    def test_incorrect_network_nonzero(self, tmp_path, capsys):
        path = tmp_path / "net.net"
        path.write_text("lines 3\n")
        assert main(["verify", str(path)]) == 1
        assert "m=4" in capsys.readouterr().out

    def test_parse_error_names_line(self, tmp_path, capsys):
        path = tmp_path / "net.net"
        path.write_text("lines 5\n4 4\n")
        assert main(["verify", str(path)]) == 2
        assert "line 2" in capsys.readouterr().err


class TestCmdSweep:
    def test_grid_rows(self, tmp_path):
        spec = tmp_path / "sweep.ini"
        spec.write_text(SWEEP_SPEC)
        outdir = tmp_path / "out"
        assert main(["sweep", "--spec", str(spec), "--out", str(outdir)]) == 0
        rows = read_csv_with_schema(outdir / "sweep.csv")
        assert len(rows) == 2 * 2 * 2
        assert len({row["seed"] for row in rows}) == 8  # unique seed per cell
        assert all(row["best_c"] for row in rows)

    def test_resume_reproduces_deterministic_columns(self, tmp_path):
        spec = tmp_path / "sweep.ini"
        spec.write_text(SWEEP_SPEC)
        out1, out2 = tmp_path / "full", tmp_path / "resumed"
        main(["sweep", "--spec", str(spec), "--out", str(out1)])
        # simulate interruption: keep only the first 3 result rows
        full = (out1 / "sweep.csv").read_text().splitlines()
        (out2 / "sweep.csv").parent.mkdir(parents=True)
        (out2 / "sweep.csv").write_text("\n".join(full[:5]) + "\n")
        main(["sweep", "--spec", str(spec), "--out", str(out2)])

        def strip_clock(path):
            return [
                {k: v for k, v in row.items() if k != "wall_clock_seconds"}
                for row in read_csv_with_schema(path)
            ]

        assert strip_clock(out1 / "sweep.csv") == strip_clock(out2 / "sweep.csv")

    def test_cell_reproducible_via_run(self, tmp_path):
        spec_path = tmp_path / "sweep.ini"
        spec_path.write_text(SWEEP_SPEC)
        outdir = tmp_path / "out"
        main(["sweep", "--spec", str(spec_path), "--out", str(outdir)])
        row = read_csv_with_schema(outdir / "sweep.csv")[3]

        from compnovel import engine
        spec = load_sweep_spec(spec_path)
        config = cli.cell_config(spec, MethodKind(row["method"]), int(row["n"]),
                                 int(row["seed"]))
        result = engine.run(config)
        assert str(result.best_c_individual.eval.comparators) == row["best_c"]

    def test_line_size_ranges(self, tmp_path):
        spec = tmp_path / "sweep.ini"
        spec.write_text("[sweep]\nmethods = so\nline_sizes = 3..5\nrepetitions = 1\n"
                        "base_seed = 1\n[run]\npopulation_size = 20\ngenerations = 3\n")
        parsed = load_sweep_spec(spec)
        assert parsed.line_sizes == (3, 4, 5)


class TestCmdStats:
    def _rows(self):
        rows = []
        for rep, c in enumerate([19, 19, 21]):
            rows.append({"method": "cmo", "n": 8, "repetition": rep, "seed": rep,
                         "best_c": str(c), "best_l": "6",
                         "generations_to_first_correct": "1",
                         "wall_clock_seconds": "1.0", "error": ""})
        for rep in range(3):
            rows.append({"method": "so", "n": 8, "repetition": rep, "seed": 10 + rep,
                         "best_c": str(19 + rep), "best_l": "7",
                         "generations_to_first_correct": "1",
                         "wall_clock_seconds": "1.0", "error": ""})
        return rows

    def test_min_and_mean(self):
        groups = aggregate_stats(self._rows())["groups"]
        cs = groups[("cmo", 8)]["best_c"]
        assert min(cs) == 19
        assert sum(cs) / len(cs) == pytest.approx(19.667, abs=1e-3)

    def test_identical_samples_not_significant(self):
        rows = self._rows()
        for row in rows:
            row["best_c"] = "19"
        from compnovel.cli import mannwhitney_rows
        groups = aggregate_stats(rows)["groups"]
        for entry in mannwhitney_rows(groups):
            assert entry["significant"] == "no"
            assert float(entry["p_value"]) >= 0.5

    def test_outputs_and_plot_rows(self, tmp_path):
        from compnovel.cli import write_stats_outputs
        write_stats_outputs(self._rows(), tmp_path, echo=lambda *a: None)
        assert (tmp_path / "summary.csv").exists()
        assert (tmp_path / "significance.csv").exists()
        assert (tmp_path / "plot_results.py").exists()
        dat = (tmp_path / "best_c_mean.dat").read_text().splitlines()
        assert dat[0].startswith("# n")
        assert len(dat) - 1 == 1  # one line size

    def test_stats_pure_over_csv(self, tmp_path):
        from compnovel.cli import write_stats_outputs
        out1, out2 = tmp_path / "a", tmp_path / "b"
        write_stats_outputs(self._rows(), out1, echo=lambda *a: None)
        write_stats_outputs(self._rows(), out2, echo=lambda *a: None)
        for name in ("summary.csv", "significance.csv", "best_c_min.dat"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_errored_cells_excluded(self):
        rows = self._rows()
        rows[0]["error"] = "RuntimeError: boom"
        rows[0]["best_c"] = ""
        agg = aggregate_stats(rows)
        assert len(agg["groups"][("cmo", 8)]["best_c"]) == 2
        assert len(agg["skipped"]) == 1
