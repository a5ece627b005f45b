"""Command-line harness: run, sweep, verify, stats.

Config files are INI-style sections of `key = value` lines.  Every run
writes a manifest echoing the fully resolved config, which is itself a
valid config file, so any run can be reproduced from its artifacts.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from compnovel import engine, network
from compnovel.engine import MethodKind, RunConfig, RunResult
from compnovel.genetics import ConfigError, VariationParams
from compnovel.novelty import NoveltyConfig
from compnovel.objectives import CompositeWeights

SCHEMA_LINE = "# schema=1"
SEED_ENV_VAR = "COMPNOVEL_SEED"

RUN_CSV_FIELDS = [
    "generation", "best_fitness", "min_m", "best_c_correct", "best_l_correct",
    "elite_diversity",
]
SWEEP_CSV_FIELDS = [
    "method", "n", "repetition", "seed", "best_c", "best_l",
    "generations_to_first_correct", "wall_clock_seconds", "error",
]

_DEFAULTS = {
    "run": {
        "method": "cmo",
        "lines": "8",
        "population_size": "1000",
        "generations": "1000",
        "seed": "0",
    },
    "selection": {"elite_fraction": "0.1"},
    "variation": {
        "crossover_prob": "1.0",
        "mutation_prob": "0.9",
        "init_min": "",
        "init_max": "",
        "max_comparators": "100",
    },
    "objectives": {"alpha1": "1", "alpha2": "10", "alpha3": "1", "alpha4": "10"},
    "novelty": {"selection_multiplier": "2", "distance_metric": "l1"},
}

_METHOD_TOKENS = {m.value: m for m in MethodKind}


class CliError(Exception):
    pass


def _read_ini(path: Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise CliError(f"malformed config {path}: {exc}") from None
    return parser


def _merge_config(
    parser: Optional[configparser.ConfigParser], overrides: Sequence[str]
) -> dict[str, dict[str, str]]:
    merged = {sec: dict(values) for sec, values in _DEFAULTS.items()}
    if parser is not None:
        for sec in parser.sections():
            if sec == "sweep":
                continue
            if sec not in merged:
                raise CliError(f"unknown config section [{sec}]")
            for key, value in parser.items(sec):
                if key not in merged[sec]:
                    raise CliError(f"unknown config key {sec}.{key}")
                merged[sec][key] = value
    for item in overrides:
        if "=" not in item:
            raise CliError(f"override must be section.key=value, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip()
        if "." not in key:
            raise CliError(f"override key must be section.key, got {key!r}")
        sec, _, name = key.partition(".")
        if sec not in merged or name not in merged[sec]:
            raise CliError(f"unknown config key {key}")
        merged[sec][name] = value.strip()
    return merged


def _get_int(merged, sec: str, key: str) -> int:
    raw = merged[sec][key]
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{sec}.{key}: expected an integer, got {raw!r}") from None


def _get_float(merged, sec: str, key: str) -> float:
    raw = merged[sec][key]
    try:
        return float(raw)
    except ValueError:
        raise CliError(f"{sec}.{key}: expected a number, got {raw!r}") from None


def build_run_config(merged: dict[str, dict[str, str]]) -> RunConfig:
    method_token = merged["run"]["method"].strip().lower()
    if method_token not in _METHOD_TOKENS:
        raise CliError(
            f"run.method: expected one of {sorted(_METHOD_TOKENS)}, got {method_token!r}"
        )
    lines = _get_int(merged, "run", "lines")
    init_min_raw = merged["variation"]["init_min"].strip()
    init_max_raw = merged["variation"]["init_max"].strip()
    max_comparators = _get_int(merged, "variation", "max_comparators")
    init_min = int(init_min_raw) if init_min_raw else min(lines, max_comparators)
    init_max = int(init_max_raw) if init_max_raw else min(3 * lines, max_comparators)
    try:
        variation = VariationParams(
            crossover_prob=_get_float(merged, "variation", "crossover_prob"),
            mutation_prob=_get_float(merged, "variation", "mutation_prob"),
            init_min=init_min,
            init_max=init_max,
            max_comparators=max_comparators,
        )
        weights = CompositeWeights(
            alpha1=_get_float(merged, "objectives", "alpha1"),
            alpha2=_get_float(merged, "objectives", "alpha2"),
            alpha3=_get_float(merged, "objectives", "alpha3"),
            alpha4=_get_float(merged, "objectives", "alpha4"),
        )
        nov = NoveltyConfig(
            selection_multiplier=_get_float(merged, "novelty", "selection_multiplier"),
            distance_metric=merged["novelty"]["distance_metric"].strip().lower(),
        )
        return RunConfig(
            method=_METHOD_TOKENS[method_token],
            lines=lines,
            population_size=_get_int(merged, "run", "population_size"),
            generations=_get_int(merged, "run", "generations"),
            elite_fraction=_get_float(merged, "selection", "elite_fraction"),
            seed=_get_int(merged, "run", "seed"),
            variation=variation,
            weights=weights,
            novelty=nov,
        )
    except (ConfigError, ValueError) as exc:
        raise CliError(str(exc)) from None


def load_run_config(path: Optional[Path], overrides: Sequence[str] = ()) -> RunConfig:
    parser = _read_ini(path) if path is not None else None
    merged = _merge_config(parser, overrides)
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:  # testing hook; sweep cells keep derived seeds
        try:
            int(env_seed)
        except ValueError:
            raise CliError(f"{SEED_ENV_VAR}: expected an integer, got {env_seed!r}") from None
        merged["run"]["seed"] = env_seed
    return build_run_config(merged)


def manifest_text(config: RunConfig) -> str:
    """Resolved config as a loadable INI file."""
    variation = config.resolved_variation()
    sections = {
        "run": {
            "method": config.method.value,
            "lines": config.lines,
            "population_size": config.population_size,
            "generations": config.generations,
            "seed": config.seed,
        },
        "selection": {"elite_fraction": config.elite_fraction},
        "variation": {
            "crossover_prob": variation.crossover_prob,
            "mutation_prob": variation.mutation_prob,
            "init_min": variation.init_min,
            "init_max": variation.init_max,
            "max_comparators": variation.max_comparators,
        },
        "objectives": {
            "alpha1": config.weights.alpha1,
            "alpha2": config.weights.alpha2,
            "alpha3": config.weights.alpha3,
            "alpha4": config.weights.alpha4,
        },
        "novelty": {
            "selection_multiplier": config.novelty.selection_multiplier,
            "distance_metric": config.novelty.distance_metric,
        },
    }
    out = []
    for sec, values in sections.items():
        out.append(f"[{sec}]")
        out.extend(f"{key} = {value}" for key, value in values.items())
        out.append("")
    return "\n".join(out)


def run_csv_text(result: RunResult) -> str:
    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RUN_CSV_FIELDS)
    for rec in result.records:
        writer.writerow([
            rec.generation,
            rec.best_fitness,
            rec.min_mistakes,
            "" if rec.best_c_correct is None else rec.best_c_correct,
            "" if rec.best_l_correct is None else rec.best_l_correct,
            f"{rec.elite_diversity:.6f}",
        ])
    return buf.getvalue()


def write_run_artifacts(result: RunResult, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "run.csv").write_text(run_csv_text(result))
    (outdir / "manifest").write_text(manifest_text(result.config))
    if result.best_c_individual is not None:
        (outdir / "best_c.net").write_text(
            network.serialize_network(result.best_c_individual.genome)
        )
    if result.best_l_individual is not None:
        (outdir / "best_l.net").write_text(
            network.serialize_network(result.best_l_individual.genome)
        )


def cmd_run(args) -> int:
    config = load_run_config(Path(args.config), args.set or [])
    result = engine.run(config, workers=args.workers)
    write_run_artifacts(result, Path(args.out))
    by_c = result.best_c_individual
    if by_c is None:
        print("no correct network found")
    else:
        ev = by_c.eval
        print(f"best correct network: c={ev.comparators} l={ev.layers}")
    print(f"artifacts written to {args.out}")
    return 0


# --- sweep -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    methods: tuple[MethodKind, ...]
    line_sizes: tuple[int, ...]
    repetitions: int
    base_seed: int
    run_sections: dict  # resolved config sections shared by all cells

    def cells(self) -> list[tuple[MethodKind, int, int, int]]:
        """(method, n, repetition, seed) for the whole grid, in order."""
        out = []
        index = 0
        for method in self.methods:
            for n in self.line_sizes:
                for rep in range(self.repetitions):
                    out.append((method, n, rep, self.base_seed + index))
                    index += 1
        return out


def _parse_int_list(raw: str, what: str) -> list[int]:
    values: list[int] = []
    for token in raw.replace(",", " ").split():
        if ".." in token:
            lo, _, hi = token.partition("..")
            try:
                values.extend(range(int(lo), int(hi) + 1))
            except ValueError:
                raise CliError(f"{what}: bad range {token!r}") from None
        else:
            try:
                values.append(int(token))
            except ValueError:
                raise CliError(f"{what}: bad value {token!r}") from None
    if not values:
        raise CliError(f"{what}: empty list")
    return values


def load_sweep_spec(path: Path, overrides: Sequence[str] = ()) -> SweepSpec:
    parser = _read_ini(path)
    if not parser.has_section("sweep"):
        raise CliError("sweep spec needs a [sweep] section")
    sweep = dict(parser.items("sweep"))
    known = {"methods", "line_sizes", "repetitions", "base_seed"}
    for key in sweep:
        if key not in known:
            raise CliError(f"unknown config key sweep.{key}")

    tokens = sweep.get("methods", " ".join(m.value for m in MethodKind))
    methods = []
    for token in tokens.replace(",", " ").split():
        if token not in _METHOD_TOKENS:
            raise CliError(f"sweep.methods: unknown method {token!r}")
        methods.append(_METHOD_TOKENS[token])
    line_sizes = _parse_int_list(sweep.get("line_sizes", "5..16"), "sweep.line_sizes")
    try:
        repetitions = int(sweep.get("repetitions", "10"))
        base_seed = int(sweep.get("base_seed", "0"))
    except ValueError as exc:
        raise CliError(f"sweep: {exc}") from None
    if repetitions < 1:
        raise CliError(f"sweep.repetitions must be >= 1, got {repetitions}")

    run_sections = _merge_config(parser, overrides)
    return SweepSpec(tuple(methods), tuple(line_sizes), repetitions, base_seed, run_sections)


def cell_config(spec: SweepSpec, method: MethodKind, n: int, seed: int) -> RunConfig:
    merged = {sec: dict(values) for sec, values in spec.run_sections.items()}
    merged["run"]["method"] = method.value
    merged["run"]["lines"] = str(n)
    merged["run"]["seed"] = str(seed)
    return build_run_config(merged)


def _sweep_cell(payload) -> dict:
    spec, method, n, rep, seed = payload
    row = {
        "method": method.value, "n": n, "repetition": rep, "seed": seed,
        "best_c": "", "best_l": "", "generations_to_first_correct": "",
        "wall_clock_seconds": "", "error": "",
    }
    try:
        config = cell_config(spec, method, n, seed)
        result = engine.run(config)
    except Exception as exc:  # failures recorded, sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    if result.best_c_individual is not None:
        row["best_c"] = result.best_c_individual.eval.comparators
        row["best_l"] = result.best_l_individual.eval.layers
    if result.generations_to_first_correct is not None:
        row["generations_to_first_correct"] = result.generations_to_first_correct
    row["wall_clock_seconds"] = f"{result.wall_clock_seconds:.3f}"
    return row


def read_csv_with_schema(path: Path) -> list[dict]:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# schema="):
            fh.seek(0)
        return list(csv.DictReader(fh))


def _write_sweep_csv(path: Path, rows: Sequence[dict]) -> None:
    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    writer = csv.DictWriter(buf, SWEEP_CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(buf.getvalue())
    tmp.replace(path)


def run_sweep(spec: SweepSpec, outdir: Path, jobs: int = 1, echo=print) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "sweep.csv"
    done: dict[tuple, dict] = {}
    if csv_path.exists():
        for row in read_csv_with_schema(csv_path):
            if not row.get("error"):
                done[(row["method"], int(row["n"]), int(row["repetition"]))] = row

    cells = spec.cells()
    rows: dict[tuple, dict] = {}
    pending = []
    for method, n, rep, seed in cells:
        key = (method.value, n, rep)
        if key in done:
            rows[key] = done[key]
        else:
            pending.append((spec, method, n, rep, seed))

    def finish(row):
        rows[(row["method"], int(row["n"]), int(row["repetition"]))] = row
        ordered = [rows[(m.value, n, r)]
                   for m, n, r, _ in cells if (m.value, n, r) in rows]
        _write_sweep_csv(csv_path, ordered)
        echo(f"[{len(rows)}/{len(cells)}] {row['method']} n={row['n']} "
             f"rep={row['repetition']} best_c={row['best_c']} "
             f"{('ERROR ' + row['error']) if row['error'] else ''}".rstrip())

    if jobs > 1 and pending:
        import multiprocessing

        with multiprocessing.get_context("fork").Pool(jobs) as pool:
            for row in pool.imap_unordered(_sweep_cell, pending):
                finish(row)
    else:
        for payload in pending:
            finish(_sweep_cell(payload))

    ordered = [rows[(m.value, n, r)] for m, n, r, _ in cells]
    _write_sweep_csv(csv_path, ordered)
    return csv_path


def cmd_sweep(args) -> int:
    spec = load_sweep_spec(Path(args.spec), args.set or [])
    csv_path = run_sweep(spec, Path(args.out), jobs=args.jobs)
    print(f"sweep results in {csv_path}")
    return 0


# --- verify ----------------------------------------------------------------

def cmd_verify(args) -> int:
    path = Path(args.network)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"cannot read {path}: {exc.strerror}", file=sys.stderr)
        return 2
    try:
        net = network.parse_network(text)
    except network.NetworkParseError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return 2
    ev = network.evaluate(net)
    print(f"lines={net.lines} c={ev.comparators} l={ev.layers} m={ev.mistakes}")
    print("behavior=" + " ".join(str(b) for b in ev.behavior))
    return 0 if ev.mistakes == 0 else 1


# --- stats -----------------------------------------------------------------

PLOT_SERIES = ["best_c_min", "best_c_mean", "best_l_min", "best_l_mean"]


def aggregate_stats(rows: Sequence[dict]) -> dict:
    """Per (method, n) min/mean of best_c and best_l over completed runs."""
    groups: dict[tuple[str, int], dict] = {}
    skipped = []
    for row in rows:
        key = (row["method"], int(row["n"]))
        group = groups.setdefault(key, {"best_c": [], "best_l": [], "runs": 0})
        group["runs"] += 1
        if row.get("error") or not row.get("best_c"):
            skipped.append(row)
            continue
        group["best_c"].append(int(row["best_c"]))
        group["best_l"].append(int(row["best_l"]))
    return {"groups": groups, "skipped": skipped}


def mannwhitney_rows(groups: dict, alpha: float = 0.05) -> list[dict]:
    """One-sided Mann-Whitney U on best_c for every ordered method pair."""
    from scipy.stats import mannwhitneyu

    sizes = sorted({n for _, n in groups})
    methods = [m.value for m in MethodKind]
    out = []
    for n in sizes:
        present = [m for m in methods if (m, n) in groups and groups[(m, n)]["best_c"]]
        for a in present:
            for b in present:
                if a == b:
                    continue
                xs, ys = groups[(a, n)]["best_c"], groups[(b, n)]["best_c"]
                stat, p = mannwhitneyu(xs, ys, alternative="less")
                out.append({
                    "n": n, "method_a": a, "method_b": b,
                    "n_a": len(xs), "n_b": len(ys),
                    "u_statistic": f"{stat:.6g}", "p_value": f"{p:.6g}",
                    "significant": "yes" if p < alpha else "no",
                })
    return out


_PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Render the four summary series (requires matplotlib).\"\"\"
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
from pathlib import Path

HERE = Path(__file__).parent
SERIES = {series!r}

for name in SERIES:
    rows = [line.split() for line in (HERE / f"{{name}}.dat").read_text().splitlines()]
    header, data = rows[0][1:], rows[1:]
    xs = [float(r[0]) for r in data]
    plt.figure()
    for col, method in enumerate(header[1:], start=1):
        ys = [float(r[col]) for r in data]
        plt.plot(xs, ys, marker="o", label=method)
    plt.xlabel("lines")
    plt.ylabel(name.replace("_", " "))
    plt.legend()
    plt.savefig(HERE / f"{{name}}.png", dpi=150)
    print(f"wrote {{name}}.png")
"""


def write_stats_outputs(rows: Sequence[dict], outdir: Path, echo=print) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    agg = aggregate_stats(rows)
    groups = agg["groups"]
    for row in agg["skipped"]:
        echo(f"excluded: {row['method']} n={row['n']} rep={row['repetition']} "
             f"({row.get('error') or 'no correct network'})")

    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "n", "runs", "found",
                     "best_c_min", "best_c_mean", "best_l_min", "best_l_mean"])
    for (method, n), group in sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        cs, ls = group["best_c"], group["best_l"]
        writer.writerow([
            method, n, group["runs"], len(cs),
            min(cs) if cs else "", f"{sum(cs) / len(cs):.6f}" if cs else "",
            min(ls) if ls else "", f"{sum(ls) / len(ls):.6f}" if ls else "",
        ])
    (outdir / "summary.csv").write_text(buf.getvalue())

    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    writer = csv.DictWriter(
        buf,
        ["n", "method_a", "method_b", "n_a", "n_b", "u_statistic", "p_value", "significant"],
        lineterminator="\n",
    )
    writer.writeheader()
    writer.writerows(mannwhitney_rows(groups))
    # The paper never names its significance test; a one-sided rank test is
    # our interpretation for small non-normal samples.
    (outdir / "significance.csv").write_text(buf.getvalue())

    sizes = sorted({n for _, n in groups})
    methods = [m.value for m in MethodKind if any(key[0] == m.value for key in groups)]
    series_value = {
        "best_c_min": lambda g: min(g["best_c"]) if g["best_c"] else None,
        "best_c_mean": lambda g: sum(g["best_c"]) / len(g["best_c"]) if g["best_c"] else None,
        "best_l_min": lambda g: min(g["best_l"]) if g["best_l"] else None,
        "best_l_mean": lambda g: sum(g["best_l"]) / len(g["best_l"]) if g["best_l"] else None,
    }
    for name in PLOT_SERIES:
        lines = ["# n " + " ".join(methods)]
        for n in sizes:
            cols = [str(n)]
            for method in methods:
                group = groups.get((method, n))
                value = series_value[name](group) if group else None
                cols.append("nan" if value is None else f"{value:.6f}")
            lines.append(" ".join(cols))
        (outdir / f"{name}.dat").write_text("\n".join(lines) + "\n")

    (outdir / "plot_results.py").write_text(_PLOT_SCRIPT.format(series=PLOT_SERIES))
    echo(f"stats written to {outdir}")


def cmd_stats(args) -> int:
    rows = read_csv_with_schema(Path(args.sweep_csv))
    write_stats_outputs(rows, Path(args.out))
    return 0


# --- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compnovel",
        description="Evolve minimal sorting networks with composite objectives "
                    "and novelty selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single experiment")
    p_run.add_argument("--config", required=True, help="run config file")
    p_run.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override a config value")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--workers", type=int, default=1,
                       help="parallel evaluation workers (results identical)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run an experiment grid")
    p_sweep.add_argument("--spec", required=True, help="sweep spec file")
    p_sweep.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="check a network file")
    p_verify.add_argument("network", help="network text file")
    p_verify.set_defaults(func=cmd_verify)

    p_stats = sub.add_parser("stats", help="aggregate a sweep CSV")
    p_stats.add_argument("sweep_csv", help="sweep.csv produced by `sweep`")
    p_stats.add_argument("--out", required=True, help="output directory")
    p_stats.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
