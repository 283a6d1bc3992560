"""Command-line entry point: ``edgesched {gen,solve,train,bench,plot}``.

Exit codes: 0 success, 1 usage or configuration error, 2 infeasibility or
another runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from edgesched.errors import (
    ConfigurationError,
    DecodeError,
    EdgeSchedError,
    InfeasibleInstanceError,
    InfeasibleSolutionError,
)
from edgesched.harness.bench import run_bench, solve_setting
from edgesched.harness.config import BenchSetting, ExperimentConfig, load_config, parse_setting
from edgesched.harness.output import read_csv, render_svg, write_csv
from edgesched.problem import (
    check_objective_kind,
    load_scenario,
    load_solution,
    save_scenario,
    save_solution,
)
from edgesched.scengen import generate_corpus
from edgesched.surrogate import load_model, save_model, train

log = logging.getLogger("edgesched")

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config file (INI syntax)")
    common.add_argument("--seed", type=int, help="override the base seed")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="edgesched", description="Edge request scheduling experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="write a seeded scenario corpus")
    g.add_argument("--count", type=int, help="number of scenarios (default: corpus_size)")
    g.add_argument("--out", type=Path, required=True, help="output directory")

    s = sub.add_parser("solve", parents=[common], help="solve one scenario with one setting")
    s.add_argument("scenario", type=Path)
    s.add_argument("--setting", help="name of a setting from the config")
    s.add_argument("--solver", choices=("ga", "evo", "surrogate", "exact"))
    s.add_argument("--budget", type=int, default=50000, help="evaluations for ga/evo")
    s.add_argument("--model", type=Path, help="surrogate model file")
    s.add_argument("--objective", choices=("total", "makespan"))
    s.add_argument("--out", type=Path, help="write the solution JSON here")

    t = sub.add_parser("train", parents=[common], help="label a corpus with evo and fit the surrogate")
    t.add_argument("--count", type=int, help="training corpus size")
    t.add_argument("--dataset", type=Path, help="directory of scenario/label JSON pairs (read if present, else written)")
    t.add_argument("--out", type=Path, required=True, help="model file to write")

    b = sub.add_parser("bench", parents=[common], help="run every setting on a corpus")
    b.add_argument("--count", type=int, help="corpus size (default: corpus_size)")
    b.add_argument("--corpus", type=Path, help="read scenarios from this directory instead of generating")
    b.add_argument("--model", type=Path, help="add a 'surrogate' setting using this model")
    b.add_argument("--jobs", type=int, help="worker processes (1 for timing-grade runs)")
    b.add_argument("--out", type=Path, required=True, help="output directory for report.csv and SVGs")

    pl = sub.add_parser("plot", help="render SVG charts from a report CSV")
    pl.add_argument("report", type=Path)
    pl.add_argument("--out", type=Path, required=True)
    pl.add_argument("-v", "--verbose", action="store_true")
    return p


def _corpus(cfg: ExperimentConfig, seed: int | None, count: int):
    base = cfg.seed if seed is None else seed
    return generate_corpus(replace(cfg.scenario, seed=base), count)


def _read_dir(path: Path, pattern: str):
    files = sorted(path.glob(pattern))
    if not files:
        raise ConfigurationError(f"no files matching {pattern} in {path}")
    return files


def cmd_gen(args, cfg: ExperimentConfig) -> int:
    count = args.count if args.count is not None else cfg.corpus_size
    if count < 1:
        raise ConfigurationError("--count must be >= 1")
    args.out.mkdir(parents=True, exist_ok=True)
    for i, scenario in enumerate(_corpus(cfg, args.seed, count)):
        save_scenario(scenario, args.out / f"scenario_{i:04d}.json")
    print(f"wrote {count} scenarios to {args.out}")
    return EXIT_OK


def cmd_solve(args, cfg: ExperimentConfig) -> int:
    scenario = load_scenario(args.scenario)
    kind = check_objective_kind(args.objective or cfg.objective)
    if args.setting:
        match = [s for s in cfg.settings if s.name == args.setting]
        if not match:
            raise ConfigurationError(f"no setting named {args.setting!r} in the config")
        setting = match[0]
    elif args.solver:
        setting = BenchSetting(args.solver, args.solver, args.budget,
                               "scenario" if args.seed is None else str(args.seed),
                               str(args.model) if args.model else None)
    else:
        raise ConfigurationError("give --setting or --solver")
    report = solve_setting(scenario, setting, kind, cfg.ga, cfg.evo)
    print(f"solver={report.solver} objective({kind})={report.objective:.12g} s "
          f"sum={report.sum_total:.12g} s max={report.max_total:.12g} s "
          f"evaluations={report.evaluations} wall={report.wall_time:.4f} s")
    if args.out:
        save_solution(report.solution, args.out)
    return EXIT_OK


def _load_dataset(path: Path):
    scenarios = [load_scenario(p) for p in _read_dir(path, "scenario_*.json")]
    labels = [load_solution(path / p.name.replace("scenario_", "label_"))
              for p in _read_dir(path, "scenario_*.json")]
    return scenarios, labels


def cmd_train(args, cfg: ExperimentConfig) -> int:
    from edgesched.evo import solve_evo

    if args.dataset is not None and args.dataset.is_dir() and any(args.dataset.glob("scenario_*.json")):
        corpus, labels = _load_dataset(args.dataset)
        log.info("loaded %d labelled scenarios from %s", len(corpus), args.dataset)
    else:
        count = args.count if args.count is not None else cfg.train_corpus_size
        seed = cfg.train_corpus_seed if args.seed is None else args.seed
        corpus = generate_corpus(replace(cfg.scenario, seed=seed), count)
        labels = []
        for i, scenario in enumerate(corpus):
            labels.append(solve_evo(scenario, cfg.label_budget, scenario.seed, cfg.objective, cfg.evo).solution)
            if (i + 1) % 100 == 0:
                log.info("labelled %d/%d", i + 1, count)
        if args.dataset is not None:
            args.dataset.mkdir(parents=True, exist_ok=True)
            for i, (scenario, label) in enumerate(zip(corpus, labels)):
                save_scenario(scenario, args.dataset / f"scenario_{i:04d}.json")
                save_solution(label, args.dataset / f"label_{i:04d}.json")
    model = train(corpus, labels, cfg.train, label_solver=f"evo-{cfg.label_budget}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, args.out)
    curve = model.metadata["loss_curve"]
    print(f"trained on {len(corpus)} scenarios; loss {curve[0]:.6g} -> {curve[-1]:.6g}; "
          f"validation {model.metadata['val_curve'][-1]:.6g}; model written to {args.out}")
    return EXIT_OK


def cmd_bench(args, cfg: ExperimentConfig) -> int:
    if args.corpus is not None:
        corpus = [load_scenario(p) for p in _read_dir(args.corpus, "*.json")]
        if args.count is not None:
            corpus = corpus[: args.count]
    else:
        count = args.count if args.count is not None else cfg.corpus_size
        if count < 1:
            raise ConfigurationError("--count must be >= 1")
        corpus = _corpus(cfg, args.seed, count)
    settings = list(cfg.settings)
    if args.model is not None:
        load_model(args.model, corpus[0].node_count)  # fail early on a bad file
        settings.append(parse_setting("surrogate", f"surrogate model={args.model}"))
    jobs = args.jobs if args.jobs is not None else cfg.jobs
    report = run_bench(corpus, settings, cfg.objective, ga_params=cfg.ga, evo_params=cfg.evo, jobs=jobs)
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(report, args.out / "report.csv")
    render_svg(report, args.out)
    print(f"{'setting':<16}{'mean delay (s)':>16}{'std (s)':>12}{'mean time (s)':>15}{'wins':>7}{'failed':>8}")
    for s in report.summary:
        print(f"{s.setting:<16}{s.mean_delay:>16.6f}{s.std_delay:>12.6f}{s.mean_wall_time:>15.6f}"
              f"{s.wins:>7d}{s.failures:>8d}")
    print(f"report written to {args.out}")
    return EXIT_OK


def cmd_plot(args, cfg) -> int:
    report = read_csv(args.report)
    for path in render_svg(report, args.out):
        print(path)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "train": cmd_train, "bench": cmd_bench, "plot": cmd_plot}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(getattr(args, "config", None)) if args.command != "plot" else None
        return COMMANDS[args.command](args, cfg)
    except (InfeasibleInstanceError, InfeasibleSolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v.describe()}", file=sys.stderr)
        return EXIT_FAILURE
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EdgeSchedError, DecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
