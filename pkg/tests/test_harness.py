"""Benchmark pipeline, report files, config parsing and the CLI."""

from __future__ import annotations

import json

import pytest

from edgesched.errors import ConfigurationError, DecodeError, InfeasibleSolutionError
from edgesched.harness import bench as bench_mod
from edgesched.harness import (
    BenchSetting,
    load_config,
    parse_setting,
    read_csv,
    render_svg,
    run_bench,
    strip_wall_time,
    write_csv,
)
from edgesched.harness.cli import main
from edgesched.harness.output import format_csv
from edgesched.problem import Solution, make_report, save_scenario
from edgesched.scengen import GenConfig, generate, generate_corpus

from conftest import make_scenario

FAST = (BenchSetting("ga-500", "ga", 500), BenchSetting("evo-500", "evo", 500))


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(GenConfig(seed=50), 4)


@pytest.fixture(scope="module")
def report(corpus):
    return run_bench(corpus, FAST)


# --------------------------------------------------------------------- config

def test_default_config():
    cfg = load_config(None)
    assert [s.name for s in cfg.settings] == ["ga-5000", "ga-50000", "evo-5000", "evo-50000"]
    assert cfg.objective == "total" and cfg.scenario.request_count == 20


def test_shipped_config_loads():
    cfg = load_config("configs/default.cfg")
    assert cfg.train.optimizer == "adam" and cfg.train.share_weight == 100
    assert cfg.label_budget == 50000 and cfg.train_corpus_size == 1000
    assert cfg.scenario.wireless.noise_density == pytest.approx(10 ** -11.4, rel=1e-12)


def test_config_overrides(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text(
        "[general]\nseed = 7\nobjective = makespan\n"
        "[scenario]\nrequest_count = 5\nbandwidth_mhz = 20\n"
        "[ga]\npopulation_size = 10\n"
        "[settings]\nfast = ga 300 seed=4\nnet = surrogate model=m.bin\n"
    )
    cfg = load_config(p)
    assert cfg.seed == 7 and cfg.objective == "makespan"
    assert cfg.scenario.request_count == 5 and cfg.scenario.bandwidth_mhz == 20
    assert cfg.ga.population_size == 10
    fast, net = cfg.settings
    assert (fast.solver, fast.budget, fast.solver_seed(99)) == ("ga", 300, 4)
    assert net.model_path == str(tmp_path / "m.bin")


@pytest.mark.parametrize(
    "text",
    [
        "[bogus]\nx = 1\n",
        "[general]\ncolour = red\n",
        "[general]\nseed = many\n",
        "[general]\nobjective = mean\n",
        "[settings]\n",
        "[settings]\na = anneal 10\n",
        "[settings]\na = ga\n",
        "[settings]\na = surrogate\n",
        "[settings]\na = ga 10 seed=x\n",
        "[settings]\na = ga ten\n",
        "not an ini file",
    ],
)
def test_bad_configs(tmp_path, text):
    p = tmp_path / "c.cfg"
    p.write_text(text)
    with pytest.raises(ConfigurationError):
        load_config(p)


def test_parse_setting_defaults():
    s = parse_setting("x", "exact")
    assert s.solver == "exact" and s.seed_policy == "scenario" and s.solver_seed(12) == 12


# ---------------------------------------------------------------------- bench

def test_report_shape(report, corpus):
    assert report.scenario_count == 4 and len(report.cells) == 8
    assert [c.setting for c in report.cells[:2]] == ["ga-500", "evo-500"]
    assert all(c.feasible and c.status == "ok" for c in report.cells)
    assert sum(s.wins for s in report.summary) >= 4


def test_single_setting_wins_everything(corpus):
    rep = run_bench(corpus, FAST[:1])
    assert rep.summary[0].wins == 4


def test_exact_dominates():
    corpus = [generate(GenConfig(seed=s, request_count=4, bandwidth_mhz=6, capacity_mhz=300.0)) for s in range(3)]
    settings = (BenchSetting("exact", "exact"),) + FAST
    rep = run_bench(corpus, settings)
    assert rep.summary_for("exact").wins == 3
    for i in range(3):
        cells = [c for c in rep.cells if c.scenario == i]
        assert all(cells[0].sum_total <= c.sum_total + 1e-9 for c in cells)


def test_win_ties_credit_everyone(corpus):
    twins = (BenchSetting("a", "ga", 500), BenchSetting("b", "ga", 500))
    rep = run_bench(corpus, twins)
    assert [s.wins for s in rep.summary] == [4, 4]


def test_bench_validation(corpus):
    with pytest.raises(ConfigurationError):
        run_bench([], FAST)
    with pytest.raises(ConfigurationError):
        run_bench(corpus, [])
    with pytest.raises(ConfigurationError):
        run_bench(corpus, (FAST[0], FAST[0]))


def test_infeasible_solution_aborts(monkeypatch, corpus):
    def bad(scenario, setting, *args, **kwargs):
        sol = Solution((0,) * scenario.request_count, (10,) * scenario.request_count)
        return make_report(scenario, sol, solver="bad", kind="total", evaluations=1, wall_time=0.0)

    monkeypatch.setattr(bench_mod, "solve_setting", bad)
    with pytest.raises(InfeasibleSolutionError) as info:
        run_bench(corpus[:1], FAST[:1])
    assert info.value.violations


def test_decode_failures_are_counted(monkeypatch, corpus):
    real = bench_mod.solve_setting

    def flaky(scenario, setting, *args, **kwargs):
        if setting.name == "evo-500" and scenario.seed % 2 == 0:
            raise DecodeError("no room")
        return real(scenario, setting, *args, **kwargs)

    monkeypatch.setattr(bench_mod, "solve_setting", flaky)
    rep = run_bench(corpus, FAST)
    s = rep.summary_for("evo-500")
    assert s.failures == 2
    assert [c.status for c in rep.cells_for("evo-500")].count("decode-failed") == 2


def test_parallel_matches_serial(corpus, report):
    par = run_bench(corpus, FAST, jobs=2)
    assert strip_wall_time(format_csv(par)) == strip_wall_time(format_csv(report))


# --------------------------------------------------------------------- output

def test_csv_round_trip(report, tmp_path):
    write_csv(report, tmp_path / "r.csv")
    back = read_csv(tmp_path / "r.csv")
    assert back.cells == report.cells and back.summary == report.summary
    assert back.objective_kind == "total" and back.settings == report.settings


def test_csv_is_deterministic_modulo_wall_time(corpus, report):
    again = run_bench(corpus, FAST)
    assert strip_wall_time(format_csv(again)) == strip_wall_time(format_csv(report))


def test_strip_wall_time_blanks_only_time(report):
    text = strip_wall_time(format_csv(report))
    header = text.splitlines()[1].split(",")
    first = text.splitlines()[2].split(",")
    assert first[header.index("wall_time")] == ""
    assert first[header.index("sum_total")] != ""


def test_empty_report_is_an_error(tmp_path):
    empty = bench_mod.BenchReport("total", [], [], [])
    with pytest.raises(ConfigurationError):
        write_csv(empty, tmp_path / "r.csv")
    assert not (tmp_path / "r.csv").exists()
    with pytest.raises(ConfigurationError):
        render_svg(empty, tmp_path)


def test_svg_one_bar_per_setting_and_stable(report, tmp_path):
    paths = render_svg(report, tmp_path / "a")
    assert [p.name for p in paths] == ["delay.svg", "time.svg", "wins.svg"]
    for p in paths:
        assert p.read_text().count('class="bar"') == 2
    again = render_svg(report, tmp_path / "b")
    assert all(x.read_bytes() == y.read_bytes() for x, y in zip(paths, again))


# ------------------------------------------------------------------------ CLI

def test_cli_gen(tmp_path):
    assert main(["gen", "--seed", "42", "--count", "100", "--out", str(tmp_path / "corpus")]) == 0
    files = sorted((tmp_path / "corpus").glob("*.json"))
    assert len(files) == 100
    assert json.loads(files[5].read_text())["seed"] == 47


def test_cli_bench_with_config(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[general]\ncorpus_size = 3\n[settings]\nga-500 = ga 500\nevo-500 = evo 500\n")
    assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / "rep")]) == 0
    names = sorted(p.name for p in (tmp_path / "rep").iterdir())
    assert names == ["delay.svg", "report.csv", "time.svg", "wins.svg"]
    assert "ga-500" in capsys.readouterr().out
    assert main(["plot", str(tmp_path / "rep" / "report.csv"), "--out", str(tmp_path / "plots")]) == 0
    assert len(list((tmp_path / "plots").glob("*.svg"))) == 3


def test_cli_bench_from_corpus_dir(tmp_path):
    assert main(["gen", "--count", "2", "--out", str(tmp_path / "c")]) == 0
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[settings]\nevo-300 = evo 300\n")
    assert main(["bench", "--config", str(cfg), "--corpus", str(tmp_path / "c"), "--out", str(tmp_path / "r")]) == 0
    assert read_csv(tmp_path / "r" / "report.csv").scenario_count == 2


def test_cli_solve_writes_solution(tmp_path, capsys):
    save_scenario(generate(GenConfig(seed=3)), tmp_path / "s.json")
    code = main(["solve", str(tmp_path / "s.json"), "--solver", "evo", "--budget", "500",
                 "--out", str(tmp_path / "sol.json")])
    assert code == 0
    assert len(json.loads((tmp_path / "sol.json").read_text())["assignments"]) == 20
    assert "objective(total)" in capsys.readouterr().out


@pytest.mark.parametrize("solver", ["ga", "evo", "exact"])
def test_cli_solve_infeasible_exits_2(tmp_path, capsys, solver):
    sc = make_scenario([10.0, 10.0], [100.0, 100.0], [[50, 50], [60, 60]], bandwidth=4, capacity=50.0)
    save_scenario(sc, tmp_path / "s.json")
    assert main(["solve", str(tmp_path / "s.json"), "--solver", solver, "--budget", "100"]) == 2
    err = capsys.readouterr().err
    assert "no feasible" in err or "no assignment" in err
    if solver != "exact":
        assert "compute violation" in err


def test_cli_usage_errors(tmp_path, capsys):
    assert main(["bench", "--frobnicate"]) == 1
    assert main([]) == 1
    assert main(["solve", str(tmp_path / "s.json")]) == 2  # missing file is a runtime failure
    save_scenario(generate(GenConfig()), tmp_path / "s.json")
    assert main(["solve", str(tmp_path / "s.json")]) == 1  # neither --setting nor --solver
    bad = tmp_path / "bad.cfg"
    bad.write_text("[nope]\n")
    assert main(["gen", "--config", str(bad), "--out", str(tmp_path / "x")]) == 1
    assert main(["--help"]) == 0
    capsys.readouterr()


def test_cli_train_and_bench_with_model(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(
        "[general]\ncorpus_size = 2\n"
        "[train]\nepochs = 2\nhidden = 8\nlabel_budget = 300\ncorpus_size = 6\n"
        "[settings]\nevo-300 = evo 300\n"
    )
    model = tmp_path / "m.bin"
    data = tmp_path / "data"
    assert main(["train", "--config", str(cfg), "--dataset", str(data), "--out", str(model)]) == 0
    assert len(list(data.glob("label_*.json"))) == 6 and model.exists()
    # second run reads the dataset back instead of relabelling
    assert main(["train", "--config", str(cfg), "--dataset", str(data), "--out", str(model)]) == 0
    assert main(["bench", "--config", str(cfg), "--model", str(model), "--out", str(tmp_path / "r")]) == 0
    rep = read_csv(tmp_path / "r" / "report.csv")
    assert rep.settings == ["evo-300", "surrogate"]
    scenario = tmp_path / "data" / "scenario_0000.json"
    assert main(["solve", str(scenario), "--solver", "surrogate", "--model", str(model)]) == 0
