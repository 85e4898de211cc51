import json

import numpy as np
import pytest

from shycoupling.cli import main as cli_main
from shycoupling.harness import (ConfigError, ExperimentConfig, config_for,
                                 list_scenarios, load_config_file,
                                 run_experiment)

SPEC_SCENARIOS = {"thm31_k4", "ex33_fig32", "ex38_fig36", "lemma34_star",
                  "ex36_backbone", "ex37_loop", "thm41_sync_disc",
                  "thm41_mirror_disc", "ex42_free", "ex42_disc",
                  "ex44_annulus"}


def test_catalogue_is_the_builtin_set():
    names = {s["name"] for s in list_scenarios()}
    assert names == SPEC_SCENARIOS


def test_catalogue_entries_carry_descriptions_and_defaults():
    for s in list_scenarios():
        assert s["description"]
        assert s["defaults"]["dt"] > 0
        assert s["space"] in ("graph", "plane")


def test_config_defaults_and_overrides():
    cfg = config_for("ex42_free")
    assert cfg.dt == 1e-4 and cfg.t_max == 1.0 and cfg.n_paths == 100
    cfg = config_for("ex42_free", n_paths=7, seed=9)
    assert cfg.n_paths == 7 and cfg.seed == 9


def test_config_validation_errors():
    with pytest.raises(KeyError):
        config_for("not_a_scenario")
    with pytest.raises(ConfigError):
        config_for("ex42_free", dt=-1.0)
    with pytest.raises(ConfigError):
        config_for("ex42_free", n_paths=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(scenario="ex42_free", workers=0).validate()


def test_run_experiment_writes_outputs(tmp_path):
    cfg = config_for("ex44_annulus", t_max=0.5, n_paths=4,
                     out_dir=str(tmp_path / "run"))
    report = run_experiment(cfg)
    assert report.schema == 1
    assert report.checks and report.checks[0]["passed"]
    out = tmp_path / "run"
    data = json.loads((out / "report.json").read_text())
    assert data["schema"] == 1
    assert data["scenario"] == "ex44_annulus"
    assert "wall_clock" not in json.dumps(data)  # timing lives in the sidecar
    assert (out / "timing.json").exists()
    assert (out / "path0.csv").exists()
    assert (out / "survival.png").exists()
    header = (out / "path0.csv").read_text().splitlines()[0]
    assert header == "t,x1,x2,y1,y2,dist,lx,ly"


def test_reports_byte_identical_across_worker_counts(tmp_path):
    outs = []
    for i, workers in enumerate((1, 3)):
        cfg = config_for("ex44_annulus", t_max=0.5, n_paths=6, seed=5,
                         workers=workers, out_dir=str(tmp_path / f"w{i}"))
        run_experiment(cfg)
        outs.append((tmp_path / f"w{i}" / "report.json").read_bytes())
    assert outs[0] == outs[1]


def test_graph_scenario_reports_byte_identical_across_workers(tmp_path):
    outs = []
    for i, workers in enumerate((1, 4)):
        cfg = config_for("ex33_fig32", t_max=1.0, n_paths=8, seed=3,
                         workers=workers, figures=False,
                         out_dir=str(tmp_path / f"g{i}"))
        run_experiment(cfg)
        outs.append((tmp_path / f"g{i}" / "report.json").read_bytes())
    assert outs[0] == outs[1]


def test_lemma34_scenario_report_content():
    cfg = config_for("lemma34_star", n_paths=4000)
    report = run_experiment(cfg)
    d = report.details
    assert d["lower"] <= d["probability"] <= d["upper_clipped"]
    assert d["r"] == 2.0 and d["m0"] == 3


def test_fig36_scenario_reports_distance_band(tmp_path):
    cfg = config_for("ex38_fig36", t_max=2.0, n_paths=10, figures=False)
    report = run_experiment(cfg)
    by_name = {c["name"]: c for c in report.checks}
    assert by_name["distance_lower_bound"]["passed"]
    assert report.details["sup_abs_distance_minus_one"] <= 2.0 + 1e-9
    # the machine is shy: the pair never comes closer than distance 1
    assert report.verdict == "shy-consistent"
    assert report.shyness["median_min_by_ckpt"][-1] >= 1.0 - 1e-9


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_list_ok(capsys):
    assert cli_main(["list"]) == 0
    out = capsys.readouterr().out
    for name in SPEC_SCENARIOS:
        assert name in out


def test_cli_bounds_lemma34(capsys):
    assert cli_main(["bounds", "--lemma34", "0.3", "2", "1", "3"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["lemma34"]["upper_clipped"] == 1.0
    assert data["lemma34"]["lower"] == pytest.approx(6.674e-8, rel=1e-3)


def test_cli_bounds_gaussian(capsys):
    assert cli_main(["bounds", "--gaussian35", "1", "2"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["gaussian35"]["upper"] == pytest.approx(2 * data["gaussian35"]["lower"])


def test_cli_bounds_without_flags_is_config_error(capsys):
    assert cli_main(["bounds"]) == 2


def test_cli_unknown_scenario_is_config_error(capsys):
    assert cli_main(["simulate", "--scenario", "nope"]) == 2


def test_cli_simulate_runs_and_prints(tmp_path, capsys):
    code = cli_main(["simulate", "--scenario", "ex42_free", "--paths", "5",
                     "--t", "0.2", "--seed", "1",
                     "--out", str(tmp_path / "cli"), "--no-figures"])
    assert code == 0
    out = capsys.readouterr().out
    assert "deterministic_distance_law" in out
    assert (tmp_path / "cli" / "report.json").exists()


def test_cli_config_file_with_flag_override(tmp_path, capsys):
    cfgfile = tmp_path / "cfg.toml"
    cfgfile.write_text('scenario = "ex42_free"\npaths = 4\nt = 0.2\n'
                       'figures = false\n')
    code = cli_main(["simulate", "--config", str(cfgfile), "--paths", "3"])
    assert code == 0
    data = capsys.readouterr().out
    assert "scenario ex42_free" in data


def test_config_file_rejects_unknown_keys(tmp_path):
    cfgfile = tmp_path / "bad.toml"
    cfgfile.write_text('scenario = "ex42_free"\nbogus = 3\n')
    with pytest.raises(ConfigError):
        load_config_file(cfgfile)


def test_cli_graph_fixture_summary(capsys):
    assert cli_main(["graph", "--fixture", "fig36"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["edges"] == 7 and data["m0"] == 3


def test_cli_graph_json_file(tmp_path, capsys):
    spec = {"vertices": ["c", "l1", "l2", "l3"],
            "edges": [{"id": f"a{i}", "u": "c", "v": f"l{i}", "length": 2.0}
                      for i in (1, 2, 3)]}
    p = tmp_path / "g.json"
    p.write_text(json.dumps(spec))
    assert cli_main(["graph", "--json", str(p)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["r0"] == 2.0


def test_cli_graph_rejects_bad_usage(capsys):
    assert cli_main(["graph"]) == 2
    assert cli_main(["graph", "--fixture", "zzz"]) == 2


def test_cli_exit_code_for_runtime_failure(tmp_path):
    # an unwritable output directory surfaces as a runtime failure (3)
    target = tmp_path / "blocked"
    target.write_text("a file, not a directory")
    code = cli_main(["simulate", "--scenario", "ex42_free", "--paths", "2",
                     "--t", "0.1", "--out", str(target / "sub")])
    assert code == 3
