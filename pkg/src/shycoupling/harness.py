"""Experiment configuration, seeded execution, and report persistence.

A run is a pure function of (config, seed): every path draws from a
counter-based stream keyed by the seed and its global path index, and
aggregation walks paths in index order, so reports are byte-identical for
any worker count. Wall-clock timing is therefore written to a sidecar
(timing.json), never into report.json.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .scenarios import get_scenario, list_scenarios

try:
    import tomllib  # python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    scenario: str
    dt: float = 1e-4
    t_max: float = 1.0
    n_paths: int = 1
    seed: int = 0
    out_dir: Optional[str] = None
    eps_grid: list = field(default_factory=list)
    workers: int = 1
    write_csv: bool = True
    figures: bool = True
    csv_stride: int = 1
    params: dict = field(default_factory=dict)

    def validate(self):
        if self.dt <= 0 or self.t_max <= 0:
            raise ConfigError("dt and t must be positive")
        if self.n_paths < 1:
            raise ConfigError("paths must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        get_scenario(self.scenario)
        return self


def config_for(scenario: str, **overrides) -> ExperimentConfig:
    """Build a config from a scenario's defaults plus keyword overrides."""
    s = get_scenario(scenario)
    base = dict(s.defaults)
    params = dict(base.pop("params", {}))
    params.update(overrides.pop("params", {}) or {})
    merged = {**base, **{k: v for k, v in overrides.items() if v is not None}}
    return ExperimentConfig(scenario=scenario, params=params,
                            **merged).validate()


def load_config_file(path) -> dict:
    """Read a TOML config file; keys mirror the CLI flags."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    allowed = {"scenario", "dt", "t", "paths", "seed", "out", "workers",
               "csv", "figures", "params"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


@dataclass
class RunReport:
    """Ensemble-level results of one scenario run."""

    scenario: str
    config: dict
    verdict: str
    checks: list
    details: dict
    shyness: Optional[dict]
    wall_clock_s: float
    steps_per_sec: float
    schema: int = 1

    def to_json_dict(self, include_timing: bool = False) -> dict:
        out = {
            "schema": self.schema,
            "scenario": self.scenario,
            "config": self.config,
            "verdict": self.verdict,
            "checks": self.checks,
            "details": self.details,
            "shyness": self.shyness,
        }
        if include_timing:
            out["timing"] = {"wall_clock_s": self.wall_clock_s,
                             "steps_per_sec": self.steps_per_sec}
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return repr(obj)
    return obj


def _shyness_dict(rep) -> Optional[dict]:
    if rep is None:
        return None
    return {
        "eps_grid": rep.eps_grid.tolist(),
        "survival": rep.survival.tolist(),
        "survival_ci95": rep.survival_ci.tolist(),
        "ckpt_times": rep.ckpt_times.tolist(),
        "median_min_by_ckpt": rep.median_min_by_ckpt.tolist(),
        "min_dist_quantiles": {
            "q10": float(np.quantile(rep.min_dist, 0.10)),
            "q50": float(np.quantile(rep.min_dist, 0.50)),
            "q90": float(np.quantile(rep.min_dist, 0.90)),
        },
        "verdict": rep.verdict,
    }


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Execute a scenario on parallel streams, aggregate, persist outputs."""
    cfg.validate()
    scenario = get_scenario(cfg.scenario)
    t0 = time.perf_counter()
    result = scenario.runner(cfg)
    wall = time.perf_counter() - t0
    rep = result.get("shyness")
    checks = result["checks"]
    if rep is not None:
        verdict = rep.verdict
    elif checks and all(c["passed"] for c in checks):
        verdict = "pass"
    elif checks:
        verdict = "fail"
    else:
        verdict = "n/a"
    config_echo = {
        "scenario": cfg.scenario, "dt": cfg.dt, "t_max": cfg.t_max,
        "n_paths": cfg.n_paths, "seed": cfg.seed,
        "eps_grid": list(cfg.eps_grid), "params": _jsonable(cfg.params),
    }
    report = RunReport(
        scenario=cfg.scenario,
        config=config_echo,
        verdict=verdict,
        checks=_jsonable(checks),
        details=_jsonable(result["details"]),
        shyness=_shyness_dict(rep),
        wall_clock_s=wall,
        steps_per_sec=result.get("steps", 0) / wall if wall > 0 else 0.0,
    )
    if cfg.out_dir:
        _persist(cfg, report, result)
    return report


def _persist(cfg: ExperimentConfig, report: RunReport, result: dict):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w") as fh:
        json.dump(report.to_json_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(out / "timing.json", "w") as fh:
        json.dump({"wall_clock_s": report.wall_clock_s,
                   "steps_per_sec": report.steps_per_sec}, fh, indent=2)
        fh.write("\n")
    path0 = result.get("path0")
    if cfg.write_csv and path0 is not None:
        csv_path = out / "path0.csv"
        graph = result.get("graph")
        from .graph_couplings import GraphPairSeries

        if isinstance(path0, GraphPairSeries):
            path0.to_csv(csv_path, graph)
        else:
            path0.to_csv(csv_path)
    if cfg.figures:
        from .report_plots import render_report_figures

        render_report_figures(report, result, out)


def format_report(report: RunReport) -> str:
    lines = [f"scenario {report.scenario}: verdict {report.verdict}"]
    for c in report.checks:
        status = "PASS" if c["passed"] else "FAIL"
        lines.append(f"  [{status}] {c['name']}: value={c['value']} "
                     f"target={c['target']}")
    lines.append(f"  wall clock {report.wall_clock_s:.1f}s, "
                 f"{report.steps_per_sec:,.0f} steps/s")
    return "\n".join(lines)


__all__ = ["ExperimentConfig", "RunReport", "run_experiment", "config_for",
           "list_scenarios", "load_config_file", "format_report",
           "ConfigError"]
