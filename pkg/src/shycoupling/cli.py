"""Batch CLI: simulate scenarios, evaluate bounds, list the catalogue.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shycoupling",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a named scenario")
    sim.add_argument("--scenario", help="scenario name (see `list`)")
    sim.add_argument("--config", help="TOML config file; flags override it")
    sim.add_argument("--dt", type=float, default=None)
    sim.add_argument("--t", type=float, default=None, help="time horizon")
    sim.add_argument("--paths", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--out", default=None, help="output directory")
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--no-csv", action="store_true",
                     help="skip the path-0 CSV")
    sim.add_argument("--no-figures", action="store_true",
                     help="skip figure rendering")

    b = sub.add_parser("bounds", help="evaluate analytic exit bounds")
    b.add_argument("--lemma34", nargs=4, type=float,
                   metavar=("T", "R", "R0", "M0"),
                   help="graph exit-probability sandwich")
    b.add_argument("--gaussian35", nargs=2, type=float, metavar=("T", "R"),
                   help="one-dimensional hitting sandwich")

    g = sub.add_parser("graph", help="inspect a fixture or a JSON graph file")
    g.add_argument("--fixture", help="fixture name, e.g. k4, fig36, star(5)")
    g.add_argument("--json", dest="json_file", help="graph spec file")

    sub.add_parser("list", help="print the scenario catalogue")
    return p


def _cmd_simulate(args) -> int:
    from .harness import ConfigError, config_for, format_report, load_config_file, run_experiment

    file_cfg = {}
    if args.config:
        file_cfg = load_config_file(args.config)
    scenario = args.scenario or file_cfg.get("scenario")
    if not scenario:
        print("error: --scenario (or a config file naming one) is required",
              file=sys.stderr)
        return 2
    overrides = {
        "dt": args.dt if args.dt is not None else file_cfg.get("dt"),
        "t_max": args.t if args.t is not None else file_cfg.get("t"),
        "n_paths": args.paths if args.paths is not None else file_cfg.get("paths"),
        "seed": args.seed if args.seed is not None else file_cfg.get("seed"),
        "out_dir": args.out if args.out is not None else file_cfg.get("out"),
        "workers": args.workers if args.workers is not None else file_cfg.get("workers"),
        "params": file_cfg.get("params"),
    }
    if args.no_csv or file_cfg.get("csv") is False:
        overrides["write_csv"] = False
    if args.no_figures or file_cfg.get("figures") is False:
        overrides["figures"] = False
    cfg = config_for(scenario, **overrides)
    report = run_experiment(cfg)
    print(format_report(report))
    if cfg.out_dir:
        print(f"outputs written to {cfg.out_dir}")
    return 0


def _cmd_bounds(args) -> int:
    from .analysis import gaussian_exit_bounds, lemma34_bounds

    if args.lemma34 is None and args.gaussian35 is None:
        print("error: bounds needs --lemma34 or --gaussian35", file=sys.stderr)
        return 2
    out = {}
    if args.lemma34 is not None:
        t, r, r0, m0 = args.lemma34
        bp = lemma34_bounds(t, r, r0, int(m0))
        out["lemma34"] = {
            "t": t, "r": r, "r0": r0, "m0": int(m0),
            "lower": bp.lower, "upper": bp.upper,
            "upper_clipped": bp.upper_clipped, "log_upper": bp.log_upper,
            "regime": {"r2_gt_t": bp.r2_gt_t, "t_lt_t0": bp.t_lt_t0},
        }
    if args.gaussian35 is not None:
        t, r = args.gaussian35
        bp = gaussian_exit_bounds(t, r)
        out["gaussian35"] = {
            "t": t, "r": r, "lower": bp.lower, "upper": bp.upper,
            "regime": {"r2_ge_t": bp.r2_gt_t},
        }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def _cmd_graph(args) -> int:
    from .metric_graph import fixture, load_graph

    if bool(args.fixture) == bool(args.json_file):
        print("error: graph needs exactly one of --fixture or --json",
              file=sys.stderr)
        return 2
    if args.fixture:
        fix = fixture(args.fixture)
        g = fix.graph
        markers = sorted(fix.markers)
        iso = fix.isometry is not None
    else:
        g = load_graph(args.json_file)
        markers, iso = [], False
    print(json.dumps({
        "vertices": len(g.vertices),
        "edges": len(g.edges),
        "r0": g.r0,
        "m0": g.m0,
        "degrees": {v: g.degree(v) for v in g.vertices},
        "markers": markers,
        "has_isometry": iso,
    }, indent=2, sort_keys=True))
    return 0


def _cmd_list() -> int:
    from .harness import list_scenarios

    for s in list_scenarios():
        print(f"{s['name']:18s} [{s['space']}/{s['coupling']}]")
        print(f"    {s['description']}")
        d = s["defaults"]
        print(f"    defaults: dt={d.get('dt')} t={d.get('t_max')} "
              f"paths={d.get('n_paths')}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "bounds":
            return _cmd_bounds(args)
        if args.command == "graph":
            return _cmd_graph(args)
        return _cmd_list()
    except (ValueError, KeyError, FileNotFoundError) as exc:
        from .harness import ConfigError
        from .metric_graph import GraphError

        if isinstance(exc, (ConfigError, GraphError, KeyError,
                            FileNotFoundError)):
            print(f"configuration error: {exc}", file=sys.stderr)
            return 2
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
