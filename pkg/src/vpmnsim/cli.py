"""Command-line front end.

Subcommands `connectivity`, `localization`, `line-scenario`, and `rates` run
the Monte Carlo experiments from a JSON config (plus flag overrides; flags
win) and write `<outdir>/<subcommand>.csv`, `<subcommand>.meta.json`, and a
PNG figure next to them. `solve-flow` and `solve-lp` expose the two solvers
on ad-hoc text inputs.

Exit codes: 0 success, 1 configuration/input error, 2 runtime error.

Config schema (all blocks and fields optional; defaults shown by the
`.meta.json` echo of any run):

    {
      "scenario":   {"area_side_m": 100.0, "line_num_ues": 28,
                     "line_gateway_offset_m": 20.0, "line_extent_m": 100.0,
                     "positions": [[x, y], ...]},
      "channel":    {"alpha": 2.0, "r0_m": 31.62, "d_cor_m": 20.0,
                     "sigma_sh_db": 8.0, "gamma_db": -10.0,
                     "delta_db": null, "d_min_m": null},
      "experiment": {"trials": 1000, "seed": 0,
                     "sweeps": {"gamma_list_db": [...], "device_list": [...],
                                "ue_list": [...], "gateway_list": [...]},
                     "modes": ["single_hop", "multi_hop"],
                     "algorithms": ["umf", "ppmf"],
                     "pos_bins": 40, "ratio_bins": 20}
    }
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import plots, reports, simplex
from ._version import __version__
from .channel import ChannelParams
from .experiments import (
    ExperimentConfig,
    estimate_p_conn,
    line_scenario_experiment,
    localization_experiment_single_gateway,
    rate_experiment,
)
from .flow import FlowNetwork, max_flow
from .routing import Algorithm


class ConfigError(Exception):
    """Bad invocation, config file, or solver input (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration errors, not runtime errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


EXPERIMENT_SUBCOMMANDS = ("connectivity", "localization", "line-scenario", "rates")

# per-subcommand tweaks on top of the ExperimentConfig defaults
_CFG_DEFAULTS: dict[str, dict] = {
    "connectivity": {},
    "localization": {},
    # the ratio side channel is a UMF artifact; add "ppmf" via config to run
    # the control pipeline
    "line-scenario": {"algorithms": (Algorithm.UMF,)},
    "rates": {"ue_list": (2, 4, 6, 8, 10), "trials": 200},
}

_SCENARIO_KEYS = ("area_side_m", "line_num_ues", "line_gateway_offset_m", "line_extent_m")
_EXPERIMENT_KEYS = ("modes", "algorithms", "pos_bins", "ratio_bins")
_SWEEP_KEYS = ("gamma_list_db", "device_list", "ue_list", "gateway_list")


def _require_mapping(block, name: str) -> dict:
    if not isinstance(block, dict):
        raise ConfigError(f"config block {name!r} must be a JSON object")
    return block


def _flatten_blocks(data: dict) -> dict:
    """Nested config JSON -> flat ExperimentConfig kwargs."""
    unknown = set(data) - {"scenario", "channel", "experiment"}
    if unknown:
        raise ConfigError(f"unknown config blocks: {sorted(unknown)}")
    out: dict = {}

    if "channel" in data:
        block = _require_mapping(data["channel"], "channel")
        try:
            out["channel"] = ChannelParams(**block)
        except TypeError as exc:
            raise ConfigError(f"channel block: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"channel block: {exc}") from exc

    if "scenario" in data:
        block = dict(_require_mapping(data["scenario"], "scenario"))
        if "positions" in block:
            pts = block.pop("positions")
            try:
                out["explicit_positions"] = tuple((float(x), float(y)) for x, y in pts)
            except (TypeError, ValueError) as exc:
                raise ConfigError("scenario positions must be [[x, y], ...]") from exc
        bad = set(block) - set(_SCENARIO_KEYS)
        if bad:
            raise ConfigError(f"unknown scenario fields: {sorted(bad)}")
        out.update(block)

    if "experiment" in data:
        block = dict(_require_mapping(data["experiment"], "experiment"))
        if "trials" in block:
            out["trials"] = block.pop("trials")
        if "seed" in block:
            out["base_seed"] = block.pop("seed")
        if "sweeps" in block:
            sweeps = dict(_require_mapping(block.pop("sweeps"), "sweeps"))
            bad = set(sweeps) - set(_SWEEP_KEYS)
            if bad:
                raise ConfigError(f"unknown sweep fields: {sorted(bad)}")
            out.update(sweeps)
        bad = set(block) - set(_EXPERIMENT_KEYS)
        if bad:
            raise ConfigError(f"unknown experiment fields: {sorted(bad)}")
        out.update(block)

    return out


def config_schema(cfg: ExperimentConfig) -> dict:
    """The effective config in the documented nested JSON schema.

    Feeding this back via --config reproduces the run exactly.
    """
    scenario = {k: getattr(cfg, k) for k in _SCENARIO_KEYS}
    if cfg.explicit_positions is not None:
        scenario["positions"] = [list(p) for p in cfg.explicit_positions]
    return {
        "scenario": scenario,
        "channel": dataclasses.asdict(cfg.channel),
        "experiment": {
            "trials": cfg.trials,
            "seed": cfg.base_seed,
            "sweeps": {k: list(getattr(cfg, k)) for k in _SWEEP_KEYS},
            "modes": [m.value for m in cfg.modes],
            "algorithms": [a.value for a in cfg.algorithms],
            "pos_bins": cfg.pos_bins,
            "ratio_bins": cfg.ratio_bins,
        },
    }


def _load_config(args) -> ExperimentConfig:
    kwargs = dict(_CFG_DEFAULTS[args.subcommand])
    if args.config is not None:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        kwargs.update(_flatten_blocks(data))
    if args.seed is not None:
        kwargs["base_seed"] = args.seed
    if args.trials is not None:
        kwargs["trials"] = args.trials
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _run_experiment(args) -> int:
    cfg = _load_config(args)
    sub = args.subcommand
    outdir = Path(args.outdir)
    start = time.perf_counter()
    histograms = None
    if sub == "connectivity":
        report = estimate_p_conn(cfg)
    elif sub == "localization":
        report = localization_experiment_single_gateway(cfg)
    elif sub == "line-scenario":
        histograms, report = line_scenario_experiment(cfg)
    else:
        report = rate_experiment(cfg)
    duration = time.perf_counter() - start

    outdir.mkdir(parents=True, exist_ok=True)
    reports.write_report_csv(report, outdir / f"{sub}.csv")
    if histograms is not None:
        columns, rows = reports.histogram_table(histograms)
        reports.write_csv(outdir / f"{sub}.hist.csv", columns, rows)
    reports.write_meta(
        outdir / f"{sub}.meta.json",
        {
            "subcommand": sub,
            "config": config_schema(cfg),
            "base_seed": cfg.base_seed,
            "version": __version__,
            "duration_s": duration,
        },
    )
    if not args.no_plots:
        plots.render(report, outdir / f"{sub}.png", histograms)
    return 0


# ---------------------------------------------------------------------------
# ad-hoc solver subcommands
# ---------------------------------------------------------------------------


def _parse_flow_file(path: Path):
    """Edge list "u v capacity" with "source <id>" / "sink <id>" directives.

    '#' starts a comment; blank lines are skipped. Node ids are integers.
    """
    source = sink = None
    edges: list[tuple[int, int, float]] = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] in ("source", "sink"):
            if len(tokens) != 2:
                raise ConfigError(f"{path}:{lineno}: expected '{tokens[0]} <node-id>'")
            try:
                node = int(tokens[1])
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: node id must be an integer") from exc
            if tokens[0] == "source":
                source = node
            else:
                sink = node
            continue
        if len(tokens) != 3:
            raise ConfigError(f"{path}:{lineno}: expected 'u v capacity'")
        try:
            u, v = int(tokens[0]), int(tokens[1])
            cap = float(tokens[2])
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: expected 'u v capacity'") from exc
        if not np.isfinite(cap):
            raise ConfigError(f"{path}:{lineno}: capacity must be finite")
        if cap < 0:
            raise ConfigError(f"{path}:{lineno}: capacity must be nonnegative")
        if u == v:
            raise ConfigError(f"{path}:{lineno}: self-loops are not allowed")
        edges.append((u, v, cap))
    return edges, source, sink


def _cmd_solve_flow(args) -> int:
    edges, source, sink = _parse_flow_file(Path(args.file))
    if not edges:
        print("max_flow 0.0")
        return 0
    if source is None or sink is None:
        raise ConfigError(f"{args.file}: both 'source' and 'sink' must be designated")
    ids = sorted({n for u, v, _ in edges for n in (u, v)} | {source, sink})
    index = {node: i for i, node in enumerate(ids)}
    capacity = np.zeros((len(ids), len(ids)))
    order: list[tuple[int, int]] = []
    for u, v, cap in edges:
        if capacity[index[u], index[v]] == 0.0 and cap >= 0:
            order.append((u, v))
        capacity[index[u], index[v]] += cap
    try:
        net = FlowNetwork(capacity=capacity, source=index[source], sink=index[sink])
    except ValueError as exc:
        raise ConfigError(f"{args.file}: {exc}") from exc
    sol = max_flow(net)
    print(f"max_flow {sol.total!r}")
    for u, v in order:
        print(f"{u} {v} {float(sol.flows[index[u], index[v]])!r}")
    return 0


def _cmd_solve_lp(args) -> int:
    path = Path(args.file)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        problem = simplex.LpProblem.from_text(text)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    sol = simplex.solve(problem)
    print(f"status {sol.status}")
    if sol.status == simplex.OPTIMAL:
        print(f"objective {float(sol.objective)!r}")
        print("x " + " ".join(repr(float(v)) for v in sol.x))
    return 0


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="vpmnsim",
        description="Device-to-device network simulator: connectivity, routing, and "
        "location-privacy experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    help_text = {
        "connectivity": "probability that all dropped devices form one component",
        "localization": "single-gateway localization error vs threshold",
        "line-scenario": "two-gateway flow-ratio attack on a line deployment",
        "rates": "total uplink rate per gateway count, UE count, mode, algorithm",
    }
    for name in EXPERIMENT_SUBCOMMANDS:
        sp = sub.add_parser(name, help=help_text[name])
        sp.add_argument("--config", metavar="FILE", help="JSON config file")
        sp.add_argument("--outdir", metavar="DIR", default="out", help="output directory (default: out)")
        sp.add_argument("--seed", type=int, help="override the base seed")
        sp.add_argument("--trials", type=int, help="override the trial count")
        sp.add_argument("--no-plots", action="store_true", help="skip the PNG figure")

    sf = sub.add_parser("solve-flow", help="max flow of an edge-list file")
    sf.add_argument("file", help="edge list: 'u v capacity' lines plus 'source N' and 'sink N'")
    sl = sub.add_parser("solve-lp", help="solve a small LP from a text file")
    sl.add_argument("file", help="'max c...' then one 'a... <=|=|>= b' row per line")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "solve-flow":
            return _cmd_solve_flow(args)
        if args.subcommand == "solve-lp":
            return _cmd_solve_lp(args)
        return _run_experiment(args)
    except ConfigError as exc:
        print(f"vpmnsim: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"vpmnsim: runtime error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(run())
