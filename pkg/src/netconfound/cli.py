"""Command-line front end.

Subcommands: asymmetry, voter, halves, dag. Every run takes a required
--seed, echoes its effective configuration into the summary JSON, and writes
a run manifest listing the artifacts. Config precedence: built-in defaults,
then --config file values, then explicit flags.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .causal_dag import (
    TEMPLATE_NAMES,
    build_template,
    check_admissible,
    format_path,
    read_dag_file,
)
from .experiments import (
    AsymmetryConfig,
    HalvesConfig,
    VoterConfig,
    run_asymmetry_experiment,
    run_halves_experiment,
    run_voter_experiment,
)
from .inference import ASYMMETRY_COLUMNS
from .network import write_edge_list

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class _CliParser(argparse.ArgumentParser):
    """argparse that reports usage problems with the config-error exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    return str(value)


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat "key = value" lines; blank lines and # comments ignored."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line (expected key = value): {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"malformed config line: {raw!r}")
        values[key] = value
    return values


def _merge_config(defaults: dict, file_values: dict[str, str], flag_values: dict) -> dict:
    """defaults < config file < explicit flags; values coerced to default types."""
    merged = dict(defaults)
    for key, raw in file_values.items():
        if key not in defaults:
            raise ValueError(f"unknown config key {key!r}")
        kind = type(defaults[key])
        merged[key] = kind(raw) if kind is not bool else raw.lower() in ("1", "true", "yes")
    for key, value in flag_values.items():
        if value is not None:
            merged[key] = value
    return merged


def _manifest(out_dir: Path, command: str, config: dict, outputs: list[Path], t0: float) -> None:
    _write_json(
        out_dir / "run_manifest.json",
        {
            "command": command,
            "config": config,
            "outputs": sorted(str(p.name) for p in outputs),
            "duration_seconds": time.time() - t0,
            "version": __version__,
        },
    )


def _prepare_out_dir(args, command: str) -> Path:
    out_dir = Path(args.out_dir) if args.out_dir else Path(f"{command}_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_asymmetry(args) -> int:
    t0 = time.time()
    defaults = dict(
        n=400,
        replications=5000,
        noise_sd=0.02,
        trend=0.4,
        nominations_per_node=1,
        network="nomination",
    )
    flag_values = dict(
        n=args.n,
        replications=args.reps,
        noise_sd=args.noise_sd,
        trend=args.trend,
        nominations_per_node=args.nominations,
        network=args.network,
    )
    file_values = read_config_file(args.config) if args.config else {}
    merged = _merge_config(defaults, file_values, flag_values)
    cfg = AsymmetryConfig(seed=args.seed, **merged)

    out_dir = _prepare_out_dir(args, "asymmetry")
    summary = run_asymmetry_experiment(cfg, workers=args.workers)

    outputs = []
    summary_path = out_dir / "summary.json"
    _write_json(summary_path, summary.to_json_dict())
    outputs.append(summary_path)

    reps_path = out_dir / "replications.csv"
    header = list(ASYMMETRY_COLUMNS) + ["normalized_diff"]
    rows = [
        [_fmt(v) for v in (*summary.coefficients[k], summary.normalized_diff[k])]
        for k in range(summary.coefficients.shape[0])
    ]
    _write_csv(reps_path, header, rows)
    outputs.append(reps_path)

    hist_specs = [
        ("hist_named_t1.csv", summary.coefficients[:, 2]),
        ("hist_namer_t1.csv", summary.coefficients[:, 3]),
        ("hist_mutual_sum.csv", summary.coefficients[:, 2] + summary.coefficients[:, 3]),
        ("hist_normalized_diff.csv", summary.normalized_diff),
    ]
    for name, values in hist_specs:
        path = out_dir / name
        _write_csv(path, ["value"], [[_fmt(float(v))] for v in values])
        outputs.append(path)

    _manifest(out_dir, "asymmetry", {"seed": args.seed, **merged}, outputs, t0)
    print(f"fraction(named_exposure_t1 < 0)  = {summary.frac_named_negative:.4f}")
    print(f"fraction(normalized_diff > 0)    = {summary.frac_diff_positive:.4f}")
    return EXIT_OK


def _cmd_voter(args) -> int:
    t0 = time.time()
    defaults = dict(
        n=200,
        replications=1,
        p_in=0.10,
        p_out=0.01,
        steps=3000,
        checkpoint_stride=50,
        flip_prob=0.01,
    )
    flag_values = dict(
        n=args.n,
        replications=args.reps,
        p_in=args.p_in,
        p_out=args.p_out,
        steps=args.steps,
        checkpoint_stride=args.stride,
        flip_prob=args.flip_prob,
    )
    file_values = read_config_file(args.config) if args.config else {}
    merged = _merge_config(defaults, file_values, flag_values)
    cfg = VoterConfig(seed=args.seed, **merged)

    out_dir = _prepare_out_dir(args, "voter")
    summary = run_voter_experiment(cfg, workers=args.workers)

    outputs = []
    summary_path = out_dir / "summary.json"
    _write_json(summary_path, summary.to_json_dict())
    outputs.append(summary_path)

    series_path = out_dir / "series.csv"
    header = ["replication", "arm", "step", "slope", "se", "z", "ci_low", "ci_high", "separated"]
    rows = [
        [rec.replication, rec.arm, rec.step, _fmt(rec.slope), _fmt(rec.se), _fmt(rec.z),
         _fmt(rec.ci_low), _fmt(rec.ci_high), _fmt(rec.separated)]
        for rec in summary.records()
    ]
    _write_csv(series_path, header, rows)
    outputs.append(series_path)

    # first replicate's graphs and checkpoint states, for external rendering
    rep = summary.replicates[0]
    for arm, net, panel in (
        ("homophilous", rep.homophilous_net, rep.homophilous_panel),
        ("control", rep.control_net, rep.control_panel),
    ):
        edge_path = out_dir / f"network_{arm}.txt"
        write_edge_list(net, edge_path)
        outputs.append(edge_path)
        states_path = out_dir / f"states_{arm}.csv"
        state_rows = []
        for k in range(panel.num_slices):
            step = int(panel.times[k])
            for i in range(panel.n):
                state_rows.append(
                    [step, i, _fmt(float(rep.traits_x[i])), int(panel.values[k, i])]
                )
        _write_csv(states_path, ["step", "node_id", "trait", "choice"], state_rows)
        outputs.append(states_path)

    _manifest(out_dir, "voter", {"seed": args.seed, **merged}, outputs, t0)
    print(f"mean |slope| homophilous = {summary.mean_abs_slope_homophilous:.4f}")
    print(f"mean |slope| control     = {summary.mean_abs_slope_control:.4f}")
    return EXIT_OK


def _cmd_halves(args) -> int:
    t0 = time.time()
    defaults = dict(
        process="contagion",
        n=200,
        strength=0.0,
        t_steps=20,
        noise_sd=1.0,
        avg_degree=8.0,
        trend=0.4,
        trend_noise_sd=0.02,
        repetitions=40,
        permutations=199,
    )
    flag_values = dict(
        process=args.process,
        n=args.n,
        strength=args.strength,
        t_steps=args.t_steps,
        noise_sd=args.noise_sd,
        avg_degree=args.avg_degree,
        trend=args.trend,
        trend_noise_sd=args.trend_noise_sd,
        repetitions=args.repetitions,
        permutations=args.permutations,
    )
    file_values = read_config_file(args.config) if args.config else {}
    merged = _merge_config(defaults, file_values, flag_values)
    cfg = HalvesConfig(seed=args.seed, **merged)

    out_dir = _prepare_out_dir(args, "halves")
    result, _panel = run_halves_experiment(cfg)

    outputs = []
    summary_path = out_dir / "summary.json"
    _write_json(
        summary_path,
        {
            "experiment": "halves",
            "config": {"seed": args.seed, **merged},
            "mean_coefficient": result.mean_coefficient,
            "coefficient_sd": result.coefficient_sd,
            "p_value": result.p_value,
            "reject_at_5pct": result.reject,
            "repetitions": result.repetitions,
            "permutations": result.permutations,
        },
    )
    outputs.append(summary_path)

    coef_path = out_dir / "coefficients.csv"
    _write_csv(
        coef_path,
        ["repetition", "cross_half_coefficient"],
        [[k, _fmt(float(c))] for k, c in enumerate(result.per_repetition)],
    )
    outputs.append(coef_path)

    _manifest(out_dir, "halves", {"seed": args.seed, **merged}, outputs, t0)
    print(f"mean cross-half coefficient = {result.mean_coefficient:+.5f}")
    print(f"p-value = {result.p_value:.4f} -> {'REJECT' if result.reject else 'no rejection'}")
    return EXIT_OK


def _cmd_dag(args) -> int:
    if (args.template is None) == (args.file is None):
        print("error: provide exactly one of --template or --file", file=sys.stderr)
        return EXIT_CONFIG
    if args.template is not None:
        try:
            dag = build_template(args.template)
        except KeyError as exc:
            print(f"error: {exc.args[0]}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        dag = read_dag_file(args.file)

    if args.condition_on_observed:
        conditioning = sorted(dag.observed - {args.treatment, args.outcome})
    elif args.condition_on:
        conditioning = [v.strip() for v in args.condition_on.split(",") if v.strip()]
    else:
        conditioning = []
    check_admissible(dag, conditioning)

    paths = dag.open_backdoor_paths(args.treatment, args.outcome, conditioning)
    if not paths:
        print("UNCONFOUNDED")
    else:
        print(f"{len(paths)} open backdoor path(s) given {{{', '.join(conditioning)}}}:")
        for path in paths:
            print("  " + format_path(dag, path))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _CliParser(prog="netconfound", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, workers=True):
        p.add_argument("--seed", type=int, required=True, help="master RNG seed")
        p.add_argument("--out-dir", type=str, default=None, help="output directory")
        p.add_argument("--config", type=str, default=None, help="flat key = value config file")
        if workers:
            p.add_argument("--workers", type=int, default=1,
                           help="parallel workers; output is identical for any count")

    p_asym = sub.add_parser(
        "asymmetry",
        help="directional-exposure regression study on homophilous nomination networks",
    )
    add_common(p_asym)
    p_asym.add_argument("--n", type=int, default=None)
    p_asym.add_argument("--reps", type=int, default=None)
    p_asym.add_argument("--noise-sd", type=float, default=None)
    p_asym.add_argument("--trend", type=float, default=None)
    p_asym.add_argument("--nominations", type=int, default=None)
    p_asym.add_argument("--network", choices=("nomination", "uniform"), default=None,
                        help="'uniform' swaps in the trait-blind null generator")
    p_asym.set_defaults(func=_cmd_asymmetry)

    p_voter = sub.add_parser(
        "voter", help="choice diffusion on clustered vs trait-blind graphs"
    )
    add_common(p_voter)
    p_voter.add_argument("--n", type=int, default=None)
    p_voter.add_argument("--reps", type=int, default=None)
    p_voter.add_argument("--p-in", type=float, default=None)
    p_voter.add_argument("--p-out", type=float, default=None)
    p_voter.add_argument("--steps", type=int, default=None)
    p_voter.add_argument("--stride", type=int, default=None)
    p_voter.add_argument("--flip-prob", type=float, default=None)
    p_voter.set_defaults(func=_cmd_voter)

    p_halves = sub.add_parser(
        "halves", help="random-halves influence test on a generated panel"
    )
    add_common(p_halves)
    p_halves.add_argument("--process", choices=("contagion", "latent_trend"), default=None)
    p_halves.add_argument("--n", type=int, default=None)
    p_halves.add_argument("--strength", type=float, default=None)
    p_halves.add_argument("--t-steps", type=int, default=None)
    p_halves.add_argument("--noise-sd", type=float, default=None)
    p_halves.add_argument("--avg-degree", type=float, default=None)
    p_halves.add_argument("--trend", type=float, default=None)
    p_halves.add_argument("--trend-noise-sd", type=float, default=None)
    p_halves.add_argument("--repetitions", type=int, default=None)
    p_halves.add_argument("--permutations", type=int, default=None)
    p_halves.set_defaults(func=_cmd_halves)

    p_dag = sub.add_parser("dag", help="print open backdoor paths for a causal graph")
    p_dag.add_argument("--template", choices=TEMPLATE_NAMES, default=None)
    p_dag.add_argument("--file", type=str, default=None,
                       help="dag text file: 'src -> dst' lines plus a 'latent:' list")
    p_dag.add_argument("--treatment", type=str, required=True)
    p_dag.add_argument("--outcome", type=str, required=True)
    p_dag.add_argument("--condition-on-observed", action="store_true",
                       help="condition on every observed node except the endpoints")
    p_dag.add_argument("--condition-on", type=str, default=None,
                       help="comma-separated conditioning set")
    p_dag.set_defaults(func=_cmd_dag)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
