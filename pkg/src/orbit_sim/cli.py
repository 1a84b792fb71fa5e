"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 DP/oracle mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import warnings
from collections import defaultdict
from pathlib import Path

from .checks import oracle_check
from .profile import DegenerateFitError, fit_linear_predictor
from .scenario import ConfigError, Scenario, load_scenario
from .schedulers import ORACLE_MAX_TASKS
from .sim import SWEEP_AXES, metrics_json, run, sweep, write_sweep_csv, write_trace_csv
from .workload import write_stream_csv

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_MISMATCH = 0, 1, 2, 3


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _render(writer, *args) -> str:
    buf = io.StringIO()
    writer(*args, buf)
    return buf.getvalue()


def _scenario(args) -> Scenario:
    overrides = list(args.set or [])
    for flag, key in (("policy", "policy"), ("seed", "seed"), ("n_tasks", "workload.n_tasks"),
                      ("arrival_prob", "workload.arrival_prob"), ("output_dir", "output_dir")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides.append(f"{key}={json.dumps(value)}")
    return load_scenario(args.config, overrides)


def _echo_config(scenario: Scenario, out: Path) -> None:
    write_atomic(out / "config.json", json.dumps(scenario.to_dict(), indent=2, sort_keys=True) + "\n")


def cmd_run(args) -> int:
    scenario = _scenario(args)
    result = run(scenario)
    out = Path(scenario.output_dir)
    write_atomic(out / "trace.csv", _render(write_trace_csv, result.trace))
    write_atomic(out / "metrics.json", metrics_json(result.metrics))
    _echo_config(scenario, out)
    m = result.metrics
    print(
        f"{scenario.policy}: gain={m.total_gain:.4f} completed={m.completed}/{m.arrived} "
        f"avg_latency={m.avg_latency:.3f}s -> {out}"
    )
    return EXIT_OK


def _parse_values(text: str) -> list[float]:
    items = [v for v in text.split(",") if v.strip()]
    if not items:
        raise ConfigError("values: need at least one sweep value")
    try:
        return [float(v) for v in items]
    except ValueError:
        raise ConfigError(f"values: not a comma-separated list of numbers: {text!r}") from None


def cmd_sweep(args) -> int:
    scenario = _scenario(args)
    values = _parse_values(args.values)
    result = sweep(scenario, args.axis, values, args.reps, workers=args.workers)
    out = Path(scenario.output_dir)
    write_atomic(out / "sweep.csv", _render(write_sweep_csv, result))
    _echo_config(scenario, out)
    for value in result.values:
        line = ", ".join(f"{p}={result.stat(value, p, 'total_gain')[0]:.3f}" for p in result.policies)
        print(f"{args.axis}={value}: {line}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    if not 1 <= args.max_n <= ORACLE_MAX_TASKS:
        raise ConfigError(f"max-n: must lie in 1..{ORACLE_MAX_TASKS}, got {args.max_n}")
    if args.instances < 0:
        raise ConfigError("instances: must be >= 0")
    base = load_scenario(args.config) if args.config else Scenario.default()
    if args.instances == 0:
        print("warning: 0 instances requested; nothing checked", file=sys.stderr)
        return EXIT_OK
    res = oracle_check(base, args.instances, args.max_n, args.seed)
    if res.mismatches:
        print(
            f"MISMATCH in {res.mismatches}/{res.checked} instances; first: dp={res.dp_gain!r} "
            f"oracle={res.oracle_gain!r}. Replayable scenario:",
            file=sys.stderr,
        )
        print(json.dumps(res.first_counterexample, indent=2, sort_keys=True))
        return EXIT_MISMATCH
    print(f"ok: dp == oracle on {res.checked} instances (max_n={args.max_n})")
    return EXIT_OK


def cmd_fit(args) -> int:
    groups: dict[tuple[int, int, str], list[tuple[float, float]]] = defaultdict(list)
    with open(args.samples, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"branch", "layer", "device", "data_bits"}
        if not need <= set(reader.fieldnames or []):
            raise ConfigError(f"samples: CSV needs columns {sorted(need)} plus seconds and/or bits_out")
        for n, row in enumerate(reader, start=2):
            device = row["device"].strip().lower()
            column = "bits_out" if device == "size" else "seconds"
            if device not in ("leo", "heo", "size"):
                raise ConfigError(f"samples line {n}: device must be leo, heo or size")
            try:
                key = (int(row["branch"]), int(row["layer"]), device)
                groups[key].append((float(row["data_bits"]), float(row[column])))
            except (KeyError, TypeError, ValueError):
                raise ConfigError(f"samples line {n}: bad or missing {column}/branch/layer/data_bits") from None

    fragment: dict = {"branches": []}
    layers: dict[int, dict[int, dict]] = defaultdict(dict)
    for (branch, layer, device), samples in sorted(groups.items()):
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                pred = fit_linear_predictor(samples)
        except DegenerateFitError as exc:
            raise ConfigError(f"branch {branch} layer {layer} ({device}): {exc}") from None
        for w in caught:
            print(f"warning: branch {branch} layer {layer} ({device}): {w.message}", file=sys.stderr)
        if layer == 0 and device == "size":
            fragment["input_size"] = pred.to_dict()
            continue
        name = {"leo": "time_leo", "heo": "time_heo", "size": "out_size"}[device]
        layers[branch].setdefault(layer, {})[name] = pred.to_dict()
    for branch in sorted(layers):
        fragment["branches"].append(
            {"branch": branch, "layers": [dict(layer=k, **layers[branch][k]) for k in sorted(layers[branch])]}
        )
    text = json.dumps(fragment, indent=2, sort_keys=True) + "\n"
    if args.output:
        write_atomic(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_gen_workload(args) -> int:
    scenario = _scenario(args)
    out = Path(args.output) if args.output else Path(scenario.output_dir) / "stream.csv"
    write_atomic(out, _render(write_stream_csv, scenario.stream()))
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbit-sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(p, policy=True):
        p.add_argument("--config", required=True, help="scenario JSON file")
        if policy:
            p.add_argument("--policy", choices=("dp", "greedy", "random", "oracle"))
        p.add_argument("--seed", type=int)
        p.add_argument("--n-tasks", dest="n_tasks", type=int)
        p.add_argument("--arrival-prob", dest="arrival_prob", type=float)
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config field, e.g. link.distance_m=3e7")

    p = sub.add_parser("run", help="run one policy and write trace.csv + metrics.json")
    scenario_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep n_tasks or arrival_prob over dp/greedy/random")
    scenario_flags(p, policy=False)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--reps", type=int, default=30)
    p.add_argument("--workers", type=int, default=None, help="default: $ORBIT_SIM_THREADS or 1")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle-check", help="compare dp against exhaustive search on random small instances")
    p.add_argument("--config", help="scenario supplying link, gain and slot settings")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--max-n", dest="max_n", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("fit", help="fit linear layer predictors from profiling samples")
    p.add_argument("samples", help="CSV with branch,layer,device,data_bits,seconds|bits_out")
    p.add_argument("-o", "--output", help="write the profile fragment here instead of stdout")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gen-workload", help="write the scenario's task stream as CSV")
    scenario_flags(p, policy=False)
    p.add_argument("-o", "--output", help="default: <output_dir>/stream.csv")
    p.set_defaults(func=cmd_gen_workload)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
