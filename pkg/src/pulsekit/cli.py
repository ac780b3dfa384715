"""Command-line entry point.

Subcommands: transpile, compile, run-experiment, benchmark, chsh,
report.  Exit codes: 0 success, 1 validation error, 2 fit or execution
failure.  The PULSEKIT_SEED environment variable overrides --seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .circuits import Circuit
from .compiler import CompilationError, compile_circuit
from .connectivity import Connectivity
from .bench import records_to_csv, run_benchmark, scaling_study
from .experiments import run_experiment
from .experiments.chsh import chsh
from .platform import ExecutionError, PlatformError, load_platform
from .transpiler import (
    RandomGreedy,
    ReverseTraversal,
    Sabre,
    ShortestPaths,
    StarRouter,
    SubgraphIsomorphism,
    Trivial,
    cnot_count,
    place,
    route,
    star_layout,
    transpile,
    unroll,
)

_PLACERS = {
    "trivial": lambda seed: Trivial(),
    "random": lambda seed: RandomGreedy(seed=seed),
    "subgraph": lambda seed: SubgraphIsomorphism(),
    "reverse": lambda seed: ReverseTraversal(),
    "star": "builtin",  # star baseline's built-in placer
}
_ROUTERS = {
    "shortest": ShortestPaths(),
    "sabre": Sabre(lookahead=True),
    "sabre-nolookahead": Sabre(lookahead=False),
    "star": StarRouter(),
}


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        handle.write(text)


def _points_csv(points: dict[str, list[float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    keys = list(points)
    writer.writerow(keys)
    for row in zip(*(points[k] for k in keys)):
        writer.writerow([repr(float(v)) for v in row])
    return buffer.getvalue()


def _cmd_transpile(args, seed: int) -> int:
    circuit = Circuit.from_json(Path(args.circuit).read_text())
    conn = Connectivity.from_json_file(args.connectivity)
    router = _ROUTERS[args.router]
    if args.placer == "star" or args.router == "star":
        initial = star_layout(circuit, conn)
        router = StarRouter() if args.router == "star" else router
    else:
        initial = place(circuit, conn, _PLACERS[args.placer](seed))
    routed, final = route(circuit, conn, initial, router)
    unrolled = unroll(routed, args.natives)
    base = cnot_count(circuit)
    overhead = cnot_count(routed) / base if base else 1.0
    _write_text(Path(args.output), unrolled.to_json() + "\n")
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["placer", "router", "natives", "cnots_original", "cnots_routed", "overhead"])
    writer.writerow([args.placer, args.router, args.natives, base, cnot_count(routed), overhead])
    return 0


def _cmd_compile(args, seed: int) -> int:
    circuit = Circuit.from_json(Path(args.circuit).read_text())
    platform = load_platform(args.platform)
    sequence, acquisitions = compile_circuit(circuit, platform)
    _write_text(Path(args.output), sequence.to_jsonl() + "\n")
    print(f"pulses={len(sequence)} duration_ns={sequence.duration} acquisitions={len(acquisitions)}")
    return 0


def _cmd_run_experiment(args, seed: int) -> int:
    platform = load_platform(args.platform)
    kwargs = {}
    for key in ("points", "span", "shots", "sequences", "detuning", "max_delay",
                "max_amplitude", "bootstrap"):
        value = getattr(args, key, None)
        if value is not None:
            kwargs[key] = value
    if args.depths:
        kwargs["depths"] = [int(d) for d in args.depths.split(",")]
    report, points = run_experiment(platform, args.name, qubit=args.qubit, seed=seed, **kwargs)
    out_dir = Path(args.output_dir)
    _write_json(out_dir / f"{args.name}.json", report)
    if points:
        _write_text(out_dir / f"{args.name}.csv", _points_csv(points))
    print(f"routine={args.name} success={report['success']}")
    return 0 if report["success"] else 2


def _cmd_benchmark(args, seed: int) -> int:
    platform = load_platform(args.platform)
    suite = [s.strip() for s in args.suite.split(",")]
    records = run_benchmark(platform, suite, repetitions=args.repetitions, mode=args.mode)
    if args.scaling:
        counts = [int(c) for c in args.scaling_points.split(",")]
        records += scaling_study(platform, args.scaling, counts, mode=args.mode, seed=seed)
    text = records_to_csv(records)
    out_dir = Path(args.output_dir)
    _write_text(out_dir / "benchmark.csv", text)
    _write_json(out_dir / "benchmark.json", {"records": [r.to_dict() for r in records]})
    sys.stdout.write(text)
    return 0


def _cmd_chsh(args, seed: int) -> int:
    platform = load_platform(args.platform)
    pair = tuple(int(q) for q in args.pair.split(","))
    if len(pair) != 2:
        raise PlatformError(f"--pair takes two qubit ids, got {args.pair!r}")
    if args.thetas:
        thetas = [float(t) for t in args.thetas.split(",")]
    else:
        thetas = [k * math.pi / 8 for k in range(args.theta_points)]
    outcome = chsh(platform, pair, thetas, use_mitigation=args.mitigate, nshots=args.shots)
    out_dir = Path(args.output_dir)
    _write_json(out_dir / "chsh.json", {"routine": "chsh", "pair": list(pair), **outcome.to_dict()})
    points = {"theta": outcome.thetas, "s_bare": outcome.s_bare}
    if outcome.s_mitigated is not None:
        points["s_mitigated"] = outcome.s_mitigated
    _write_text(out_dir / "chsh.csv", _points_csv(points))
    for i, theta in enumerate(outcome.thetas):
        line = f"theta={theta:.6f} s_bare={outcome.s_bare[i]:+.6f}"
        if outcome.s_mitigated is not None:
            line += f" s_mitigated={outcome.s_mitigated[i]:+.6f}"
        print(line)
    return 0


def _cmd_report(args, seed: int) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise PlatformError(f"not a directory: {directory}")
    reports = {}
    for path in sorted(directory.glob("*.json")):
        if path.name == "summary.json":
            continue
        with open(path) as handle:
            reports[path.name] = json.load(handle)
    _write_json(directory / "summary.json", {"n_reports": len(reports), "reports": reports})
    print(f"collated {len(reports)} reports into {directory / 'summary.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pulsekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transpile", help="place, route and unroll a circuit")
    p.add_argument("circuit")
    p.add_argument("--connectivity", required=True)
    p.add_argument("--placer", choices=sorted(_PLACERS), default="trivial")
    p.add_argument("--router", choices=sorted(_ROUTERS), default="sabre")
    p.add_argument("--natives", choices=["cz", "iswap", "both"], default="cz")
    p.add_argument("--output", default="transpiled.json")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_transpile)

    p = sub.add_parser("compile", help="lower a native circuit to pulses")
    p.add_argument("circuit")
    p.add_argument("--platform", required=True)
    p.add_argument("--output", default="sequence.jsonl")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("run-experiment", help="run a calibration or RB routine")
    p.add_argument("name")
    p.add_argument("--platform", required=True)
    p.add_argument("--qubit", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", default=".")
    p.add_argument("--points", type=int)
    p.add_argument("--span", type=float)
    p.add_argument("--shots", type=int)
    p.add_argument("--sequences", type=int)
    p.add_argument("--depths")
    p.add_argument("--detuning", type=float)
    p.add_argument("--max-delay", type=float, dest="max_delay")
    p.add_argument("--max-amplitude", type=float, dest="max_amplitude")
    p.add_argument("--bootstrap", type=int)
    p.set_defaults(func=_cmd_run_experiment)

    p = sub.add_parser("benchmark", help="execution-time benchmark harness")
    p.add_argument("--platform", required=True)
    p.add_argument("--suite", default="all")
    p.add_argument("--mode", choices=["synthetic", "wallclock"], default="synthetic")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--scaling", help="also run a scaling study for this routine")
    p.add_argument("--scaling-points", default="1,10,100", dest="scaling_points")
    p.add_argument("--output-dir", default=".")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("chsh", help="CHSH experiment with optional mitigation")
    p.add_argument("--platform", required=True)
    p.add_argument("--pair", default="0,1")
    p.add_argument("--thetas")
    p.add_argument("--theta-points", type=int, default=8, dest="theta_points")
    p.add_argument("--mitigate", action="store_true")
    p.add_argument("--shots", type=int, default=4096)
    p.add_argument("--output-dir", default=".")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_chsh)

    p = sub.add_parser("report", help="collate JSON outputs into one summary")
    p.add_argument("directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    seed = args.seed
    env_seed = os.environ.get("PULSEKIT_SEED")
    if env_seed is not None:
        seed = int(env_seed)
    try:
        return args.func(args, seed)
    except (ExecutionError,) as exc:
        print(f"execution error: {exc}", file=sys.stderr)
        return 2
    except (PlatformError, CompilationError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"execution error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
