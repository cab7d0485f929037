"""Batch experiment runner: file-in, file-out, reproducible.

Each subcommand reads its inputs, writes CSV/JSON reports plus a rendered
figure into the output directory, and returns a scriptable exit code:
0 success, 1 precondition or config error, 2 a capacity/equivalence
prediction was violated.  Identical configs and seeds produce byte-identical
output files; measured wall times are therefore zeroed in the serialized
reports and only surface in the Python API.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import figures, metaphor, netcompile, pipeline, separability
from .errors import BudgetExceededError, CompilationError, ConfigError, DomainError
from .predicates import MAX_ATOMS, load_predicates

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PREDICTION_VIOLATION = 2

COMMANDS = ("capacity", "compile", "pipeline", "metaphor")

_REQUIRED_PARAMETERS = {
    "capacity": {"w", "n_max"},
    "compile": {"weights"},
    "pipeline": {"config", "steps"},
    "metaphor": {"targets", "basis"},
}
_OPTIONAL_PARAMETERS = {
    "capacity": {"subset_budget"},
    "compile": set(),
    "pipeline": {"seed_tokens"},
    "metaphor": {"affine"},
}


@dataclass
class ExperimentConfig:
    command: str
    parameters: dict
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        required = _REQUIRED_PARAMETERS[self.command]
        allowed = required | _OPTIONAL_PARAMETERS[self.command]
        unknown = set(self.parameters) - allowed
        if unknown:
            raise ConfigError(
                f"unknown parameters for {self.command}: {sorted(unknown)}"
            )
        missing = required - set(self.parameters)
        if missing:
            raise ConfigError(
                f"missing parameters for {self.command}: {sorted(missing)}"
            )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        allowed = {"command", "parameters", "output_dir", "seed"}
        unknown = set(obj) - allowed
        if unknown:
            raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
        if "command" not in obj or "parameters" not in obj:
            raise ConfigError(f"{path}: command and parameters are required")
        if not isinstance(obj["parameters"], dict):
            raise ConfigError(f"{path}: parameters must be an object")
        return cls(
            command=obj["command"],
            parameters=obj["parameters"],
            output_dir=obj.get("output_dir", "out"),
            seed=int(obj.get("seed", 0)),
        )


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _write_meta(out: Path, cfg: ExperimentConfig) -> None:
    _write_json(
        out / "run_meta.json",
        {"command": cfg.command, "parameters": cfg.parameters, "seed": cfg.seed},
    )


def _int_param(cfg: ExperimentConfig, key: str) -> int:
    value = cfg.parameters[key]
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"parameter {key} must be an integer, got {value!r}")
    return value


def run_capacity(cfg: ExperimentConfig) -> int:
    w = _int_param(cfg, "w")
    n_max = _int_param(cfg, "n_max")
    budget = cfg.parameters.get("subset_budget", separability.DEFAULT_SUBSET_BUDGET)
    if w < 1:
        raise DomainError(f"width must be >= 1, got {w}")
    if n_max > MAX_ATOMS:
        raise DomainError(f"n_max {n_max} exceeds cap {MAX_ATOMS}")
    if n_max < w + 1:
        raise DomainError(f"need n_max >= w + 1, got w={w}, n_max={n_max}")

    reports = [
        separability.exhaust_capacity(w, n, subset_budget=budget)
        for n in range(w + 1, n_max + 1)
    ]
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_meta(out, cfg)

    frozen = [dataclasses.replace(r, elapsed=0.0) for r in reports]
    with open(out / "capacity.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(separability.CAPACITY_CSV_FIELDS)
        for report in frozen:
            writer.writerow(report.to_csv_row())
    _write_json(out / "capacity.json", [r.to_json_obj() for r in frozen])
    figures.capacity_figure(frozen, out / "capacity.png")

    violations = [r.n for r in reports if r.representable]
    if violations:
        print(
            f"capacity: width-{w} layer unexpectedly represented counting to "
            f"{w + 1} at n={violations}",
            file=sys.stderr,
        )
        return EXIT_PREDICTION_VIOLATION
    print(f"capacity: {len(reports)} rows written to {out}, all not representable")
    return EXIT_OK


def run_compile(cfg: ExperimentConfig) -> int:
    net = netcompile.load_weights(cfg.parameters["weights"])
    circuit = netcompile.compile_net(net)
    result = netcompile.verify_compilation(circuit)
    pair = separability.find_indistinguishable_pair(circuit)

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_meta(out, cfg)

    circuit_obj = {
        "input_bits": net.input_bits,
        "bit_width": net.bit_width,
        "activation": net.activation,
        "depth": net.depth,
        "width": net.width,
        "bit_predicates": [
            {"layer": j, "node": k, "bit": i}
            | circuit.bit_tables[(j, k, i)].to_record()
            for (j, k, i) in circuit.trace_keys
        ],
        "output_predicates": [
            {"output": list(y)} | table.to_record()
            for y, table in sorted(circuit.output_tables.items())
        ],
    }
    _write_json(out / "circuit.json", circuit_obj)
    _write_json(
        out / "verification.json",
        {
            "verified": result.ok,
            "inputs_checked": result.inputs_checked,
            "first_mismatch": (
                list(result.first_mismatch) if result.first_mismatch else None
            ),
            "trace_bits": net.trace_bits,
            "indistinguishable_pair": list(pair) if pair else None,
        },
    )
    figures.circuit_figure(circuit, out / "compile.png")

    if not result.ok:
        print(f"compile: verification FAILED at {result.first_mismatch}", file=sys.stderr)
        return EXIT_PREDICTION_VIOLATION
    collision = f"collision {pair}" if pair else "no collision at full trace"
    print(f"compile: verified {result.inputs_checked} inputs, {collision}")
    return EXIT_OK


def run_pipeline(cfg: ExperimentConfig) -> int:
    pipe_cfg = pipeline.load_pipeline_config(cfg.parameters["config"])
    steps = _int_param(cfg, "steps")
    seed_tokens = cfg.parameters.get("seed_tokens", [0])
    if not isinstance(seed_tokens, list) or not seed_tokens:
        raise ConfigError("seed_tokens must be a nonempty list of token ids")

    traces = pipeline.run(pipe_cfg, seed_tokens, steps)
    report = pipeline.null_space_report(pipe_cfg)

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_meta(out, cfg)
    pipeline.write_trace_jsonl(traces, out / "trace.jsonl")
    pipeline.write_trace_csv(traces, out / "summary.csv")
    _write_json(out / "null_space.json", report.to_json_obj(pipe_cfg.symbols))
    figures.pipeline_figure(traces, out / "pipeline.png")

    symbols = "".join(pipeline.detokenize(pipe_cfg, t.selected_token) for t in traces[:8])
    print(
        f"pipeline: {steps} steps, nullity {report.nullity}, "
        f"{len(report.aliased_pairs)} aliased pairs, starts {symbols!r}"
    )
    return EXIT_OK


def run_metaphor(cfg: ExperimentConfig) -> int:
    targets = load_predicates(cfg.parameters["targets"])
    basis = load_predicates(cfg.parameters["basis"])
    affine = cfg.parameters.get("affine", True)
    if not isinstance(affine, bool):
        raise ConfigError(f"affine must be a boolean, got {affine!r}")
    if targets.universe != basis.universe:
        raise ConfigError("targets and basis must share one universe")

    reports = [metaphor.approximate(t, basis, affine) for t in targets]
    classes = metaphor.alias_classes(basis, targets, affine)

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_meta(out, cfg)
    with open(out / "metaphor.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(metaphor.APPROX_CSV_FIELDS)
        for report in reports:
            writer.writerow(report.to_csv_row())
    _write_json(out / "metaphor.json", [r.to_json_obj() for r in reports])
    _write_json(out / "alias_classes.json", {"affine": affine, "classes": classes})
    figures.metaphor_figure(reports, out / "metaphor.png")

    in_span = sum(1 for r in reports if r.in_span)
    print(
        f"metaphor: {len(reports)} targets, {in_span} in span, "
        f"{len(classes)} alias classes"
    )
    return EXIT_OK


_RUNNERS = {
    "capacity": run_capacity,
    "compile": run_compile,
    "pipeline": run_pipeline,
    "metaphor": run_metaphor,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; keep 2 reserved for prediction
    # violations and report usage problems as config errors instead
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="logicnet",
        description="Expressiveness, compilation, pipeline and approximation experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="experiment config JSON (flags override it)")
        p.add_argument("--out", help="output directory (default: out)")
        p.add_argument("--seed", type=int, help="seed recorded in outputs (default: 0)")

    p = sub.add_parser("capacity", help="exhaust a width-w layer with counting targets")
    common(p)
    p.add_argument("--w", type=int, help="layer width")
    p.add_argument("--n-max", type=int, help="largest universe size to test")
    p.add_argument("--subset-budget", type=int, help="cap on subsets per check")

    p = sub.add_parser("compile", help="compile a weights file into predicates")
    common(p)
    p.add_argument("--weights", help="weights JSON file")

    p = sub.add_parser("pipeline", help="run the token generation loop")
    common(p)
    p.add_argument("--pipeline-config", help="pipeline operator config JSON")
    p.add_argument("--steps", type=int, help="number of generation steps")
    p.add_argument(
        "--seed-tokens",
        type=int,
        nargs="+",
        help="token ids seeding the history (default: 0)",
    )

    p = sub.add_parser("metaphor", help="approximate targets over a basis family")
    common(p)
    p.add_argument("--targets", help="target predicates JSON file")
    p.add_argument("--basis", help="basis predicates JSON file")
    p.add_argument(
        "--no-affine",
        action="store_true",
        help="drop the intercept column from the fit",
    )

    return parser


def _flag_parameters(args) -> dict:
    """Collect per-command parameters from explicitly provided flags."""
    params = {}
    if args.command == "capacity":
        if args.w is not None:
            params["w"] = args.w
        if args.n_max is not None:
            params["n_max"] = args.n_max
        if args.subset_budget is not None:
            params["subset_budget"] = args.subset_budget
    elif args.command == "compile":
        if args.weights is not None:
            params["weights"] = args.weights
    elif args.command == "pipeline":
        if args.pipeline_config is not None:
            params["config"] = args.pipeline_config
        if args.steps is not None:
            params["steps"] = args.steps
        if args.seed_tokens is not None:
            params["seed_tokens"] = list(args.seed_tokens)
    elif args.command == "metaphor":
        if args.targets is not None:
            params["targets"] = args.targets
        if args.basis is not None:
            params["basis"] = args.basis
        if args.no_affine:
            params["affine"] = False
    return params


def build_experiment_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
        if cfg.command != args.command:
            raise ConfigError(
                f"config file is for {cfg.command!r}, invoked as {args.command!r}"
            )
        parameters = dict(cfg.parameters)
        output_dir = cfg.output_dir
        seed = cfg.seed
    else:
        parameters = {}
        output_dir = "out"
        seed = 0
    parameters.update(_flag_parameters(args))
    if args.out is not None:
        output_dir = args.out
    if args.seed is not None:
        seed = args.seed
    return ExperimentConfig(args.command, parameters, output_dir, seed)


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = build_experiment_config(args)
        return _RUNNERS[cfg.command](cfg)
    except (
        ConfigError,
        DomainError,
        CompilationError,
        BudgetExceededError,
        OSError,
    ) as exc:
        print(f"logicnet {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
