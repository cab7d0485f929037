"""Deterministic five-operator token generation loop with residual diagnostics.

One step maps the latest token through: one-hot embedding, backward
projection into predicate space, the (linearized) network map, selection
scoring, argmax with lowest-index tie-break, and forward reconstruction of
the selected token back into predicate space.  The gap between the
reconstruction and the activation is reported as the hallucination residual
of the step.  All operator shapes are validated when a config is built, so
a loaded config can never fail mid-run.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import linops
from .errors import ConfigError, DomainError

CONFIG_FORMAT_VERSION = 1
TRACE_CSV_FIELDS = ("step", "selected_token", "residual")


@dataclass(frozen=True, eq=False)
class PipelineConfig:
    """Token table plus the four concrete operator matrices.

    symbols fixes the tokenizer bijection (token id = position).  Shapes:
    backward projection P x V, network map P x P (must be invertible),
    selection V x P, reconstruction P x V.
    """

    symbols: tuple[str, ...]
    backward_proj: np.ndarray   # predicate estimate from a token one-hot
    net_map: np.ndarray         # activation from a predicate estimate
    selection: np.ndarray       # token scores from an activation
    reconstruct: np.ndarray     # predicate reconstruction of a chosen token

    @property
    def vocab(self) -> int:
        return len(self.symbols)

    @property
    def pred_dim(self) -> int:
        return self.backward_proj.shape[0]


def make_config(
    symbols: Sequence[str],
    backward_proj,
    net_map,
    selection,
    reconstruct=None,
) -> PipelineConfig:
    """Validate shapes and invertibility; omit reconstruct for the
    minimum-norm default derived from the backward projection."""
    symbols = tuple(str(s) for s in symbols)
    if not symbols:
        raise ConfigError("token table must be nonempty")
    if len(set(symbols)) != len(symbols):
        raise ConfigError("token symbols must be unique")
    v = len(symbols)

    backward_proj = np.asarray(backward_proj, dtype=np.float64)
    if backward_proj.ndim != 2 or backward_proj.shape[1] != v:
        raise ConfigError(
            f"backward projection must be P x {v}, got {backward_proj.shape}"
        )
    p = backward_proj.shape[0]

    net_map = np.asarray(net_map, dtype=np.float64)
    if net_map.shape != (p, p):
        raise ConfigError(f"network map must be {p} x {p}, got {net_map.shape}")
    if linops.rank(net_map) != p:
        raise ConfigError("network map must be invertible (full rank)")

    selection = np.asarray(selection, dtype=np.float64)
    if selection.shape != (v, p):
        raise ConfigError(f"selection must be {v} x {p}, got {selection.shape}")

    if reconstruct is None:
        reconstruct = linops.pseudoinverse(backward_proj).entries.T
    reconstruct = np.asarray(reconstruct, dtype=np.float64)
    if reconstruct.shape != (p, v):
        raise ConfigError(f"reconstruction must be {p} x {v}, got {reconstruct.shape}")

    for name, mat in (
        ("backward projection", backward_proj),
        ("network map", net_map),
        ("selection", selection),
        ("reconstruction", reconstruct),
    ):
        if not np.all(np.isfinite(mat)):
            raise ConfigError(f"{name} has non-finite entries")

    return PipelineConfig(symbols, backward_proj, net_map, selection, reconstruct)


def tokenize(cfg: PipelineConfig, symbol: str) -> int:
    try:
        return cfg.symbols.index(symbol)
    except ValueError:
        raise DomainError(f"unknown symbol {symbol!r}") from None


def detokenize(cfg: PipelineConfig, token: int) -> str:
    if not 0 <= token < cfg.vocab:
        raise DomainError(f"token id {token} outside vocabulary of size {cfg.vocab}")
    return cfg.symbols[token]


@dataclass(frozen=True, eq=False)
class StepTrace:
    input_token: int
    predicate_estimate: np.ndarray
    activation: np.ndarray
    scores: np.ndarray
    selected_token: int
    reconstruction: np.ndarray
    hallucination_residual: float

    def to_json_obj(self) -> dict:
        return {
            "input_token": self.input_token,
            "predicate_estimate": [float(v) for v in self.predicate_estimate],
            "activation": [float(v) for v in self.activation],
            "scores": [float(v) for v in self.scores],
            "selected_token": self.selected_token,
            "reconstruction": [float(v) for v in self.reconstruction],
            "hallucination_residual": self.hallucination_residual,
        }


def step(cfg: PipelineConfig, history: Sequence[int]) -> StepTrace:
    """Generate one token from the most recent history entry."""
    if len(history) == 0:
        raise DomainError("history must be nonempty")
    for t in history:
        if not 0 <= t < cfg.vocab:
            raise DomainError(f"token id {t} outside vocabulary of size {cfg.vocab}")
    t = int(history[-1])
    onehot = np.zeros(cfg.vocab)
    onehot[t] = 1.0
    estimate = cfg.backward_proj @ onehot
    activation = cfg.net_map @ estimate
    scores = cfg.selection @ activation
    selected = int(np.argmax(scores))  # argmax takes the lowest index on ties
    reconstruction = cfg.reconstruct[:, selected].copy()
    residual = float(np.linalg.norm(reconstruction - activation))
    return StepTrace(t, estimate, activation, scores, selected, reconstruction, residual)


def run(cfg: PipelineConfig, seed_history: Sequence[int], steps: int) -> list[StepTrace]:
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    history = [int(t) for t in seed_history]
    traces = []
    for _ in range(steps):
        trace = step(cfg, history)
        traces.append(trace)
        history.append(trace.selected_token)
    return traces


@dataclass(frozen=True, eq=False)
class NullSpaceReport:
    """Rank structure of the backward projection plus token aliasing."""

    rank: int
    nullity: int
    basis: np.ndarray
    aliased_pairs: tuple[tuple[int, int], ...]

    def to_json_obj(self, symbols: Optional[Sequence[str]] = None) -> dict:
        obj = {
            "rank": self.rank,
            "nullity": self.nullity,
            "null_space_basis": [[float(v) for v in row] for row in self.basis],
            "aliased_pairs": [list(pair) for pair in self.aliased_pairs],
        }
        if symbols is not None:
            obj["aliased_symbols"] = [
                [symbols[a], symbols[b]] for a, b in self.aliased_pairs
            ]
        return obj


def null_space_report(
    cfg: PipelineConfig, *, tol: float = linops.DEFAULT_ALIAS_TOL
) -> NullSpaceReport:
    """Kernel of the backward projection and all equal-projection token pairs."""
    r = linops.rank(cfg.backward_proj)
    kernel = linops.null_space_basis(cfg.backward_proj)
    pairs = []
    cols = cfg.backward_proj
    for a in range(cfg.vocab):
        for b in range(a + 1, cfg.vocab):
            if float(np.linalg.norm(cols[:, a] - cols[:, b])) <= tol:
                pairs.append((a, b))
    return NullSpaceReport(r, kernel.dim, kernel.basis, tuple(pairs))


def save_pipeline_config(cfg: PipelineConfig, path) -> None:
    obj = {
        "version": CONFIG_FORMAT_VERSION,
        "symbols": list(cfg.symbols),
        "Lplus": linops.matrix_to_json_obj(cfg.backward_proj),
        "M": linops.matrix_to_json_obj(cfg.net_map),
        "S": linops.matrix_to_json_obj(cfg.selection),
        "L": linops.matrix_to_json_obj(cfg.reconstruct),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_pipeline_config(path) -> PipelineConfig:
    """Load and fully validate a pipeline config; all errors surface here."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    required = {"version", "symbols", "Lplus", "M", "S"}
    allowed = required | {"L"}
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{path}: missing keys {sorted(missing)}")
    if obj["version"] != CONFIG_FORMAT_VERSION:
        raise ConfigError(f"{path}: unknown config version {obj['version']!r}")
    try:
        reconstruct = (
            linops.matrix_from_json_obj(obj["L"])
            if obj.get("L") is not None
            else None
        )
        return make_config(
            obj["symbols"],
            linops.matrix_from_json_obj(obj["Lplus"]),
            linops.matrix_from_json_obj(obj["M"]),
            linops.matrix_from_json_obj(obj["S"]),
            reconstruct,
        )
    except (ConfigError, DomainError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def write_trace_jsonl(traces: Sequence[StepTrace], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, trace in enumerate(traces, start=1):
            obj = {"step": i}
            obj.update(trace.to_json_obj())
            fh.write(json.dumps(obj))
            fh.write("\n")


def write_trace_csv(traces: Sequence[StepTrace], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_CSV_FIELDS)
        for i, trace in enumerate(traces, start=1):
            writer.writerow(
                [str(i), str(trace.selected_token), repr(trace.hallucination_residual)]
            )
