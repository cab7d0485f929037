"""Compile fixed-point feed-forward nets into exact truth tables.

Every node of a quantized net holds a value representable in the declared
two's-complement bit width, so each value bit is a boolean function of the
input bits and can be tabulated exhaustively.  Compilation enumerates the
whole input space with a vectorized integer evaluator and stores one
predicate per (layer, node, bit) plus one predicate per achievable output
tuple.  Verification re-runs a separate scalar evaluator over every input
and compares against the stored tables bit for bit.

Conventions: layers are 1-indexed, nodes and bits 0-indexed with bit 0 the
least significant; input bit j+1 is atom j+1 of the input universe (the
least-significant bit of the input index).  A bit predicate at layer j
carries depth tag 2*j.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CompilationError, ConfigError, DomainError
from .predicates import Predicate, Universe, from_truth_values

ACTIVATIONS = ("sign", "clipped-relu")
WEIGHTS_FORMAT_VERSION = 1

MAX_INPUT_BITS = 16


@dataclass(frozen=True)
class Layer:
    """Integer weight matrix (n_out x n_in) and bias vector (n_out)."""

    weights: tuple[tuple[int, ...], ...]
    bias: tuple[int, ...]

    @property
    def n_out(self) -> int:
        return len(self.bias)

    @property
    def n_in(self) -> int:
        return len(self.weights[0]) if self.weights else 0


@dataclass(frozen=True)
class QuantizedNet:
    layers: tuple[Layer, ...]
    activation: str
    bit_width: int
    input_bits: int

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise DomainError(
                f"activation must be one of {ACTIVATIONS}, got {self.activation!r}"
            )
        if self.bit_width < 1:
            raise DomainError(f"bit_width must be >= 1, got {self.bit_width}")
        if self.input_bits < 1:
            raise DomainError(f"input_bits must be >= 1, got {self.input_bits}")
        if not self.layers:
            raise DomainError("net needs at least one layer")
        lo, hi = self.value_range
        expected_in = self.input_bits
        for j, layer in enumerate(self.layers, start=1):
            if len(layer.weights) != layer.n_out:
                raise DomainError(f"layer {j}: weights/bias row count mismatch")
            for k, row in enumerate(layer.weights):
                if len(row) != expected_in:
                    raise DomainError(
                        f"layer {j} node {k}: expected {expected_in} inputs, got {len(row)}"
                    )
                for v in row:
                    if not lo <= v <= hi:
                        raise DomainError(
                            f"layer {j} node {k}: weight {v} outside "
                            f"{self.bit_width}-bit range [{lo}, {hi}]"
                        )
            for k, v in enumerate(layer.bias):
                if not lo <= v <= hi:
                    raise DomainError(
                        f"layer {j} node {k}: bias {v} outside "
                        f"{self.bit_width}-bit range [{lo}, {hi}]"
                    )
            expected_in = layer.n_out

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def width(self) -> int:
        return max(layer.n_out for layer in self.layers)

    @property
    def value_range(self) -> tuple[int, int]:
        half = 1 << (self.bit_width - 1)
        return -half, half - 1

    @property
    def total_nodes(self) -> int:
        return sum(layer.n_out for layer in self.layers)

    @property
    def trace_bits(self) -> int:
        return self.total_nodes * self.bit_width


def _activate_scalar(net: QuantizedNet, pre: int) -> int:
    if net.activation == "sign":
        return 1 if pre >= 0 else 0
    hi = net.value_range[1]
    return max(0, min(pre, hi))


def forward_values(net: QuantizedNet, x: int) -> list[list[int]]:
    """Node values per layer for one input index, exact integer arithmetic."""
    if not 0 <= x < (1 << net.input_bits):
        raise DomainError(f"input {x} outside {net.input_bits}-bit space")
    lo, hi = net.value_range
    current = [(x >> j) & 1 for j in range(net.input_bits)]
    all_values: list[list[int]] = []
    for j, layer in enumerate(net.layers, start=1):
        nxt = []
        for k in range(layer.n_out):
            pre = sum(w * v for w, v in zip(layer.weights[k], current)) + layer.bias[k]
            val = _activate_scalar(net, pre)
            if not lo <= val <= hi:
                raise CompilationError(
                    f"layer {j} node {k}: value {val} overflows "
                    f"{net.bit_width}-bit range [{lo}, {hi}]"
                )
            nxt.append(val)
        all_values.append(nxt)
        current = nxt
    return all_values


@dataclass
class PredicateCircuit:
    """Exact logical form of a compiled net: one truth table per value bit."""

    net: QuantizedNet
    universe: Universe
    bit_tables: dict[tuple[int, int, int], Predicate]
    output_tables: dict[tuple[int, ...], Predicate]
    _trace_cache: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def trace_keys(self) -> list[tuple[int, int, int]]:
        return sorted(self.bit_tables)

    def trace_matrix(self) -> np.ndarray:
        """uint8 matrix of node-bit traces, one row per input index."""
        if self._trace_cache is None:
            cols = [
                self.bit_tables[key].to_array().astype(np.uint8)
                for key in self.trace_keys
            ]
            self._trace_cache = (
                np.column_stack(cols)
                if cols
                else np.zeros((self.universe.size, 0), dtype=np.uint8)
            )
        return self._trace_cache

    def trace(self, x: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.trace_matrix()[x])


@dataclass
class VerificationResult:
    ok: bool
    inputs_checked: int
    first_mismatch: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.ok


def _batched_values(net: QuantizedNet) -> list[np.ndarray]:
    """Post-activation node values for all inputs, one (size, n_out) array per layer."""
    size = 1 << net.input_bits
    idx = np.arange(size, dtype=np.int64)
    current = np.stack(
        [(idx >> j) & 1 for j in range(net.input_bits)], axis=1
    ).astype(np.int64)
    lo, hi = net.value_range
    max_abs_in = 1
    outputs = []
    for j, layer in enumerate(net.layers, start=1):
        wmat = np.array(layer.weights, dtype=np.int64)
        bias = np.array(layer.bias, dtype=np.int64)
        # exact bound check so the int64 accumulation cannot wrap
        bound = max(
            sum(abs(w) for w in row) * max_abs_in + abs(b)
            for row, b in zip(layer.weights, layer.bias)
        )
        if bound >= 2**62:
            raise CompilationError(
                f"layer {j}: accumulator bound {bound} exceeds the evaluator range"
            )
        pre = current @ wmat.T + bias
        if net.activation == "sign":
            values = (pre >= 0).astype(np.int64)
        else:
            values = np.clip(pre, 0, hi)
        bad = (values < lo) | (values > hi)
        if bad.any():
            x, k = np.argwhere(bad)[0]
            raise CompilationError(
                f"layer {j} node {k}: value {values[x, k]} overflows "
                f"{net.bit_width}-bit range [{lo}, {hi}]"
            )
        outputs.append(values)
        current = values
        max_abs_in = max(abs(lo), abs(hi))
    return outputs


def compile_net(net: QuantizedNet) -> PredicateCircuit:
    """Tabulate every node-value bit and output tuple over the input space."""
    if net.input_bits > MAX_INPUT_BITS:
        raise DomainError(
            f"input_bits {net.input_bits} exceeds enumeration cap {MAX_INPUT_BITS}"
        )
    universe = Universe(net.input_bits)
    per_layer = _batched_values(net)
    mask = (1 << net.bit_width) - 1

    bit_tables: dict[tuple[int, int, int], Predicate] = {}
    for j, values in enumerate(per_layer, start=1):
        patterns = values & mask
        for k in range(values.shape[1]):
            for i in range(net.bit_width):
                flags = ((patterns[:, k] >> i) & 1).astype(bool)
                bit_tables[(j, k, i)] = from_truth_values(
                    universe, flags, depth=2 * j, name=f"L{j}N{k}B{i}"
                )

    final = per_layer[-1]
    output_tables: dict[tuple[int, ...], Predicate] = {}
    depth_out = 2 * net.depth
    seen: dict[tuple[int, ...], list[bool]] = {}
    for x in range(universe.size):
        y = tuple(int(v) for v in final[x])
        if y not in seen:
            seen[y] = [False] * universe.size
        seen[y][x] = True
    for y, flags in sorted(seen.items()):
        output_tables[y] = from_truth_values(
            universe, flags, depth=depth_out, name=f"out={list(y)}"
        )

    return PredicateCircuit(net, universe, bit_tables, output_tables)


def bit_predicate(circuit: PredicateCircuit, layer: int, node: int, bit: int) -> Predicate:
    key = (layer, node, bit)
    if key not in circuit.bit_tables:
        raise DomainError(f"no bit table for layer={layer} node={node} bit={bit}")
    return circuit.bit_tables[key]


def net_predicate(circuit: PredicateCircuit, y) -> Predicate:
    """Predicate over inputs on which the net outputs y (all-zeros if never)."""
    if isinstance(y, int):
        y = (y,)
    try:
        y = tuple(int(v) for v in y)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"output value must be an int or int tuple: {exc}") from exc
    arity = circuit.net.layers[-1].n_out
    if len(y) != arity:
        raise DomainError(f"output arity is {arity}, got {len(y)} components")
    table = circuit.output_tables.get(y)
    if table is None:
        return Predicate(circuit.universe, 0, 2 * circuit.net.depth, f"out={list(y)}")
    return table


def verify_compilation(circuit: PredicateCircuit) -> VerificationResult:
    """Replay every input through the scalar evaluator and compare all tables."""
    net = circuit.net
    universe = circuit.universe
    mask = (1 << net.bit_width) - 1

    # stored output tables must partition the input space
    union = 0
    count = 0
    for table in circuit.output_tables.values():
        union |= table.bits
        count += table.true_count()
    if union != universe.full_mask or count != universe.size:
        return VerificationResult(False, 0, ("output tables do not partition",))

    for x in range(universe.size):
        values = forward_values(net, x)
        for j, layer_values in enumerate(values, start=1):
            for k, v in enumerate(layer_values):
                pattern = v & mask
                for i in range(net.bit_width):
                    expect = bool((pattern >> i) & 1)
                    if circuit.bit_tables[(j, k, i)].value(x) != expect:
                        return VerificationResult(False, x + 1, (x, j, k, i))
        y = tuple(values[-1])
        table = circuit.output_tables.get(y)
        if table is None or not table.value(x):
            return VerificationResult(False, x + 1, (x, "output", y))
    return VerificationResult(True, universe.size)


def random_net(
    rng: np.random.Generator,
    *,
    input_bits: int = 8,
    bit_width: int = 4,
    max_depth: int = 3,
    max_width: int = 4,
    activation: Optional[str] = None,
    widths: Optional[Sequence[int]] = None,
) -> QuantizedNet:
    """Draw a net with uniform integer weights over the representable range."""
    if widths is None:
        depth = int(rng.integers(1, max_depth + 1))
        widths = [int(rng.integers(1, max_width + 1)) for _ in range(depth)]
    if activation is None:
        activation = ACTIVATIONS[int(rng.integers(0, len(ACTIVATIONS)))]
    lo, hi = -(1 << (bit_width - 1)), (1 << (bit_width - 1)) - 1
    layers = []
    n_in = input_bits
    for n_out in widths:
        wmat = rng.integers(lo, hi + 1, size=(n_out, n_in))
        bias = rng.integers(lo, hi + 1, size=n_out)
        layers.append(
            Layer(
                tuple(tuple(int(v) for v in row) for row in wmat),
                tuple(int(v) for v in bias),
            )
        )
        n_in = n_out
    return QuantizedNet(tuple(layers), activation, bit_width, input_bits)


def save_weights(net: QuantizedNet, path) -> None:
    obj = {
        "version": WEIGHTS_FORMAT_VERSION,
        "input_bits": net.input_bits,
        "bit_width": net.bit_width,
        "activation": net.activation,
        "layers": [
            {"weights": [list(row) for row in layer.weights], "bias": list(layer.bias)}
            for layer in net.layers
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_weights(path) -> QuantizedNet:
    """Parse a versioned weights file, rejecting unknown versions and keys."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    known = {"version", "input_bits", "bit_width", "activation", "layers"}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    missing = known - set(obj)
    if missing:
        raise ConfigError(f"{path}: missing keys {sorted(missing)}")
    if obj["version"] != WEIGHTS_FORMAT_VERSION:
        raise ConfigError(
            f"{path}: unknown weights format version {obj['version']!r}"
        )
    try:
        layers = tuple(
            Layer(
                tuple(tuple(int(v) for v in row) for row in spec["weights"]),
                tuple(int(v) for v in spec["bias"]),
            )
            for spec in obj["layers"]
        )
        net = QuantizedNet(
            layers, str(obj["activation"]), int(obj["bit_width"]), int(obj["input_bits"])
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: malformed weights file: {exc}") from exc
    except DomainError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return net
