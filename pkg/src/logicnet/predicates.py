"""Exact predicates over small boolean universes.

A predicate is a complete truth table over the 2**n assignments of n atomic
propositions, stored as an integer bitmask.  Input index x encodes an
assignment with atom 1 as the least-significant bit, so atom i is true on
input x iff bit (i-1) of x is set.  Every predicate carries a logic-depth
tag: atoms sit at depth 0, pointwise boolean combinations keep the maximum
operand depth, and counting thresholds add 2 (one level for quantification,
one for the conjunction block behind the count).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DomainError

MAX_ATOMS = 20

_COMBINE_KINDS = ("and", "or", "not", "xor")


@dataclass(frozen=True)
class Universe:
    """A finite input space of 2**n_atoms assignments."""

    n_atoms: int

    def __post_init__(self):
        if not 0 <= self.n_atoms <= MAX_ATOMS:
            raise DomainError(
                f"n_atoms must be between 0 and {MAX_ATOMS}, got {self.n_atoms}"
            )

    @property
    def size(self) -> int:
        return 1 << self.n_atoms

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def atom_mask(self, i: int) -> int:
        """Bitmask of the inputs on which atom i (1-indexed) is true."""
        if not 1 <= i <= self.n_atoms:
            raise DomainError(f"atom index {i} out of range 1..{self.n_atoms}")
        block = 1 << (i - 1)
        # pattern of `block` zeros then `block` ones, repeated across the space
        mask = ((1 << block) - 1) << block
        period = block << 1
        while period < self.size:
            mask |= mask << period
            period <<= 1
        return mask & self.full_mask


@dataclass(frozen=True)
class Predicate:
    """An exact truth table plus its logic-depth tag and a display name."""

    universe: Universe
    bits: int
    depth: int
    name: str = "p"

    def __post_init__(self):
        if self.depth < 0:
            raise DomainError(f"depth must be >= 0, got {self.depth}")
        if not 0 <= self.bits <= self.universe.full_mask:
            raise DomainError("truth table does not fit the universe")

    def value(self, x: int) -> bool:
        if not 0 <= x < self.universe.size:
            raise DomainError(f"input {x} outside universe of size {self.universe.size}")
        return bool((self.bits >> x) & 1)

    def true_count(self) -> int:
        return self.bits.bit_count()

    def to_array(self) -> np.ndarray:
        """Truth values as a float array indexed by input, 0.0/1.0 entries."""
        size = self.universe.size
        raw = self.bits.to_bytes((size + 7) // 8, "little")
        flags = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return flags[:size].astype(np.float64)

    def to_bitstring(self) -> str:
        """Table as a 0/1 string, input index 0 first."""
        return "".join("1" if (self.bits >> x) & 1 else "0" for x in range(self.universe.size))

    def table_hex(self) -> str:
        nibbles = max(1, (self.universe.size + 3) // 4)
        return format(self.bits, f"0{nibbles}x")

    def to_record(self) -> dict:
        return {
            "n_atoms": self.universe.n_atoms,
            "depth": self.depth,
            "table_hex": self.table_hex(),
            "label": self.name,
        }

    @classmethod
    def from_record(cls, record: dict) -> "Predicate":
        try:
            universe = Universe(int(record["n_atoms"]))
            bits = int(record["table_hex"], 16)
            depth = int(record["depth"])
            label = str(record["label"])
        except (KeyError, ValueError, TypeError) as exc:
            raise DomainError(f"malformed predicate record: {exc}") from exc
        return cls(universe, bits, depth, label)

    def to_json(self) -> str:
        return json.dumps(self.to_record())

    @classmethod
    def from_json(cls, text: str) -> "Predicate":
        return cls.from_record(json.loads(text))


@dataclass(frozen=True)
class PredicateFamily:
    """An ordered collection of predicates over one shared universe."""

    members: tuple[Predicate, ...]
    label: str = ""

    def __post_init__(self):
        if self.members:
            u = self.members[0].universe
            for m in self.members:
                if m.universe != u:
                    raise DomainError("family members must share one universe")
        names = [m.name for m in self.members]
        if len(set(names)) != len(names):
            raise DomainError(f"member names must be unique, got {names}")

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def universe(self) -> Universe:
        if not self.members:
            raise DomainError("empty family has no universe")
        return self.members[0].universe

    def member_names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.members)


def all_true(u: Universe, depth: int = 0, name: str = "true") -> Predicate:
    return Predicate(u, u.full_mask, depth, name)


def all_false(u: Universe, depth: int = 0, name: str = "false") -> Predicate:
    return Predicate(u, 0, depth, name)


def atom(i: int, u: Universe) -> Predicate:
    """The depth-0 predicate reading atom i (1-indexed)."""
    return Predicate(u, u.atom_mask(i), 0, f"x{i}")


def atoms_family(u: Universe, label: str = "atoms") -> PredicateFamily:
    return PredicateFamily(tuple(atom(i, u) for i in range(1, u.n_atoms + 1)), label)


def combine(kind: str, operands: Sequence[Predicate]) -> Predicate:
    """Pointwise boolean combination; depth is the max over the operands."""
    if kind not in _COMBINE_KINDS:
        raise DomainError(f"unknown combination kind {kind!r}")
    operands = tuple(operands)
    if kind == "not":
        if len(operands) != 1:
            raise DomainError("'not' takes exactly one operand")
    elif len(operands) < 2:
        raise DomainError(f"{kind!r} takes at least two operands")
    u = operands[0].universe
    for p in operands:
        if p.universe != u:
            raise DomainError("operands must share one universe")

    depth = max(p.depth for p in operands)
    if kind == "not":
        bits = ~operands[0].bits & u.full_mask
        name = f"not({operands[0].name})"
    else:
        op = {"and": int.__and__, "or": int.__or__, "xor": int.__xor__}[kind]
        bits = reduce(op, (p.bits for p in operands))
        name = f"{kind}({','.join(p.name for p in operands)})"
    return Predicate(u, bits, depth, name)


def _popcounts(n_atoms: int) -> np.ndarray:
    idx = np.arange(1 << n_atoms, dtype=np.uint32)
    counts = np.zeros(idx.shape, dtype=np.uint8)
    for b in range(n_atoms):
        counts += ((idx >> b) & 1).astype(np.uint8)
    return counts


def bits_from_flags(flags: Iterable[bool]) -> int:
    """Pack per-input truth values (index 0 first) into a table bitmask."""
    bits = 0
    for x, flag in enumerate(flags):
        if flag:
            bits |= 1 << x
    return bits


def from_truth_values(u: Universe, flags: Iterable[bool], depth: int, name: str) -> Predicate:
    return Predicate(u, bits_from_flags(flags), depth, name)


def at_least_k_true(k: int, u: Universe) -> Predicate:
    """True on x iff at least k atoms are set in x.  Depth 2 over the atoms."""
    if k < 0:
        raise DomainError(f"threshold must be >= 0, got {k}")
    if k == 0:
        bits = u.full_mask
    elif k > u.n_atoms:
        bits = 0
    else:
        bits = bits_from_flags(_popcounts(u.n_atoms) >= k)
    return Predicate(u, bits, 2, f"at_least_{k}")


def at_least_k_of_family(k: int, fam: PredicateFamily) -> Predicate:
    """True on x iff at least k family members hold on x.

    Members count by identity, so duplicated truth tables count twice.
    Depth is the deepest member plus 2.
    """
    if k < 0:
        raise DomainError(f"threshold must be >= 0, got {k}")
    if len(fam) == 0:
        raise DomainError("family must be nonempty")
    u = fam.universe
    if k == 0:
        bits = u.full_mask
    elif k > len(fam):
        bits = 0
    else:
        counts = np.zeros(u.size, dtype=np.int32)
        for m in fam:
            counts += m.to_array().astype(np.int32)
        bits = bits_from_flags(counts >= k)
    depth = max(m.depth for m in fam) + 2
    return Predicate(u, bits, depth, f"at_least_{k}_of_{fam.label or 'family'}")


def relevant_variables(p: Predicate) -> set[int]:
    """Atoms whose flip changes the predicate on some input."""
    u = p.universe
    relevant = set()
    for i in range(1, u.n_atoms + 1):
        mask_set = u.atom_mask(i)
        mask_clear = ~mask_set & u.full_mask
        block = 1 << (i - 1)
        # compare each input having atom i clear against its flipped partner
        if (p.bits & mask_clear) != ((p.bits >> block) & mask_clear):
            relevant.add(i)
    return relevant


def save_predicates(path, predicates: Sequence[Predicate]) -> None:
    records = [p.to_record() for p in predicates]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")


def load_predicates(path) -> PredicateFamily:
    """Read a JSON list of predicate records sharing one universe."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            records = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(records, list) or not records:
        raise ConfigError(f"{path}: expected a nonempty JSON list of predicate records")
    members = tuple(Predicate.from_record(r) for r in records)
    return PredicateFamily(members)
