"""Gate-list circuits over indexed qubits with named, signed angle symbols."""
from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering
from typing import NamedTuple

from .grammar import GrammarType

GATE_KINDS = ("H", "RX", "RZ", "CRZ", "CNOT", "POSTSELECT0")
PARAMETRIC = {"RX", "RZ", "CRZ"}
TWO_QUBIT = {"CRZ", "CNOT"}


class CircuitError(ValueError):
    pass


class CapacityError(RuntimeError):
    """A circuit or diagram exceeds the configured qubit or leg budget."""


@total_ordering
@dataclass(frozen=True)
class ParamSymbol:
    """One trainable angle, shared by every occurrence of ``word`` with ``gtype``."""

    word: str
    gtype: GrammarType
    index: int

    @property
    def key(self) -> tuple:
        return (self.word, str(self.gtype), self.index)

    def __lt__(self, other):
        return self.key < other.key

    def __str__(self):
        return f"{self.word.replace(' ', '_')}_{self.gtype}_{self.index}"


class Gate(NamedTuple):
    kind: str
    qubits: tuple
    param: ParamSymbol | None = None
    sign: int = 1

    def check(self) -> "Gate":
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate {self.kind!r}")
        arity = 2 if self.kind in TWO_QUBIT else 1
        if len(self.qubits) != arity or len(set(self.qubits)) != arity:
            raise CircuitError(f"{self.kind} needs {arity} distinct qubits, got {self.qubits}")
        if (self.param is not None) != (self.kind in PARAMETRIC):
            raise CircuitError(f"{self.kind} parameter mismatch")
        if self.sign not in (1, -1):
            raise CircuitError(f"sign must be +-1, got {self.sign}")
        return self

    def __str__(self):
        txt = " ".join([self.kind, *map(str, self.qubits)])
        if self.param is not None:
            txt += f" {'+' if self.sign > 0 else '-'}{self.param}"
        return txt


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple
    open_outputs: tuple = ()

    def __post_init__(self):
        dead = set()
        for g in self.gates:
            g.check()
            for q in g.qubits:
                if not 0 <= q < self.qubit_count:
                    raise CircuitError(f"qubit {q} outside 0..{self.qubit_count - 1}")
                if q in dead:
                    raise CircuitError(f"qubit {q} used after post-selection")
            if g.kind == "POSTSELECT0":
                dead.add(g.qubits[0])
        if dead & set(self.open_outputs):
            raise CircuitError("an open output is post-selected")

    @property
    def symbols(self) -> tuple:
        """Distinct symbols in order of first use."""
        seen = {}
        for g in self.gates:
            if g.param is not None:
                seen.setdefault(g.param, None)
        return tuple(seen)

    @property
    def postselected(self) -> tuple:
        return tuple(g.qubits[0] for g in self.gates if g.kind == "POSTSELECT0")

    def peak_width(self) -> int:
        """Largest number of simultaneously live qubits under lazy allocation."""
        live, peak = set(), 0
        for g in self.gates:
            live.update(g.qubits)
            peak = max(peak, len(live))
            if g.kind == "POSTSELECT0":
                live.discard(g.qubits[0])
        live.update(self.open_outputs)
        return max(peak, len(live))

    def signature(self) -> tuple:
        """Structure with symbols erased; circuits sharing it simulate as one batch."""
        return (
            self.qubit_count,
            tuple((g.kind, g.qubits, g.param is not None) for g in self.gates),
            self.open_outputs,
        )

    def to_text(self) -> str:
        head = f"# qubits {self.qubit_count} outputs {' '.join(map(str, self.open_outputs))}"
        return "\n".join([head, *map(str, self.gates)]) + "\n"
