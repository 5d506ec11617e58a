"""From dataset entries to trainable circuits, for the structured and bag-of-words models."""
from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import Circuit
from .compile import DEFAULT_MAX_QUBITS, compile_bow, compile_diagram
from .diagram import Diagram
from .lexicon import Lexicon, normalize
from .parser import ParseError, parse_discourse, wire_discourse
from .rewrite import optimize

MODELS = ("sllm", "bow")


@dataclass(frozen=True)
class CircuitConfig:
    model: str = "sllm"
    qubits_per_type: dict = field(default_factory=lambda: {"n": 1, "s": 1})
    layers: int = 1
    max_qubits: int = DEFAULT_MAX_QUBITS

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {MODELS}")


def candidate_index(referents: list[str], noun: str) -> int:
    noun = normalize(noun)
    if noun not in referents:
        raise ParseError(f"candidate {noun!r} is not a mention in {referents}", 0)
    return referents.index(noun)


def entry_diagram(entry, lex: Lexicon, optimized: bool = True) -> Diagram:
    """Discourse diagram with the pronoun wired to ``entry.noun``."""
    pd = parse_discourse(entry.s1, entry.s2, lex)
    pron = pd.s2_diagram.boxes[pd.pronoun].surface
    if normalize(entry.pronoun) != pron:
        raise ParseError(f"pronoun {entry.pronoun!r} does not match {pron!r}", 0)
    d = wire_discourse(pd, candidate_index(pd.referent_words, entry.noun))
    return optimize(d) if optimized else d


def entry_circuit(entry, lex: Lexicon, config: CircuitConfig = CircuitConfig()) -> Circuit:
    if config.model == "bow":
        return compile_bow(entry, lex)
    return compile_diagram(entry_diagram(entry, lex), config.qubits_per_type, config.layers, config.max_qubits)


def candidate_circuits(s1: str, s2: str, lex: Lexicon, config: CircuitConfig = CircuitConfig()):
    """``(mention, circuit)`` for every candidate mention of a discourse, in sentence order."""
    pd = parse_discourse(s1, s2, lex)
    pron = pd.s2_diagram.boxes[pd.pronoun].surface
    out = []
    for noun in pd.referent_words:
        probe = _Probe(s1, s2, pron, noun)
        out.append((noun, entry_circuit(probe, lex, config)))
    return out


@dataclass(frozen=True)
class _Probe:
    s1: str
    s2: str
    pronoun: str
    noun: str
