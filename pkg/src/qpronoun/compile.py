"""IQP compilation of optimized diagrams, plus the bag-of-words baseline circuit.

Word states on one qubit are ``RX, RZ, RX`` from ``|0>``; on ``k >= 2`` qubits
they are a Hadamard layer followed by a chain of ``CRZ`` on neighbouring pairs
(``k - 1`` angles per layer). Cups become Bell effects and the discourse merge
a CNOT with the target post-selected.
"""
from __future__ import annotations

from .circuit import CapacityError, Circuit, Gate, ParamSymbol
from .diagram import Diagram, DiagramError, WordBox, check_types
from .lexicon import tokenize

DEFAULT_QUBITS = {"n": 1, "s": 1}
DEFAULT_MAX_QUBITS = 20


def block_symbols(word: WordBox, n_qubits: int, layers: int = 1) -> list[ParamSymbol]:
    count = 3 if n_qubits == 1 else layers * (n_qubits - 1)
    return [ParamSymbol(word.surface, word.gtype, i) for i in range(count)]


def word_state_gates(word: WordBox, qubits, layers: int = 1):
    """IQP state preparation for ``word`` on ``qubits``; returns ``(gates, symbols)``."""
    qubits = list(qubits)
    if not qubits:
        raise ValueError("a word needs at least one qubit")
    syms = block_symbols(word, len(qubits), layers)
    if len(qubits) == 1:
        (q,) = qubits
        gates = [Gate("RX", (q,), syms[0]), Gate("RZ", (q,), syms[1]), Gate("RX", (q,), syms[2])]
        return gates, syms
    gates = []
    it = iter(syms)
    for _ in range(layers):
        gates.extend(Gate("H", (q,)) for q in qubits)
        gates.extend(Gate("CRZ", (a, b), next(it)) for a, b in zip(qubits, qubits[1:]))
    return gates, syms


def effect_gates(word: WordBox, qubits, layers: int = 1) -> list[Gate]:
    """Dagger of the word state: reversed gates, negated angles, then post-select."""
    gates, _ = word_state_gates(word, qubits, layers)
    dag = [g._replace(sign=-g.sign) if g.param is not None else g for g in reversed(gates)]
    return dag + [Gate("POSTSELECT0", (q,)) for q in qubits]


def cup_gates(q1: int, q2: int) -> list[Gate]:
    """Bell effect (<00| + <11|)/sqrt(2) on ``q1, q2``."""
    if q1 == q2:
        raise ValueError("a cup needs two distinct qubits")
    return [Gate("CNOT", (q1, q2)), Gate("H", (q1,)), Gate("POSTSELECT0", (q1,)), Gate("POSTSELECT0", (q2,))]


def merge_gates(q1: int, q2: int) -> list[Gate]:
    """Frobenius multiplication: keeps ``q1``, which carries a|0> + b|1> * c|0> + d|1> -> ac|0> + bd|1>."""
    if q1 == q2:
        raise ValueError("a merge needs two distinct qubits")
    return [Gate("CNOT", (q1, q2)), Gate("POSTSELECT0", (q2,))]


def cap_gates(q1: int, q2: int) -> list[Gate]:
    """(|00> + |11>)/sqrt(2); the parameter-free meaning of a determiner."""
    return [Gate("H", (q1,)), Gate("CNOT", (q1, q2))]


def compile_diagram(
    d: Diagram,
    qubits_per_type: dict | None = None,
    layers: int = 1,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> Circuit:
    """Translate a diagram into a circuit, emitting each contraction as soon as it can run.

    Boxes are prepared left to right; a cup, effect or merge is emitted once all
    its qubits exist, which keeps the number of live qubits small.
    """
    report = check_types(d, target=None)
    if not report:
        raise DiagramError(report.error)
    if d.inputs:
        raise DiagramError("diagram has open inputs; wire the pronoun before compiling")
    qpt = dict(DEFAULT_QUBITS)
    if qubits_per_type:
        qpt.update(qubits_per_type)

    leg_qubits: dict = {}
    merge_qubits: dict = {}
    gates: list[Gate] = []
    next_q = 0

    def alloc(n):
        nonlocal next_q
        out = list(range(next_q, next_q + n))
        next_q += n
        if next_q > max_qubits:
            raise CapacityError(f"circuit needs more than {max_qubits} qubits")
        return out

    def qubits_of(p):
        if p.kind == "merge":
            return merge_qubits.get((p.index, p.slot))
        return leg_qubits.get((p.index, p.slot))

    merge_feed = {(w.b.index, w.b.slot): w.a for w in d.wires if w.b.kind == "merge"}
    pending = [w for w in d.wires if w.b.kind != "merge"]
    pending_merges = list(range(d.merges))

    def flush():
        progressed = True
        while progressed:
            progressed = False
            for w in list(pending):
                if w.cup:
                    left, right = sorted((w.a, w.b), key=d.position)
                    ql, qr = qubits_of(left), qubits_of(right)
                    if ql is None or qr is None:
                        continue
                    for a, b in zip(ql, qr):
                        gates.extend(cup_gates(a, b))
                elif w.b.kind == "box" and d.boxes[w.b.index].effect:
                    src = qubits_of(w.a)
                    if src is None:
                        continue
                    gates.extend(effect_gates(d.boxes[w.b.index], src, layers))
                else:
                    raise DiagramError(f"cannot compile wire {w}")
                pending.remove(w)
                progressed = True
            for m in list(pending_merges):
                qa, qb = (qubits_of(merge_feed[(m, slot)]) for slot in (0, 1))
                if qa is None or qb is None:
                    continue
                for x, y in zip(qa, qb):
                    gates.extend(merge_gates(x, y))
                merge_qubits[(m, 2)] = qa
                pending_merges.remove(m)
                progressed = True

    for i, box in enumerate(d.boxes):
        if box.effect:
            continue
        per_leg = [alloc(qpt[atom]) for atom, _ in box.legs]
        for j, qs in enumerate(per_leg):
            leg_qubits[(i, j)] = qs
        flat = [q for qs in per_leg for q in qs]
        if box.kind == "determiner":
            for a, b in zip(per_leg[0], per_leg[1]):
                gates.extend(cap_gates(a, b))
        else:
            gates.extend(word_state_gates(box, flat, layers)[0])
        flush()
    flush()
    if pending or pending_merges:
        raise DiagramError(f"unresolved wires: {pending}")

    outputs = []
    for p in d.outputs:
        outputs.extend(qubits_of(p))
    return Circuit(next_q, tuple(gates), tuple(outputs))


def bow_words(entry, lex, with_candidate: bool = False) -> list[tuple]:
    """Content words of a discourse as ``(surface, type)``; determiners dropped.

    Only the discourse is read, so both candidates of one sentence pair get the
    same circuit. ``with_candidate`` appends the candidate noun as a final word.
    """
    words = []
    for sentence in (entry.s1, entry.s2):
        for chunk in lex.chunk(tokenize(sentence)):
            slots = lex.pos_of(chunk)
            if "determiner" in slots and len(slots) == 1:
                continue
            pos = sorted(slots)[0]
            words.append((chunk, slots[pos]))
    if with_candidate:
        noun = entry.noun.lower()
        words.append((noun, lex.pos_of(noun)["noun"]))
    return words


def compile_bow(entry, lex, with_candidate: bool = False) -> Circuit:
    """One qubit per word, each a 3-rotation state, chained by CNOTs into the last qubit.

    Each link is a merge: the CNOT is controlled by the later word and the
    earlier qubit is post-selected, so the output is the pointwise product of
    all word states.
    """
    words = bow_words(entry, lex, with_candidate)
    if not words:
        raise ValueError("no words to compile")
    gates: list[Gate] = []
    for i, (surface, gtype) in enumerate(words):
        gates.extend(word_state_gates(WordBox(surface, gtype, (("n", 0),)), [i])[0])
        if i:
            gates.extend(merge_gates(i, i - 1))
    return Circuit(len(words), tuple(gates), (len(words) - 1,))
