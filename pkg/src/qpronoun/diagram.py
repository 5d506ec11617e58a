"""Typed string diagrams stored as port graphs.

A port is ``("box", i, leg)`` for leg ``leg`` of box ``i`` or ``("merge", m, slot)``
for Frobenius merge node ``m`` (slots 0 and 1 are inputs, slot 2 the output).
Every port appears exactly once among the wires, open outputs and open inputs.
Crossing wires are allowed; the planar leg order only matters to the rewriter.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

from .grammar import Bang, GrammarType, GrammarTypeError, legs, parse_type, validate


class DiagramError(ValueError):
    """Composition error: wrong arities, open wires or indices."""


class Port(NamedTuple):
    kind: str  # "box" or "merge"
    index: int
    slot: int

    def __str__(self):
        return f"{'m' if self.kind == 'merge' else ''}{self.index}:{self.slot}"


def box_port(i: int, leg: int) -> Port:
    return Port("box", i, leg)


def merge_port(m: int, slot: int) -> Port:
    return Port("merge", m, slot)


@dataclass(frozen=True)
class WordBox:
    surface: str
    gtype: GrammarType
    legs: tuple = ()
    kind: str = "word"  # "word" or "determiner"
    effect: bool = False  # bent into an effect: dagger of its state, legs become inputs

    @property
    def in_arity(self) -> int:
        if self.effect:
            return len(self.legs)
        return sum(1 for _, z in self.legs if z != 0)

    @property
    def out_arity(self) -> int:
        return len(self.legs) - self.in_arity

    def __str__(self):
        return f"{self.surface}:{self.gtype}"


def make_word(surface: str, gtype: GrammarType, layer: int | None = None, kind: str = "word") -> WordBox:
    """Build a word box whose legs are the unfolded atoms of ``gtype``.

    A copiable type is projected to ``layer`` (default: its bound).
    """
    validate(gtype)
    unfolded = tuple(legs(gtype, layer))
    if not unfolded:
        raise GrammarTypeError(f"{surface!r}: type {gtype} has no legs at layer {layer}")
    if isinstance(gtype, Bang) and layer is not None and layer != gtype.bound:
        # the projected layer is part of the box identity
        gtype = Bang(gtype.inner, layer)
    return WordBox(surface, gtype, unfolded, kind)


class Wire(NamedTuple):
    a: Port
    b: Port
    cup: bool = False


@dataclass(frozen=True)
class Diagram:
    boxes: tuple = ()
    wires: tuple = ()
    merges: int = 0
    outputs: tuple = ()
    inputs: tuple = ()

    @property
    def cups(self) -> tuple:
        return tuple(w for w in self.wires if w.cup)

    def port_type(self, p: Port):
        if p.kind == "merge":
            return ("s", 0)
        return self.boxes[p.index].legs[p.slot]

    def position(self, p: Port) -> tuple:
        """Planar order key of a box leg."""
        return (p.index, p.slot)

    def partner(self, p: Port) -> Port | None:
        for w in self.wires:
            if w.a == p:
                return w.b
            if w.b == p:
                return w.a
        return None

    def ports(self):
        for i, box in enumerate(self.boxes):
            for j in range(len(box.legs)):
                yield box_port(i, j)
        for m in range(self.merges):
            for slot in range(3):
                yield merge_port(m, slot)

    def to_text(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class TypeReport:
    ok: bool
    outputs: tuple = ()
    error: str | None = None
    wire: Wire | None = None
    endpoint_types: tuple | None = None

    def __bool__(self):
        return self.ok


def _fmt_leg(leg) -> str:
    x, z = leg
    if z == 0:
        return x
    return x + ("^l" * -z if z < 0 else "^r" * z)


def check_types(d: Diagram, target: str | None = "s") -> TypeReport:
    """Check wiring and typing; with ``target`` also require that the diagram reduces to it.

    ``target="s"`` demands exactly one open output of type s (or an empty diagram).
    """
    seen: dict[Port, int] = {}
    valid = set(d.ports())
    for p in [*(q for w in d.wires for q in (w.a, w.b)), *d.outputs, *d.inputs]:
        if p not in valid:
            return TypeReport(False, error=f"dangling port {p}")
        seen[p] = seen.get(p, 0) + 1
    for p in valid:
        count = seen.get(p, 0)
        if count != 1:
            return TypeReport(False, error=f"port {p} used {count} times")

    for w in d.wires:
        ta, tb = d.port_type(w.a), d.port_type(w.b)
        if w.cup:
            if w.a.kind != "box" or w.b.kind != "box":
                return TypeReport(False, error="cup on a merge node", wire=w, endpoint_types=(ta, tb))
            left, right = sorted((w.a, w.b), key=d.position)
            tl, tr = d.port_type(left), d.port_type(right)
            if tl[0] != tr[0] or tr[1] != tl[1] + 1:
                return TypeReport(
                    False,
                    error=f"cup joins {_fmt_leg(tl)} with {_fmt_leg(tr)}",
                    wire=w,
                    endpoint_types=(tl, tr),
                )
        else:
            if w.b.kind == "merge" and w.b.slot == 2:
                return TypeReport(False, error="wire into merge output", wire=w, endpoint_types=(ta, tb))
            effect_end = w.b.kind == "box" and d.boxes[w.b.index].effect
            if ta != tb or not (w.b.kind == "merge" or effect_end):
                return TypeReport(
                    False,
                    error=f"wire joins {_fmt_leg(ta)} with {_fmt_leg(tb)}",
                    wire=w,
                    endpoint_types=(ta, tb),
                )
            if w.b.kind == "merge" and ta != ("s", 0):
                return TypeReport(False, error="merge input is not s", wire=w, endpoint_types=(ta, tb))

    out_types = tuple(d.port_type(p) for p in d.outputs)
    for t in out_types:
        if t[1] != 0:
            return TypeReport(False, outputs=out_types, error=f"open output of adjoint type {_fmt_leg(t)}")
    if target is not None and d.boxes and out_types != ((target, 0),):
        names = ", ".join(_fmt_leg(t) for t in out_types) or "nothing"
        return TypeReport(False, outputs=out_types, error=f"diagram reduces to {names}, not {target}")
    return TypeReport(True, outputs=out_types)


def assert_well_typed(d: Diagram, target: str | None = "s") -> Diagram:
    report = check_types(d, target)
    if not report:
        raise DiagramError(report.error)
    return d


def shift(d: Diagram, box_offset: int, merge_offset: int) -> Diagram:
    def mv(p: Port) -> Port:
        if p.kind == "box":
            return Port("box", p.index + box_offset, p.slot)
        return Port("merge", p.index + merge_offset, p.slot)

    return Diagram(
        boxes=d.boxes,
        wires=tuple(Wire(mv(w.a), mv(w.b), w.cup) for w in d.wires),
        merges=d.merges,
        outputs=tuple(mv(p) for p in d.outputs),
        inputs=tuple(mv(p) for p in d.inputs),
    )


def tensor(d1: Diagram, d2: Diagram) -> Diagram:
    """Place two diagrams side by side (no new wiring)."""
    d2s = shift(d2, len(d1.boxes), d1.merges)
    return Diagram(
        boxes=d1.boxes + d2s.boxes,
        wires=d1.wires + d2s.wires,
        merges=d1.merges + d2s.merges,
        outputs=d1.outputs + d2s.outputs,
        inputs=d1.inputs + d2s.inputs,
    )


def merge_sentences(d1: Diagram, d2: Diagram) -> Diagram:
    """Conjoin two sentence diagrams through a Frobenius merge of their s outputs."""
    for name, d in (("first", d1), ("second", d2)):
        if len(d.outputs) != 1 or d.port_type(d.outputs[0]) != ("s", 0):
            types = [_fmt_leg(d.port_type(p)) for p in d.outputs]
            raise DiagramError(f"{name} diagram must have exactly one open s output, has {types}")
    both = tensor(d1, d2)
    m = both.merges
    s1, s2 = both.outputs
    return replace(
        both,
        wires=both.wires + (Wire(s1, merge_port(m, 0)), Wire(s2, merge_port(m, 1))),
        merges=m + 1,
        outputs=(merge_port(m, 2),),
    )


def to_text(d: Diagram) -> str:
    """Line-oriented debug dump: one box, merge node, wire or open end per line."""
    lines = []
    for i, b in enumerate(d.boxes):
        legs_txt = " ".join(_fmt_leg(leg) for leg in b.legs)
        flag = b.kind + (" effect" if b.effect else "")
        lines.append(f"box\t{i}\t{b.surface}\t{b.gtype}\t{flag}\t{legs_txt}")
    for m in range(d.merges):
        lines.append(f"merge\t{m}")
    for w in d.wires:
        lines.append(f"{'cup' if w.cup else 'wire'}\t{w.a}\t{w.b}")
    for p in d.outputs:
        lines.append(f"output\t{p}")
    for p in d.inputs:
        lines.append(f"input\t{p}")
    return "\n".join(lines) + "\n"


def _parse_port(text: str) -> Port:
    idx, slot = text.split(":")
    if idx.startswith("m"):
        return merge_port(int(idx[1:]), int(slot))
    return box_port(int(idx), int(slot))


def from_text(text: str) -> Diagram:
    boxes, wires, outputs, inputs = [], [], [], []
    merges = 0
    for line in text.splitlines():
        if not line.strip():
            continue
        fields = line.split("\t")
        tag = fields[0]
        if tag == "box":
            _, _, surface, gtype, flag = fields[:5]
            flags = flag.split()
            t = parse_type(gtype)
            layer = t.bound if isinstance(t, Bang) else None
            box = make_word(surface, t, layer, flags[0])
            if "effect" in flags:
                # effect legs mirror their partner's type; restore from the dump
                leg_txt = fields[5].split()
                box = replace(box, effect=True, legs=tuple(_unfmt_leg(x) for x in leg_txt))
            boxes.append(box)
        elif tag == "merge":
            merges += 1
        elif tag in ("cup", "wire"):
            wires.append(Wire(_parse_port(fields[1]), _parse_port(fields[2]), tag == "cup"))
        elif tag == "output":
            outputs.append(_parse_port(fields[1]))
        elif tag == "input":
            inputs.append(_parse_port(fields[1]))
        else:
            raise DiagramError(f"unknown line tag {tag!r}")
    return Diagram(tuple(boxes), tuple(wires), merges, tuple(outputs), tuple(inputs))


def _unfmt_leg(text: str):
    base, *adj = text.split("^")
    z = sum(-1 if a == "l" else 1 for a in adj)
    return (base, z)


@dataclass(frozen=True)
class DiagramStats:
    boxes: int
    cups: int
    merges: int
    effects: int = field(default=0)


def stats(d: Diagram) -> DiagramStats:
    return DiagramStats(len(d.boxes), len(d.cups), d.merges, sum(b.effect for b in d.boxes))
