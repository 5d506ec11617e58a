"""Diagram optimisation: determiner removal and cup elimination.

``remove_cups`` bends a single-leg word state that feeds a cup into an effect
on its partner wire. Only cups that no other wire encloses or crosses are
bent, working from the right; a referent routed across the first sentence
therefore shields the cups beneath it.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Mapping

import numpy as np

from .contract import MAX_LEGS, contract
from .diagram import Diagram, DiagramError, Port, Wire, box_port


def _drop_box(d: Diagram, i: int, extra_wires=()) -> Diagram:
    def mv(p: Port) -> Port:
        if p.kind == "box" and p.index > i:
            return Port("box", p.index - 1, p.slot)
        return p

    def touches(w):
        return any(p.kind == "box" and p.index == i for p in (w.a, w.b))

    wires = [w for w in d.wires if not touches(w)] + list(extra_wires)
    return Diagram(
        boxes=d.boxes[:i] + d.boxes[i + 1 :],
        wires=tuple(Wire(mv(w.a), mv(w.b), w.cup) for w in wires),
        merges=d.merges,
        outputs=tuple(mv(p) for p in d.outputs),
        inputs=tuple(mv(p) for p in d.inputs),
    )


def drop_determiners(d: Diagram) -> Diagram:
    """Replace every determiner by a plain wire joining its two neighbours."""
    while True:
        idx = next((i for i, b in enumerate(d.boxes) if b.kind == "determiner"), None)
        if idx is None:
            return d
        ends = []
        for leg in range(len(d.boxes[idx].legs)):
            w = next((w for w in d.wires if box_port(idx, leg) in (w.a, w.b)), None)
            if w is None or not w.cup:
                raise DiagramError(f"determiner {d.boxes[idx].surface!r} has no word to attach to")
            ends.append(w.b if w.a == box_port(idx, leg) else w.a)
        if len(ends) != 2:
            raise DiagramError("determiner must have exactly two legs")
        d = _drop_box(d, idx, [Wire(ends[0], ends[1], cup=True)])


def _planar_legs(d: Diagram):
    """Positions of legs that still take part in the planar layout."""
    order = []
    for i, b in enumerate(d.boxes):
        if b.effect:
            continue
        for j in range(len(b.legs)):
            order.append(box_port(i, j))
    return {p: k for k, p in enumerate(order)}


def _bendable(d: Diagram):
    """Cups (rightmost first) whose one end is a free single-leg word state."""
    pos = _planar_legs(d)
    spans = [(min(pos[w.a], pos[w.b]), max(pos[w.a], pos[w.b]), w) for w in d.wires if w.cup]
    # legs that leave the layout downwards (into merges or as outputs)
    hanging = {pos[w.a] for w in d.wires if w.b.kind == "merge" and w.a in pos}
    hanging |= {pos[p] for p in d.outputs if p in pos}

    found = []
    for lo, hi, w in spans:
        state_end = None
        for p, other in ((w.a, w.b), (w.b, w.a)):
            box = d.boxes[p.index]
            if box.kind == "word" and not box.effect and len(box.legs) == 1 and box.legs[0][1] == 0:
                state_end = (p, other)
        if state_end is None:
            continue
        blocked = False
        for lo2, hi2, w2 in spans:
            if w2 is w:
                continue
            inside = (lo < lo2 < hi) + (lo < hi2 < hi)
            if inside == 1 or (lo2 < lo and hi < hi2):
                blocked = True
                break
        if not blocked and any(lo < k < hi for k in hanging):
            blocked = True
        if not blocked:
            found.append((hi, w, state_end))
    found.sort(key=lambda t: -t[0])
    return found


def remove_cups(d: Diagram) -> Diagram:
    """Bend single-leg states into effects until no free cup remains."""
    while True:
        candidates = _bendable(d)
        if not candidates:
            return d
        _, cup, (state_port, partner) = candidates[0]
        box = d.boxes[state_port.index]
        bent = replace(box, effect=True, legs=(d.port_type(partner),))
        wires = tuple(w for w in d.wires if w is not cup) + (Wire(partner, state_port),)
        boxes = d.boxes[: state_port.index] + (bent,) + d.boxes[state_port.index + 1 :]
        d = replace(d, boxes=boxes, wires=wires)


def optimize(d: Diagram) -> Diagram:
    return remove_cups(drop_determiners(d))


def semantic_check(d_before: Diagram, d_after: Diagram, params: Mapping, max_legs: int = MAX_LEGS,
                   params_after: Mapping | None = None) -> float:
    """Largest amplitude gap between two diagrams after fitting one complex scalar.

    Both amplitude vectors come from direct contraction. ``d_before`` is
    scaled to unit norm and ``d_after`` is fitted to it by least squares.
    ``params_after`` evaluates ``d_after`` under a different assignment.
    """
    a = contract(d_before, params, max_legs=max_legs)
    b = contract(d_after, params if params_after is None else params_after, max_legs=max_legs)
    if a.shape != b.shape:
        return float("inf")
    na = np.linalg.norm(a)
    if na == 0:
        return float(np.max(np.abs(b))) if np.linalg.norm(b) else 0.0
    a = a / na
    bb = np.vdot(b, b)
    lam = np.vdot(b, a) / bb if bb else 0.0
    return float(np.max(np.abs(a - lam * b)))
