"""Direct tensor-network evaluation of a diagram, bypassing circuits entirely.

Word tensors come from closed-form matrices of the IQP blocks. Cups and
determiners are scaled identities (1/sqrt(2) each, matching the compiled Bell
effect and cap), merges are the three-legged delta, and bent words are the
complex conjugate of their state tensor.
"""
from __future__ import annotations

from typing import Mapping

import numpy as np

from .circuit import CapacityError
from .compile import DEFAULT_QUBITS, block_symbols
from .diagram import Diagram, DiagramError, WordBox, check_types

MAX_LEGS = 40


def _rx(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _rz(t):
    return np.array([np.exp(-0.5j * t), np.exp(0.5j * t)])


def state_tensor(word: WordBox, n_qubits: int, params: Mapping, layers: int = 1) -> np.ndarray:
    """Amplitudes of the word's state as a flat vector over its qubits (big-endian)."""
    syms = block_symbols(word, n_qubits, layers)
    theta = [float(params[s]) for s in syms]
    if n_qubits == 1:
        v = np.array([1.0, 0.0], dtype=complex)
        v = _rx(theta[0]) @ v
        v = _rz(theta[1]) * v
        return _rx(theta[2]) @ v
    dim = 2**n_qubits
    bits = (np.arange(dim)[:, None] >> np.arange(n_qubits - 1, -1, -1)[None, :]) & 1
    hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    h_all = np.ones((1, 1))
    for _ in range(n_qubits):
        h_all = np.kron(h_all, hadamard)
    v = np.zeros(dim, dtype=complex)
    v[0] = 1
    for layer in range(layers):
        v = h_all @ v
        phase = np.ones(dim, dtype=complex)
        for i in range(n_qubits - 1):
            t = theta[layer * (n_qubits - 1) + i]
            ctrl, tgt = bits[:, i], bits[:, i + 1]
            phase *= np.where(ctrl == 1, np.where(tgt == 0, np.exp(-0.5j * t), np.exp(0.5j * t)), 1)
        v = phase * v
    return v


def contract(d: Diagram, params: Mapping, qubits_per_type: dict | None = None, layers: int = 1,
             max_legs: int = MAX_LEGS) -> np.ndarray:
    """Evaluate ``d`` as a tensor network; returns a flat vector over the open outputs."""
    report = check_types(d, target=None)
    if not report:
        raise DiagramError(report.error)
    if d.inputs:
        raise DiagramError("cannot contract a diagram with open inputs")
    total_legs = sum(len(b.legs) for b in d.boxes)
    if total_legs > max_legs:
        raise CapacityError(f"diagram has {total_legs} legs, limit {max_legs}")
    qpt = dict(DEFAULT_QUBITS)
    if qubits_per_type:
        qpt.update(qubits_per_type)

    label = {}
    counter = iter(range(10**6))
    scale = 1.0
    for w in d.wires:
        shared = next(counter)
        label[w.a] = label[w.b] = shared
        if w.cup:
            atom = d.port_type(w.a)[0]
            scale *= (1 / np.sqrt(2)) ** qpt[atom]
    for p in (*d.outputs, *d.inputs):
        label[p] = next(counter)

    operands = []
    for i, box in enumerate(d.boxes):
        dims = [2 ** qpt[atom] for atom, _ in box.legs]
        idx = [label[("box", i, j)] for j in range(len(box.legs))]
        if box.kind == "determiner":
            if len(dims) != 2:
                raise DiagramError("determiner must have two legs")
            t = np.eye(dims[0], dtype=complex) * (1 / np.sqrt(2)) ** qpt[box.legs[0][0]]
        else:
            t = state_tensor(box, int(np.log2(np.prod(dims))), params, layers).reshape(dims)
            if box.effect:
                t = t.conj()
        operands += [t, idx]
    for m in range(d.merges):
        dim = 2 ** qpt["s"]
        delta = np.zeros((dim, dim, dim))
        for k in range(dim):
            delta[k, k, k] = 1
        operands += [delta, [label[("merge", m, s)] for s in range(3)]]
    out = [label[p] for p in d.outputs]
    if not operands:
        return np.ones(1, dtype=complex)
    result = np.einsum(*operands, out, optimize=True)
    return scale * np.asarray(result).reshape(-1)
