"""Exact statevector simulation with post-selection.

Qubits are allocated lazily (an untouched qubit is a ``|0>`` tensor factor) and
dropped as soon as they are post-selected, so the live register stays small.
Circuits with the same structure are simulated together along a leading batch
axis, one angle vector per circuit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .circuit import CapacityError, Circuit, CircuitError

DEFAULT_CAPACITY = 24
ORACLE_CAPACITY = 12
_R2 = 1 / np.sqrt(2)


class MissingSymbolError(KeyError):
    def __init__(self, symbol):
        self.symbol = symbol
        super().__init__(f"no value for parameter {symbol}")

    def __str__(self):
        return self.args[0]


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    live_qubits: tuple

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _angles(circuit: Circuit, params: Mapping) -> np.ndarray:
    out = []
    for g in circuit.gates:
        if g.param is None:
            continue
        try:
            out.append(g.sign * float(params[g.param]))
        except KeyError:
            raise MissingSymbolError(g.param) from None
    return np.asarray(out, dtype=float)


def simulate(circuit: Circuit, angles: np.ndarray, capacity: int = DEFAULT_CAPACITY) -> np.ndarray:
    """Amplitudes on ``circuit.open_outputs`` for a batch of signed angle rows.

    ``angles`` has shape ``(batch, n_parametric_gates)`` in gate order, signs
    already applied. Returns shape ``(batch, 2 ** len(open_outputs))``.
    """
    if circuit.qubit_count > capacity:
        raise CapacityError(f"{circuit.qubit_count} qubits exceeds capacity {capacity}")
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    batch = angles.shape[0]
    state = np.ones(batch, dtype=complex)
    live: list[int] = []
    k = 0

    def axis(q):
        nonlocal state
        if q not in live:
            live.append(q)
            state = np.stack([state, np.zeros_like(state)], axis=-1)
        return 1 + live.index(q)

    def sl(ax, v, nd):
        return (slice(None),) * ax + (v,) + (slice(None),) * (nd - ax - 1)

    def bcast(x, nd):
        return x.reshape((batch,) + (1,) * (nd - 1))

    for g in circuit.gates:
        kind = g.kind
        if kind == "POSTSELECT0":
            ax = axis(g.qubits[0])
            state = state[sl(ax, 0, state.ndim)]
            live.remove(g.qubits[0])
            continue
        if kind in ("CRZ", "CNOT"):
            cax, tax = axis(g.qubits[0]), axis(g.qubits[1])
            nd = state.ndim
            sub = state[sl(cax, 1, nd)]  # view on control = 1
            tax -= tax > cax
            snd = nd - 1
            t0, t1 = sl(tax, 0, snd), sl(tax, 1, snd)
            if kind == "CNOT":
                tmp = sub[t0].copy()
                sub[t0] = sub[t1]
                sub[t1] = tmp
            else:
                theta = angles[:, k]
                k += 1
                sub[t0] *= bcast(np.exp(-0.5j * theta), snd - 1)
                sub[t1] *= bcast(np.exp(0.5j * theta), snd - 1)
            continue
        ax = axis(g.qubits[0])
        nd = state.ndim
        i0, i1 = sl(ax, 0, nd), sl(ax, 1, nd)
        if kind == "H":
            a0 = state[i0].copy()
            a1 = state[i1]
            state[i0] = (a0 + a1) * _R2
            state[i1] = (a0 - a1) * _R2
        elif kind == "RZ":
            theta = angles[:, k]
            k += 1
            state[i0] *= bcast(np.exp(-0.5j * theta), nd - 1)
            state[i1] *= bcast(np.exp(0.5j * theta), nd - 1)
        elif kind == "RX":
            theta = angles[:, k]
            k += 1
            c = bcast(np.cos(theta / 2), nd - 1)
            s = bcast(-1j * np.sin(theta / 2), nd - 1)
            a0 = state[i0].copy()
            a1 = state[i1].copy()
            state[i0] = c * a0 + s * a1
            state[i1] = s * a0 + c * a1
        else:  # pragma: no cover - Gate.check rejects unknown kinds
            raise CircuitError(f"unknown gate {kind}")

    for q in circuit.open_outputs:
        axis(q)
    extra = set(live) - set(circuit.open_outputs)
    if extra:
        raise CircuitError(f"qubits {sorted(extra)} are neither post-selected nor open outputs")
    order = [0] + [1 + live.index(q) for q in circuit.open_outputs]
    return np.transpose(state, order).reshape(batch, -1)


def run(c: Circuit, params: Mapping, capacity: int = DEFAULT_CAPACITY) -> StateVector:
    """Simulate from ``|0...0>``; post-selection is not renormalized."""
    amps = simulate(c, _angles(c, params)[None, :], capacity)[0]
    return StateVector(amps, tuple(c.open_outputs))


def run_batch(circuits, params: Mapping, capacity: int = DEFAULT_CAPACITY) -> list[StateVector]:
    """Simulate many circuits; structurally identical ones share one batched pass."""
    groups: dict = {}
    rows: dict = {}
    for i, c in enumerate(circuits):
        try:
            rows[i] = _angles(c, params)
        except MissingSymbolError as exc:
            raise MissingSymbolError(f"{exc.symbol} (circuit {i})") from None
        groups.setdefault(c.signature(), []).append(i)
    out: list = [None] * len(circuits)
    for members in groups.values():
        c = circuits[members[0]]
        try:
            amps = simulate(c, np.stack([rows[i] for i in members]), capacity)
        except (CapacityError, CircuitError) as exc:
            raise type(exc)(f"circuit {members[0]}: {exc}") from None
        for i, a in zip(members, amps):
            out[i] = StateVector(a, tuple(c.open_outputs))
    return out


class BatchPlan:
    """Precompiled gather plan for evaluating many circuits against one angle vector.

    ``symbols`` fixes the order of the flat parameter vector.
    """

    def __init__(self, circuits, symbols, capacity: int = DEFAULT_CAPACITY):
        self.symbols = list(symbols)
        index = {s: i for i, s in enumerate(self.symbols)}
        self.n = len(circuits)
        self.groups = []
        by_sig: dict = {}
        for i, c in enumerate(circuits):
            by_sig.setdefault(c.signature(), []).append(i)
        for members in by_sig.values():
            c0 = circuits[members[0]]
            idx = np.empty((len(members), sum(g.param is not None for g in c0.gates)), dtype=np.intp)
            sign = np.empty(idx.shape)
            for r, i in enumerate(members):
                col = 0
                for g in circuits[i].gates:
                    if g.param is None:
                        continue
                    if g.param not in index:
                        raise MissingSymbolError(g.param)
                    idx[r, col] = index[g.param]
                    sign[r, col] = g.sign
                    col += 1
            self.groups.append((c0, np.asarray(members), idx, sign))
        self.capacity = capacity

    def amplitudes(self, theta: np.ndarray, rows=None) -> np.ndarray:
        """Amplitudes of every circuit, or of ``rows`` only (in the order given)."""
        if rows is None:
            rows = np.arange(self.n)
        rows = np.asarray(rows, dtype=np.intp)
        where = np.full(self.n, -1, dtype=np.intp)
        where[rows] = np.arange(len(rows))
        out = None
        for c0, members, idx, sign in self.groups:
            pick = where[members] >= 0
            if not pick.any():
                continue
            amps = simulate(c0, theta[idx[pick]] * sign[pick], self.capacity)
            if out is None:
                out = np.empty((len(rows), amps.shape[1]), dtype=complex)
            out[where[members[pick]]] = amps
        return out


def random_circuit(rng: np.random.Generator, max_qubits: int = 6, max_gates: int = 30):
    """A random valid circuit over every gate kind, with fresh angles; returns ``(circuit, params)``."""
    from .circuit import Gate, ParamSymbol
    from .grammar import N

    n = int(rng.integers(1, max_qubits + 1))
    alive = list(range(n))
    gates, params = [], {}
    for k in range(int(rng.integers(1, max_gates + 1))):
        if not alive:
            break
        kinds = ["H", "RX", "RZ", "POSTSELECT0"] + (["CRZ", "CNOT"] if len(alive) > 1 else [])
        kind = kinds[rng.integers(len(kinds))]
        if kind in ("CRZ", "CNOT"):
            qubits = tuple(int(q) for q in rng.choice(alive, 2, replace=False))
        else:
            qubits = (int(alive[rng.integers(len(alive))]),)
        sym = None
        if kind in ("RX", "RZ", "CRZ"):
            sym = ParamSymbol("g", N, k)
            params[sym] = float(rng.uniform(0, 2 * np.pi))
        gates.append(Gate(kind, qubits, sym, int(rng.choice([-1, 1])) if sym else 1))
        if kind == "POSTSELECT0":
            alive.remove(qubits[0])
    return Circuit(n, tuple(gates), tuple(alive)), params


# --- dense reference path -------------------------------------------------

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_HM = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def _rx(t):
    return np.array([[np.cos(t / 2), -1j * np.sin(t / 2)], [-1j * np.sin(t / 2), np.cos(t / 2)]])


def _rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def _kron_all(ops):
    m = np.ones((1, 1), dtype=complex)
    for op in ops:
        m = np.kron(m, op)
    return m


def _embed(n, placements):
    """Full 2^n matrix with ``placements`` {position: 2x2} and identity elsewhere."""
    return _kron_all([placements.get(i, _I2) for i in range(n)])


def dense_oracle(c: Circuit, params: Mapping, capacity: int = ORACLE_CAPACITY) -> StateVector:
    """Reference simulation by explicit Kronecker-product gate matrices.

    The whole register is kept; a post-selection multiplies by the projector
    rows that keep bit 0 of that qubit and removes it from the register.
    """
    n_total = c.qubit_count
    if n_total > capacity:
        raise CapacityError(f"dense oracle limited to {capacity} qubits, circuit has {n_total}")
    register = list(range(n_total))
    psi = np.zeros(2**n_total, dtype=complex)
    psi[0] = 1.0
    for g in c.gates:
        n = len(register)
        pos = [register.index(q) for q in g.qubits]
        if g.kind == "POSTSELECT0":
            keep = [i for i in range(2**n) if not (i >> (n - 1 - pos[0])) & 1]
            proj = np.eye(2**n, dtype=complex)[keep]
            psi = proj @ psi
            register.remove(g.qubits[0])
            continue
        theta = g.sign * float(params[g.param]) if g.param is not None else None
        if g.kind == "H":
            m = _embed(n, {pos[0]: _HM})
        elif g.kind == "RX":
            m = _embed(n, {pos[0]: _rx(theta)})
        elif g.kind == "RZ":
            m = _embed(n, {pos[0]: _rz(theta)})
        elif g.kind == "CNOT":
            m = _embed(n, {pos[0]: _P0}) + _embed(n, {pos[0]: _P1, pos[1]: _X})
        elif g.kind == "CRZ":
            m = _embed(n, {pos[0]: _P0}) + _embed(n, {pos[0]: _P1, pos[1]: _rz(theta)})
        else:  # pragma: no cover
            raise CircuitError(g.kind)
        psi = m @ psi
    # reorder the surviving register to the declared outputs
    n = len(register)
    if sorted(register) != sorted(c.open_outputs):
        raise CircuitError("surviving qubits differ from open outputs")
    t = psi.reshape((2,) * n) if n else psi.reshape(())
    perm = [register.index(q) for q in c.open_outputs]
    amps = np.transpose(t, perm).reshape(-1) if n else t.reshape(1)
    return StateVector(amps, tuple(c.open_outputs))
