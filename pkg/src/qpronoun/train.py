"""Variational coreference classifier: Born readout, BCE loss and SPSA training."""
from __future__ import annotations

import csv
import math
import zlib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .circuit import ParamSymbol
from .grammar import parse_type
from .lexicon import Lexicon, OOVError
from .model import CircuitConfig, entry_circuit
from .sim import BatchPlan, StateVector

EPSILON = 1e-9
OOV_POLICIES = ("strict", "random-init", "unk-token")
UNK = "<unk>"


class TrainingError(RuntimeError):
    pass


# --- readout --------------------------------------------------------------


def born(sv, epsilon: float = EPSILON) -> np.ndarray:
    """Smoothed, normalized Born distribution of a one-qubit output."""
    amps = sv.amplitudes if isinstance(sv, StateVector) else np.asarray(sv)
    if amps.shape != (2,):
        raise ValueError(f"expected 2 amplitudes, got shape {amps.shape}")
    l = np.abs(amps) ** 2 + epsilon
    return l / l.sum()


def born_batch(amps: np.ndarray, epsilon: float = EPSILON) -> np.ndarray:
    l = np.abs(amps) ** 2 + epsilon
    return l / l.sum(axis=1, keepdims=True)


def predict_label(dist) -> np.ndarray:
    """``[1, 0]`` (coreferent) when ``dist[0] >= 0.5``, else ``[0, 1]``."""
    return np.array([1, 0]) if dist[0] >= 0.5 else np.array([0, 1])


def bce(dist, gold) -> float:
    return float(-np.sum(np.asarray(gold) * np.log(np.asarray(dist))))


def one_hot(label: int) -> np.ndarray:
    # label 1 (coreferent) is the first component
    return np.array([1, 0]) if label == 1 else np.array([0, 1])


def binary_metrics(pred, gold) -> dict:
    """Accuracy, precision, recall and F1 with label 1 as the positive class."""
    pred = np.asarray(pred, dtype=int)
    gold = np.asarray(gold, dtype=int)
    if pred.shape != gold.shape:
        raise ValueError("prediction and gold lengths differ")
    tp = int(np.sum((pred == 1) & (gold == 1)))
    fp = int(np.sum((pred == 1) & (gold == 0)))
    fn = int(np.sum((pred == 0) & (gold == 1)))
    n = len(gold)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = float(np.mean(pred == gold)) if n else 0.0
    return {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1}


# --- parameters -----------------------------------------------------------


class ParamStore(dict):
    """ParamSymbol -> angle in radians, plus the seed that initialised it."""

    def __init__(self, values: Mapping | None = None, seed: int | None = None):
        super().__init__(values or {})
        self.seed = seed

    @classmethod
    def random(cls, symbols, seed: int) -> "ParamStore":
        symbols = sorted(set(symbols))
        rng = np.random.default_rng(seed)
        return cls(zip(symbols, rng.uniform(0.0, 2 * np.pi, len(symbols)).tolist()), seed)

    def vector(self, symbols) -> np.ndarray:
        return np.array([self[s] for s in symbols], dtype=float)

    def to_text(self) -> str:
        rows = sorted((s.word, str(s.gtype), s.index, v) for s, v in self.items())
        return "".join(f"{w}\t{t}\t{i}\t{v!r}\n" for w, t, i, v in rows)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def from_text(cls, text: str, seed: int | None = None) -> "ParamStore":
        store = cls(seed=seed)
        for n, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"line {n}: expected 4 tab-separated fields")
            word, gtype, index, angle = parts
            value = float(angle)
            if not math.isfinite(value):
                raise ValueError(f"line {n}: angle is not finite")
            store[ParamSymbol(word, parse_type(gtype), int(index))] = value
        return store

    @classmethod
    def load(cls, path, seed: int | None = None) -> "ParamStore":
        return cls.from_text(Path(path).read_text(encoding="utf-8"), seed)


def resolve_symbols(symbols, store: Mapping, policy: str = "strict", seed: int = 0) -> dict:
    """Angles for ``symbols``, filling gaps in ``store`` according to ``policy``."""
    if policy not in OOV_POLICIES:
        raise ValueError(f"unknown OOV policy {policy!r}")
    out = {}
    for s in symbols:
        if s in store:
            out[s] = store[s]
        elif policy == "strict":
            raise OOVError(s.word, "trained parameters")
        elif policy == "random-init":
            # seeded per symbol so the fill does not depend on evaluation order
            rng = np.random.default_rng([seed, zlib.crc32(str(s).encode())])
            out[s] = float(rng.uniform(0.0, 2 * np.pi))
        else:
            out[s] = store.get(ParamSymbol(UNK, s.gtype, s.index), 0.0)
    return out


# --- training -------------------------------------------------------------


@dataclass(frozen=True)
class Hyperparams:
    a: float = 0.1
    c: float = 0.06
    A: float = 20.0
    alpha: float = 0.602
    gamma: float = 0.101
    epochs: int = 2000
    epsilon: float = EPSILON
    batch_size: int | None = None  # None: one full-batch step per epoch; else one step per mini-batch

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None and not v > 0:
                raise ValueError(f"{f.name} must be positive, got {v}")

    def asdict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class RunHistory:
    seed: int
    loss: list = field(default_factory=list)
    accuracy: list = field(default_factory=list)
    final_train: dict = field(default_factory=dict)
    final_val: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        write_curve(path, self.loss, self.accuracy)


def write_curve(path, loss, accuracy) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "loss", "accuracy"])
        for t, (l, a) in enumerate(zip(loss, accuracy)):
            w.writerow([t, repr(float(l)), repr(float(a))])


class Objective:
    """Mean BCE and accuracy of a fixed set of circuits as a function of a flat angle vector."""

    def __init__(self, circuits, labels, epsilon: float = EPSILON, symbols=None):
        if not circuits:
            raise ValueError("no training circuits")
        self.symbols = sorted({s for c in circuits for s in c.symbols}) if symbols is None else list(symbols)
        self.plan = BatchPlan(circuits, self.symbols)
        self.labels = np.asarray(labels, dtype=int)
        self.gold = np.stack([one_hot(y) for y in self.labels])
        self.epsilon = epsilon

    def distributions(self, theta) -> np.ndarray:
        return born_batch(self.plan.amplitudes(theta), self.epsilon)

    def losses(self, theta, rows=None) -> np.ndarray:
        dist = born_batch(self.plan.amplitudes(theta, rows), self.epsilon)
        gold = self.gold if rows is None else self.gold[rows]
        return -np.sum(gold * np.log(dist), axis=1)

    def __call__(self, theta, rows=None) -> float:
        return float(np.mean(self.losses(theta, rows)))

    def accuracy(self, theta) -> float:
        pred = (self.distributions(theta)[:, 0] >= 0.5).astype(int)
        return float(np.mean(pred == self.labels))

    def loss_and_accuracy(self, theta) -> tuple[float, float]:
        dist = self.distributions(theta)
        loss = float(np.mean(-np.sum(self.gold * np.log(dist), axis=1)))
        pred = (dist[:, 0] >= 0.5).astype(int)
        return loss, float(np.mean(pred == self.labels))


def spsa_step(loss, theta: np.ndarray, t: int, hp: Hyperparams, rng: np.random.Generator,
              rows=None) -> np.ndarray:
    """One SPSA update with the epoch-``t`` gains (``t`` is 0-based).

    ``loss(theta, rows)`` is the objective; ``rows`` selects a mini-batch or is None.
    """
    a_t = hp.a / (hp.A + t + 1) ** hp.alpha
    c_t = hp.c / (t + 1) ** hp.gamma
    delta = rng.integers(0, 2, theta.size) * 2.0 - 1.0
    up, down = loss(theta + c_t * delta, rows), loss(theta - c_t * delta, rows)
    if not (math.isfinite(up) and math.isfinite(down)):
        raise TrainingError(f"non-finite perturbed loss at epoch {t}")
    ghat = (up - down) / (2 * c_t) / delta
    return theta - a_t * ghat


def epoch_batches(n: int, batch_size: int | None, rng: np.random.Generator) -> list:
    """Row subsets for one epoch: the full set, or a shuffled partition into mini-batches."""
    if batch_size is None or batch_size >= n:
        return [None]
    order = rng.permutation(n)
    return [order[i : i + batch_size] for i in range(0, n, batch_size)]


def spsa_fit(
    train,
    val,
    hp: Hyperparams,
    seed: int,
    lex: Lexicon,
    config: CircuitConfig = CircuitConfig(),
    on_epoch: Callable | None = None,
) -> tuple[ParamStore, RunHistory]:
    """Train from a uniform random start; validation is scored only after the last update."""
    circuits = [entry_circuit(e, lex, config) for e in train]
    obj = Objective(circuits, [e.label for e in train], hp.epsilon)
    store = ParamStore.random(obj.symbols, seed)
    theta = store.vector(obj.symbols)
    rng = np.random.default_rng([seed, 1])
    history = RunHistory(seed)
    n = len(train)

    for t in range(hp.epochs):
        loss, acc = obj.loss_and_accuracy(theta)
        if not math.isfinite(loss):
            raise TrainingError(f"seed {seed}: non-finite loss at epoch {t}")
        history.loss.append(loss)
        history.accuracy.append(acc)
        try:
            for rows in epoch_batches(n, hp.batch_size, rng):
                theta = spsa_step(obj, theta, t, hp, rng, rows)
        except TrainingError as exc:
            raise TrainingError(f"seed {seed}: {exc}") from None
        if on_epoch is not None:
            on_epoch(t, theta, loss)

    final = ParamStore(dict(zip(obj.symbols, theta.tolist())), seed)
    loss, acc = obj.loss_and_accuracy(theta)
    history.final_train = {"loss": loss, "accuracy": acc}
    if val:
        history.final_val = evaluate(final, val, lex, config=config, policy="random-init")
    return final, history


def predict_distributions(params: Mapping, data, lex: Lexicon, config: CircuitConfig = CircuitConfig(),
                          policy: str = "strict", epsilon: float = EPSILON) -> np.ndarray:
    circuits = [entry_circuit(e, lex, config) for e in data]
    symbols = sorted({s for c in circuits for s in c.symbols})
    seed = getattr(params, "seed", None) or 0
    angles = resolve_symbols(symbols, params, policy, seed)
    plan = BatchPlan(circuits, symbols)
    return born_batch(plan.amplitudes(np.array([angles[s] for s in symbols])), epsilon)


def evaluate(params: Mapping, data, lex: Lexicon, config: CircuitConfig = CircuitConfig(),
             policy: str = "strict") -> dict:
    """Accuracy, precision, recall and F1 (coreferent = positive) of ``params`` on ``data``."""
    if not data:
        return binary_metrics([], [])
    dist = predict_distributions(params, data, lex, config, policy)
    pred = (dist[:, 0] >= 0.5).astype(int)
    return binary_metrics(pred, [e.label for e in data])


@dataclass
class Aggregate:
    mean_loss: np.ndarray
    min_loss: np.ndarray
    max_loss: np.ndarray
    mean_accuracy: np.ndarray
    min_accuracy: np.ndarray
    max_accuracy: np.ndarray

    @classmethod
    def of(cls, histories) -> "Aggregate":
        loss = np.array([h.loss for h in histories])
        acc = np.array([h.accuracy for h in histories])
        return cls(loss.mean(0), loss.min(0), loss.max(0), acc.mean(0), acc.min(0), acc.max(0))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "loss", "accuracy", "loss_min", "loss_max", "accuracy_min", "accuracy_max"])
            for t in range(len(self.mean_loss)):
                w.writerow([t] + [repr(float(x[t])) for x in (
                    self.mean_loss, self.mean_accuracy, self.min_loss, self.max_loss,
                    self.min_accuracy, self.max_accuracy)])


def multi_seed(train, val, hp: Hyperparams, lex: Lexicon, runs: int = 15, base_seed: int = 0,
               config: CircuitConfig = CircuitConfig()):
    """Independent runs with seeds ``base_seed .. base_seed + runs - 1``."""
    if runs < 1:
        raise ValueError("runs must be at least 1")
    results = []
    for seed in range(base_seed, base_seed + runs):
        try:
            results.append(spsa_fit(train, val, hp, seed, lex, config))
        except Exception as exc:
            raise TrainingError(f"run with seed {seed} failed: {exc}") from exc
    return results, Aggregate.of([h for _, h in results])
