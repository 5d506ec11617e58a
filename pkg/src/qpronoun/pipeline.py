"""Candidate scoring for whole discourses, and the gold-aware quantum/classical combiner.

Link metrics treat each discourse as one gold pronoun-referent link: a
prediction equal to the gold referent is a true positive, a different referent
is a false positive and a missed gold link, and ``EMPTY`` is a missed link only.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .lexicon import Lexicon
from .model import CircuitConfig, candidate_circuits
from .parser import split_discourse
from .sim import BatchPlan
from .train import EPSILON, born_batch, resolve_symbols

EMPTY = "EMPTY"


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class Prediction:
    id: str
    referent: str
    scores: tuple = ()  # ((mention, coreference probability), ...) in sentence order

    @property
    def empty(self) -> bool:
        return self.referent == EMPTY


def resolve(discourse, params: Mapping, lex: Lexicon, config: CircuitConfig = CircuitConfig(),
            policy: str = "strict", id: str = "0") -> Prediction:
    """Score every candidate mention and return the most probable one.

    ``discourse`` is either one text holding two sentences or an ``(s1, s2)`` pair.
    Ties go to the earlier mention.
    """
    s1, s2 = split_discourse(discourse) if isinstance(discourse, str) else discourse
    cands = candidate_circuits(s1, s2, lex, config)
    mentions = [m for m, _ in cands]
    circuits = [c for _, c in cands]
    symbols = sorted({s for c in circuits for s in c.symbols})
    angles = resolve_symbols(symbols, params, policy, getattr(params, "seed", None) or 0)
    amps = BatchPlan(circuits, symbols).amplitudes(np.array([angles[s] for s in symbols]))
    scores = born_batch(amps, EPSILON)[:, 0]
    best = int(np.argmax(scores))  # first maximum, i.e. the earlier mention on ties
    return Prediction(str(id), mentions[best], tuple(zip(mentions, scores.tolist())))


def discourses(entries) -> list[tuple]:
    """Collapse candidate-level entries into ``(id, s1, s2, gold referent)`` per sentence pair."""
    order: dict = {}
    for e in entries:
        key = (e.s1, e.s2)
        gold = order.setdefault(key, [None])
        if e.label == 1:
            gold[0] = e.noun.lower()
    return [(str(i), s1, s2, gold[0] or EMPTY) for i, ((s1, s2), gold) in enumerate(order.items())]


def link_metrics(predicted: list[str], gold: list[str]) -> dict:
    if len(predicted) != len(gold):
        raise AlignmentError("prediction and gold lengths differ")
    tp = sum(p == g and p != EMPTY for p, g in zip(predicted, gold))
    fp = sum(p != EMPTY and p != g for p, g in zip(predicted, gold))
    n_gold = sum(g != EMPTY for g in gold)
    fn = n_gold - tp
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = sum(p == g for p, g in zip(predicted, gold)) / len(gold) if gold else 0.0
    return {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1}


def combine(quantum: list[Prediction], classical: list[Prediction], gold: Mapping | list):
    """Keep the classical answer when it is right; otherwise fall back to the quantum one.

    ``gold`` maps entry id to referent (a list is read in the classical order).
    This consults gold labels, so it measures complementarity rather than
    being a deployable ensemble.
    """
    if not isinstance(gold, Mapping):
        gold = {p.id: g for p, g in zip(classical, gold)}
    q = {p.id: p for p in quantum}
    ids = [p.id for p in classical]
    if len(q) != len(quantum) or len(set(ids)) != len(ids):
        raise AlignmentError("duplicate prediction ids")
    if set(q) != set(ids) or set(gold) != set(ids):
        missing = sorted(set(ids) ^ set(q) | set(ids) ^ set(gold))
        raise AlignmentError(f"prediction ids do not align: {missing[:5]}")
    combined = []
    for p in classical:
        if p.empty or p.referent != gold[p.id]:
            combined.append(q[p.id])
        else:
            combined.append(p)
    golds = [gold[i] for i in ids]
    report = {
        "quantum": link_metrics([q[i].referent for i in ids], golds),
        "classical": link_metrics([p.referent for p in classical], golds),
        "combined": link_metrics([p.referent for p in combined], golds),
        "replaced": sum(a is not b for a, b in zip(combined, classical)),
        "entries": len(ids),
    }
    return combined, report


# --- files ----------------------------------------------------------------


def predictions_to_csv(preds) -> str:
    width = max((len(p.scores) for p in preds), default=0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "predicted_referent"] + [f"score_candidate_{k + 1}" for k in range(width)])
    for p in preds:
        cells = [f"{m}={s!r}" for m, s in p.scores]
        w.writerow([p.id, p.referent] + cells + [""] * (width - len(cells)))
    return buf.getvalue()


def predictions_from_csv(text: str) -> list[Prediction]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:2] != ["id", "predicted_referent"]:
        raise ValueError("line 1: expected header id,predicted_referent,...")
    out = []
    for n, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) < 2 or not row[0] or not row[1]:
            raise ValueError(f"line {n}: need an id and a referent")
        scores = []
        for cell in row[2:]:
            if not cell:
                continue
            mention, _, value = cell.rpartition("=")
            try:
                scores.append((mention, float(value)))
            except ValueError:
                raise ValueError(f"line {n}: bad score cell {cell!r}") from None
        out.append(Prediction(row[0], row[1], tuple(scores)))
    return out


def referents_from_csv(text: str) -> list[Prediction]:
    """Classical (or gold) ``id,referent`` rows; ``EMPTY`` marks a missing referent."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:2] != ["id", "referent"]:
        raise ValueError("line 1: expected header id,referent")
    out = []
    for n, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) != 2 or not row[0] or not row[1]:
            raise ValueError(f"line {n}: expected id,referent")
        out.append(Prediction(row[0], row[1].lower() if row[1] != EMPTY else EMPTY))
    return out


def referents_to_csv(preds) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "referent"])
    for p in preds:
        w.writerow([p.id, p.referent])
    return buf.getvalue()


def read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")
