import numpy as np
import pytest

from qpronoun.data import Entry
from qpronoun.parser import ParseError
from qpronoun.pipeline import (
    EMPTY, AlignmentError, Prediction, combine, discourses, link_metrics, predictions_from_csv, predictions_to_csv,
    referents_from_csv, referents_to_csv, resolve,
)
from qpronoun.train import Hyperparams, ParamStore, spsa_fit

S1, S2 = "The students read the books.", "They were learning."


@pytest.fixture(scope="module")
def trained(lex):
    pair = [Entry(S1, S2, "They", "students", 1), Entry(S1, S2, "They", "books", 0)]
    store, h = spsa_fit(pair, [], Hyperparams(a=1.0, epochs=200), 0, lex)
    assert h.final_train["accuracy"] == 1.0
    return store


def test_resolve_picks_forced_referent(trained, lex):
    p = resolve(f"{S1} {S2}", trained, lex)
    assert p.referent == "students"
    assert [m for m, _ in p.scores] == ["students", "books"]
    assert p.scores[0][1] > p.scores[1][1]
    assert resolve((S1, S2), trained, lex) == p


def test_resolve_returns_argmax_of_its_scores(lex, rng):
    from qpronoun.model import candidate_circuits

    for seed in range(10):
        symbols = {s for _, c in candidate_circuits(S1, "They were attentive.", lex) for s in c.symbols}
        store = ParamStore.random(symbols, seed)
        p = resolve((S1, "They were attentive."), store, lex)
        scores = dict(p.scores)
        assert scores[p.referent] == max(scores.values())


def test_repeated_mention_resolves_to_it_and_ties_go_first(lex):
    from qpronoun.model import candidate_circuits

    s1 = "The students read the students."
    symbols = {s for _, c in candidate_circuits(s1, S2, lex) for s in c.symbols}
    p = resolve((s1, S2), ParamStore.random(symbols, 0), lex)
    assert p.referent == "students"
    assert p.scores[0][1] == p.scores[1][1]


def test_resolve_errors(lex, trained):
    with pytest.raises(ParseError):
        resolve("Students students students. They were learning.", trained, lex)
    with pytest.raises(KeyError, match="attentive"):
        resolve((S1, "They were attentive."), trained, lex)


def test_discourses_collapse_entries():
    entries = [Entry(S1, S2, "They", "students", 1), Entry(S1, S2, "They", "books", 0),
               Entry(S1, "They were old.", "They", "books", 1)]
    assert discourses(entries) == [("0", S1, S2, "students"), ("1", S1, "They were old.", "books")]


# --- combiner -------------------------------------------------------------


def preds(referents):
    return [Prediction(str(i), r) for i, r in enumerate(referents)]


def brute_force_f1(classical_ok, quantum_ok, n_gold):
    """Combined link F1 from the 2x2 agreement table, counting each cell by enumeration."""
    cells = {(c, q): 0 for c in (True, False) for q in (True, False)}
    for c, q in zip(classical_ok, quantum_ok):
        cells[(c, q)] += 1
    tp = cells[(True, True)] + cells[(True, False)] + cells[(False, True)]
    fp = cells[(False, False)]  # wrong answers are non-empty mentions here
    fn = n_gold - tp
    p, r = tp / (tp + fp), tp / (tp + fn)
    return 2 * p * r / (p + r)


def test_combined_f1_on_synthetic_case():
    n = 100
    gold = ["students"] * n
    classical_ok = [i >= 30 for i in range(n)]  # wrong on 30%
    quantum_ok = [i >= 6 for i in range(n)]  # right on 24 of those 30
    classical = preds(["students" if ok else "books" for ok in classical_ok])
    quantum = preds(["students" if ok else "books" for ok in quantum_ok])
    _, report = combine(quantum, classical, gold)
    expected = brute_force_f1(classical_ok, quantum_ok, n)
    assert abs(expected - 0.94) <= 1e-12
    assert abs(report["combined"]["f1"] - expected) <= 1e-12
    assert report["replaced"] == 30


def test_combiner_dominance(rng):
    mentions = ["students", "books", EMPTY]
    for _ in range(200):
        n = int(rng.integers(1, 30))
        gold = [mentions[int(k)] for k in rng.integers(0, 2, n)]
        classical = preds([mentions[int(k)] for k in rng.integers(0, 3, n)])
        quantum = preds([mentions[int(k)] for k in rng.integers(0, 2, n)])
        _, report = combine(quantum, classical, gold)
        assert report["combined"]["accuracy"] >= report["classical"]["accuracy"]


def test_replacing_empty_with_a_wrong_answer_can_lower_f1():
    # EMPTY costs recall only; a wrong mention also costs precision
    gold = ["students", "students"]
    _, report = combine(preds(["students", "books"]), preds(["students", EMPTY]), gold)
    assert report["combined"]["accuracy"] == report["classical"]["accuracy"]
    assert report["combined"]["f1"] < report["classical"]["f1"]


def test_combiner_extremes():
    gold = ["students", "books", "books"]
    quantum = preds(["books", "books", "students"])
    combined, report = combine(quantum, preds(gold), gold)
    assert [p.referent for p in combined] == gold and report["combined"] == report["classical"]
    combined, _ = combine(quantum, preds([EMPTY] * 3), gold)
    assert combined == quantum


def test_combiner_alignment_errors():
    with pytest.raises(AlignmentError):
        combine(preds(["a", "b"]), preds(["a"]), ["a"])
    with pytest.raises(AlignmentError):
        combine([Prediction("0", "a"), Prediction("0", "b")], preds(["a", "b"]), ["a", "b"])


def test_link_metrics_empty_handling():
    m = link_metrics(["a", EMPTY, "b"], ["a", "a", "a"])
    assert (m["precision"], m["recall"]) == (0.5, 1 / 3)


# --- files ----------------------------------------------------------------


def test_prediction_csv_roundtrip():
    ps = [Prediction("0", "students", (("students", 0.75), ("books", 0.25))), Prediction("1", "storm", (("storm", 0.5),))]
    text = predictions_to_csv(ps)
    assert text.splitlines()[0] == "id,predicted_referent,score_candidate_1,score_candidate_2"
    assert predictions_from_csv(text) == ps


def test_referent_csv_roundtrip():
    ps = [Prediction("0", "students"), Prediction("1", EMPTY)]
    assert referents_from_csv(referents_to_csv(ps)) == ps


@pytest.mark.parametrize("text", ["x,y\n", "id,referent\n0\n", "id,referent\n,books\n"])
def test_referent_csv_rejects(text):
    with pytest.raises(ValueError):
        referents_from_csv(text)


def test_prediction_csv_rejects_bad_score():
    with pytest.raises(ValueError, match="line 2"):
        predictions_from_csv("id,predicted_referent,score_candidate_1\n0,a,a=oops\n")
