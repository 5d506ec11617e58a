import itertools
from collections import Counter

import pytest

from qpronoun import data
from qpronoun.data import (
    PATTERNS, SAMPLE_ROWS, DataError, Entry, TemplateSpec, bundled_dataset, bundled_specs, expand, sample_balanced, split,
)
from qpronoun.model import entry_diagram
from qpronoun.parser import parse_discourse

SINGLETON_STORM = """\
[pair]
noun1\tstorm
noun2\tflight
pronoun\tit
copula\twas

[verb]
cancelled\t*

[adjective]
massive\tstorm
early\tflight

[predicate adjective]
destructive\tstorm
delayed\tflight
"""


@pytest.fixture
def storm():
    return TemplateSpec.from_text(SINGLETON_STORM)


def test_singleton_spec_gives_sixteen(storm):
    entries = expand(storm)
    assert len(entries) == 16
    s1s = {e.s1 for e in entries}
    assert s1s == {
        "The storm cancelled the flight.", "The massive storm cancelled the flight.",
        "The storm cancelled the early flight.", "The massive storm cancelled the early flight.",
    }
    for a, b in zip(entries[::2], entries[1::2]):
        assert (a.s1, a.s2) == (b.s1, b.s2) and a.label + b.label == 1


def test_every_pattern_is_covered(storm):
    entries = expand(storm)
    seen = set()
    for e in entries:
        if e.label:
            adj1 = "massive" in e.s1
            adj2 = "early" in e.s1
            seen.add((adj1, adj2, "noun1" if e.noun == "storm" else "noun2"))
    assert seen == set(PATTERNS) and len(PATTERNS) == 8


def test_predicate_referent_sets_label(storm):
    for e in expand(storm):
        supported = "flight" if "delayed" in e.s2 else "storm"
        assert e.label == int(e.noun == supported)
        assert e.pronoun == "It"


def test_expand_counts_and_injective():
    for spec in bundled_specs():
        entries = expand(spec)
        verbs = len(spec.fillers(data.VERB_KINDS))
        adj = [len(spec.fillers((data.ADJECTIVE,), n)) for n in (spec.noun1, spec.noun2)]
        preds = sum(len(spec.fillers(data.PREDICATE_KINDS, n)) for n in (spec.noun1, spec.noun2))
        assert len(entries) == 2 * verbs * (1 + adj[0]) * (1 + adj[1]) * preds
        assert len({(e.s1, e.s2, e.noun) for e in entries}) == len(entries)
        assert expand(spec) == entries


def test_empty_adjective_lexicon_rejected():
    text = SINGLETON_STORM.replace("massive\tstorm\nearly\tflight\n", "")
    with pytest.raises(DataError):
        TemplateSpec.from_text(text)
    with pytest.raises(DataError, match="adjective"):
        TemplateSpec.from_text(SINGLETON_STORM.replace("early\tflight\n", ""))


@pytest.mark.parametrize(
    "bad, message",
    [
        (SINGLETON_STORM.replace("[verb]", "[adverb]"), "unknown section"),
        (SINGLETON_STORM.replace("destructive\tstorm", "destructive\tplane"), "supports"),
        (SINGLETON_STORM.replace("pronoun\tit\n", ""), "lacks"),
        (SINGLETON_STORM.replace("cancelled\t*", "cancelled"), "line 8"),
    ],
)
def test_spec_errors(bad, message):
    with pytest.raises(DataError, match=message):
        TemplateSpec.from_text(bad)


def test_spec_text_roundtrip(storm):
    assert TemplateSpec.from_text(storm.to_text()) == storm


def test_expanded_entries_parse(lex):
    for spec in bundled_specs():
        for e in expand(spec)[::97]:
            entry_diagram(e, lex)


def test_sample_balanced():
    pool = expand(bundled_specs()[0])
    s = sample_balanced(pool, 100, seed=3)
    assert Counter(e.label for e in s) == {0: 50, 1: 50}
    assert s == sample_balanced(pool, 100, seed=3)
    assert s != sample_balanced(pool, 100, seed=4)
    assert sample_balanced(pool[:10], 10, seed=0) == pool[:10]
    odd = sample_balanced(pool, 11, seed=0)
    assert abs(sum(e.label for e in odd) * 2 - 11) == 1
    with pytest.raises(DataError):
        sample_balanced(pool[:10], 12, seed=0)


def test_split_fractions_and_disjointness():
    pool = sample_balanced(expand(bundled_specs()[1]), 100, seed=0)
    sp = split(pool, seed=1)
    assert (len(sp.train), len(sp.val), len(sp.test)) == (60, 20, 20)
    pairs = [{e.pair for e in part} for part in (sp.train, sp.val, sp.test)]
    assert all(not (a & b) for a, b in itertools.combinations(pairs, 2))
    assert split(pool, seed=1) == sp


def test_split_keeps_duplicate_pairs_together():
    e = Entry("The storm cancelled the flight.", "It was late.", "It", "storm", 0)
    f = Entry(e.s1, e.s2, "It", "flight", 1)
    rest = [Entry(e.s1, f"It was {w}.", "It", "flight", 1) for w in ("full", "cheap", "nonstop")]
    sp = split([e, f] + rest, seed=0)
    sides = [part for part in (sp.train, sp.val, sp.test) if e in part]
    assert len(sides) == 1 and f in sides[0]


def test_split_rejects_bad_fractions():
    with pytest.raises(DataError):
        split([], fractions=(0.5, 0.5, 0.5))


def test_save_load_roundtrip(tmp_path):
    entries = expand(bundled_specs()[2])[:50]
    data.save(tmp_path / "d.tsv", entries)
    assert data.load(tmp_path / "d.tsv") == entries


@pytest.mark.parametrize(
    "row, message",
    [
        ("A b.\tThey c.\tThey\tb\t2", "line 2: label"),
        ("A b.\tThey c.\tThey\tb", "line 2: expected 5"),
        ("A b.\tThey c.\tIt\tb\t1", "line 2: pronoun"),
        ("A b.\tThey c.\tThey\tz\t1", "line 2: noun"),
    ],
)
def test_load_rejects_malformed_rows(tmp_path, row, message):
    path = tmp_path / "bad.tsv"
    path.write_text("s1\ts2\tpronoun\tnoun\tlabel\n" + row + "\n")
    with pytest.raises(DataError, match=message):
        data.load(path)


def test_bad_header():
    with pytest.raises(DataError, match="line 1"):
        data.from_text("a\tb\n")


def test_sample_rows(tmp_path, lex):
    data.save(tmp_path / "t.tsv", SAMPLE_ROWS)
    rows = data.load(tmp_path / "t.tsv")
    assert len(rows) == 4 and [e.label for e in rows] == [1, 0, 1, 0]
    for e in rows:
        parse_discourse(e.s1, e.s2, lex)


def test_bundled_dataset_is_regenerable():
    ds = bundled_dataset()
    assert len(ds) == data.BUNDLED_SIZE
    assert Counter(e.label for e in ds) == {0: 200, 1: 200}
    assert data.generate(bundled_specs(), data.BUNDLED_SIZE, data.BUNDLED_SEED) == ds


def test_bundled_vocabulary_overlap():
    assert split(bundled_dataset(), seed=0).vocabulary_overlap >= 0.9


def test_bundled_lexicon_matches_specs(lex):
    assert data.build_lexicon(bundled_specs()).to_text() == lex.to_text()
