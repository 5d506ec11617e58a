"""Dataset rows, the template expander, balanced sampling, splits and TSV I/O."""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .lexicon import Lexicon, tokenize

HEADER = ("s1", "s2", "pronoun", "noun", "label")
VERB_KINDS = ("verb", "phrasal verb", "verb phrase")
ADJECTIVE = "adjective"
PREDICATE_KINDS = ("predicate adjective", "gerund phrase")
SLOT_KINDS = VERB_KINDS + (ADJECTIVE,) + PREDICATE_KINDS
PAIR_KEYS = ("noun1", "noun2", "pronoun", "copula", "determiner")
ANY = "*"

# (adjective on noun1, adjective on noun2, referent supported by the predicate)
PATTERNS = tuple(
    (adj1, adj2, ref)
    for adj1, adj2 in ((False, False), (True, False), (False, True), (True, True))
    for ref in ("noun1", "noun2")
)


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class Entry:
    s1: str
    s2: str
    pronoun: str
    noun: str
    label: int

    def validate(self) -> "Entry":
        if self.label not in (0, 1):
            raise DataError(f"label must be 0 or 1, got {self.label!r}")
        if self.pronoun.lower() not in tokenize(self.s2):
            raise DataError(f"pronoun {self.pronoun!r} not in {self.s2!r}")
        if self.noun.lower() not in tokenize(self.s1):
            raise DataError(f"noun {self.noun!r} not in {self.s1!r}")
        return self

    @property
    def pair(self) -> tuple:
        return (" ".join(tokenize(self.s1)), " ".join(tokenize(self.s2)))


SAMPLE_ROWS = (
    Entry("The students researched the books.", "They were seeking new insights.", "They", "students", 1),
    Entry("The massive storm cancelled the flight.", "It was full of passengers.", "It", "storm", 0),
    Entry("The precise sniper eliminated the ruthless terrorist.", "He was a vicious dealer.", "He", "terrorist", 1),
    Entry("The exhausted sailors threw themselves off the boats.", "They were in poor condition.", "They", "sailors", 0),
)


# --- template specs -------------------------------------------------------


@dataclass
class TemplateSpec:
    """Base sentence pair plus slot fillers, each tagged with the noun it supports."""

    noun1: str
    noun2: str
    pronoun: str
    copula: str
    determiner: str = "the"
    slots: dict = field(default_factory=dict)  # kind -> [(filler, referent)]

    @property
    def name(self) -> str:
        return f"{self.noun1}-{self.noun2}"

    def fillers(self, kinds, referent: str | None = None) -> list[str]:
        out = []
        for kind in kinds:
            out += [f for f, r in self.slots.get(kind, ()) if referent is None or r == referent]
        return out

    def validate(self) -> "TemplateSpec":
        nouns = (self.noun1, self.noun2)
        if self.noun1 == self.noun2:
            raise DataError("the two referent nouns must differ")
        for kind, rows in self.slots.items():
            if kind not in SLOT_KINDS:
                raise DataError(f"unknown slot kind [{kind}]")
            if not rows:
                raise DataError(f"slot [{kind}] is empty")
            for filler, ref in rows:
                allowed = (ANY,) if kind in VERB_KINDS else nouns
                if ref not in allowed:
                    raise DataError(f"[{kind}] filler {filler!r} supports {ref!r}, expected one of {allowed}")
        if not self.fillers(VERB_KINDS):
            raise DataError(f"{self.name}: no verb fillers")
        for noun in nouns:
            if not self.fillers((ADJECTIVE,), noun):
                raise DataError(f"{self.name}: no adjective for {noun!r}")
            if not self.fillers(PREDICATE_KINDS, noun):
                raise DataError(f"{self.name}: no predicate supporting {noun!r}")
        return self

    def to_text(self) -> str:
        lines = ["[pair]"] + [f"{k}\t{getattr(self, k)}" for k in PAIR_KEYS]
        for kind in SLOT_KINDS:
            if kind in self.slots:
                lines += ["", f"[{kind}]"] + [f"{f}\t{r}" for f, r in self.slots[kind]]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TemplateSpec":
        section = None
        pair: dict = {}
        slots: dict = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if section != "pair":
                    if section not in SLOT_KINDS:
                        raise DataError(f"line {n}: unknown section [{section}]")
                    slots.setdefault(section, [])
                continue
            parts = [p.strip() for p in raw.split("\t")]
            if section is None or len(parts) != 2 or not all(parts):
                raise DataError(f"line {n}: expected 'key<TAB>value' inside a section")
            if section == "pair":
                if parts[0] not in PAIR_KEYS:
                    raise DataError(f"line {n}: unknown pair key {parts[0]!r}")
                pair[parts[0]] = parts[1].lower()
            else:
                slots[section].append((parts[0].lower(), parts[1].lower()))
        missing = [k for k in PAIR_KEYS if k not in pair and k != "determiner"]
        if missing:
            raise DataError(f"[pair] section lacks {missing}")
        return cls(slots=slots, **pair).validate()

    @classmethod
    def load(cls, path) -> "TemplateSpec":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def lexicon(self) -> Lexicon:
        lex = Lexicon()
        lex.add(self.determiner, "determiner")
        lex.add(self.pronoun, "pronoun")
        lex.add(self.copula, "copula")
        for noun in (self.noun1, self.noun2):
            lex.add(noun, "noun")
        for f in self.fillers(VERB_KINDS):
            lex.add(f, "transitive-verb")
        for f in self.fillers((ADJECTIVE,)):
            lex.add(f, "adjective")
        for f in self.fillers(PREDICATE_KINDS):
            lex.add(f, "predicate")
        return lex


def _sentence(words) -> str:
    text = " ".join(w for w in words if w)
    return text[0].upper() + text[1:] + "."


def expand(spec: TemplateSpec) -> list[Entry]:
    """All fillings of the eight structural patterns, two entries (one per candidate) each."""
    spec.validate()
    nouns = {"noun1": spec.noun1, "noun2": spec.noun2}
    verbs = spec.fillers(VERB_KINDS)
    det = spec.determiner
    out = []
    for adj1, adj2, ref in PATTERNS:
        adjs1 = spec.fillers((ADJECTIVE,), spec.noun1) if adj1 else [None]
        adjs2 = spec.fillers((ADJECTIVE,), spec.noun2) if adj2 else [None]
        preds = spec.fillers(PREDICATE_KINDS, nouns[ref])
        for verb, a1, a2, pred in itertools.product(verbs, adjs1, adjs2, preds):
            s1 = _sentence([det, a1, spec.noun1, verb, det, a2, spec.noun2])
            s2 = _sentence([spec.pronoun, spec.copula, pred])
            for key in ("noun1", "noun2"):
                out.append(Entry(s1, s2, spec.pronoun.capitalize(), nouns[key], int(key == ref)))
    return out


def sample_balanced(entries, n: int, seed: int, odd_extra: int = 1) -> list[Entry]:
    """``n`` entries with label counts differing by at most one, in their original order.

    For odd ``n`` the spare entry carries label ``odd_extra``.
    """
    entries = list(entries)
    pos = [i for i, e in enumerate(entries) if e.label == 1]
    neg = [i for i, e in enumerate(entries) if e.label == 0]
    n_pos = n - n // 2 if odd_extra == 1 else n // 2
    n_neg = n - n_pos
    if n < 0 or n_pos > len(pos) or n_neg > len(neg):
        if n == len(entries) and abs(len(pos) - len(neg)) <= 1:
            return entries
        raise DataError(f"cannot draw {n} balanced entries from {len(pos)} positive / {len(neg)} negative")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(pos, n_pos, replace=False).tolist() + rng.choice(neg, n_neg, replace=False).tolist()
    return [entries[i] for i in sorted(chosen)]


@dataclass
class Split:
    train: list
    val: list
    test: list
    vocabulary_overlap: float


def vocabulary(entries) -> set:
    return {t for e in entries for t in tokenize(e.s1) + tokenize(e.s2)}


def vocabulary_overlap(train, test) -> float:
    """Share of the test vocabulary that also occurs in training."""
    test_vocab = vocabulary(test)
    return len(test_vocab & vocabulary(train)) / len(test_vocab) if test_vocab else 1.0


def split(entries, fractions=(0.6, 0.2, 0.2), seed: int = 0) -> Split:
    """Seeded train/val/test split that keeps every sentence pair on one side."""
    if len(fractions) != 3 or abs(sum(fractions) - 1.0) > 1e-9 or min(fractions) < 0:
        raise DataError(f"fractions must be three non-negative numbers summing to 1, got {fractions}")
    entries = list(entries)
    groups: dict = {}
    for e in entries:
        groups.setdefault(e.pair, []).append(e)
    keys = list(groups)
    order = np.random.default_rng(seed).permutation(len(keys))
    n = len(entries)
    targets = [round(f * n) for f in fractions[1:]]
    targets = [n - sum(targets)] + targets
    parts: list = [[], [], []]
    for k in order:
        group = groups[keys[k]]
        deficits = [t - len(p) for t, p in zip(targets, parts)]
        parts[int(np.argmax(deficits))].extend(group)
    return Split(*parts, vocabulary_overlap(parts[0], parts[2]))


# --- files ----------------------------------------------------------------


def save(path, entries) -> None:
    lines = ["\t".join(HEADER)]
    for e in entries:
        fields_ = (e.s1, e.s2, e.pronoun, e.noun, str(e.label))
        if any("\t" in f or "\n" in f for f in fields_):
            raise DataError(f"field contains a tab or newline: {e}")
        lines.append("\t".join(fields_))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def from_text(text: str) -> list[Entry]:
    lines = text.splitlines()
    if not lines or tuple(lines[0].split("\t")) != HEADER:
        raise DataError(f"line 1: header must be {' '.join(HEADER)}")
    out = []
    for n, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != len(HEADER):
            raise DataError(f"line {n}: expected {len(HEADER)} fields, got {len(parts)}")
        if not all(p.strip() for p in parts):
            raise DataError(f"line {n}: empty field")
        if parts[4] not in ("0", "1"):
            raise DataError(f"line {n}: label must be 0 or 1, got {parts[4]!r}")
        try:
            out.append(Entry(*parts[:4], int(parts[4])).validate())
        except DataError as exc:
            raise DataError(f"line {n}: {exc}") from None
    return out


def load(path) -> list[Entry]:
    return from_text(Path(path).read_text(encoding="utf-8"))


def digest(entries) -> str:
    h = hashlib.sha256()
    for e in entries:
        h.update("\t".join((e.s1, e.s2, e.pronoun, e.noun, str(e.label))).encode() + b"\n")
    return h.hexdigest()


# --- bundled resources ----------------------------------------------------

BUNDLED_SPECS = ("students_books.spec", "storm_flight.spec", "sailors_boats.spec")
BUNDLED_SIZE = 400
BUNDLED_SEED = 0

# Sample rows whose words no template covers
_EXTRA_WORDS = (
    ("precise", "adjective"), ("ruthless", "adjective"), ("sniper", "noun"), ("terrorist", "noun"),
    ("eliminated", "transitive-verb"), ("he", "pronoun"), ("a vicious dealer", "predicate"),
)


def _resource(name: str) -> str:
    return resources.files("qpronoun.resources").joinpath(name).read_text(encoding="utf-8")


def bundled_specs() -> list[TemplateSpec]:
    return [TemplateSpec.from_text(_resource(name)) for name in BUNDLED_SPECS]


def build_lexicon(specs) -> Lexicon:
    lex = Lexicon()
    for spec in specs:
        lex = lex.merged(spec.lexicon())
    for word, pos in _EXTRA_WORDS:
        lex.add(word, pos)
    return lex


def generate(specs, n: int, seed: int) -> list[Entry]:
    """Balanced sample of ``n`` entries spread as evenly as possible over ``specs``."""
    share = [n // len(specs) + (i < n % len(specs)) for i in range(len(specs))]
    out = []
    for i, (spec, k) in enumerate(zip(specs, share)):
        positives = sum(e.label for e in out)
        extra = 1 if positives <= len(out) - positives else 0
        out += sample_balanced(expand(spec), k, seed + i, extra)
    return out


def bundled_dataset() -> list[Entry]:
    return from_text(_resource("dataset.tsv"))
