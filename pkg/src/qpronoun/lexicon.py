"""Word lexicon: surface form -> {part of speech: grammar type}.

File format is UTF-8 text, one ``surface<TAB>pos<TAB>type`` row per line;
blank lines and ``#`` comments are skipped.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .grammar import GrammarType, parse_type

# Default categorial type for every part of speech the template grammar uses.
# Predicate complements (predicative adjectives, gerund phrases, nominal
# predicates) are single-leg n so that the copula has three legs.
POS_TYPES = {
    "noun": "n",
    "adjective": "n/n",
    "transitive-verb": "(n\\s)/n",
    "copula": "(n\\s)/n",
    "pronoun": "n\\n",
    "determiner": "n/n",
    "predicate": "n",
}


class LexiconError(ValueError):
    pass


class OOVError(KeyError):
    """A token (or trained symbol) is missing from the vocabulary."""

    def __init__(self, token: str, context: str = ""):
        self.token = token
        msg = f"out-of-vocabulary token {token!r}"
        super().__init__(msg + (f" in {context!r}" if context else ""))

    def __str__(self):
        return self.args[0]


def normalize(token: str) -> str:
    return token.lower()


_TOKEN_RE = re.compile(r"[A-Za-z][A-Za-z'\-]*")


def tokenize(text: str) -> list[str]:
    """Split a sentence into lower-cased word tokens, dropping punctuation."""
    return [normalize(t) for t in _TOKEN_RE.findall(text)]


@dataclass
class Lexicon:
    entries: dict = field(default_factory=dict)  # surface -> {pos: GrammarType}

    def add(self, surface: str, pos: str, gtype: GrammarType | str | None = None) -> None:
        if pos not in POS_TYPES:
            raise LexiconError(f"unknown part of speech {pos!r} for {surface!r}")
        if gtype is None:
            gtype = POS_TYPES[pos]
        if isinstance(gtype, str):
            gtype = parse_type(gtype)
        key = " ".join(tokenize(surface))
        if not key:
            raise LexiconError(f"empty surface form {surface!r}")
        slot = self.entries.setdefault(key, {})
        if pos in slot and slot[pos] != gtype:
            raise LexiconError(f"{key!r} already typed {slot[pos]} as {pos}, refusing {gtype}")
        slot[pos] = gtype

    def __contains__(self, surface: str) -> bool:
        return surface in self.entries

    def __len__(self):
        return len(self.entries)

    def pos_of(self, surface: str) -> dict:
        try:
            return self.entries[surface]
        except KeyError:
            raise OOVError(surface) from None

    @property
    def max_span(self) -> int:
        return max((len(k.split()) for k in self.entries), default=1)

    def chunk(self, tokens: list[str]) -> list[str]:
        """Group tokens into lexicon items, longest match first."""
        out = []
        i = 0
        span = self.max_span
        while i < len(tokens):
            for width in range(min(span, len(tokens) - i), 0, -1):
                cand = " ".join(tokens[i : i + width])
                if cand in self.entries:
                    out.append(cand)
                    i += width
                    break
            else:
                raise OOVError(tokens[i], " ".join(tokens))
        return out

    def merged(self, other: "Lexicon") -> "Lexicon":
        lex = Lexicon()
        for src in (self, other):
            for surface, slots in src.entries.items():
                for pos, t in slots.items():
                    lex.add(surface, pos, t)
        return lex

    def to_text(self) -> str:
        rows = []
        for surface in sorted(self.entries):
            for pos in sorted(self.entries[surface]):
                rows.append(f"{surface}\t{pos}\t{self.entries[surface][pos]}")
        return "\n".join(rows) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def from_text(cls, text: str) -> "Lexicon":
        lex = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise LexiconError(f"line {lineno}: expected surface<TAB>pos<TAB>type, got {line!r}")
            try:
                lex.add(*parts)
            except ValueError as exc:
                raise LexiconError(f"line {lineno}: {exc}") from exc
        return lex

    @classmethod
    def load(cls, path) -> "Lexicon":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def bundled_lexicon() -> Lexicon:
    text = resources.files("qpronoun.resources").joinpath("lexicon.tsv").read_text(encoding="utf-8")
    return Lexicon.from_text(text)
