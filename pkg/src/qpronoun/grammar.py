"""Categorial types for words: atoms n/s, slashes, product and bounded copying.

Types unfold into a flat sequence of *legs*, each an atom paired with an
adjoint winding ``z`` (0 for a plain output, -1 for a left adjoint produced by
``A/B``, +1 for a right adjoint produced by ``B\\A``). Two neighbouring legs
``(x, z)`` and ``(x, z + 1)`` contract with a cup.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

ATOMS = ("n", "s")


class GrammarTypeError(ValueError):
    """Raised for ill-formed types or unparsable type strings."""


@dataclass(frozen=True)
class Atomic:
    name: str

    def __post_init__(self):
        if self.name not in ATOMS:
            raise GrammarTypeError(f"unknown atomic type {self.name!r}, expected one of {ATOMS}")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Over:
    """``left/right``: seeks ``right`` on its right, yields ``left``."""

    left: "GrammarType"
    right: "GrammarType"

    def __str__(self):
        return f"{_wrap(self.left)}/{_wrap(self.right)}"


@dataclass(frozen=True)
class Under:
    """``left\\right``: seeks ``left`` on its left, yields ``right``."""

    left: "GrammarType"
    right: "GrammarType"

    def __str__(self):
        return f"{_wrap(self.left)}\\{_wrap(self.right)}"


@dataclass(frozen=True)
class Prod:
    left: "GrammarType"
    right: "GrammarType"

    def __str__(self):
        return f"{_wrap(self.left)}*{_wrap(self.right)}"


@dataclass(frozen=True)
class Bang:
    """Copiable type with copy bound ``bound``; compiled at a single Fock layer."""

    inner: "GrammarType"
    bound: int = 2

    def __post_init__(self):
        if not isinstance(self.bound, int) or self.bound < 1:
            raise GrammarTypeError(f"copy bound must be a positive integer, got {self.bound!r}")
        if _contains_bang(self.inner):
            raise GrammarTypeError("nested ! is not allowed")

    def __str__(self):
        return f"!{self.bound}{_wrap(self.inner)}"


GrammarType = Union[Atomic, Over, Under, Prod, Bang]

N = Atomic("n")
S = Atomic("s")


def _contains_bang(t: GrammarType) -> bool:
    if isinstance(t, Bang):
        return True
    if isinstance(t, Atomic):
        return False
    return _contains_bang(t.left) or _contains_bang(t.right)


def _wrap(t: GrammarType) -> str:
    if isinstance(t, (Atomic, Bang)):
        return str(t)
    return f"({t})"


Leg = tuple  # (atom name, adjoint winding)


def _left_adjoint(legs):
    return [(x, z - 1) for x, z in reversed(legs)]


def _right_adjoint(legs):
    return [(x, z + 1) for x, z in reversed(legs)]


def legs(t: GrammarType, layer: int | None = None) -> list[Leg]:
    """Unfold ``t`` into its ordered legs.

    A ``Bang`` is projected to Fock layer ``layer`` (default: its bound), giving
    ``layer`` side-by-side copies of the inner legs.
    """
    if isinstance(t, Atomic):
        return [(t.name, 0)]
    if isinstance(t, Over):
        return legs(t.left, layer) + _left_adjoint(legs(t.right, layer))
    if isinstance(t, Under):
        return _right_adjoint(legs(t.left, layer)) + legs(t.right, layer)
    if isinstance(t, Prod):
        return legs(t.left, layer) + legs(t.right, layer)
    if isinstance(t, Bang):
        k = t.bound if layer is None else layer
        if not 0 <= k <= t.bound:
            raise GrammarTypeError(f"layer {k} outside 0..{t.bound}")
        return legs(t.inner) * k
    raise GrammarTypeError(f"not a grammar type: {t!r}")


def validate(t) -> GrammarType:
    if isinstance(t, Atomic):
        return t
    if isinstance(t, Bang):
        validate(t.inner)
        return t
    if isinstance(t, (Over, Under, Prod)):
        validate(t.left)
        validate(t.right)
        return t
    raise GrammarTypeError(f"not a grammar type: {t!r}")


def parse_type(text: str) -> GrammarType:
    """Parse strings such as ``(n\\s)/n``, ``n/n`` or ``!2n``.

    Binary connectives associate to the left; use parentheses otherwise.
    """
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        tok = peek()
        if tok is None:
            raise GrammarTypeError(f"unexpected end of type {text!r}")
        pos += 1
        return tok

    def unit():
        tok = take()
        if tok == "(":
            t = expr()
            if take() != ")":
                raise GrammarTypeError(f"missing ')' in {text!r}")
            return t
        if tok.startswith("!"):
            bound = int(tok[1:]) if len(tok) > 1 else 2
            return Bang(unit(), bound)
        if tok in ATOMS:
            return Atomic(tok)
        raise GrammarTypeError(f"unexpected token {tok!r} in {text!r}")

    def expr():
        t = unit()
        while peek() in ("/", "\\", "*"):
            op = take()
            rhs = unit()
            t = {"/": Over, "\\": Under, "*": Prod}[op](t, rhs)
        return t

    result = expr()
    if pos != len(tokens):
        raise GrammarTypeError(f"trailing input in type {text!r}")
    return result


def _tokenize(text: str) -> list[str]:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == "!":
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(text[i:j])
            i = j
        elif ch in "()/\\*":
            out.append(ch)
            i += 1
        elif ch.isalpha():
            out.append(ch)
            i += 1
        else:
            raise GrammarTypeError(f"bad character {ch!r} in type {text!r}")
    return out
