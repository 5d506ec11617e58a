"""Lexicalized parser for the template grammar and discourse wiring.

Sentences follow::

    S    := SUBJ VP
    SUBJ := NP | PRON
    NP   := DET? ADJ* NOUN
    VP   := VERB NP | COP (PRED | NP)

Each word becomes a box; grammatical applications become cups between
neighbouring legs. A pronoun keeps its input leg open until
:func:`wire_discourse` routes a copy of the chosen referent into it.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .diagram import Diagram, DiagramError, Port, Wire, box_port, make_word, merge_sentences
from .grammar import Bang, N
from .lexicon import Lexicon, tokenize


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at token {position})")
        self.position = position


@dataclass(frozen=True)
class NounPhrase:
    words: tuple  # (surface, pos) pairs
    start: int

    @property
    def head(self) -> str:
        return self.words[-1][0]


@dataclass(frozen=True)
class Parse:
    subject: NounPhrase | None  # None when the subject is a pronoun
    pronoun: str | None
    verb: tuple  # (surface, pos)
    complement: NounPhrase | str  # object/nominal predicate or a predicate word


def _parse_chunks(chunks: list[str], lex: Lexicon) -> Parse:
    furthest = [0, "empty sentence"]

    def fail(pos, msg):
        if pos >= furthest[0]:
            furthest[0], furthest[1] = pos, msg
        return None

    def has(i, pos):
        return i < len(chunks) and pos in lex.pos_of(chunks[i])

    def noun_phrase(i):
        start = i
        words = []
        if has(i, "determiner"):
            words.append((chunks[i], "determiner"))
            i += 1
        end = i
        while has(end, "adjective"):
            end += 1
        # longest adjective run that still leaves a noun head
        for h in range(end, i - 1, -1):
            if has(h, "noun"):
                words.extend((chunks[j], "adjective") for j in range(i, h))
                words.append((chunks[h], "noun"))
                return NounPhrase(tuple(words), start), h + 1
        return fail(end, "expected a noun")

    def verb_phrase(i):
        if has(i, "transitive-verb"):
            obj = noun_phrase(i + 1)
            if obj is not None:
                return (chunks[i], "transitive-verb"), obj[0], obj[1]
        if has(i, "copula"):
            if has(i + 1, "predicate"):
                return (chunks[i], "copula"), chunks[i + 1], i + 2
            obj = noun_phrase(i + 1)
            if obj is not None:
                return (chunks[i], "copula"), obj[0], obj[1]
            return None
        return fail(i, "expected a verb or copula")

    def sentence():
        if has(0, "pronoun"):
            vp = verb_phrase(1)
            if vp is not None and vp[2] == len(chunks):
                return Parse(None, chunks[0], vp[0], vp[1])
        np_ = noun_phrase(0)
        if np_ is not None:
            vp = verb_phrase(np_[1])
            if vp is not None:
                if vp[2] == len(chunks):
                    return Parse(np_[0], None, vp[0], vp[1])
                fail(vp[2], "unexpected trailing words")
        return None

    result = sentence()
    if result is None:
        raise ParseError(f"no template pattern matches: {furthest[1]}", furthest[0])
    return result


def parse_tokens(tokens: list[str], lex: Lexicon) -> Parse:
    if isinstance(tokens, str):
        tokens = tokenize(tokens)
    chunks = lex.chunk([t.lower() for t in tokens])
    return _parse_chunks(chunks, lex)


def _np_boxes(np_: NounPhrase, lex: Lexicon):
    return [
        make_word(w, lex.pos_of(w)[pos], kind="determiner" if pos == "determiner" else "word")
        for w, pos in np_.words
    ]


def _build(parse: Parse, lex: Lexicon):
    """Boxes, cups and bookkeeping for one parsed sentence."""
    boxes = []
    wires = []
    nouns = []  # box indices of noun heads, in order

    def add_np(np_):
        first = len(boxes)
        boxes.extend(_np_boxes(np_, lex))
        last = len(boxes) - 1
        for i in range(first, last):
            # modifier n^l (leg 1) meets the next word's output (leg 0)
            wires.append(Wire(box_port(i, 1), box_port(i + 1, 0), cup=True))
        nouns.append(last)
        return box_port(first, 0)

    inputs = ()
    pronoun_box = None
    if parse.subject is not None:
        subj_out = add_np(parse.subject)
    else:
        pronoun_box = len(boxes)
        boxes.append(make_word(parse.pronoun, lex.pos_of(parse.pronoun)["pronoun"]))
        subj_out = box_port(pronoun_box, 1)
        inputs = (box_port(pronoun_box, 0),)

    verb_surface, verb_pos = parse.verb
    v = len(boxes)
    boxes.append(make_word(verb_surface, lex.pos_of(verb_surface)[verb_pos]))
    wires.append(Wire(subj_out, box_port(v, 0), cup=True))

    if isinstance(parse.complement, NounPhrase):
        obj_out = add_np(parse.complement)
    else:
        p = len(boxes)
        boxes.append(make_word(parse.complement, lex.pos_of(parse.complement)["predicate"]))
        obj_out = box_port(p, 0)
    wires.append(Wire(box_port(v, 2), obj_out, cup=True))

    d = Diagram(tuple(boxes), tuple(wires), 0, (box_port(v, 1),), inputs)
    return d, nouns, pronoun_box


def parse_sentence(tokens, lex: Lexicon) -> Diagram:
    """Parse one sentence into a well-typed diagram with a single open s output."""
    d, _, _ = _build(parse_tokens(tokens, lex), lex)
    return d


def extract_mentions(tokens, lex: Lexicon) -> list[str]:
    """Noun heads of the subject and object, in sentence order."""
    parse = parse_tokens(tokens, lex)
    return [np_.head for np_ in (parse.subject, parse.complement) if isinstance(np_, NounPhrase)]


@dataclass(frozen=True)
class ParsedDiscourse:
    s1_diagram: Diagram
    s2_diagram: Diagram
    referents: tuple  # box indices of candidate nouns in s1
    pronoun: int  # box index of the pronoun in s2

    @property
    def referent_words(self) -> list[str]:
        return [self.s1_diagram.boxes[i].surface for i in self.referents]


def parse_discourse(s1, s2, lex: Lexicon) -> ParsedDiscourse:
    d1, nouns, pron1 = _build(parse_tokens(s1, lex), lex)
    if pron1 is not None:
        raise ParseError("first sentence must not start with a pronoun", 0)
    d2, _, pron = _build(parse_tokens(s2, lex), lex)
    if pron is None:
        raise ParseError("second sentence has no pronoun subject", 0)
    return ParsedDiscourse(d1, d2, tuple(nouns), pron)


def split_discourse(text: str) -> tuple[str, str]:
    parts = [p.strip() for p in text.replace("!", ".").replace("?", ".").split(".") if p.strip()]
    if len(parts) != 2:
        raise ParseError(f"expected two sentences, found {len(parts)}", 0)
    return parts[0], parts[1]


def wire_discourse(pd: ParsedDiscourse, candidate: int) -> Diagram:
    """Copy referent ``candidate`` into the pronoun and merge both sentences.

    The copied noun is projected to its two-copy layer: one leg keeps its
    grammatical role, the other crosses into the pronoun's input.
    """
    if not 0 <= candidate < len(pd.referents):
        raise IndexError(f"candidate {candidate} out of range for {len(pd.referents)} referents")
    d1 = pd.s1_diagram
    i = pd.referents[candidate]
    noun = d1.boxes[i]
    copied = make_word(noun.surface, Bang(N, 2))

    old = box_port(i, 0)
    partner = d1.partner(old)
    if partner is None:
        raise DiagramError(f"referent {noun.surface!r} is not wired")
    # keep the grammatical leg on the side facing its partner
    partner_left = (partner.index, partner.slot) < (i, 0)
    gram_leg, route_leg = (0, 1) if partner_left else (1, 0)

    def remap(p: Port) -> Port:
        return box_port(i, gram_leg) if p == old else p

    wires = tuple(Wire(remap(w.a), remap(w.b), w.cup) for w in d1.wires)
    boxes = d1.boxes[:i] + (copied,) + d1.boxes[i + 1 :]
    d1c = replace(d1, boxes=boxes, wires=wires)

    merged = merge_sentences(d1c, pd.s2_diagram)
    (pron_in,) = merged.inputs
    route = Wire(box_port(i, route_leg), pron_in, cup=True)
    return replace(merged, wires=merged.wires + (route,), inputs=())
