import pytest

from qpronoun.grammar import (
    Atomic, Bang, GrammarTypeError, N, Over, Prod, S, Under, legs, parse_type, validate,
)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("n", [("n", 0)]),
        ("n/n", [("n", 0), ("n", -1)]),
        ("n\\n", [("n", 1), ("n", 0)]),
        ("(n\\s)/n", [("n", 1), ("s", 0), ("n", -1)]),
        ("n*s", [("n", 0), ("s", 0)]),
        ("!2n", [("n", 0), ("n", 0)]),
    ],
)
def test_legs(text, expected):
    assert legs(parse_type(text)) == expected


@pytest.mark.parametrize("text", ["n", "s", "n/n", "n\\n", "(n\\s)/n", "!2n", "(n*s)/n", "n\\(s/n)"])
def test_parse_round_trip(text):
    t = parse_type(text)
    assert parse_type(str(t)) == t


def test_slashes_associate_left():
    assert parse_type("n/n/n") == Over(Over(N, N), N)


def test_bang_projection_layers():
    t = Bang(N, 2)
    assert legs(t, layer=1) == [("n", 0)]
    assert legs(t, layer=0) == []
    with pytest.raises(GrammarTypeError):
        legs(t, layer=3)


@pytest.mark.parametrize(
    "build",
    [
        lambda: Atomic("x"),
        lambda: Bang(N, 0),
        lambda: Bang(Bang(N, 2), 2),
        lambda: Bang(Over(N, Bang(S, 2)), 2),
    ],
)
def test_invalid_types_rejected(build):
    with pytest.raises(GrammarTypeError):
        validate(build())


@pytest.mark.parametrize("text", ["", "n/", "(n", "q", "!0n", "n)"])
def test_parse_errors(text):
    with pytest.raises(GrammarTypeError):
        parse_type(text)


def test_leg_count_matches_atom_count():
    t = Under(Prod(N, N), Over(S, N))
    assert len(legs(t)) == 4
