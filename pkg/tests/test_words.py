import pytest

from corset.errors import SpecError
from corset.words import (
    free_invert,
    free_multiply,
    free_reduce,
    is_reduced,
    parse_word,
    format_word,
    substitute,
)


def test_free_reduce_cancellation():
    # a a^-1 b -> b
    assert free_reduce((1, -1, 2)) == (2,)


def test_free_reduce_identity():
    assert free_reduce(()) == ()


def test_free_reduce_inner_cancellation():
    # a b b^-1 a -> a a
    assert free_reduce((1, 2, -2, 1)) == (1, 1)


def test_free_reduce_idempotent():
    w = (1, 2, -2, -1, 2, 1, -1)
    assert free_reduce(free_reduce(w)) == free_reduce(w)


def test_free_reduce_cascades():
    # a b b^-1 a^-1 collapses fully
    assert free_reduce((1, 2, -2, -1)) == ()


def test_multiply_reduces_at_junction():
    assert free_multiply((1, 2), (-2, -1, 2)) == (2,)


def test_invert():
    w = (1, 2, -1)
    assert free_multiply(w, free_invert(w)) == ()
    assert free_invert(w) == (1, -2, -1)


def test_is_reduced():
    assert is_reduced((1, 2, 1))
    assert not is_reduced((1, -1))


def test_parse_word_spaces_and_compact():
    assert parse_word("a b A", ["a", "b"]) == (1, 2, -1)
    assert parse_word("abA", ["a", "b"]) == (1, 2, -1)


def test_parse_word_unknown_generator():
    with pytest.raises(SpecError):
        parse_word("a q", ["a", "b"])


def test_format_round_trip():
    w = (1, -2, 1)
    assert parse_word(format_word(w, ["a", "b"]), ["a", "b"]) == w
    assert format_word((), ["a"]) == "1"


def test_substitute_homomorphism():
    # phi(a)=ab, phi(b)=a extends multiplicatively
    images = ((1, 2), (1,))
    assert substitute((1, 2), images) == free_multiply((1, 2), (1,))
    assert substitute((-1,), images) == (-2, -1)
