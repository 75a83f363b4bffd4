from fractions import Fraction as F

import pytest

from gt_tangle.freeseries import (
    SeriesHom,
    TruncSeries,
    bch,
    dynkin,
    is_grouplike,
    is_primitive,
    lyndon_bracket,
    lyndon_words,
    series_log,
    series_power,
    shuffle,
)

AB = ("A", "B")


def L(name, n=5):
    return TruncSeries.letter(AB, n, name)


def test_truncation_drops_long_words():
    a = L("A", 2)
    assert (a * a * a).terms == {}
    assert (a * a).coeff((0, 0)) == 1


def test_exp_log_inverse():
    x = L("A") + L("B").scale(F(1, 3)) + (L("A") * L("B")).scale(2)
    assert series_log(x.exp()) == x
    g = x.exp()
    assert g * g.inverse() == TruncSeries.one(AB, 5)
    assert series_power(g, F(1, 2)) * series_power(g, F(1, 2)) == g


def test_bch_oracle_degree3():
    # [DERIVED] x + y + [x,y]/2 + ([x,[x,y]] + [y,[y,x]])/12
    x, y = L("A", 3), L("B", 3)
    br = lambda u, v: u * v - v * u
    expect = x + y + br(x, y).scale(F(1, 2)) + (br(x, br(x, y)) + br(y, br(y, x))).scale(F(1, 12))
    assert bch(x, y) == expect
    assert bch(x, y).exp() == x.exp() * y.exp()


def test_grouplike_and_primitive():
    x, y = L("A", 4), L("B", 4)
    assert is_grouplike((x + y.scale(3)).exp())
    assert not is_grouplike(TruncSeries.one(AB, 4) + x * y)
    assert is_primitive(x * y - y * x)
    assert not is_primitive(x * y)
    assert dynkin(x * y - y * x) == (x * y - y * x).scale(2)


def test_lyndon_counts_witt():
    # [DERIVED] necklace counts for two letters
    assert [len(lyndon_words(2, n)) for n in range(1, 7)] == [2, 1, 2, 3, 6, 9]
    for n in range(1, 5):
        for w in lyndon_words(2, n):
            assert is_primitive(lyndon_bracket(w, AB, n))


def test_shuffle_counts():
    s = shuffle((0, 1), (2,))
    assert sum(s.values()) == 3
    assert shuffle((0,), (0,)) == {(0, 0): 2}


def test_hom_substitution():
    x, y = L("A", 3), L("B", 3)
    swap = SeriesHom(AB, {"A": y, "B": x})
    assert swap(x * y) == y * x
    with pytest.raises(KeyError):
        SeriesHom(AB, {"A": y})
    with pytest.raises(ValueError):
        SeriesHom(AB, {"A": x * y, "B": x}, lie=True)


def test_json_roundtrip():
    g = (L("A") - L("B").scale(F(2, 7))).exp()
    assert TruncSeries.from_json(g.to_json()) == g
