from fractions import Fraction as F

import pytest

from gt_tangle.coeffring import (
    MU,
    T,
    Coefficient,
    Symbol,
    as_scalar,
    coeff_substitute,
    format_scalar,
    is_zero,
    param,
    scalar_from_json,
    scalar_to_json,
    zeta,
)


def test_rational_fast_path():
    assert as_scalar(3) == F(3)
    assert isinstance(as_scalar(Coefficient(F(1, 2))), F)
    assert is_zero(Coefficient()) and is_zero(F(0))


def test_ring_laws():
    a, b, c = zeta(2), zeta(3) + F(1, 2), param("x", 1, 0) * MU
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a - a == 0
    assert (MU * MU.inverse()) == 1
    assert (MU ** 2) * MU ** -2 == 1


def test_zeta_admissibility():
    with pytest.raises(ValueError):
        Symbol("zeta", (2, 1))
    with pytest.raises(ValueError):
        Symbol("bogus")


def test_weights_and_names():
    x = zeta(2) * zeta(3)
    assert x.is_homogeneous() and x.weight() == 5
    assert str(zeta(1, 2)) == "zeta(1,2)"
    for s in ("mu", "T", "zeta(1,3)", "p[a,2,1]"):
        assert Symbol.parse(s).name == s


def test_substitute():
    s = Symbol("zeta", (2,))
    x = zeta(2) ** 2 + 3 * zeta(2)
    assert coeff_substitute(x, {s: F(1, 2)}) == F(1, 4) + F(3, 2)
    assert coeff_substitute(F(5), {s: 1}) == 5


def test_json_roundtrip():
    for x in (F(-7, 3), zeta(2) * MU - F(1, 24) * T ** 2, param("p", 3, 1)):
        assert scalar_from_json(scalar_to_json(x)) == x


def test_format_is_deterministic():
    x = zeta(3) - 2 * zeta(2) * zeta(1, 2)
    assert format_scalar(x) == format_scalar(Coefficient(x))
    assert format_scalar(F(-1, 2)) == "-1/2"
