from fractions import Fraction as F

import pytest

from gt_tangle.coeffring import zeta
from gt_tangle.diagrams import DOWN, UP
from gt_tangle.tangles import (
    CATALOGUE_KNOTS,
    MOVE_PAIRS,
    Braid,
    Cap,
    Cup,
    Exp,
    Inv,
    ParseError,
    Pow,
    Prod,
    TypeMismatch,
    builtin,
    components_of,
    compose_words,
    connect_sum_words,
    normalize_knot,
    parse,
    parse_coeff,
)


def test_parse_letters():
    w = parse('cap(0,0,"",left) ; braid(2,"v^",s1*inv(s1)) ; cup(0,0,"",left)')
    cap, br, cup = w.letters
    assert isinstance(cap, Cap) and cap.turn == "left"
    assert isinstance(br, Braid) and br.orients == (DOWN, UP)
    assert isinstance(cup, Cup) and cup.turn == "left"
    assert isinstance(br.expr, Prod)


def test_parse_expressions():
    e = parse('braid(3,"^^^",pow(s1*s1,-1/2)*exp(2,log2(1))*inv(s2))').letters[0].expr
    kinds = [type(x) for x in e.factors] if hasattr(e, "factors") else None
    assert kinds == [Pow, Exp, Inv]


def test_parse_coefficients():
    assert parse_coeff("-3/4") == F(-3, 4)
    assert parse_coeff("zeta(2)*2") == 2 * zeta(2)


def test_print_parse_roundtrip():
    for name in CATALOGUE_KNOTS:
        w = builtin(name)
        assert parse(str(w)) == w
    w = builtin("c0_term", (1, 2))
    assert parse(str(w)) == w


def test_syntax_error_position():
    with pytest.raises(ParseError) as ei:
        parse('cap(0,0,"",left) ; braid(2,"^v",s1 s1)')
    assert ei.value.line == 1 and ei.value.col > 30
    with pytest.raises(ParseError):
        parse('cup(0,0,"",sideways)')


def test_type_mismatch():
    with pytest.raises(ParseError) as ei:
        parse('cap(0,0,"",left) ; braid(2,"^^",s1)')
    assert "type error" in str(ei.value) and ei.value.col == 20
    with pytest.raises(TypeMismatch):
        compose_words(parse('cap(0,0,"",left)'), parse('braid(2,"^^",s1)'))


def test_braid_width_checked():
    with pytest.raises((ParseError, ValueError)):
        parse('braid(2,"^^",s2)')


def test_catalogue_are_knots():
    for name in CATALOGUE_KNOTS:
        w = builtin(name)
        assert w.is_knot(), name
        assert components_of(w) == {"open": 0, "closed": 1, "total": 1}


def test_c0_terms():
    for k in [(2,), (3,), (1, 2), (1, 1, 2)]:
        assert builtin("c0_term", k).is_knot()
    assert builtin("c0_term(1,2)") == builtin("c0_term", (1, 2))
    assert builtin("c0_term(2,(1,2))") == builtin("c0_term", (1, 2))
    with pytest.raises(ValueError):
        builtin("c0_term", (2, 1))


def test_normalize_and_connect_sum():
    u = builtin("unknot_right")
    n = normalize_knot(u)
    assert n.letters[0] == Cap(0, 0, (), "left") and n.letters[-1] == Cup(0, 0, (), "left")
    s = connect_sum_words(builtin("trefoil_left"), builtin("figure_eight"))
    assert s.is_knot()
    with pytest.raises(ValueError):
        normalize_knot(parse('braid(2,"^^",s1)'))


def test_compose_words():
    a = parse('braid(2,"^^",s1)')
    assert len(compose_words(a, a)) == 2
    with pytest.raises((TypeMismatch, ValueError)):
        compose_words(parse('cap(0,0,"",left)'), a)


def test_move_pairs_typecheck():
    assert len(MOVE_PAIRS) == 6
    for fam, pairs in MOVE_PAIRS.items():
        assert len(pairs) >= 2, fam
        for a, b in pairs:
            wa, wb = parse(a), parse(b)
            assert wa.source == wb.source and wa.target == wb.target
            assert wa.skeleton() == wb.skeleton()
