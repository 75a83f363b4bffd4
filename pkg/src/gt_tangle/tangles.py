"""ABC tangle words: letters, grammar, parser, skeletons and a built-in catalogue.

A word lists letters top first; the rightmost letter is applied first (it sits
at the bottom).  Grammar::

    word   := item (';' item)*
    item   := 'cap(' INT ',' INT ',' ORIENTS ',' TURN ')'
            | 'cup(' INT ',' INT ',' ORIENTS ',' TURN ')'
            | 'braid(' INT ',' ORIENTS ',' bexpr ')'
    bexpr  := bfactor ('*' bfactor)*
    bfactor:= 's' INT | 'inv(' bexpr ')' | 'pow(' bexpr ',' coeff ')'
            | 'log2(' INT ')' | 'exp(' coeff ',' bexpr ')' | '(' bexpr ')'
    coeff  := signed sum of products of rationals, mu, T, zeta(k,..), p[tag,d,i]
    TURN   := left | right
    ORIENTS:= quoted string over '^' and 'v'

``#`` starts a comment running to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce as _fold
from typing import Sequence

from .coeffring import Coefficient, Scalar, Symbol, as_scalar, format_scalar
from .diagrams import Skeleton, _glue, orient_str, parse_orients, perm_compose, UP, DOWN

__all__ = [
    "ParseError",
    "TypeMismatch",
    "Gen",
    "Inv",
    "Prod",
    "Pow",
    "Log2",
    "Exp",
    "Cap",
    "Cup",
    "Braid",
    "ABCWord",
    "parse",
    "parse_coeff",
    "compose_words",
    "connect_sum_words",
    "skeleton_of",
    "components_of",
    "builtin",
    "CATALOGUE_KNOTS",
    "MOVE_PAIRS",
]


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line, self.col = line, col


class TypeMismatch(ValueError):
    """Consecutive letters whose boundaries do not match."""


# ---------------------------------------------------------------------------
# braid expressions


class BraidExpr:
    def perm(self, n: int) -> tuple:
        raise NotImplementedError


@dataclass(frozen=True)
class Gen(BraidExpr):
    i: int

    def perm(self, n):
        if not 1 <= self.i < n:
            raise IndexError(f"s{self.i} needs at least {self.i + 1} strands")
        p = list(range(n))
        p[self.i - 1], p[self.i] = p[self.i], p[self.i - 1]
        return tuple(p)

    def __str__(self):
        return f"s{self.i}"


@dataclass(frozen=True)
class Inv(BraidExpr):
    x: BraidExpr

    def perm(self, n):
        p = self.x.perm(n)
        out = [0] * n
        for a, b in enumerate(p):
            out[b] = a
        return tuple(out)

    def __str__(self):
        return f"inv({self.x})"


@dataclass(frozen=True)
class Prod(BraidExpr):
    factors: tuple

    def perm(self, n):
        # leftmost factor on top: the bottom factor acts first
        return _fold(lambda acc, f: perm_compose(acc, f.perm(n)), self.factors, tuple(range(n)))

    def __str__(self):
        return "*".join(f"({f})" if isinstance(f, Prod) else str(f) for f in self.factors)


@dataclass(frozen=True)
class Pow(BraidExpr):
    base: BraidExpr
    c: Scalar

    def perm(self, n):
        p = self.base.perm(n)
        if p != tuple(range(n)):
            raise ValueError(f"pow base {self.base} is not pure, so its scalar power is undefined")
        return p

    def __str__(self):
        return f"pow({self.base},{_coeff_text(self.c)})"


@dataclass(frozen=True)
class Log2(BraidExpr):
    i: int

    def perm(self, n):
        Gen(self.i).perm(n)
        return tuple(range(n))

    def __str__(self):
        return f"log2({self.i})"


@dataclass(frozen=True)
class Exp(BraidExpr):
    c: Scalar
    x: BraidExpr

    def perm(self, n):
        p = self.x.perm(n)
        if p != tuple(range(n)):
            raise ValueError(f"exp argument {self.x} is not pure")
        return p

    def __str__(self):
        return f"exp({_coeff_text(self.c)},{self.x})"


def _coeff_text(c: Scalar) -> str:
    return format_scalar(c).replace(" ", "")


# ---------------------------------------------------------------------------
# letters


class Letter:
    """Common interface: ``source``, ``target`` and ``skeleton()``."""

    source: tuple
    target: tuple

    def skeleton(self) -> Skeleton:
        raise NotImplementedError


def _turn_pair(turn: str) -> tuple:
    return (DOWN, UP) if turn == "left" else (UP, DOWN)


@dataclass(frozen=True)
class Cap(Letter):
    k: int
    l: int
    orients: tuple
    turn: str

    def __post_init__(self):
        if self.turn not in ("left", "right"):
            raise ValueError("turn must be left or right")
        if len(self.orients) != self.k + self.l or self.k < 0 or self.l < 0:
            raise ValueError(f"cap orientation string must have length k+l = {self.k + self.l}")

    @property
    def source(self):
        return self.orients[: self.k] + _turn_pair(self.turn) + self.orients[self.k :]

    @property
    def target(self):
        return self.orients

    def skeleton(self):
        return Skeleton.cap(self.k, self.l, self.orients, self.turn)

    def __str__(self):
        return f'cap({self.k},{self.l},"{orient_str(self.orients)}",{self.turn})'


@dataclass(frozen=True)
class Cup(Letter):
    k: int
    l: int
    orients: tuple
    turn: str

    def __post_init__(self):
        if self.turn not in ("left", "right"):
            raise ValueError("turn must be left or right")
        if len(self.orients) != self.k + self.l or self.k < 0 or self.l < 0:
            raise ValueError(f"cup orientation string must have length k+l = {self.k + self.l}")

    @property
    def source(self):
        return self.orients

    @property
    def target(self):
        return self.orients[: self.k] + _turn_pair(self.turn) + self.orients[self.k :]

    def skeleton(self):
        return Skeleton.cup(self.k, self.l, self.orients, self.turn)

    def __str__(self):
        return f'cup({self.k},{self.l},"{orient_str(self.orients)}",{self.turn})'


@dataclass(frozen=True)
class Braid(Letter):
    n: int
    orients: tuple
    expr: BraidExpr

    def __post_init__(self):
        if len(self.orients) != self.n:
            raise ValueError(f"braid orientation string must have length {self.n}")
        self.expr.perm(self.n)

    @property
    def perm(self):
        return self.expr.perm(self.n)

    @property
    def source(self):
        return self.orients

    @property
    def target(self):
        out = [0] * self.n
        for i, j in enumerate(self.perm):
            out[j] = self.orients[i]
        return tuple(out)

    def skeleton(self):
        return Skeleton.permutation(self.perm, self.orients)

    def __str__(self):
        return f'braid({self.n},"{orient_str(self.orients)}",{self.expr})'


# ---------------------------------------------------------------------------
# words


class ABCWord:
    """A composable sequence of letters, top first."""

    def __init__(self, letters: Sequence[Letter]):
        self.letters = tuple(letters)
        if not self.letters:
            raise ValueError("a word needs at least one letter")
        for pos in range(len(self.letters) - 1):
            upper, lower = self.letters[pos], self.letters[pos + 1]
            if upper.source != lower.target:
                raise TypeMismatch(
                    f"letter {pos + 1} ({upper}) has source {orient_str(upper.source)!r} but letter "
                    f"{pos + 2} ({lower}) has target {orient_str(lower.target)!r}"
                )
        self._skel = None

    @property
    def source(self) -> tuple:
        return self.letters[-1].source

    @property
    def target(self) -> tuple:
        return self.letters[0].target

    def skeleton(self) -> Skeleton:
        if self._skel is None:
            sk = self.letters[-1].skeleton()
            for letter in reversed(self.letters[:-1]):
                sk = _glue(letter.skeleton(), sk)[0]
            self._skel = sk
        return self._skel

    def is_knot(self) -> bool:
        sk = self.skeleton()
        return not sk.source and not sk.target and sk.circles == 1 and not sk.arcs

    def __str__(self) -> str:
        return " ; ".join(str(l) for l in self.letters)

    def __eq__(self, other):
        return isinstance(other, ABCWord) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return f"ABCWord({self})"

    def __len__(self):
        return len(self.letters)


def skeleton_of(w: ABCWord) -> Skeleton:
    return w.skeleton()


def components_of(w: ABCWord) -> dict:
    sk = w.skeleton()
    return {"open": len(sk.arcs), "closed": sk.circles, "total": sk.ncomp}


def compose_words(a: ABCWord, b: ABCWord) -> ABCWord:
    """``a`` on top of ``b``."""
    if a.source != b.target:
        raise TypeMismatch(
            f"cannot compose: source {orient_str(a.source)!r} of the upper word does not match "
            f"target {orient_str(b.target)!r} of the lower word"
        )
    return ABCWord(a.letters + b.letters)


def _normal_top(w: ABCWord) -> tuple:
    top = w.letters[0]
    if not (isinstance(top, Cap) and top.k == 0 and top.l == 0):
        raise ValueError("knot word must start with an outermost cap(0,0,...)")
    if top.turn == "left":
        return w.letters
    # cap right = cap left * twist: a half twist turns (^v) into (v^)
    return (Cap(0, 0, (), "left"), Braid(2, (UP, DOWN), Gen(1))) + w.letters[1:]


def _normal_bottom(w: ABCWord) -> tuple:
    bot = w.letters[-1]
    if not (isinstance(bot, Cup) and bot.k == 0 and bot.l == 0):
        raise ValueError("knot word must end with an outermost cup(0,0,...)")
    if bot.turn == "left":
        return w.letters
    return w.letters[:-1] + (Braid(2, (DOWN, UP), Gen(1)), Cup(0, 0, (), "left"))


def normalize_knot(w: ABCWord) -> ABCWord:
    """Rewrite the outermost turns as left turns by absorbing a crossing."""
    if not w.is_knot():
        raise ValueError("not a knot word")
    letters = _normal_top(w)
    return ABCWord(_normal_bottom(ABCWord(letters)))


def connect_sum_words(k1: ABCWord, k2: ABCWord) -> ABCWord:
    """K1 # K2: drop the bottom cup of K1 and the top cap of K2."""
    a = normalize_knot(k1)
    b = normalize_knot(k2)
    return ABCWord(a.letters[:-1] + b.letters[1:])


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<str>"[^"\n]*")
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[;,()*/+\-^\[\]])
    """,
    re.VERBOSE,
)


class _Lexer:
    def __init__(self, text: str):
        self.toks = []
        pos = 0
        line, col = 1, 1
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r}", line, col)
            kind = m.lastgroup
            val = m.group()
            if kind != "ws":
                self.toks.append((kind, val, line, col))
            for ch in val:
                if ch == "\n":
                    line, col = line + 1, 1
                else:
                    col += 1
            pos = m.end()
        self.toks.append(("eof", "", line, col))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val: str):
        t = self.next()
        if t[1] != val:
            raise ParseError(f"expected {val!r}, found {t[1] or 'end of input'!r}", t[2], t[3])
        return t

    def int(self) -> int:
        t = self.next()
        if t[0] != "num":
            raise ParseError(f"expected an integer, found {t[1]!r}", t[2], t[3])
        return int(t[1])

    def error(self, msg):
        t = self.peek()
        return ParseError(msg, t[2], t[3])


def _orients(lx: _Lexer) -> tuple:
    t = lx.next()
    if t[0] != "str":
        raise ParseError("expected a quoted orientation string", t[2], t[3])
    try:
        return parse_orients(t[1][1:-1])
    except ValueError as e:
        raise ParseError(str(e), t[2], t[3]) from None


def _turn(lx: _Lexer) -> str:
    t = lx.next()
    if t[1] not in ("left", "right"):
        raise ParseError(f"expected left or right, found {t[1]!r}", t[2], t[3])
    return t[1]


def _coeff(lx: _Lexer) -> Scalar:
    total: Scalar = Fraction(0)
    sign = 1
    t = lx.peek()
    if t[1] in "+-" and t[1]:
        lx.next()
        sign = -1 if t[1] == "-" else 1
    total = total + _coeff_term(lx) * sign
    while lx.peek()[1] in ("+", "-"):
        s = lx.next()[1]
        total = total + _coeff_term(lx) * (1 if s == "+" else -1)
    return as_scalar(total)


def _coeff_term(lx: _Lexer) -> Scalar:
    out: Scalar = _coeff_factor(lx)
    while lx.peek()[1] in ("*", "/"):
        op = lx.next()[1]
        f = _coeff_factor(lx)
        if op == "*":
            out = out * f
        else:
            out = out / f
    return out


def _coeff_factor(lx: _Lexer) -> Scalar:
    t = lx.next()
    if t[0] == "num":
        base: Scalar = Fraction(int(t[1]))
    elif t[1] == "(":
        base = _coeff(lx)
        lx.expect(")")
    elif t[1] == "-":
        base = -_coeff_factor(lx)
    elif t[1] in ("mu", "T"):
        base = Coefficient.symbol(Symbol(t[1]))
    elif t[1] == "zeta":
        lx.expect("(")
        idx = [lx.int()]
        while lx.peek()[1] == ",":
            lx.next()
            idx.append(lx.int())
        lx.expect(")")
        try:
            base = Coefficient.symbol(Symbol("zeta", tuple(idx)))
        except ValueError as e:
            raise ParseError(str(e), t[2], t[3]) from None
    elif t[1] == "p":
        lx.expect("[")
        tag = lx.next()[1]
        lx.expect(",")
        d = lx.int()
        lx.expect(",")
        k = lx.int()
        lx.expect("]")
        base = Coefficient.symbol(Symbol("param", (d, k), tag))
    else:
        raise ParseError(f"unexpected {t[1] or 'end of input'!r} in coefficient", t[2], t[3])
    if lx.peek()[1] == "^":
        lx.next()
        neg = False
        if lx.peek()[1] == "-":
            lx.next()
            neg = True
        e = lx.int()
        base = base ** (-e if neg else e)
    return base


def _bexpr(lx: _Lexer) -> BraidExpr:
    factors = [_bfactor(lx)]
    while lx.peek()[1] == "*":
        lx.next()
        factors.append(_bfactor(lx))
    return factors[0] if len(factors) == 1 else Prod(tuple(factors))


def _bfactor(lx: _Lexer) -> BraidExpr:
    t = lx.next()
    name = t[1]
    if t[0] == "name" and re.fullmatch(r"s\d+", name):
        return Gen(int(name[1:]))
    if name == "s" and lx.peek()[0] == "num":
        return Gen(lx.int())
    if name == "(":
        e = _bexpr(lx)
        lx.expect(")")
        return e
    if name == "inv":
        lx.expect("(")
        e = _bexpr(lx)
        lx.expect(")")
        return Inv(e)
    if name == "pow":
        lx.expect("(")
        e = _bexpr(lx)
        lx.expect(",")
        c = _coeff(lx)
        lx.expect(")")
        return Pow(e, c)
    if name == "log2":
        lx.expect("(")
        i = lx.int()
        lx.expect(")")
        return Log2(i)
    if name == "exp":
        lx.expect("(")
        c = _coeff(lx)
        lx.expect(",")
        e = _bexpr(lx)
        lx.expect(")")
        return Exp(c, e)
    raise ParseError(f"unexpected {name or 'end of input'!r} in braid expression", t[2], t[3])


def _item(lx: _Lexer) -> Letter:
    t = lx.next()
    kind = t[1]
    try:
        if kind in ("cap", "cup"):
            lx.expect("(")
            k = lx.int()
            lx.expect(",")
            l = lx.int()
            lx.expect(",")
            o = _orients(lx)
            lx.expect(",")
            turn = _turn(lx)
            lx.expect(")")
            return (Cap if kind == "cap" else Cup)(k, l, o, turn)
        if kind == "braid":
            lx.expect("(")
            n = lx.int()
            lx.expect(",")
            o = _orients(lx)
            lx.expect(",")
            e = _bexpr(lx)
            lx.expect(")")
            return Braid(n, o, e)
    except (ValueError, IndexError) as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(str(e), t[2], t[3]) from None
    raise ParseError(f"expected cap, cup or braid, found {kind or 'end of input'!r}", t[2], t[3])


def parse(text: str) -> ABCWord:
    lx = _Lexer(text)
    letters = [_item(lx)]
    positions = [lx.toks[0][2:]]
    while lx.peek()[1] == ";":
        lx.next()
        positions.append(lx.peek()[2:])
        letters.append(_item(lx))
    t = lx.peek()
    if t[0] != "eof":
        raise ParseError(f"unexpected {t[1]!r} after word", t[2], t[3])
    for pos in range(len(letters) - 1):
        if letters[pos].source != letters[pos + 1].target:
            line, col = positions[pos + 1]
            raise ParseError(
                f"type error: letter {pos + 1} has source {orient_str(letters[pos].source)!r} "
                f"but letter {pos + 2} has target {orient_str(letters[pos + 1].target)!r}",
                line,
                col,
            )
    return ABCWord(letters)


def parse_coeff(text: str) -> Scalar:
    lx = _Lexer(text)
    c = _coeff(lx)
    t = lx.peek()
    if t[0] != "eof":
        raise ParseError(f"unexpected {t[1]!r} after coefficient", t[2], t[3])
    return c


# ---------------------------------------------------------------------------
# catalogue


def _closure_word(n: int, expr: str) -> str:
    """Braid closure of an n-strand braid (on downward strands) by nested cups and caps."""
    down = "v" * n
    up = "^" * n
    caps = [f'cap({i},{i},"{"v" * i}{"^" * i}",left)' for i in range(n)]
    cups = [f'cup({i},{i},"{"v" * i}{"^" * i}",left)' for i in reversed(range(n))]
    mid = f'braid({2 * n},"{down}{up}",{expr})'
    return " ; ".join(caps + [mid] + cups)


def c0_term_text(k: Sequence[int]) -> str:
    k = tuple(k)
    if not k or k[-1] < 2 or any(x < 1 for x in k):
        raise ValueError(f"non-admissible index {k}")
    logs = []
    for ki in reversed(k):
        logs += ["log2(2)"] * (ki - 1) + ["log2(3)"]
    items = ['cap(0,0,"",left)', 'cap(2,0,"v^",left)']
    items += [f'braid(4,"v^v^",{x})' for x in logs]
    items += ['cup(1,1,"v^",right)', 'cup(0,0,"",left)']
    return " ; ".join(items)


_CATALOGUE = {
    "unknot": 'cap(0,0,"",left) ; cup(0,0,"",left)',
    "unknot_right": 'cap(0,0,"",right) ; cup(0,0,"",right)',
    "trefoil_left": _closure_word(2, "inv(s1)*inv(s1)*inv(s1)"),
    "trefoil_right": _closure_word(2, "s1*s1*s1"),
    "figure_eight": _closure_word(3, "s1*inv(s2)*s1*inv(s2)"),
}

CATALOGUE_KNOTS = ("unknot", "unknot_right", "trefoil_left", "trefoil_right", "figure_eight")


def builtin(name: str, k: Sequence[int] | None = None) -> ABCWord:
    """Catalogue words.  ``c0_term`` needs ``k`` or the form ``c0_term(k1,...,km)``."""
    m = re.fullmatch(r"c0_term\((.*)\)", name.replace(" ", ""))
    if m:
        body = m.group(1)
        mm = re.fullmatch(r"(\d+),\(([\d,]+)\)", body)
        if mm:
            k = tuple(int(x) for x in mm.group(2).split(","))
            if len(k) != int(mm.group(1)):
                raise ValueError("c0_term depth does not match the index length")
        else:
            k = tuple(int(x) for x in body.split(","))
        name = "c0_term"
    if name == "c0_term":
        if k is None:
            raise ValueError("c0_term needs an index tuple")
        return parse(c0_term_text(k))
    if name not in _CATALOGUE:
        raise KeyError(f"unknown catalogue word {name!r}; known: {', '.join(sorted(_CATALOGUE))}, c0_term(k...)")
    return parse(_CATALOGUE[name])


def catalogue_text(name: str) -> str:
    return _CATALOGUE[name]


# Hand-built isotopic pairs, grouped by move family.
MOVE_PAIRS = {
    "braid": (
        ('braid(3,"^^^",s1*s2*s1)', 'braid(3,"^^^",s2*s1*s2)'),
        ('braid(4,"^v^v",s1*s3)', 'braid(4,"^v^v",s3*s1)'),
        ('braid(3,"^v^",s1*inv(s1)*s2)', 'braid(3,"^v^",s2)'),
        ('braid(3,"^^v",s2) ; braid(3,"^^v",s1)', 'braid(3,"^^v",s2*s1)'),
        ('braid(2,"^v",pow(s1*s1,1/2)*pow(s1*s1,1/2))', 'braid(2,"^v",s1*s1)'),
        ('braid(2,"^^",exp(3/2,log2(1)))', 'braid(2,"^^",pow(s1*s1,3/2))'),
    ),
    "far-commutation": (
        ('cap(0,2,"^^",left) ; braid(4,"v^^^",s3)', 'braid(2,"^^",s1) ; cap(0,2,"^^",left)'),
        ('braid(4,"v^^^",s3) ; cup(0,2,"^^",left)', 'cup(0,2,"^^",left) ; braid(2,"^^",s1)'),
    ),
    "zigzag": (
        (
            'cap(0,0,"",left) ; cap(1,1,"v^",right) ; cup(2,0,"v^",left) ; cup(0,0,"",left)',
            'cap(0,0,"",left) ; cup(0,0,"",left)',
        ),
        (
            'cap(0,0,"",left) ; cap(0,2,"v^",left) ; cup(1,1,"v^",right) ; cup(0,0,"",left)',
            'cap(0,0,"",left) ; cup(0,0,"",left)',
        ),
    ),
    "slide": (
        ('cap(0,1,"^",left) ; braid(3,"v^^",s2)', 'cap(1,0,"^",left) ; braid(3,"v^^",inv(s1))'),
        ('cap(0,1,"^",left) ; braid(3,"v^^",inv(s2))', 'cap(1,0,"^",left) ; braid(3,"v^^",s1)'),
    ),
    "height-exchange": (
        ('cap(0,0,"",left) ; cap(0,2,"v^",left)', 'cap(0,0,"",left) ; cap(2,0,"v^",left)'),
        ('cup(0,2,"v^",left) ; cup(0,0,"",left)', 'cup(2,0,"v^",left) ; cup(0,0,"",left)'),
    ),
    "turn-flip": (
        ('braid(2,"v^",s1) ; cup(0,0,"",left)', 'cup(0,0,"",right)'),
        ('braid(2,"v^",inv(s1)) ; cup(0,0,"",left)', 'cup(0,0,"",right)'),
        ('cap(0,0,"",left) ; braid(2,"^v",s1)', 'cap(0,0,"",right)'),
        ('cap(0,0,"",left) ; braid(2,"^v",inv(s1))', 'cap(0,0,"",right)'),
    ),
}
