"""Exact commutative coefficients.

A :class:`Coefficient` is a sparse Laurent polynomial over the rationals in
named transcendental symbols (multiple zeta symbols, ``mu``, ``T`` and free
solver parameters).  Plain :class:`fractions.Fraction` values are accepted
everywhere a coefficient is expected; mixed arithmetic promotes to
``Coefficient`` only when a symbol is actually present, which keeps the
purely rational computations on the fast path.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

__all__ = [
    "Symbol",
    "Coefficient",
    "Scalar",
    "zeta",
    "param",
    "MU",
    "T",
    "as_scalar",
    "is_zero",
    "coeff_add",
    "coeff_mul",
    "coeff_substitute",
    "scalar_to_json",
    "scalar_from_json",
    "format_scalar",
]

_KIND_RANK = {"zeta": 0, "mu": 1, "T": 2, "param": 3}


@dataclass(frozen=True)
class Symbol:
    """A transcendental generator.

    ``kind`` is one of ``zeta``, ``mu``, ``T``, ``param``.  For ``zeta`` the
    ``index`` holds the admissible tuple (k_1, ..., k_m); for ``param`` it
    holds ``(degree, number)`` and ``tag`` names the family.
    """

    kind: str
    index: tuple = ()
    tag: str = ""

    def __post_init__(self) -> None:
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown symbol kind {self.kind!r}")
        if self.kind == "zeta":
            k = self.index
            if not k or any(int(x) < 1 for x in k) or k[-1] < 2:
                raise ValueError(f"non-admissible zeta index {k}")
        if self.kind == "param" and len(self.index) != 2:
            raise ValueError("param symbols carry (degree, number)")

    @property
    def weight(self) -> int:
        if self.kind == "zeta":
            return sum(self.index)
        if self.kind == "mu":
            return 1
        if self.kind == "T":
            return 0
        return self.index[0]

    @property
    def name(self) -> str:
        if self.kind == "zeta":
            return "zeta(" + ",".join(map(str, self.index)) + ")"
        if self.kind == "param":
            return f"p[{self.tag},{self.index[0]},{self.index[1]}]"
        return self.kind

    def sort_key(self) -> tuple:
        return (_KIND_RANK[self.kind], self.tag, self.index)

    def __lt__(self, other: "Symbol") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return self.name

    @staticmethod
    def parse(name: str) -> "Symbol":
        if name in ("mu", "T"):
            return Symbol(name)
        m = re.fullmatch(r"zeta\(([\d,\s]+)\)", name)
        if m:
            return Symbol("zeta", tuple(int(x) for x in m.group(1).split(",")))
        m = re.fullmatch(r"p\[([^,\]]*),(\d+),(\d+)\]", name)
        if m:
            return Symbol("param", (int(m.group(2)), int(m.group(3))), m.group(1))
        raise ValueError(f"cannot parse symbol {name!r}")


def zeta(*k: int) -> "Coefficient":
    """The formal symbol zeta(k_1, ..., k_m) as a coefficient."""
    return Coefficient.symbol(Symbol("zeta", tuple(k)))


def param(tag: str, degree: int, number: int) -> "Coefficient":
    return Coefficient.symbol(Symbol("param", (degree, number), tag))


Monomial = tuple  # tuple[tuple[Symbol, int], ...], sorted by symbol


@lru_cache(maxsize=1 << 16)
def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    acc = dict(a)
    for s, e in b:
        acc[s] = acc.get(s, 0) + e
    return tuple(sorted(((s, e) for s, e in acc.items() if e), key=lambda t: t[0].sort_key()))


def _mono_weight(m: Monomial) -> int:
    return sum(s.weight * e for s, e in m)


def _mono_name(m: Monomial) -> str:
    parts = []
    for s, e in m:
        parts.append(s.name if e == 1 else f"{s.name}^{e}")
    return "*".join(parts)


class Coefficient:
    """Sparse Laurent polynomial with rational coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, value: Union[int, Fraction, "Coefficient", Mapping, None] = None):
        self._hash = None
        if value is None:
            self.terms = {}
        elif isinstance(value, Coefficient):
            self.terms = dict(value.terms)
        elif isinstance(value, (int, Fraction)):
            self.terms = {(): Fraction(value)} if value else {}
        elif isinstance(value, Mapping):
            self.terms = {m: Fraction(c) for m, c in value.items() if c}
        else:
            raise TypeError(f"cannot build a coefficient from {type(value).__name__}")

    @classmethod
    def symbol(cls, s: Symbol, power: int = 1) -> "Coefficient":
        out = cls()
        out.terms = {((s, power),): Fraction(1)} if power else {(): Fraction(1)}
        return out

    @classmethod
    def _raw(cls, terms: dict) -> "Coefficient":
        out = cls.__new__(cls)
        out.terms = terms
        out._hash = None
        return out

    # -- queries -----------------------------------------------------------
    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant(self) -> Fraction:
        """The coefficient of the empty monomial."""
        return self.terms.get((), Fraction(0))

    def symbols(self) -> set:
        return {s for m in self.terms for s, _ in m}

    def weights(self) -> set:
        return {_mono_weight(m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.weights()) <= 1

    def weight(self) -> int:
        w = self.weights()
        if len(w) > 1:
            raise ValueError("coefficient is not homogeneous")
        return w.pop() if w else 0

    def simplify(self) -> "Scalar":
        """Return a Fraction when no symbol survives."""
        if self.is_constant():
            return self.constant()
        return self

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self
            t = dict(self.terms)
            v = t.get((), 0) + other
            if v:
                t[()] = Fraction(v)
            else:
                t.pop((), None)
            return Coefficient._raw(t)
        if not isinstance(other, Coefficient):
            return NotImplemented
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m, 0) + c
            if v:
                t[m] = v
            else:
                t.pop(m, None)
        return Coefficient._raw(t)

    __radd__ = __add__

    def __neg__(self):
        return Coefficient._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return self + (-other)
        if not isinstance(other, Coefficient):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Coefficient._raw({})
            return Coefficient._raw({m: c * other for m, c in self.terms.items()})
        if not isinstance(other, Coefficient):
            return NotImplemented
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                v = t.get(m, 0) + c1 * c2
                if v:
                    t[m] = v
                else:
                    t.pop(m, None)
        return Coefficient._raw(t)

    __rmul__ = __mul__

    def inverse(self) -> "Coefficient":
        """Inverse of a single-term coefficient (Laurent monomial)."""
        if len(self.terms) != 1:
            raise ZeroDivisionError(f"{self} is not invertible in the Laurent ring")
        (m, c), = self.terms.items()
        return Coefficient._raw({tuple((s, -e) for s, e in m): 1 / c})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        if isinstance(other, Coefficient):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out: Scalar = Coefficient(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            if not other:
                return not self.terms
            return len(self.terms) == 1 and self.terms.get(()) == other
        if isinstance(other, Coefficient):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            if self.is_constant():
                self._hash = hash(self.constant())
            else:
                self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- substitution and I/O ---------------------------------------------
    def substitute(self, bindings: Mapping[Symbol, "Scalar"]) -> "Scalar":
        out: Scalar = Fraction(0)
        for m, c in self.terms.items():
            term: Scalar = c
            for s, e in m:
                if s in bindings:
                    v = bindings[s]
                    if e < 0:
                        v = 1 / v if isinstance(v, (int, Fraction)) else v.inverse()
                    term = term * (v ** abs(e) if isinstance(v, Coefficient) else Fraction(v) ** abs(e))
                else:
                    term = term * Coefficient.symbol(s, e)
            out = out + term
        return as_scalar(out)

    def ordered_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: (_mono_weight(mc[0]), _mono_name(mc[0])))

    def to_json(self) -> list:
        return [
            {"monomial": [s.name if e == 1 else f"{s.name}^{e}" for s, e in m], "rational": _frac_str(c)}
            for m, c in self.ordered_terms()
        ]

    @classmethod
    def from_json(cls, data: Iterable) -> "Coefficient":
        t: dict = {}
        for row in data:
            mono = Coefficient(1)
            for name in row["monomial"]:
                base, _, exp = name.partition("^")
                mono = mono * Coefficient.symbol(Symbol.parse(base), int(exp) if exp else 1)
            (m, _), = mono.terms.items()
            t[m] = t.get(m, 0) + Fraction(row["rational"])
        return cls._raw({m: c for m, c in t.items() if c})

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for m, c in self.ordered_terms():
            if not m:
                out.append(_frac_str(c))
            elif c == 1:
                out.append(_mono_name(m))
            elif c == -1:
                out.append("-" + _mono_name(m))
            else:
                out.append(f"{_frac_str(c)}*{_mono_name(m)}")
        return " + ".join(out).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Coefficient({self})"


Scalar = Union[Fraction, Coefficient]

MU = Coefficient.symbol(Symbol("mu"))
T = Coefficient.symbol(Symbol("T"))


def _frac_str(c: Fraction) -> str:
    return f"{c.numerator}" if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def as_scalar(x) -> Scalar:
    """Normalise ints and constant coefficients to Fraction."""
    if isinstance(x, Coefficient):
        return x.simplify()
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not a scalar: {x!r}")


def is_zero(x) -> bool:
    return not x


def coeff_add(a: Scalar, b: Scalar) -> Scalar:
    return as_scalar(a + b)


def coeff_mul(a: Scalar, b: Scalar) -> Scalar:
    return as_scalar(a * b)


def coeff_substitute(a: Scalar, bindings: Mapping[Symbol, Scalar]) -> Scalar:
    if isinstance(a, Coefficient):
        return a.substitute(bindings)
    return as_scalar(a)


def scalar_to_json(x: Scalar) -> list:
    return Coefficient(x).to_json() if not isinstance(x, Coefficient) else x.to_json()


def scalar_from_json(data) -> Scalar:
    if isinstance(data, (int, str)):
        return Fraction(data)
    return Coefficient.from_json(data).simplify()


def format_scalar(x: Scalar) -> str:
    if isinstance(x, Fraction):
        return _frac_str(x)
    return str(x)
