"""Degree-truncated noncommutative power series.

Words are tuples of letter indices into the series' alphabet; the empty
tuple is the unit.  Every series carries a hard ``maxdeg`` and all products
drop words that exceed it.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from .coeffring import Coefficient, Scalar, as_scalar, scalar_from_json, scalar_to_json

__all__ = [
    "TruncSeries",
    "SeriesHom",
    "series_mul",
    "series_exp",
    "series_log",
    "series_power",
    "apply_hom",
    "is_grouplike",
    "is_primitive",
    "dynkin",
    "lyndon_words",
    "lyndon_bracket",
    "shuffle",
    "bch",
]


class TruncSeries:
    """An element of the free algebra on ``alphabet`` modulo words longer than ``maxdeg``."""

    __slots__ = ("alphabet", "maxdeg", "terms")

    def __init__(self, alphabet: Sequence[str], maxdeg: int, terms: Mapping[tuple, Scalar] | None = None):
        self.alphabet = tuple(alphabet)
        self.maxdeg = maxdeg
        self.terms: dict = {}
        if terms:
            for w, c in terms.items():
                w = tuple(w)
                if len(w) <= maxdeg and c:
                    self.terms[w] = as_scalar(c)

    # -- constructors ------------------------------------------------------
    @classmethod
    def _raw(cls, alphabet, maxdeg, terms) -> "TruncSeries":
        out = cls.__new__(cls)
        out.alphabet = alphabet
        out.maxdeg = maxdeg
        out.terms = terms
        return out

    @classmethod
    def one(cls, alphabet, maxdeg) -> "TruncSeries":
        return cls(alphabet, maxdeg, {(): 1})

    @classmethod
    def zero(cls, alphabet, maxdeg) -> "TruncSeries":
        return cls(alphabet, maxdeg)

    @classmethod
    def letter(cls, alphabet, maxdeg, name) -> "TruncSeries":
        i = name if isinstance(name, int) else tuple(alphabet).index(name)
        return cls(alphabet, maxdeg, {(i,): 1})

    @classmethod
    def word(cls, alphabet, maxdeg, text: str | Sequence, coeff: Scalar = 1) -> "TruncSeries":
        a = tuple(alphabet)
        letters = tuple(a.index(ch) if not isinstance(ch, int) else ch for ch in text)
        return cls(a, maxdeg, {letters: coeff})

    def like(self, terms) -> "TruncSeries":
        return TruncSeries._raw(self.alphabet, self.maxdeg, terms)

    # -- basic queries -----------------------------------------------------
    def constant(self) -> Scalar:
        return self.terms.get((), Fraction(0))

    def coeff(self, word) -> Scalar:
        if isinstance(word, str):
            word = tuple(self.alphabet.index(ch) for ch in word)
        return self.terms.get(tuple(word), Fraction(0))

    def degree_part(self, n: int) -> "TruncSeries":
        return self.like({w: c for w, c in self.terms.items() if len(w) == n})

    def lowest_degree(self) -> int | None:
        return min((len(w) for w in self.terms), default=None)

    def truncate(self, maxdeg: int) -> "TruncSeries":
        if maxdeg > self.maxdeg:
            raise ValueError("truncate never raises the degree cap")
        return TruncSeries._raw(self.alphabet, maxdeg, {w: c for w, c in self.terms.items() if len(w) <= maxdeg})

    def map_coeffs(self, f: Callable[[Scalar], Scalar]) -> "TruncSeries":
        out = {}
        for w, c in self.terms.items():
            v = as_scalar(f(c))
            if v:
                out[w] = v
        return self.like(out)

    def _check(self, other: "TruncSeries") -> None:
        if self.alphabet != other.alphabet or self.maxdeg != other.maxdeg:
            raise ValueError(
                f"series mismatch: {self.alphabet}/{self.maxdeg} vs {other.alphabet}/{other.maxdeg}"
            )

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction, Coefficient)):
            other = TruncSeries(self.alphabet, self.maxdeg, {(): other})
        self._check(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            v = out.get(w, 0) + c
            if v:
                out[w] = v
            else:
                out.pop(w, None)
        return self.like(out)

    __radd__ = __add__

    def __neg__(self):
        return self.like({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Scalar) -> "TruncSeries":
        if not c:
            return self.like({})
        out = {}
        for w, v in self.terms.items():
            x = v * c
            if x:
                out[w] = x
        return self.like(out)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Coefficient)):
            return self.scale(other)
        return series_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Coefficient)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int) -> "TruncSeries":
        if n < 0:
            return self.inverse() ** (-n)
        out = TruncSeries.one(self.alphabet, self.maxdeg)
        for _ in range(n):
            out = out * self
        return out

    def inverse(self) -> "TruncSeries":
        c0 = self.constant()
        if not c0:
            raise ValueError("series with zero constant term is not invertible")
        inv0 = 1 / c0 if isinstance(c0, Fraction) else c0.inverse()
        x = TruncSeries.one(self.alphabet, self.maxdeg) - self.scale(inv0)
        out = TruncSeries.one(self.alphabet, self.maxdeg)
        p = out
        for _ in range(self.maxdeg):
            p = p * x
            if not p.terms:
                break
            out = out + p
        return out.scale(inv0)

    def bracket(self, other: "TruncSeries") -> "TruncSeries":
        return self * other - other * self

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, Coefficient)):
            other = TruncSeries(self.alphabet, self.maxdeg, {(): other})
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.alphabet == other.alphabet and self.maxdeg == other.maxdeg and self.terms == other.terms

    def __hash__(self):
        return hash((self.alphabet, self.maxdeg, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def exp(self) -> "TruncSeries":
        return series_exp(self)

    def log(self) -> "TruncSeries":
        return series_log(self)

    def power(self, lam: Scalar) -> "TruncSeries":
        return series_power(self, lam)

    # -- display / I/O -----------------------------------------------------
    def word_str(self, w: tuple) -> str:
        if not w:
            return "1"
        names = [self.alphabet[i] for i in w]
        return "".join(names) if all(len(n) == 1 for n in names) else ".".join(names)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda wc: (len(wc[0]), wc[0]))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.sorted_terms():
            cs = str(c)
            if isinstance(c, Coefficient) and len(c.terms) > 1:
                cs = f"({cs})"
            parts.append(self.word_str(w) if c == 1 and w else f"{cs}*{self.word_str(w)}" if w else cs)
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"TruncSeries<{''.join(self.alphabet)}, {self.maxdeg}>({self})"

    def to_json(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "maxdeg": self.maxdeg,
            "terms": [{"word": self.word_str(w) if w else "", "coeff": scalar_to_json(c)} for w, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TruncSeries":
        alphabet = tuple(data["alphabet"])
        single = all(len(a) == 1 for a in alphabet)
        terms = {}
        for row in data["terms"]:
            text = row["word"]
            if not text:
                w: tuple = ()
            elif single:
                w = tuple(alphabet.index(ch) for ch in text)
            else:
                w = tuple(alphabet.index(ch) for ch in text.split("."))
            terms[w] = scalar_from_json(row["coeff"])
        return cls(alphabet, data["maxdeg"], terms)


def _by_degree(s: TruncSeries) -> list:
    out: list = [[] for _ in range(s.maxdeg + 1)]
    for w, c in s.terms.items():
        out[len(w)].append((w, c))
    return out


def series_mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    a._check(b)
    n = a.maxdeg
    bd = _by_degree(b)
    out: dict = {}
    for w1, c1 in a.terms.items():
        room = n - len(w1)
        for d in range(room + 1):
            for w2, c2 in bd[d]:
                w = w1 + w2
                v = out.get(w, 0) + c1 * c2
                if v:
                    out[w] = v
                else:
                    out.pop(w, None)
    return a.like(out)


def series_exp(p: TruncSeries) -> TruncSeries:
    if p.constant():
        raise ValueError("exp needs a series without constant term")
    out = TruncSeries.one(p.alphabet, p.maxdeg)
    term = out
    for k in range(1, p.maxdeg + 1):
        term = (term * p).scale(Fraction(1, k))
        if not term.terms:
            break
        out = out + term
    return out


def series_log(g: TruncSeries) -> TruncSeries:
    if g.constant() != 1:
        raise ValueError("log needs constant term 1")
    x = g - 1
    out = TruncSeries.zero(g.alphabet, g.maxdeg)
    p = TruncSeries.one(g.alphabet, g.maxdeg)
    for k in range(1, g.maxdeg + 1):
        p = p * x
        if not p.terms:
            break
        out = out + p.scale(Fraction((-1) ** (k + 1), k))
    return out


def series_power(g: TruncSeries, lam: Scalar) -> TruncSeries:
    return series_exp(series_log(g).scale(lam))


class SeriesHom:
    """Algebra homomorphism given by the images of the source letters."""

    def __init__(self, source: Sequence[str], images: Mapping | Sequence[TruncSeries], lie: bool = False):
        self.source = tuple(source)
        if isinstance(images, Mapping):
            missing = [a for a in self.source if a not in images]
            if missing:
                raise KeyError(f"missing letter images: {missing}")
            images = [images[a] for a in self.source]
        self.images = list(images)
        if len(self.images) != len(self.source):
            raise KeyError("one image per source letter is required")
        for im in self.images:
            if im.constant():
                raise ValueError("letter images must have no constant term")
            if lie and not is_primitive(im):
                raise ValueError("letter image is not a Lie element")
        self.target = self.images[0].alphabet if self.images else ()
        self.maxdeg = self.images[0].maxdeg if self.images else 0

    def __call__(self, s: TruncSeries) -> TruncSeries:
        return apply_hom(self, s)


def apply_hom(h: SeriesHom, s: TruncSeries) -> TruncSeries:
    if tuple(s.alphabet) != h.source:
        raise KeyError(f"hom source {h.source} does not cover alphabet {s.alphabet}")
    n = h.maxdeg
    cache: dict = {(): TruncSeries.one(h.target, n)}

    def image(w: tuple) -> TruncSeries:
        r = cache.get(w)
        if r is None:
            r = image(w[:-1]) * h.images[w[-1]]
            cache[w] = r
        return r

    out: dict = {}
    for w, c in sorted(s.terms.items()):
        if len(w) > n:
            continue
        for u, v in image(w).terms.items():
            x = out.get(u, 0) + c * v
            if x:
                out[u] = x
            else:
                out.pop(u, None)
    return TruncSeries._raw(h.target, n, out)


def shuffle(u: tuple, v: tuple) -> dict:
    """Shuffle product of two words, as a word -> multiplicity map."""
    n = len(u) + len(v)
    out: dict = {}
    for pos in combinations(range(n), len(u)):
        w = [None] * n
        ps = set(pos)
        iu = iv = 0
        for k in range(n):
            if k in ps:
                w[k] = u[iu]
                iu += 1
            else:
                w[k] = v[iv]
                iv += 1
        t = tuple(w)
        out[t] = out.get(t, 0) + 1
    return out


def _all_words(k: int, n: int) -> Iterable[tuple]:
    if n == 0:
        yield ()
        return
    for w in _all_words(k, n - 1):
        for a in range(k):
            yield w + (a,)


def is_grouplike(g: TruncSeries) -> bool:
    """Shuffle criterion: <g,u><g,v> = <g, u sh v> for all |u|+|v| <= maxdeg."""
    if g.constant() != 1:
        return False
    k = len(g.alphabet)
    for total in range(2, g.maxdeg + 1):
        for a in range(1, total // 2 + 1):
            for u in _all_words(k, a):
                cu = g.coeff(u)
                for v in _all_words(k, total - a):
                    lhs = cu * g.coeff(v)
                    rhs = sum((m * g.coeff(w) for w, m in shuffle(u, v).items()), Fraction(0))
                    if lhs != rhs:
                        return False
    return True


def dynkin(s: TruncSeries) -> TruncSeries:
    """Dynkin operator w = a1...an -> [..[[a1,a2],a3],..,an] extended linearly."""
    out: dict = {}
    cache: dict = {}

    def r(w: tuple) -> dict:
        if w in cache:
            return cache[w]
        if len(w) <= 1:
            res = {w: 1}
        else:
            res = {}
            a = w[-1]
            for u, m in r(w[:-1]).items():
                res[u + (a,)] = res.get(u + (a,), 0) + m
                res[(a,) + u] = res.get((a,) + u, 0) - m
            res = {u: m for u, m in res.items() if m}
        cache[w] = res
        return res

    for w, c in s.terms.items():
        if not w:
            continue
        for u, m in r(w).items():
            v = out.get(u, 0) + c * m
            if v:
                out[u] = v
            else:
                out.pop(u, None)
    return s.like(out)


def is_primitive(p: TruncSeries) -> bool:
    """Lie criterion of Dynkin-Specht-Wever: r(p_n) = n p_n in every degree."""
    if p.constant():
        return False
    r = dynkin(p)
    for w, c in p.terms.items():
        if r.terms.get(w, 0) != len(w) * c:
            return False
    return all(w in p.terms for w in r.terms)


def lyndon_words(k: int, n: int) -> list:
    """Lyndon words of length n over k letters (Duval), in lexicographic order."""
    out = []
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if m == n:
            out.append(tuple(w))
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()
    return out


def lyndon_bracket(w: tuple, alphabet, maxdeg) -> TruncSeries:
    """Standard bracketing of a Lyndon word."""
    if len(w) == 1:
        return TruncSeries(alphabet, maxdeg, {w: 1})
    # standard factorisation: w = uv with v the longest proper Lyndon suffix
    for i in range(1, len(w)):
        v = w[i:]
        if _is_lyndon(v):
            u = w[:i]
            break
    return lyndon_bracket(u, alphabet, maxdeg).bracket(lyndon_bracket(v, alphabet, maxdeg))


def _is_lyndon(w: tuple) -> bool:
    return all(w < w[i:] + w[:i] for i in range(1, len(w)))


def bch(x: TruncSeries, y: TruncSeries) -> TruncSeries:
    """log(exp x exp y)."""
    return series_log(series_exp(x) * series_exp(y))
