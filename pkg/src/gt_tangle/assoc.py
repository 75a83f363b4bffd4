"""Associators, GRT and GT elements, their group laws and the bitorsor structure.

Series live in the free algebra on ``A``, ``B``.  A GT element (lam, f) stores
f(x, y) through x = exp(A), y = exp(B), so f(alpha, beta) means substituting
A -> log(alpha), B -> log(beta).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .coeffring import T, Coefficient, Scalar, Symbol, as_scalar, param, scalar_from_json, scalar_to_json, zeta, format_scalar
from .diagrams import CrossedBraid, PnAlgebra, PnElement, t_alphabet, t_pairs
from .freeseries import (
    SeriesHom,
    TruncSeries,
    apply_hom,
    bch,
    is_grouplike,
    lyndon_bracket,
    lyndon_words,
    shuffle,
)

__all__ = [
    "AB",
    "Associator",
    "GRTElement",
    "GTElement",
    "AssociatorError",
    "substitute",
    "pentagon_residual",
    "hexagon_residuals",
    "gt_pentagon_residual",
    "solve_associator",
    "grt_mul",
    "gt_mul",
    "grt_inverse",
    "torsor_act_left",
    "torsor_act_right",
    "torsor_divide",
    "twisted_inverse",
    "zeta_inv_table",
    "admissible_indices",
    "index_word",
    "formal_kz",
    "mzv_rules",
    "mzv_reduce",
    "formal_associator",
    "reference_associator",
    "word_index",
    "BraidImages",
]

AB = ("A", "B")


class AssociatorError(ValueError):
    """Raised when defining relations fail or an affine system is inconsistent."""


def _inv(c: Scalar) -> Scalar:
    return 1 / c if isinstance(c, (int, Fraction)) else c.inverse()


def _letters(maxdeg: int):
    return TruncSeries.letter(AB, maxdeg, "A"), TruncSeries.letter(AB, maxdeg, "B")


def substitute(s: TruncSeries, a, b, one):
    """s(a, b) for elements a, b of any algebra with ``*``, ``+`` and ``scale``."""
    cache: dict = {(): one}

    def image(w):
        r = cache.get(w)
        if r is None:
            r = image(w[:-1]) * (a if w[-1] == 0 else b)
            cache[w] = r
        return r

    out = one.scale(0)
    for w, c in sorted(s.terms.items(), key=lambda t: (len(t[0]), t[0])):
        out = out + image(w).scale(c)
    return out


def _sub(s: TruncSeries, a: TruncSeries, b: TruncSeries) -> TruncSeries:
    return apply_hom(SeriesHom(AB, [a, b]), s)


# ---------------------------------------------------------------------------
# residuals

_PENTAGON_SLOTS = {
    # name: (A-block, B-block) as (I, J), (J, K) strand sets
    "1,2,34": ((1,), (2,), (3, 4)),
    "12,3,4": ((1, 2), (3,), (4,)),
    "2,3,4": ((2,), (3,), (4,)),
    "1,23,4": ((1,), (2, 3), (4,)),
    "1,2,3": ((1,), (2,), (3,)),
}


def _insert_pn(s: TruncSeries, slot: str, alg: PnAlgebra) -> PnElement:
    i, j, k = _PENTAGON_SLOTS[slot]
    return substitute(s.truncate(alg.maxdeg), alg.block(i, j), alg.block(j, k), alg.one())


def pentagon_residual(s: TruncSeries, maxdeg: int | None = None) -> PnElement:
    """s_{1,2,34} s_{12,3,4} (s_{2,3,4} s_{1,23,4} s_{1,2,3})^{-1} - 1 in U p_4."""
    n = s.maxdeg if maxdeg is None else maxdeg
    alg = PnAlgebra(4, n)
    inv = s.truncate(n).inverse()
    lhs = _insert_pn(s, "1,2,34", alg) * _insert_pn(s, "12,3,4", alg)
    rhs_inv = _insert_pn(inv, "1,2,3", alg) * _insert_pn(inv, "1,23,4", alg) * _insert_pn(inv, "2,3,4", alg)
    return lhs * rhs_inv - alg.one()


def _pentagon_linear(b: TruncSeries, alg: PnAlgebra) -> PnElement:
    sgn = {"1,2,34": 1, "12,3,4": 1, "2,3,4": -1, "1,23,4": -1, "1,2,3": -1}
    out = alg.zero()
    for slot, e in sgn.items():
        out = out + _insert_pn(b, slot, alg).scale(e)
    return out


def hexagon_residuals(s: TruncSeries, mu: Scalar | None = None, lam: Scalar | None = None) -> tuple:
    """(2-cycle residual, hexagon residual) as series on {A, B}.

    ``mu`` given: the associator hexagon.  ``lam`` given: the GT hexagon with
    m = (lam - 1)/2.  Neither: the GRT hexagon.
    """
    n = s.maxdeg
    A, B = _letters(n)
    one = TruncSeries.one(AB, n)
    two = _sub(s, A, B) * _sub(s, B, A) - one
    if lam is not None:
        m = (as_scalar(lam) - 1) * Fraction(1, 2)
        logz = -bch(A, B)
        zm, ym, xm = (logz.scale(m)).exp(), B.scale(m).exp(), A.scale(m).exp()
        hexa = _sub(s, logz, A) * zm * _sub(s, B, logz) * ym * s * xm - one
    else:
        C = -A - B
        if mu is None:
            hexa = _sub(s, C, A) * _sub(s, B, C) * s - one
        else:
            h = Fraction(1, 2) * as_scalar(mu)
            hexa = (
                A.scale(h).exp() * _sub(s, C, A) * C.scale(h).exp() * _sub(s, B, C) * B.scale(h).exp() * s - one
            )
    return two, hexa


def _hexagon_linear(b: TruncSeries) -> tuple:
    n = b.maxdeg
    A, B = _letters(n)
    C = -A - B
    return _sub(b, A, B) + _sub(b, B, A), _sub(b, C, A) + _sub(b, B, C) + b


# ---------------------------------------------------------------------------
# elements


@dataclass
class Associator:
    mu: Scalar
    phi: TruncSeries
    info: dict = field(default_factory=dict, compare=False)

    @property
    def maxdeg(self) -> int:
        return self.phi.maxdeg

    def truncate(self, n: int) -> "Associator":
        return Associator(self.mu, self.phi.truncate(n), dict(self.info))

    def residuals(self) -> dict:
        two, hexa = hexagon_residuals(self.phi, mu=self.mu)
        return {"2-cycle": two, "hexagon": hexa, "pentagon": pentagon_residual(self.phi)}

    def is_valid(self) -> bool:
        return is_grouplike(self.phi) and all(not r.terms for r in self.residuals().values())

    def to_json(self) -> dict:
        return {"kind": "associator", "mu": scalar_to_json(self.mu), "maxdeg": self.maxdeg, "series": self.phi.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "Associator":
        if data.get("kind") != "associator":
            raise ValueError("not an associator record")
        return cls(scalar_from_json(data["mu"]), TruncSeries.from_json(data["series"]))


@dataclass
class GRTElement:
    c: Scalar
    g: TruncSeries
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        self.c = as_scalar(self.c)
        if self.check:
            bad = self.defects()
            if bad:
                raise AssociatorError(f"GRT relations fail: {', '.join(bad)}")

    @property
    def maxdeg(self) -> int:
        return self.g.maxdeg

    def defects(self) -> list:
        out = []
        if not is_grouplike(self.g):
            out.append("group-like")
        two, hexa = hexagon_residuals(self.g)
        if two.terms:
            out.append("2-cycle")
        if hexa.terms:
            out.append("hexagon")
        if pentagon_residual(self.g).terms:
            out.append("pentagon")
        return out

    @classmethod
    def identity(cls, maxdeg: int) -> "GRTElement":
        return cls(Fraction(1), TruncSeries.one(AB, maxdeg), check=False)

    def __eq__(self, other):
        return isinstance(other, GRTElement) and self.c == other.c and self.g == other.g

    def to_json(self) -> dict:
        return {"kind": "grt", "c": scalar_to_json(self.c), "maxdeg": self.maxdeg, "series": self.g.to_json()}


@dataclass
class GTElement:
    lam: Scalar
    f: TruncSeries
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        self.lam = as_scalar(self.lam)
        if self.check:
            bad = self.defects()
            if bad:
                raise AssociatorError(f"GT relations fail: {', '.join(bad)}")

    @property
    def maxdeg(self) -> int:
        return self.f.maxdeg

    def defects(self, reference: Associator | None = None) -> list:
        out = []
        if not is_grouplike(self.f):
            out.append("group-like")
        two, hexa = hexagon_residuals(self.f, lam=self.lam)
        if two.terms:
            out.append("2-cycle")
        if hexa.terms:
            out.append("hexagon")
        if not gt_pentagon_residual(self, reference).is_zero():
            out.append("pentagon")
        return out

    @classmethod
    def identity(cls, maxdeg: int) -> "GTElement":
        return cls(Fraction(1), TruncSeries.one(AB, maxdeg), check=False)

    def __eq__(self, other):
        return isinstance(other, GTElement) and self.lam == other.lam and self.f == other.f

    def to_json(self) -> dict:
        return {"kind": "gt", "lambda": scalar_to_json(self.lam), "maxdeg": self.maxdeg, "series": self.f.to_json()}


# ---------------------------------------------------------------------------
# solver


def _affine_solve(rows: list, rhs: list, ncols: int):
    """Solve M x = r (M rational, r scalar).  Pivot on the lowest column.

    Returns (pivot rows {col: (coeffs over free cols, rhs)}, free columns).
    """
    pivots: dict = {}
    for row, r in zip(rows, rhs):
        row = dict(row)
        while row:
            c = min(row)
            if c not in pivots:
                f = row[c]
                pivots[c] = ({j: v / f for j, v in row.items()}, r * (Fraction(1) / f))
                break
            prow, pr = pivots[c]
            f = row[c]
            for j, v in prow.items():
                nv = row.get(j, 0) - f * v
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
            r = r - pr * f
        else:
            if r:
                raise AssociatorError(f"inconsistent affine system (residual {format_scalar(r)})")
    for c in sorted(pivots, reverse=True):
        row, r = pivots[c]
        for j in [j for j in row if j != c and j in pivots]:
            f = row.pop(j)
            prow, pr = pivots[j]
            for jj, v in prow.items():
                if jj == j:
                    continue
                nv = row.get(jj, 0) - f * v
                if nv:
                    row[jj] = nv
                else:
                    row.pop(jj, None)
            r = r - pr * f
        pivots[c] = (row, r)
    free = [j for j in range(ncols) if j not in pivots]
    return pivots, free


def _vector_rows(tag: str, x, keyfn) -> dict:
    return {(tag, keyfn(k)): v for k, v in x.terms.items()}


def solve_associator(
    mu: Scalar,
    maxdeg: int,
    policy: str = "pick-zero",
    given: Mapping | None = None,
    tag: str = "assoc",
) -> Associator:
    """Degree-by-degree affine solve of the pentagon, 2-cycle and hexagon.

    The unknown at degree n is the degree-n part of log(phi), written in the
    Lyndon basis (words in lexicographic order).  ``policy`` decides the value
    of each free coordinate: ``introduce-free-symbols`` (fresh Param symbols
    ``p[tag,n,i]``), ``pick-zero`` or ``pick-given`` (``given[(n, i)]``).
    """
    if policy not in ("introduce-free-symbols", "pick-zero", "pick-given"):
        raise ValueError(f"unknown parameter policy {policy!r}")
    mu = as_scalar(mu)
    log_phi = TruncSeries.zero(AB, maxdeg)
    free_dims = {}
    params = {}
    for n in range(1, maxdeg + 1):
        phi = log_phi.truncate(n).exp()
        alg = PnAlgebra(4, n)
        pent = pentagon_residual(phi, n)
        two, hexa = hexagon_residuals(phi, mu=mu)
        lower = [r for r in (pent, two, hexa) if r.lowest_degree() is not None and r.lowest_degree() < n]
        if lower:
            raise AssociatorError(f"lower-degree residual survived at degree {n}")
        basis = [lyndon_bracket(w, AB, n) for w in lyndon_words(2, n)]
        col_rows: dict = {}
        for j, b in enumerate(basis):
            lp = _pentagon_linear(b, alg)
            l2, lh = _hexagon_linear(b)
            for key, v in _vector_rows("P", lp, lambda m: m).items():
                col_rows.setdefault(key, {})[j] = v
            for key, v in _vector_rows("2", l2, lambda w: w).items():
                col_rows.setdefault(key, {})[j] = v
            for key, v in _vector_rows("H", lh, lambda w: w).items():
                col_rows.setdefault(key, {})[j] = v
        rhs_map = {}
        rhs_map.update({k: -v for k, v in _vector_rows("P", pent, lambda m: m).items()})
        rhs_map.update({k: -v for k, v in _vector_rows("2", two, lambda w: w).items()})
        rhs_map.update({k: -v for k, v in _vector_rows("H", hexa, lambda w: w).items()})
        keys = sorted(set(col_rows) | set(rhs_map), key=repr)
        rows = [col_rows.get(k, {}) for k in keys]
        rhs = [rhs_map.get(k, Fraction(0)) for k in keys]
        pivots, free = _affine_solve(rows, rhs, len(basis))
        free_dims[n] = len(free)
        values: dict = {}
        for i, j in enumerate(free):
            if policy == "introduce-free-symbols":
                values[j] = param(tag, n, i)
                params[(n, i)] = values[j]
            elif policy == "pick-given":
                values[j] = as_scalar((given or {}).get((n, i), 0))
            else:
                values[j] = Fraction(0)
        for c, (row, r) in pivots.items():
            v = r
            for j, a in row.items():
                if j != c:
                    v = v - a * values[j]
            values[c] = v
        for j, b in enumerate(basis):
            if values.get(j):
                log_phi = log_phi + TruncSeries(AB, maxdeg, b.terms).scale(values[j])
    p = Associator(mu, log_phi.exp(), {"free_dims": free_dims, "policy": policy})
    return p


# ---------------------------------------------------------------------------
# group laws


def _scale_letters(s: TruncSeries, c: Scalar) -> TruncSeries:
    """s(cA, cB)."""
    return s.like({w: v * c ** len(w) if c != 1 else v for w, v in s.terms.items()})


def grt_mul(a: GRTElement, b: GRTElement) -> GRTElement:
    """(c2, g2) o (c1, g1) for a = (c2, g2), b = (c1, g1); both formulas are compared."""
    c2, g2 = a.c, a.g
    c1, g1 = b.c, b.g
    n = min(a.maxdeg, b.maxdeg)
    g1, g2 = g1.truncate(n), g2.truncate(n)
    A, B = _letters(n)
    k = _inv(c2)
    g2i = g2.inverse()
    first = _sub(g1, g2 * A.scale(k) * g2i, B.scale(k)) * g2
    second = g2 * _sub(g1, A.scale(k), g2i * B.scale(k) * g2)
    if first != second:
        raise AssociatorError("the two GRT product formulas disagree")
    return GRTElement(c2 * c1, first, check=False)


def gt_mul(a: GTElement, b: GTElement) -> GTElement:
    """(l2, f2) o (l1, f1) for a = (l2, f2), b = (l1, f1); both formulas are compared."""
    l2, f2 = a.lam, a.f
    l1, f1 = b.lam, b.f
    n = min(a.maxdeg, b.maxdeg)
    f1, f2 = f1.truncate(n), f2.truncate(n)
    A, B = _letters(n)
    f2i = f2.inverse()
    first = _sub(f1, f2 * A.scale(l2) * f2i, B.scale(l2)) * f2
    second = f2 * _sub(f1, A.scale(l2), f2i * B.scale(l2) * f2)
    if first != second:
        raise AssociatorError("the two GT product formulas disagree")
    return GTElement(l2 * l1, first, check=False)


def _solve_substitution(target: TruncSeries, a: TruncSeries, b: TruncSeries) -> TruncSeries:
    """The unique H with H(a, b) = target when a = A + higher, b = B + higher."""
    h = target
    for _ in range(target.maxdeg + 2):
        err = target - _sub(h, a, b)
        if not err.terms:
            return h
        h = h + err
    raise AssociatorError("substitution inverse did not converge")


def twisted_inverse(phi: TruncSeries) -> TruncSeries:
    """H with H(phi A phi^-1, B) = phi^-1; the GRT_1 inverse of phi."""
    if phi.constant() != 1:
        raise ValueError("twisted_inverse needs constant term 1")
    A, B = _letters(phi.maxdeg)
    pi = phi.inverse()
    return _solve_substitution(pi, phi * A * pi, B)


def grt_inverse(s: GRTElement) -> GRTElement:
    c = s.c
    h = twisted_inverse(s.g)
    # (c, g)^{-1} = (1/c, h(cA, cB)) with h the c=1 inverse
    return GRTElement(_inv(c), _scale_letters(h, c), check=False)


def torsor_act_left(s: GRTElement, p: Associator) -> Associator:
    n = min(s.maxdeg, p.maxdeg)
    c, g, phi = s.c, s.g.truncate(n), p.phi.truncate(n)
    A, B = _letters(n)
    k = _inv(c)
    gi = g.inverse()
    first = _sub(phi, g * A.scale(k) * gi, B.scale(k)) * g
    second = g * _sub(phi, A.scale(k), gi * B.scale(k) * g)
    if first != second:
        raise AssociatorError("the two left-action formulas disagree")
    return Associator(p.mu * k, first)


def torsor_act_right(p: Associator, t: GTElement) -> Associator:
    n = min(t.maxdeg, p.maxdeg)
    lam, f, phi = t.lam, t.f.truncate(n), p.phi.truncate(n)
    A, B = _letters(n)
    mu = p.mu
    pinv = phi.inverse()
    first = _sub(f, phi * A.scale(mu) * pinv, B.scale(mu)) * phi
    second = phi * _sub(f, A.scale(mu), pinv * B.scale(mu) * phi)
    if first != second:
        raise AssociatorError("the two right-action formulas disagree")
    return Associator(lam * mu, first)


def torsor_divide(p1: Associator, p2: Associator, side: str = "left"):
    """The unique s with s o p1 = p2 (left) or t with p1 o t = p2 (right)."""
    n = min(p1.maxdeg, p2.maxdeg)
    phi1, phi2 = p1.phi.truncate(n), p2.phi.truncate(n)
    A, B = _letters(n)
    if side == "left":
        c = p1.mu * _inv(p2.mu)
        k = _inv(c)
        g = TruncSeries.one(AB, n)
        for _ in range(n + 2):
            new = _sub(phi1, g * A.scale(k) * g.inverse(), B.scale(k)).inverse() * phi2
            if new == g:
                break
            g = new
        out = GRTElement(c, g, check=False)
        if torsor_act_left(out, p1).phi != phi2:
            raise AssociatorError("torsor division failed: inputs are not both associators")
        return out
    if side == "right":
        mu1 = p1.mu
        lam = p2.mu * _inv(mu1)
        pinv = phi1.inverse()
        scaled = _solve_substitution(phi2 * pinv, phi1 * A * pinv, B)
        f = _scale_letters(scaled, _inv(mu1))
        out = GTElement(lam, f, check=False)
        if torsor_act_right(p1, out).phi != phi2:
            raise AssociatorError("torsor division failed: inputs are not both associators")
        return out
    raise ValueError("side must be 'left' or 'right'")


# ---------------------------------------------------------------------------
# inversed zeta values and the formal KZ series


def admissible_indices(maxweight: int, minweight: int = 2) -> list:
    """Admissible (k_1, ..., k_m) with k_m >= 2 and weight in [minweight, maxweight]."""
    out = []

    def comps(total):
        if total == 0:
            yield ()
            return
        for first in range(1, total + 1):
            for rest in comps(total - first):
                yield (first,) + rest

    for w in range(minweight, maxweight + 1):
        for k in comps(w):
            if k[-1] >= 2:
                out.append(k)
    return out


def index_word(k: Sequence[int]) -> tuple:
    """Letter indices of A^{k_m-1} B ... A^{k_1-1} B."""
    out = []
    for ki in reversed(k):
        out.extend([0] * (ki - 1) + [1])
    return tuple(out)


def word_index(w: tuple):
    """Inverse of ``index_word`` for admissible words, else None."""
    if not w or w[0] != 0 or w[-1] != 1:
        return None
    blocks = []
    run = 0
    for a in w:
        run += 1
        if a == 1:
            blocks.append(run)
            run = 0
    return tuple(reversed(blocks))


def zeta_inv_table(phi: TruncSeries, maxweight: int | None = None) -> dict:
    n = phi.maxdeg if maxweight is None else maxweight
    h = twisted_inverse(phi.truncate(n))
    return {k: (-1) ** len(k) * h.coeff(index_word(k)) for k in admissible_indices(n)}


def formal_kz(maxdeg: int) -> TruncSeries:
    """Group-like series with admissible coefficients (-1)^m zeta(k).

    The other coefficients follow from the shuffle relations with the
    regularisation coeff(A) = coeff(B) = 0.
    """

    @lru_cache(maxsize=None)
    def c(w: tuple) -> Scalar:
        if not w:
            return Fraction(1)
        k = word_index(w)
        if k is not None:
            return zeta(*k) * (-1) ** len(k)
        if w[-1] == 0:
            r = 0
            while r < len(w) and w[-1 - r] == 0:
                r += 1
            v = w[:-1]
            return _regularise(v, 0, r, c, from_end=True)
        s = 0
        while s < len(w) and w[s] == 1:
            s += 1
        v = w[1:]
        return _regularise(v, 1, s, c, from_end=False)

    terms = {}
    for d in range(maxdeg + 1):
        for w in _all_words(d):
            val = c(w)
            if val:
                terms[w] = val
    return TruncSeries(AB, maxdeg, terms)


def _regularise(v: tuple, letter: int, count: int, c, from_end: bool) -> Scalar:
    # 0 = coeff(letter) * coeff(v) = sum over shuffles of (letter) with v
    target = v + (letter,) if from_end else (letter,) + v
    total: Scalar = Fraction(0)
    hits = 0
    for u, mult in shuffle((letter,), v).items():
        if u == target:
            hits += mult
        else:
            total = total + c(u) * mult
    assert hits == count
    return total * Fraction(-1, hits)


def _all_words(d: int):
    if d == 0:
        yield ()
        return
    for w in _all_words(d - 1):
        yield w + (0,)
        yield w + (1,)


# ---------------------------------------------------------------------------
# multiple zeta relations
#
# Index tuples here follow the module convention (k_1, ..., k_m) with k_m >= 2.
# The reversed tuple r has r_1 >= 2 and the word x^{r_1-1} y ... x^{r_m-1} y;
# products of convergent words shuffle, products of index tuples stuffle.


def _mzv_word(k: tuple) -> tuple:
    out = []
    for a in reversed(k):
        out += [0] * (a - 1) + [1]
    return tuple(out)


def _mzv_index(w: tuple):
    """Module-convention index of a word, or None when it diverges."""
    if not w or w[0] != 0 or w[-1] != 1:
        return None
    blocks, run = [], 0
    for a in w:
        run += 1
        if a == 1:
            blocks.append(run)
            run = 0
    return tuple(reversed(blocks))


@lru_cache(maxsize=None)
def _stuffle(r: tuple, s: tuple) -> tuple:
    if not r:
        return ((s, 1),)
    if not s:
        return ((r, 1),)
    out: dict = {}
    for head, rest in ((r[0], _stuffle(r[1:], s)), (s[0], _stuffle(r, s[1:])), (r[0] + s[0], _stuffle(r[1:], s[1:]))):
        for t, m in rest:
            out[(head,) + t] = out.get((head,) + t, 0) + m
    return tuple(out.items())


_MZV_RULES: dict = {}
_MZV_DONE = [1]


def _mzv_rows(w: int) -> list:
    """Rows (linear part on weight-w indices, constant) of relations sum = 0."""
    rows = []
    if w == 2:
        rows.append(({(2,): Fraction(1)}, T ** 2 * Fraction(1, 24)))
    for a in range(2, w // 2 + 1):
        for k in admissible_indices(a, a):
            for l in admissible_indices(w - a, w - a):
                prod = mzv_reduce(zeta(*k)) * mzv_reduce(zeta(*l))
                lin: dict = {}
                for u, m in shuffle(_mzv_word(k), _mzv_word(l)).items():
                    idx = _mzv_index(u)
                    lin[idx] = lin.get(idx, 0) + m
                rows.append((lin, -prod))
                lin = {}
                for r, m in _stuffle(tuple(reversed(k)), tuple(reversed(l))):
                    idx = tuple(reversed(r))
                    lin[idx] = lin.get(idx, 0) + m
                rows.append((lin, -prod))
    for k in admissible_indices(w - 1, w - 1):
        # regularised relation: y sh w - y * w involves convergent words only
        lin = {}
        for u, m in shuffle((1,), _mzv_word(k)).items():
            idx = _mzv_index(u)
            key = idx if idx is not None else ("div", u)
            lin[key] = lin.get(key, 0) + m
        for r, m in _stuffle((1,), tuple(reversed(k))):
            idx = tuple(reversed(r))
            key = idx if r[0] >= 2 else ("div", _mzv_word(idx))
            lin[key] = lin.get(key, 0) - m
        if all(v == 0 for key, v in lin.items() if key[0] == "div"):
            rows.append(({key: v for key, v in lin.items() if key[0] != "div"}, Fraction(0)))
    return rows


def _mzv_extend(w: int) -> None:
    cols = sorted(admissible_indices(w, w), key=lambda k: (-len(k), k))
    rows = [(dict(l), c) for l, c in _mzv_rows(w)]
    pivots: list = []
    for col in cols:
        pos = next((i for i, (l, _) in enumerate(rows) if l.get(col)), None)
        if pos is None:
            continue
        lin, const = rows.pop(pos)
        inv = Fraction(1) / lin[col]
        lin = {k: v * inv for k, v in lin.items() if v}
        const = const * inv
        new_rows = []
        for l, c in rows:
            f = l.get(col)
            if f:
                l = {k: l.get(k, 0) - f * lin.get(k, 0) for k in set(l) | set(lin)}
                l = {k: v for k, v in l.items() if v}
                c = c - const * f
            new_rows.append((l, c))
        rows = new_rows
        for i, (pcol, (pl, pc)) in enumerate(pivots):
            f = pl.get(col)
            if f:
                pl = {k: pl.get(k, 0) - f * lin.get(k, 0) for k in set(pl) | set(lin)}
                pivots[i] = (pcol, ({k: v for k, v in pl.items() if v}, pc - const * f))
        pivots.append((col, (lin, const)))
    for l, c in rows:
        if not l and as_scalar(c) != 0:
            raise AssociatorError(f"inconsistent zeta relations in weight {w}")
    for col, (lin, const) in pivots:
        val = -as_scalar(const)
        for k, v in lin.items():
            if k != col:
                val = val - zeta(*k) * v
        _MZV_RULES[Symbol("zeta", col)] = val


def mzv_rules(maxweight: int) -> dict:
    """zeta(k) -> reduced value for weight <= maxweight.

    The relations are the regularised double shuffle relations together with
    zeta(2) = -T^2/24 (T stands for 2 pi sqrt(-1)).  Indices not eliminated
    stay as free symbols.
    """
    while _MZV_DONE[0] < maxweight:
        _mzv_extend(_MZV_DONE[0] + 1)
        _MZV_DONE[0] += 1
    return {s: v for s, v in _MZV_RULES.items() if s.weight <= maxweight}


def mzv_reduce(x: Scalar) -> Scalar:
    """Rewrite the zeta symbols of ``x`` through :func:`mzv_rules`."""
    if not isinstance(x, Coefficient):
        return x
    ws = [s.weight for s in x.symbols() if s.kind == "zeta"]
    if not ws:
        return x
    rules = mzv_rules(max(ws))
    return as_scalar(x.substitute({s: rules[s] for s in x.symbols() if s in rules}))


def formal_associator(maxdeg: int, normalized: bool = True) -> Associator:
    """The formal KZ associator with coefficients reduced by :func:`mzv_reduce`.

    ``normalized`` gives (1, phi(A/T, B/T)); otherwise (T, phi).
    """
    phi = formal_kz(maxdeg)
    phi = phi.like({w: mzv_reduce(c) for w, c in phi.terms.items() if mzv_reduce(c) != 0})
    if normalized:
        return Associator(Fraction(1), _scale_letters(phi, T.inverse()), {"mode": "formal"})
    return Associator(T, phi, {"mode": "formal"})


# ---------------------------------------------------------------------------
# braid images under rho_n(p)


class BraidImages:
    """Images of sigma_i in the crossed product K[S_n] * U p_n under rho_n(p).

    ``model="free"`` keeps pure parts as free series over ``t_alphabet(n)``
    (relations then hold after realising as chord diagrams); ``"normal"`` uses
    the normal-form algebra U p_n.
    """

    def __init__(self, p: Associator, n: int, maxdeg: int | None = None, model: str = "free"):
        self.p = p
        self.n = n
        self.maxdeg = p.maxdeg if maxdeg is None else maxdeg
        self.model = model
        self._cache: dict = {}
        if model == "normal":
            self.alg = PnAlgebra(n, self.maxdeg)
        elif model != "free":
            raise ValueError("model must be 'free' or 'normal'")

    def one(self):
        if self.model == "normal":
            return self.alg.one()
        return TruncSeries.one(t_alphabet(self.n), self.maxdeg)

    def t(self, i: int, j: int):
        if self.model == "normal":
            return self.alg.t(i, j)
        pairs = t_pairs(self.n)
        return TruncSeries(t_alphabet(self.n), self.maxdeg, {(pairs.index((min(i, j), max(i, j))),): 1})

    def block(self, left, right):
        out = self.one().scale(0)
        for i in left:
            for j in right:
                out = out + self.t(i, j)
        return out

    def insert(self, s: TruncSeries, left, mid, right):
        """s(t_{left,mid}, t_{mid,right})."""
        s = s.truncate(self.maxdeg)
        a, b = self.block(left, mid), self.block(mid, right)
        if self.model == "free":
            return apply_hom(SeriesHom(AB, [a, b]), s)
        return substitute(s, a, b, self.one())

    def exp(self, x):
        return x.exp()

    def pure(self, x) -> CrossedBraid:
        return CrossedBraid(self.n, {tuple(range(self.n)): x})

    def transposition(self, i: int) -> tuple:
        perm = list(range(self.n))
        perm[i - 1], perm[i] = perm[i], perm[i - 1]
        return tuple(perm)

    def phi_at(self, i: int):
        """phi_{1..i-1, i, i+1}."""
        key = ("phi", i)
        if key not in self._cache:
            self._cache[key] = self.insert(self.p.phi, range(1, i), (i,), (i + 1,))
        return self._cache[key]

    def sigma(self, i: int, power: int = 1) -> CrossedBraid:
        """rho(sigma_i)^power for power = +1 or -1."""
        key = ("sigma", i, power)
        if key in self._cache:
            return self._cache[key]
        if not 1 <= i < self.n:
            raise IndexError(f"sigma_{i} outside B_{self.n}")
        ph = self.phi_at(i)
        half = self.t(i, i + 1).scale(self.p.mu * Fraction(1, 2))
        tau = self.transposition(i)
        if power == 1:
            core = CrossedBraid(self.n, {tau: half.exp()})
            val = self.pure(ph.inverse()) * core * self.pure(ph)
        else:
            core = CrossedBraid(self.n, {tau: (-half).exp()})
            val = self.pure(ph.inverse()) * core * self.pure(ph)
        self._cache[key] = val
        return val

    def word(self, letters: Sequence[int]) -> CrossedBraid:
        """Product of sigma_{|l|}^{sign l}, leftmost on top."""
        out = self.pure(self.one())
        for l in letters:
            out = out * self.sigma(abs(l), 1 if l > 0 else -1)
        return out

    def x(self, i: int, j: int) -> CrossedBraid:
        """x_ij = (s_{j-1}..s_{i+1}) s_i^2 (s_{j-1}..s_{i+1})^{-1}."""
        if i > j:
            i, j = j, i
        conj = list(range(j - 1, i, -1))
        return self.word(conj + [i, i] + [-k for k in reversed(conj)])

    def x_block(self, left, right) -> CrossedBraid:
        out = self.pure(self.one())
        for a in left:
            for b in right:
                out = out * self.x(a, b)
        return out


_REFERENCE: dict = {}


def reference_associator(maxdeg: int) -> Associator:
    if maxdeg not in _REFERENCE:
        _REFERENCE[maxdeg] = solve_associator(Fraction(1), maxdeg, "pick-zero")
    return _REFERENCE[maxdeg]


def gt_pentagon_residual(t: GTElement, reference: Associator | None = None) -> PnElement:
    """f_{1,2,34} f_{12,3,4} - f_{2,3,4} f_{1,23,4} f_{1,2,3}, pushed through rho_4(p)."""
    n = t.maxdeg
    p = reference or reference_associator(n)
    imgs = BraidImages(p.truncate(n), 4, n, model="normal")

    def f_at(left, mid, right):
        x = imgs.x_block(left, mid).pure()
        y = imgs.x_block(mid, right).pure()
        return substitute(t.f, x.log(), y.log(), imgs.one())

    lhs = f_at((1,), (2,), (3, 4)) * f_at((1, 2), (3,), (4,))
    rhs = f_at((2,), (3,), (4,)) * f_at((1,), (2, 3), (4,)) * f_at((1,), (2,), (3,))
    return lhs - rhs

