"""Evaluation of tangle words into chord diagrams, group actions, twistors and gamma0.

An :class:`Evaluator` maps ABC words letter by letter to unreduced diagram
combinations, composes them and reduces once on the final skeleton.  The GT
side is always represented in chord coordinates through a fixed associator.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .assoc import (
    Associator,
    AssociatorError,
    BraidImages,
    GRTElement,
    GTElement,
    _affine_solve,
    admissible_indices,
    formal_associator,
    mzv_reduce,
    reference_associator,
    substitute,
    zeta_inv_table,
)
from .coeffring import Coefficient, Scalar, as_scalar
from .diagrams import (
    DOWN,
    UP,
    ChordVector,
    CrossedBraid,
    PnAlgebra,
    PnElement,
    RawVector,
    Skeleton,
    compose_raw,
    cut,
    delete,
    double,
    perm_compose,
    quotient,
    tensor,
)
from .freeseries import TruncSeries
from .tangles import (
    ABCWord,
    Braid,
    BraidExpr,
    Cap,
    Cup,
    Exp,
    Gen,
    Inv,
    Letter,
    Log2,
    Pow,
    Prod,
    builtin,
    connect_sum_words,
)

__all__ = [
    "Evaluator",
    "FAt",
    "LogOf",
    "IBraid",
    "IRaw",
    "InfWord",
    "Twistor",
    "GRTAction",
    "identity_raw",
    "raw_inverse",
    "chord_inverse",
    "lambda_nu",
    "evaluate",
    "kontsevich",
    "grt_act",
    "gt_act",
    "transform_word",
    "fold",
    "solve_twistor",
    "twistor_power",
    "gt_twistor",
    "gamma0",
    "congruence_report",
    "decompose",
    "scale_grading",
]


# ---------------------------------------------------------------------------
# helpers


def identity_raw(eps: Sequence[int], maxdeg: int) -> RawVector:
    return RawVector.unit(Skeleton.string_link(tuple(eps)), maxdeg)


def raw_inverse(rv: RawVector) -> RawVector:
    """Compositional inverse of an element with invertible degree-0 part."""
    c = rv.terms.get(())
    if not c:
        raise ValueError("element has no invertible constant term")
    inv0 = 1 / c if not isinstance(c, Coefficient) else c.inverse()
    one = RawVector.unit(rv.skeleton, rv.maxdeg)
    x = one - rv.scale(inv0)
    out, p = one, one
    while True:
        p = compose_raw(p, x)
        if not p.terms:
            return out.scale(inv0)
        out = out + p


def chord_inverse(v: ChordVector) -> ChordVector:
    return raw_inverse(v.to_raw()).reduce()


def _place(eps: Sequence[int], pos: int, piece: RawVector) -> RawVector:
    """Identity strands around a one-strand piece at position ``pos``."""
    eps = tuple(eps)
    n = piece.maxdeg
    out = piece
    if pos > 0:
        out = tensor(identity_raw(eps[:pos], n), out)
    if pos + 1 < len(eps):
        out = tensor(out, identity_raw(eps[pos + 1 :], n))
    return out


def _insert_series(s: TruncSeries, eps: Sequence[int], k: int, maxdeg: int, inverse: bool = False) -> RawVector:
    """s(t_{1..k,k+1}, t_{k+1,k+2}) realised on the string link ``eps``."""
    eps = tuple(eps)
    if k == 0:
        return identity_raw(eps, maxdeg)
    alg = PnAlgebra(len(eps), maxdeg)
    v = substitute(s.truncate(maxdeg), alg.block(range(1, k + 1), (k + 1,)), alg.block((k + 1,), (k + 2,)), alg.one())
    if inverse:
        v = v.inverse()
    return v.to_raw(eps)


# ---------------------------------------------------------------------------
# correction terms


def _lambda_letters(o: int) -> tuple:
    if o == DOWN:
        return Cap(1, 0, (DOWN,), "right"), (DOWN, UP, DOWN), Cup(0, 1, (DOWN,), "left")
    return Cap(1, 0, (UP,), "left"), (UP, DOWN, UP), Cup(0, 1, (UP,), "right")


def lambda_nu(s, orientation: int, maxdeg: int | None = None) -> tuple:
    """(Lambda, nu) on one strand for a group-like series, GRT element or associator."""
    if isinstance(s, Associator):
        s = s.phi
    elif isinstance(s, GRTElement):
        s = s.g
    n = s.maxdeg if maxdeg is None else maxdeg
    top, eps, bot = _lambda_letters(orientation)
    mid = _insert_series(s, eps, 1, n)
    lam = compose_raw(RawVector.unit(top.skeleton(), n), compose_raw(mid, RawVector.unit(bot.skeleton(), n)))
    cv = lam.reduce()
    return cv, chord_inverse(cv)


# ---------------------------------------------------------------------------
# internal braid expressions and letters


@dataclass(frozen=True, eq=False)
class FAt(BraidExpr):
    """f(log x_{I,J}, log x_{J,K}) for a group-like series f in A, B."""

    f: TruncSeries
    left: tuple
    mid: tuple
    right: tuple

    def perm(self, n):
        if max(self.left + self.mid + self.right) > n:
            raise IndexError("strand block beyond the braid width")
        return tuple(range(n))

    def __str__(self):
        b = lambda xs: "".join(map(str, xs))
        return f"f[{b(self.left)},{b(self.mid)},{b(self.right)}]"


@dataclass(frozen=True)
class LogOf(BraidExpr):
    """log of a unipotent pure braid expression."""

    x: BraidExpr

    def perm(self, n):
        if self.x.perm(n) != tuple(range(n)):
            raise ValueError(f"log argument {self.x} is not pure")
        return tuple(range(n))

    def __str__(self):
        return f"log({self.x})"


@dataclass(frozen=True, eq=False)
class IRaw(Letter):
    """A precomputed piece given by its diagram combination."""

    raw: RawVector

    @property
    def source(self):
        return self.raw.skeleton.source

    @property
    def target(self):
        return self.raw.skeleton.target

    def skeleton(self):
        return self.raw.skeleton

    def __str__(self):
        return f"raw[{len(self.raw)} terms]"


@dataclass(frozen=True, eq=False)
class IBraid(Letter):
    """An infinitesimal braid: a crossed element on strands of orientation ``orients``."""

    orients: tuple
    x: CrossedBraid

    @property
    def source(self):
        return self.orients

    @property
    def target(self):
        perms = list(self.x.parts)
        p = perms[0]
        out = [0] * len(p)
        for i, j in enumerate(p):
            out[j] = self.orients[i]
        return tuple(out)

    def skeleton(self):
        return Skeleton.permutation(next(iter(self.x.parts)), self.orients)

    def __str__(self):
        return f"ibraid({len(self.orients)})"


class InfWord:
    """An infinitesimal tangle word: caps, cups, infinitesimal braids, raw pieces."""

    def __init__(self, letters: Sequence[Letter], maxdeg: int):
        self.letters = tuple(letters)
        self.maxdeg = maxdeg
        ABCWord(self.letters)

    def raw(self) -> RawVector:
        n = self.maxdeg
        acc = None
        for letter in reversed(self.letters):
            img = _inf_image(letter, n)
            acc = img if acc is None else compose_raw(img, acc, n)
        return acc

    def value(self) -> ChordVector:
        return self.raw().reduce()


def _inf_image(letter: Letter, n: int) -> RawVector:
    if isinstance(letter, (Cap, Cup)):
        return RawVector.unit(letter.skeleton(), n)
    if isinstance(letter, IBraid):
        return letter.x.to_raw(letter.orients, n)
    if isinstance(letter, IRaw):
        return letter.raw.truncate(n)
    raise TypeError(f"{letter} is not an infinitesimal letter")


# ---------------------------------------------------------------------------
# the evaluator


class Evaluator:
    """rho(p): ABC words -> chord diagrams, truncated at ``maxdeg``."""

    def __init__(self, p: Associator, maxdeg: int | None = None):
        self.maxdeg = p.maxdeg if maxdeg is None else maxdeg
        if self.maxdeg > p.maxdeg:
            raise ValueError(f"associator known to degree {p.maxdeg} only")
        self.p = p.truncate(self.maxdeg)
        self._lock = threading.RLock()
        self._images: dict = {}
        self._nu: dict = {}
        self._ins: dict = {}
        self._letters: dict = {}
        self._expr: dict = {}

    # caches -------------------------------------------------------------

    def braid_images(self, n: int) -> BraidImages:
        with self._lock:
            if n not in self._images:
                self._images[n] = BraidImages(self.p, n, self.maxdeg, model="normal")
            return self._images[n]

    def nu(self, orientation: int) -> RawVector:
        with self._lock:
            if orientation not in self._nu:
                self._nu[orientation] = lambda_nu(self.p.phi, orientation, self.maxdeg)[1].to_raw()
            return self._nu[orientation]

    def insertion(self, eps: tuple, k: int, inverse: bool = False) -> RawVector:
        key = (eps, k, inverse)
        with self._lock:
            if key not in self._ins:
                self._ins[key] = _insert_series(self.p.phi, eps, k, self.maxdeg, inverse)
            return self._ins[key]

    # braid expressions --------------------------------------------------

    def crossed(self, e: BraidExpr, n: int, inverse: bool = False) -> CrossedBraid:
        key = (e, n, inverse)
        try:
            hit = self._expr.get(key)
        except TypeError:
            hit, key = None, None
        if hit is not None:
            return hit
        val = self._crossed(e, n, inverse)
        if key is not None:
            with self._lock:
                self._expr[key] = val
        return val

    def _unipotent(self, e: BraidExpr, n: int):
        x = self.crossed(e, n).pure()
        if x.constant() != 1:
            raise ValueError(f"{e} is not unipotent: constant term {x.constant()}")
        return x

    def _crossed(self, e: BraidExpr, n: int, inverse: bool) -> CrossedBraid:
        imgs = self.braid_images(n)
        if isinstance(e, Gen):
            return imgs.sigma(e.i, -1 if inverse else 1)
        if isinstance(e, Inv):
            return self.crossed(e.x, n, not inverse)
        if isinstance(e, Prod):
            out = imgs.pure(imgs.one())
            for f in reversed(e.factors) if inverse else e.factors:
                out = out * self.crossed(f, n, inverse)
            return out
        if isinstance(e, Pow):
            x = self._unipotent(e.base, n)
            c = -e.c if inverse else e.c
            return imgs.pure(x.log().scale(c).exp())
        if isinstance(e, Exp):
            y = self.crossed(e.x, n).pure()
            if y.constant() != 0:
                raise ValueError(f"exp argument {e.x} has a constant term")
            c = -e.c if inverse else e.c
            return imgs.pure(y.scale(c).exp())
        if isinstance(e, (Log2, LogOf)):
            if inverse:
                raise ValueError("a logarithm is not invertible")
            base = Prod((Gen(e.i), Gen(e.i))) if isinstance(e, Log2) else e.x
            return imgs.pure(self._unipotent(base, n).log())
        if isinstance(e, FAt):
            one = imgs.one()
            x = imgs.x_block(e.left, e.mid).pure() if e.left else one
            y = imgs.x_block(e.mid, e.right).pure()
            lx = x.log() if e.left else one.scale(0)
            v = substitute(e.f.truncate(self.maxdeg), lx, y.log(), one)
            return imgs.pure(v.inverse() if inverse else v)
        raise TypeError(f"unknown braid expression {e!r}")

    # letters ------------------------------------------------------------

    def letter_image(self, letter: Letter) -> RawVector:
        try:
            hit = self._letters.get(letter)
        except TypeError:
            hit = None
        if hit is not None:
            return hit
        img = self._letter_image(letter)
        with self._lock:
            self._letters[letter] = img
        return img

    def _letter_image(self, letter: Letter) -> RawVector:
        n = self.maxdeg
        if isinstance(letter, Cap):
            src = letter.source
            nu = _place(src, letter.k + 1, self.nu(src[letter.k + 1]))
            low = compose_raw(nu, self.insertion(src, letter.k), n)
            return compose_raw(RawVector.unit(letter.skeleton(), n), low, n)
        if isinstance(letter, Cup):
            tgt = letter.target
            return compose_raw(self.insertion(tgt, letter.k, inverse=True), RawVector.unit(letter.skeleton(), n), n)
        if isinstance(letter, Braid):
            return self.crossed(letter.expr, letter.n).to_raw(letter.orients, n)
        if isinstance(letter, IRaw):
            return letter.raw.truncate(n)
        raise TypeError(f"cannot evaluate letter {letter}")

    # words --------------------------------------------------------------

    def evaluate_raw(self, w: ABCWord) -> RawVector:
        acc = None
        for letter in reversed(w.letters):
            img = self.letter_image(letter)
            acc = img if acc is None else compose_raw(img, acc, self.maxdeg)
        return acc

    def evaluate(self, w: ABCWord) -> ChordVector:
        out = self.evaluate_raw(w).reduce()
        if self.p.info.get("mode") == "formal":
            out = _map_coeffs(out, mzv_reduce)
        return out

    def evaluate_many(self, words: Iterable[ABCWord], threads: int = 1) -> list:
        words = list(words)
        if threads <= 1:
            return [self.evaluate(w) for w in words]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(self.evaluate, words))


def _map_coeffs(v: ChordVector, fn) -> ChordVector:
    parts = {}
    for m, row in v.parts.items():
        new = {k: fn(c) for k, c in row.items()}
        parts[m] = {k: c for k, c in new.items() if c != 0}
    return ChordVector(v.skeleton, v.maxdeg, parts)


def evaluate(e: Evaluator, w: ABCWord) -> ChordVector:
    return e.evaluate(w)


_EVALUATORS: dict = {}


def _default_evaluator(maxdeg: int, mode: str) -> Evaluator:
    key = (maxdeg, mode)
    if key not in _EVALUATORS:
        if mode == "rational":
            p = reference_associator(maxdeg)
        elif mode == "formal":
            p = formal_associator(maxdeg)
        else:
            raise ValueError("mode must be 'rational' or 'formal'")
        _EVALUATORS[key] = Evaluator(p, maxdeg)
    return _EVALUATORS[key]


def kontsevich(w: ABCWord, maxdeg: int, mode: str = "rational", assoc: Associator | None = None) -> ChordVector:
    """The knot invariant: rho(p) for a mu = 1 associator (rational or formal KZ)."""
    if not w.is_knot():
        raise ValueError("kontsevich needs a knot word")
    if assoc is not None:
        if assoc.mu != 1:
            raise ValueError("the knot invariant uses a mu = 1 associator")
        return Evaluator(assoc, maxdeg).evaluate(w)
    return _default_evaluator(maxdeg, mode).evaluate(w)


# ---------------------------------------------------------------------------
# the GRT action on infinitesimal tangles


class GRTAction:
    """rho(sigma) for sigma = (c, g) in GRT, on infinitesimal words and diagrams."""

    def __init__(self, sigma: GRTElement, maxdeg: int | None = None):
        self.sigma = sigma
        self.maxdeg = sigma.maxdeg if maxdeg is None else maxdeg
        self.c = sigma.c
        self.g = sigma.g.truncate(self.maxdeg)
        self._cache: dict = {}
        self._lock = threading.RLock()

    def _memo(self, key, fn):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = fn()
            return self._cache[key]

    def alg(self, n: int) -> PnAlgebra:
        return PnAlgebra(n, self.maxdeg)

    def g_at(self, n: int, i: int, inverse: bool = False) -> PnElement:
        """g_{1..i-1,i,i+1} in U p_n."""

        def make():
            a = self.alg(n)
            v = substitute(self.g, a.block(range(1, i), (i,)), a.block((i,), (i + 1,)), a.one())
            return v.inverse() if inverse else v

        return self._memo(("g", n, i, inverse), make)

    def _pure(self, n, x) -> CrossedBraid:
        return CrossedBraid(n, {tuple(range(n)): x})

    def tau(self, n: int, i: int) -> CrossedBraid:
        def make():
            p = list(range(n))
            p[i - 1], p[i] = p[i], p[i - 1]
            t = CrossedBraid(n, {tuple(p): self.alg(n).one()})
            return self._pure(n, self.g_at(n, i, True)) * t * self._pure(n, self.g_at(n, i))

        return self._memo(("tau", n, i), make)

    def perm(self, n: int, p: tuple) -> CrossedBraid:
        def make():
            q = tuple(p)
            letters = []
            while q != tuple(range(n)):
                i = next(j for j in range(n - 1) if q[j] > q[j + 1])
                sw = list(range(n))
                sw[i], sw[i + 1] = i + 1, i
                q = perm_compose(q, tuple(sw))
                letters.append(i + 1)
            out = self._pure(n, self.alg(n).one())
            for i in reversed(letters):
                out = out * self.tau(n, i)
            return out

        return self._memo(("perm", n, tuple(p)), make)

    def t(self, n: int, a: int, b: int) -> PnElement:
        """rho(sigma)(t_ab), pure."""

        def make():
            if b == a + 1:
                base = self.alg(n).t(a, a + 1, 1 / self.c if not isinstance(self.c, Coefficient) else self.c.inverse())
                x = self._pure(n, self.g_at(n, a, True)) * self._pure(n, base) * self._pure(n, self.g_at(n, a))
                return x.pure()
            # t_ab = tau_{b-1}..tau_{a+1} t_{a,a+1} tau_{a+1}..tau_{b-1}
            left = self._pure(n, self.alg(n).one())
            for k in range(b - 1, a, -1):
                left = left * self.tau(n, k)
            right = self._pure(n, self.alg(n).one())
            for k in range(a + 1, b):
                right = right * self.tau(n, k)
            return (left * self._pure(n, self.t(n, a, a + 1)) * right).pure()

        return self._memo(("t", n, a, b), make)

    def pure(self, n: int, x) -> PnElement:
        a = self.alg(n)
        if isinstance(x, TruncSeries):
            x = a.from_free(x)
        out = a.zero()
        for word, coeff in x.words():
            term = a.one().scale(coeff)
            for i, j in word:
                term = term * self.t(n, i, j)
            out = out + term
        return out

    def crossed(self, x: CrossedBraid) -> CrossedBraid:
        n = x.n
        out = None
        for p, y in x.parts.items():
            term = self.perm(n, p) * self._pure(n, self.pure(n, y))
            out = term if out is None else out + term
        return out

    def nu(self, orientation: int) -> RawVector:
        return self._memo(("nu", orientation), lambda: lambda_nu(self.g, orientation, self.maxdeg)[1].to_raw())

    def letter(self, letter: Letter) -> list:
        if isinstance(letter, Cap):
            src = letter.source
            nu = IRaw(_place(src, letter.k + 1, self.nu(src[letter.k + 1])))
            ins = IBraid(src, self._pure(len(src), self._insert(len(src), letter.k)))
            return [letter, nu, ins]
        if isinstance(letter, Cup):
            tgt = letter.target
            ins = IBraid(tgt, self._pure(len(tgt), self._insert(len(tgt), letter.k).inverse()))
            return [ins, letter]
        if isinstance(letter, IBraid):
            return [IBraid(letter.orients, self.crossed(letter.x))]
        raise TypeError(f"the GRT action is defined on infinitesimal letters, not {letter}")

    def _insert(self, n: int, k: int) -> PnElement:
        a = self.alg(n)
        if k == 0:
            return a.one()
        return self._memo(
            ("ins", n, k),
            lambda: substitute(self.g, a.block(range(1, k + 1), (k + 1,)), a.block((k + 1,), (k + 2,)), a.one()),
        )

    def word(self, w: InfWord) -> InfWord:
        out = []
        for letter in w.letters:
            out.extend(self.letter(letter))
        return InfWord(out, self.maxdeg)

    def vector(self, v: ChordVector) -> ChordVector:
        n = min(self.maxdeg, v.maxdeg)
        total = None
        for d, c in v.to_raw().terms.items():
            img = self.word(fold(v.skeleton, d, n)).raw().scale(c)
            total = img if total is None else total + img
        if total is None:
            return ChordVector.zero(v.skeleton, n)
        return total.reduce()


def _strand_positions(skel: Skeleton, d: tuple) -> dict:
    """Strand index -> sorted chord-endpoint keys along the orientation."""
    which = {skel.strand(i): i for i in range(len(skel.source))}
    per: dict = {i: [] for i in range(len(skel.source))}
    for ch in d:
        for comp, r in ch:
            per[which[comp]].append(r)
    return {i: sorted(v) for i, v in per.items()}


def fold(skel: Skeleton, d: tuple, maxdeg: int) -> InfWord:
    """A presentation of one diagram by caps, cups and one horizontal layer.

    String links are folded strand by strand so that every endpoint sits on
    its own segment of the strand's orientation; a circle is closed by an
    outer cap and cup around the folded cut.
    """
    if skel == Skeleton.circle():
        open_ = cut(RawVector(skel, maxdeg, {d: 1}), UP)
        (dd, c), = open_.terms.items()
        inner = fold(Skeleton.string_link((DOWN, UP)), _shift_to(dd), maxdeg)
        letters = [Cap(0, 0, (), "left")] + list(inner.letters) + [Cup(0, 0, (), "left")]
        return _scaled_word(letters, c, maxdeg)
    if not skel.is_string_link():
        raise ValueError("the folded presentation covers string links and single circles")
    eps = skel.source
    ends = _strand_positions(skel, d)
    slice_eps: list = []
    seg_of: dict = {}
    top_pairs, bottom_pairs = [], []
    for s, o in enumerate(eps):
        m = max(1, len(ends[s]))
        for r in range(m):
            if r:
                slice_eps.append(-o)
                v = len(slice_eps) - 1
                # the joining turn sits above the previous segment for an up strand
                (top_pairs if o == UP else bottom_pairs).append(v - 1)
                (bottom_pairs if o == UP else top_pairs).append(v)
            slice_eps.append(o)
            if ends[s]:
                seg_of[(s, ends[s][r])] = len(slice_eps) - 1
    which = {skel.strand(i): i for i in range(len(eps))}
    word = []
    sign = 1
    for a, b in d:
        i = seg_of[(which[a[0]], a[1])] + 1
        j = seg_of[(which[b[0]], b[1])] + 1
        sign *= slice_eps[i - 1] * slice_eps[j - 1]
        word.append((min(i, j), max(i, j)))
    N = len(slice_eps)
    alg = PnAlgebra(N, maxdeg)
    mid = IBraid(tuple(slice_eps), CrossedBraid(N, {tuple(range(N)): alg.from_word(word).scale(sign)}))
    caps = _turns(tuple(slice_eps), sorted(top_pairs), Cap, "right")
    cups = _turns(tuple(slice_eps), sorted(bottom_pairs), Cup, "left")
    return InfWord(caps + [mid] + cups, maxdeg)


def _scaled_word(letters, c, maxdeg) -> InfWord:
    if c == 1:
        return InfWord(letters, maxdeg)
    out = []
    done = False
    for l in letters:
        if isinstance(l, IBraid) and not done:
            l = IBraid(l.orients, l.x.scale(c))
            done = True
        out.append(l)
    return InfWord(out, maxdeg)


def _shift_to(d: tuple) -> tuple:
    """Move an interval diagram onto strand 2 of the (down, up) string link."""
    sk = Skeleton.string_link((DOWN, UP))
    comp = sk.strand(1)
    return tuple(tuple((comp, r) for _, r in ch) for ch in d)


def _turns(slice_eps: tuple, lefts: list, kind, turn: str) -> list:
    """Caps (top, listed top first) or cups (bottom) closing adjacent pairs."""
    cur = list(slice_eps)
    remaining = sorted(lefts)
    letters = []
    removed = 0
    for pos in remaining:
        k = pos - removed
        outer = tuple(cur[:k] + cur[k + 2 :])
        letters.append(kind(k, len(outer) - k, outer, turn))
        cur = cur[:k] + cur[k + 2 :]
        removed += 2
    # caps stack upward from the slice; cups stack downward
    return list(reversed(letters)) if kind is Cap else letters


def grt_act(sigma: GRTElement, v, maxdeg: int | None = None):
    """rho(sigma) on a ChordVector (string link or circle) or an InfWord."""
    act = GRTAction(sigma, maxdeg or (v.maxdeg if hasattr(v, "maxdeg") else None))
    if isinstance(v, InfWord):
        return act.word(v)
    return act.vector(v)


def scale_grading(v: ChordVector, c: Scalar) -> ChordVector:
    """The (c, 1) action on a diagram: degree m scales by c^{-m}."""
    inv = 1 / as_scalar(c) if not isinstance(c, Coefficient) else c.inverse()
    return ChordVector(v.skeleton, v.maxdeg, {m: {k: x * inv**m for k, x in row.items()} for m, row in v.parts.items()})


# ---------------------------------------------------------------------------
# the GT action on proalgebraic tangles


def _transform_expr(e: BraidExpr, t: GTElement) -> BraidExpr:
    if isinstance(e, Gen):
        i = e.i
        f = FAt(t.f, tuple(range(1, i)), (i,), (i + 1,))
        core: list = [Gen(i)]
        if t.lam != 1:
            core.append(Pow(Prod((Gen(i), Gen(i))), (t.lam - 1) * Fraction(1, 2)))
        return Prod((Inv(f), *core, f))
    if isinstance(e, Inv):
        return Inv(_transform_expr(e.x, t))
    if isinstance(e, Prod):
        return Prod(tuple(_transform_expr(x, t) for x in e.factors))
    if isinstance(e, Pow):
        return Pow(_transform_expr(e.base, t), e.c)
    if isinstance(e, Exp):
        return Exp(e.c, _transform_expr(e.x, t))
    if isinstance(e, Log2):
        return LogOf(_transform_expr(Prod((Gen(e.i), Gen(e.i))), t))
    if isinstance(e, LogOf):
        return LogOf(_transform_expr(e.x, t))
    raise TypeError(f"cannot transform {e!r}")


def _gt_nu(t: GTElement, e: Evaluator, orientation: int) -> RawVector:
    top, eps, bot = _lambda_letters(orientation)
    lam = ABCWord([top, Braid(3, eps, FAt(t.f, (1,), (2,), (3,))), bot])
    return raw_inverse(e.evaluate_raw(lam))


def transform_word(t: GTElement, w: ABCWord, e: Evaluator) -> ABCWord:
    """sigma(w) for sigma = (lam, f) in GT, with nu_f carried as a chord piece."""
    nus: dict = {}
    out: list = []
    for letter in w.letters:
        if isinstance(letter, Cap):
            src = letter.source
            k = letter.k
            o = src[k + 1]
            if o not in nus:
                nus[o] = _gt_nu(t, e, o)
            out.append(letter)
            out.append(IRaw(_place(src, k + 1, nus[o])))
            if k:
                out.append(Braid(len(src), src, FAt(t.f, tuple(range(1, k + 1)), (k + 1,), (k + 2,))))
        elif isinstance(letter, Cup):
            tgt = letter.target
            k = letter.k
            if k:
                out.append(Braid(len(tgt), tgt, Inv(FAt(t.f, tuple(range(1, k + 1)), (k + 1,), (k + 2,)))))
            out.append(letter)
        elif isinstance(letter, Braid):
            out.append(Braid(letter.n, letter.orients, _transform_expr(letter.expr, t)))
        else:
            raise TypeError(f"the GT action is defined on ABC letters, not {letter}")
    return ABCWord(out)


def gt_act(t: GTElement, w: ABCWord, e: Evaluator) -> ChordVector:
    """rho(p)(sigma(w)) in chord coordinates."""
    if t.maxdeg < e.maxdeg:
        raise ValueError("GT element known to a lower degree than the evaluator")
    return e.evaluate(transform_word(t, w, e))


# ---------------------------------------------------------------------------
# twistors


def _framed_coords(rv: RawVector, deg: int) -> dict:
    q = quotient(rv.skeleton, deg, fi=False)
    out: dict = {}
    for d, c in rv.terms.items():
        if len(d) != deg:
            continue
        for k, v in q.coords(d).items():
            out[k] = out.get(k, 0) + c * v
    return {k: v for k, v in out.items() if v}


def _swap(rv: RawVector) -> RawVector:
    """D_{2,1}: conjugation by the crossing of two strands."""
    eps = rv.skeleton.source
    p = RawVector.unit(Skeleton.permutation((1, 0), eps[::-1]), rv.maxdeg)
    q = RawVector.unit(Skeleton.permutation((1, 0), eps), rv.maxdeg)
    return compose_raw(p, compose_raw(rv, q))


def _twist(delta: RawVector) -> RawVector:
    """Delta_{2,3} Delta_{1,23} Delta_{12,3}^{-1} Delta_{1,2}^{-1} on three strands."""
    n = delta.maxdeg
    one = identity_raw((UP,), n)
    d23 = tensor(one, delta)
    d1_23 = double(delta, 1)
    d12_3 = double(delta, 0)
    d12 = tensor(delta, one)
    return compose_raw(compose_raw(d23, d1_23), compose_raw(raw_inverse(d12_3), raw_inverse(d12)))


@dataclass
class Twistor:
    sigma: GRTElement
    raw: RawVector
    dims: dict = field(default_factory=dict)
    maxdeg: int = 0

    @property
    def delta(self) -> ChordVector:
        return self.raw.reduce()

    def residual(self, framed: bool = True) -> dict:
        """Degree -> coordinates of (twisting product - g) on three strands."""
        lhs = _twist(self.raw)
        g3 = _insert_series(self.sigma.g, (UP, UP, UP), 1, self.maxdeg)
        diff = lhs - g3
        if framed:
            return {m: c for m in range(self.maxdeg + 1) if (c := _framed_coords(diff, m))}
        red = diff.reduce()
        return {m: row for m, row in red.parts.items() if row}

    def side_conditions(self) -> bool:
        n = self.maxdeg
        unit1 = identity_raw((UP,), n)
        ok = all(not _framed_coords(delete(self.raw, s) - unit1, m) for s in (0, 1) for m in range(1, n + 1))
        sym = all(not _framed_coords(_swap(self.raw) - self.raw, m) for m in range(n + 1))
        return ok and sym

    def on_strands(self, k: int) -> RawVector:
        """Delta(sigma, up^k) = Delta_{1..k-1,k} ... Delta_{12,3} Delta_{1,2}."""
        n = self.maxdeg
        out = identity_raw((UP,) * k, n)
        for j in range(2, k + 1):
            piece = self.raw
            for _ in range(j - 2):
                piece = double(piece, 0)
            if j < k:
                piece = tensor(piece, identity_raw((UP,) * (k - j), n))
            out = compose_raw(piece, out) if j > 2 else piece
        return out

    def conjugate(self, v: RawVector) -> RawVector:
        k = len(v.skeleton.source)
        d = self.on_strands(k)
        return compose_raw(compose_raw(d, v), raw_inverse(d))

    def to_json(self) -> dict:
        return {
            "kind": "twistor",
            "maxdeg": self.maxdeg,
            "dims": {str(k): v for k, v in self.dims.items()},
            "delta": self.delta.to_json(),
        }


def solve_twistor(sigma: GRTElement, maxdeg: int | None = None, policy: str = "pick-zero") -> Twistor:
    """Degree-by-degree solve of the twisting formula on two upward strands.

    Unknowns are framed coordinates of Delta on up-up; the side conditions
    are unit strand deletions and symmetry under swapping the strands.
    """
    if policy != "pick-zero":
        raise ValueError("only the pick-zero policy is offered for twistors")
    n = sigma.maxdeg if maxdeg is None else maxdeg
    eps2 = (UP, UP)
    skel2 = Skeleton.string_link(eps2)
    delta = identity_raw(eps2, n)
    g3 = _insert_series(sigma.g.truncate(n), (UP, UP, UP), 1, n)
    dims = {}
    for d in range(1, n + 1):
        q2 = quotient(skel2, d, fi=False)
        basis = [RawVector(skel2, n, {b: 1}) for b in q2.basis]
        cols = []
        for b in basis:
            lin = tensor(identity_raw((UP,), n), b) + double(b, 1) - double(b, 0) - tensor(b, identity_raw((UP,), n))
            e1 = delete(b, 0)
            e2 = delete(b, 1)
            sym = _swap(b) - b
            cols.append({
                "L": _framed_coords(lin, d),
                "e1": _framed_coords(e1, d),
                "e2": _framed_coords(e2, d),
                "s": _framed_coords(sym, d),
            })
        target = _framed_coords(g3 - _twist(delta), d)
        rows_idx: dict = {}
        for j, c in enumerate(cols):
            for blk, co in c.items():
                for k in co:
                    rows_idx.setdefault((blk, k), len(rows_idx))
        for k in target:
            rows_idx.setdefault(("L", k), len(rows_idx))
        rows = [dict() for _ in rows_idx]
        for j, c in enumerate(cols):
            for blk, co in c.items():
                for k, v in co.items():
                    rows[rows_idx[(blk, k)]][j] = v
        rhs = [Fraction(0)] * len(rows_idx)
        for k, v in target.items():
            rhs[rows_idx[("L", k)]] = v
        try:
            pivots, free = _affine_solve(rows, rhs, len(basis))
        except AssociatorError as exc:
            raise AssociatorError(f"twisting formula inconsistent in degree {d}: {exc}") from None
        dims[d] = len(free)
        values = [Fraction(0)] * len(basis)
        for col, (r, val) in pivots.items():
            values[col] = val
        for j, v in enumerate(values):
            if v:
                delta = delta + basis[j].scale(v)
    return Twistor(sigma, delta, dims, n)


def twistor_power(tw: Twistor, k: int) -> RawVector:
    return tw.on_strands(k)


def gt_twistor(t: GTElement, p: Associator, maxdeg: int | None = None) -> Twistor:
    """Chord-coordinate image of the GT twistor: the twistor of r_p(t) with p o t = r_p(t) o p."""
    from .assoc import torsor_act_right, torsor_divide

    n = min(t.maxdeg, p.maxdeg) if maxdeg is None else maxdeg
    s = torsor_divide(p.truncate(n), torsor_act_right(p.truncate(n), t), "left")
    return solve_twistor(s, n)


# ---------------------------------------------------------------------------
# gamma0


def _unknot() -> ABCWord:
    return builtin("unknot")


def _index_sequences(maxweight: int) -> list:
    """Tuples of admissible indices whose weights sum to at most maxweight."""
    out = []
    base = admissible_indices(maxweight)

    def grow(prefix, room):
        for k in base:
            w = sum(k)
            if w <= room:
                seq = prefix + (k,)
                out.append(seq)
                grow(seq, room - w)

    grow((), maxweight)
    return out


def _connect_sum_all(words: Sequence[ABCWord]) -> ABCWord:
    acc = words[0]
    for w in words[1:]:
        acc = connect_sum_words(acc, w)
    return acc


def gamma0(p: Associator, maxdeg: int, e: Evaluator | None = None) -> tuple:
    """(c0 image, gamma0 image, certificate) for an associator with invertible mu.

    c0 = sum over admissible k of (-1)^m zeta^inv(k) mu^{-|k|} c0_term(k) and
    gamma0 = unknot - c0 + c0#c0 - ...; the connected sums are evaluated as
    words.
    """
    if maxdeg < 2:
        raise ValueError("gamma0 needs maxdeg >= 2")
    e = e or Evaluator(p, maxdeg)
    table = zeta_inv_table(p.phi.truncate(maxdeg), maxdeg)
    mu = as_scalar(p.mu)
    muinv = mu.inverse() if isinstance(mu, Coefficient) else 1 / mu
    coeff = {k: (-1) ** len(k) * table[k] * muinv ** sum(k) for k in table}
    if e.p.info.get("mode") == "formal":
        coeff = {k: mzv_reduce(v) for k, v in coeff.items()}
    terms = {k: builtin("c0_term", k) for k in coeff}
    images = {k: e.evaluate(w) for k, w in terms.items()}
    c0 = ChordVector.zero(Skeleton.circle(), maxdeg)
    for k, v in images.items():
        c0 = c0 + v.scale(coeff[k])
    gimg = e.evaluate(_unknot())
    for seq in _index_sequences(maxdeg):
        c = Fraction((-1) ** len(seq))
        for k in seq:
            c = c * coeff[k]
        if c == 0:
            continue
        v = images[seq[0]] if len(seq) == 1 else e.evaluate(_connect_sum_all([terms[k] for k in seq]))
        gimg = gimg + v.scale(c)
    if e.p.info.get("mode") == "formal":
        c0 = _map_coeffs(c0, mzv_reduce)
        gimg = _map_coeffs(gimg, mzv_reduce)
    unit = ChordVector.unit(Skeleton.circle(), maxdeg)
    failed = [m for m in range(maxdeg + 1) if gimg.parts.get(m, {}) != unit.parts.get(m, {})]
    cert = {
        "statement": f"I(gamma0) == e through degree {maxdeg}",
        "ok": not failed,
        "failed_degrees": failed,
        "coefficients": {",".join(map(str, k)): v for k, v in coeff.items()},
    }
    return c0, gimg, cert


def congruence_report(e: Evaluator, through: int = 3) -> dict:
    """Compare unknot - (1/24)(unknot - trefoil) with e per degree, for both trefoils."""
    unknot = e.evaluate(_unknot())
    unit = ChordVector.unit(Skeleton.circle(), e.maxdeg)
    out = {}
    for name in ("trefoil_left", "trefoil_right"):
        tre = e.evaluate(builtin(name))
        rhs = unknot - (unknot - tre).scale(Fraction(1, 24))
        per = {m: rhs.parts.get(m, {}) == unit.parts.get(m, {}) for m in range(through + 1)}
        out[name] = {"per_degree": per, "ok": all(per.values()), "value": rhs}
    return out


# ---------------------------------------------------------------------------
# grading decomposition


def decompose(w: ABCWord, maxdeg: int, mode: str = "rational", assoc: Associator | None = None) -> list:
    """Homogeneous parts [I(w)_0, ..., I(w)_maxdeg] of the knot invariant."""
    v = kontsevich(w, maxdeg, mode, assoc)
    return [v.degree_part(m) for m in range(maxdeg + 1)]
