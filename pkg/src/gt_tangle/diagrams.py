"""Chord diagrams on tangle skeletons modulo the 4T and FI relations.

Conventions
-----------
* Orientations are ``+1`` (up) and ``-1`` (down); boundary points are
  ``("b", i)`` on the bottom and ``("t", i)`` on the top, 0-based.
* A skeleton is a list of oriented arcs (start point, end point) plus a number
  of closed circles.  Component ids are arc positions followed by circles.
* A diagram on a skeleton is a sorted tuple of chords, each chord a sorted
  pair of points ``(component, rank)`` where ``rank`` counts endpoints along
  the component in the direction of its orientation.
* Diagrams are stored geometrically.  The horizontal generator t_ij on
  strands with orientations e_i, e_j is ``e_i * e_j`` times the geometric
  chord, so the orientation-aware 4T relation reproduces the infinitesimal
  braid relations for every orientation pattern.
* ``compose(a, b)`` stacks ``a`` on top of ``b``.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from typing import Iterable, Mapping, Sequence

from .coeffring import Coefficient, Scalar, as_scalar, scalar_to_json, format_scalar
from .freeseries import TruncSeries

__all__ = [
    "Skeleton",
    "RawVector",
    "ChordVector",
    "Quotient",
    "quotient",
    "canonical",
    "enumerate_diagrams",
    "is_isolated",
    "reduce",
    "compose",
    "tensor",
    "horizontal",
    "horizontal_series",
    "permute",
    "double",
    "delete",
    "reverse",
    "closure",
    "cut",
    "connected_sum",
    "t_alphabet",
    "PnAlgebra",
    "PnElement",
    "CrossedBraid",
    "perm_compose",
    "perm_inverse",
    "UP",
    "DOWN",
]

UP, DOWN = 1, -1


def _pt_key(p):
    return (0 if p[0] == "b" else 1, p[1])


def orient_str(eps: Sequence[int]) -> str:
    return "".join("^" if e > 0 else "v" for e in eps)


def parse_orients(text: str) -> tuple:
    out = []
    for ch in text:
        if ch == "^":
            out.append(UP)
        elif ch == "v":
            out.append(DOWN)
        else:
            raise ValueError(f"bad orientation character {ch!r}")
    return tuple(out)


# ---------------------------------------------------------------------------
# skeletons


@dataclass(frozen=True)
class Skeleton:
    source: tuple
    target: tuple
    arcs: tuple
    circles: int = 0
    _lookup: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        arcs = tuple(sorted((tuple(a) for a in self.arcs), key=lambda a: _pt_key(a[0])))
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        seen = set()
        lookup = {}
        for k, (s, e) in enumerate(arcs):
            for p in (s, e):
                if p in seen:
                    raise ValueError(f"boundary point {p} used twice")
                seen.add(p)
                lookup[p] = k
            # orientation consistency
            if s[0] == "b" and self.source[s[1]] != UP:
                raise ValueError(f"arc starting at bottom {s[1]} must point up")
            if s[0] == "t" and self.target[s[1]] != DOWN:
                raise ValueError(f"arc starting at top {s[1]} must point down")
            if e[0] == "t" and self.target[e[1]] != UP:
                raise ValueError(f"arc ending at top {e[1]} must point up")
            if e[0] == "b" and self.source[e[1]] != DOWN:
                raise ValueError(f"arc ending at bottom {e[1]} must point down")
        if len(seen) != len(self.source) + len(self.target):
            raise ValueError("every boundary point must lie on an arc")
        object.__setattr__(self, "_lookup", lookup)

    @property
    def ncomp(self) -> int:
        return len(self.arcs) + self.circles

    def is_circle(self, comp: int) -> bool:
        return comp >= len(self.arcs)

    def comp_at(self, point) -> int:
        return self._lookup[point]

    def strand(self, i: int) -> int:
        """Component through bottom point i."""
        return self._lookup[("b", i)]

    def is_string_link(self) -> bool:
        if self.source != self.target or self.circles:
            return False
        for i, e in enumerate(self.source):
            a = self.arcs[self.strand(i)]
            if set(a) != {("b", i), ("t", i)}:
                return False
        return True

    # -- constructors ------------------------------------------------------
    @classmethod
    def string_link(cls, eps: Sequence[int]) -> "Skeleton":
        eps = tuple(eps)
        return cls(eps, eps, tuple(_through(i, i, e) for i, e in enumerate(eps)))

    @classmethod
    def permutation(cls, perm: Sequence[int], eps: Sequence[int]) -> "Skeleton":
        """Strand from bottom i to top perm[i], orientation eps[i]."""
        eps = tuple(eps)
        tgt = [0] * len(eps)
        for i, e in enumerate(eps):
            tgt[perm[i]] = e
        return cls(eps, tuple(tgt), tuple(_through(i, perm[i], e) for i, e in enumerate(eps)))

    @classmethod
    def circle(cls) -> "Skeleton":
        return cls((), (), (), 1)

    @classmethod
    def interval(cls, e: int = UP) -> "Skeleton":
        return cls.string_link((e,))

    @classmethod
    def cap(cls, k: int, l: int, outer: Sequence[int], turn: str) -> "Skeleton":
        """Cap closing strands k, k+1 (0-based) of the source; ``outer`` lists the k+l other strands."""
        outer = tuple(outer)
        if len(outer) != k + l:
            raise ValueError("cap orientation string must have length k+l")
        pair = _turn_pair(turn)
        src = outer[:k] + pair + outer[k:]
        arcs = [_through(i, i, outer[i]) for i in range(k)]
        arcs += [_through(i + 2, i, outer[i]) for i in range(k, k + l)]
        arcs.append((("b", k + 1), ("b", k)) if pair == (DOWN, UP) else (("b", k), ("b", k + 1)))
        return cls(src, outer, tuple(arcs))

    @classmethod
    def cup(cls, k: int, l: int, outer: Sequence[int], turn: str) -> "Skeleton":
        outer = tuple(outer)
        if len(outer) != k + l:
            raise ValueError("cup orientation string must have length k+l")
        pair = _turn_pair(turn)
        tgt = outer[:k] + pair + outer[k:]
        arcs = [_through(i, i, outer[i]) for i in range(k)]
        arcs += [_through(i, i + 2, outer[i]) for i in range(k, k + l)]
        arcs.append((("t", k), ("t", k + 1)) if pair == (DOWN, UP) else (("t", k + 1), ("t", k)))
        return cls(outer, tgt, tuple(arcs))

    def fingerprint(self) -> str:
        return hashlib.sha1(repr((self.source, self.target, self.arcs, self.circles)).encode()).hexdigest()[:12]

    def to_json(self) -> dict:
        return {
            "source": orient_str(self.source),
            "target": orient_str(self.target),
            "components": [[list(s), list(e)] for s, e in self.arcs] + [["circle"]] * self.circles,
        }

    def __str__(self) -> str:
        return f"Skeleton({orient_str(self.source)!r}->{orient_str(self.target)!r}, arcs={len(self.arcs)}, circles={self.circles})"


def _through(i: int, j: int, e: int) -> tuple:
    return (("b", i), ("t", j)) if e == UP else (("t", j), ("b", i))


def _turn_pair(turn: str) -> tuple:
    if turn == "left":
        return (DOWN, UP)
    if turn == "right":
        return (UP, DOWN)
    raise ValueError(f"turn must be 'left' or 'right', got {turn!r}")


# ---------------------------------------------------------------------------
# canonical diagrams


def canonical(skel: Skeleton, chords: Iterable) -> tuple:
    """Canonical form of a diagram given chords with sortable position keys."""
    chords = list(chords)
    per: dict = {}
    for a, b in chords:
        per.setdefault(a[0], []).append(a[1])
        per.setdefault(b[0], []).append(b[1])
    rank = {}
    length = {}
    for c, keys in per.items():
        keys.sort()
        length[c] = len(keys)
        for r, kk in enumerate(keys):
            rank[(c, kk)] = r
    ranked = [((a[0], rank[a]), (b[0], rank[b])) for a, b in chords]
    na = len(skel.arcs)
    circ = [c for c in range(na, skel.ncomp) if length.get(c)]
    if not circ and skel.circles <= 1:
        return tuple(sorted(tuple(sorted(ch)) for ch in ranked))
    best = None
    circles = list(range(na, skel.ncomp))
    for perm in permutations(circles) if skel.circles > 1 else [tuple(circles)]:
        relabel = dict(zip(circles, perm))
        rots = [range(length.get(c, 0) or 1) for c in circles]
        for shift in product(*rots):
            sh = dict(zip(circles, shift))

            def mv(p):
                c, r = p
                if c < na:
                    return p
                L = length.get(c, 0)
                return (relabel[c], (r - sh[c]) % L if L else 0)

            key = tuple(sorted(tuple(sorted((mv(a), mv(b)))) for a, b in ranked))
            if best is None or key < best:
                best = key
    return best


def _comp_lengths(d: tuple) -> dict:
    out: dict = {}
    for a, b in d:
        out[a[0]] = out.get(a[0], 0) + 1
        out[b[0]] = out.get(b[0], 0) + 1
    return out


def is_isolated(d: tuple, idx: int) -> bool:
    """FI test: no other chord has exactly one endpoint strictly between its ends."""
    (ca, pa), (cb, pb) = d[idx]
    if ca != cb:
        return False
    lo, hi = min(pa, pb), max(pa, pb)
    for j, ((c1, p1), (c2, p2)) in enumerate(d):
        if j == idx:
            continue
        inside = (c1 == ca and lo < p1 < hi) + (c2 == ca and lo < p2 < hi)
        if inside == 1:
            return False
    return True


def has_isolated(d: tuple) -> bool:
    return any(is_isolated(d, i) for i in range(len(d)))


def _matchings(points: list):
    if not points:
        yield []
        return
    a = points[0]
    for i in range(1, len(points)):
        rest = points[1:i] + points[i + 1 :]
        for m in _matchings(rest):
            yield [(a, points[i])] + m


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


@lru_cache(maxsize=None)
def enumerate_diagrams(skel: Skeleton, degree: int) -> tuple:
    """All canonical diagrams of the given degree, sorted."""
    found = set()
    for counts in _compositions(2 * degree, skel.ncomp):
        pts = [(c, r) for c, n in enumerate(counts) for r in range(n)]
        for m in _matchings(pts):
            found.add(canonical(skel, m))
    return tuple(sorted(found))


# ---------------------------------------------------------------------------
# quotient bases


def _four_term_rows(skel: Skeleton, degree: int, index: Mapping) -> list:
    rows = []
    for d in enumerate_diagrams(skel, degree - 1):
        lens = _comp_lengths(d)
        # scaled positions: point r -> 4r, gap k -> 4k-2
        scaled = [((a[0], 4 * a[1]), (b[0], 4 * b[1])) for a, b in d]
        gaps = []
        for c in range(skel.ncomp):
            L = lens.get(c, 0)
            if skel.is_circle(c):
                gaps += [(c, 4 * k - 2) for k in range(max(L, 1))]
            else:
                gaps += [(c, 4 * k - 2) for k in range(L + 1)]
        for ci, (P, Q) in enumerate(scaled):
            for R in gaps:
                row: dict = {}
                for X, sign in ((P, 1), (Q, 1)):
                    for off, s in ((-1, sign), (1, -sign)):
                        x = (X[0], X[1] + off)
                        key = canonical(skel, scaled + [(R, x)])
                        j = index.get(key)
                        if j is not None:
                            row[j] = row.get(j, 0) + s
                row = {j: v for j, v in row.items() if v}
                if row:
                    rows.append(row)
    return rows


def _echelon(rows: list) -> dict:
    """Reduced row echelon form, pivoting on the lowest column index."""
    pivots: dict = {}
    for row in rows:
        r = dict(row)
        while r:
            c = min(r)
            prow = pivots.get(c)
            if prow is None:
                f = r[c]
                pivots[c] = {j: Fraction(v) / f for j, v in r.items()}
                break
            f = r[c]
            for j, v in prow.items():
                nv = r.get(j, 0) - f * v
                if nv:
                    r[j] = nv
                else:
                    r.pop(j, None)
    for c in sorted(pivots, reverse=True):
        row = pivots[c]
        for j in [j for j in row if j != c and j in pivots]:
            f = row.pop(j)
            for jj, v in pivots[j].items():
                if jj == j:
                    continue
                nv = row.get(jj, 0) - f * v
                if nv:
                    row[jj] = nv
                else:
                    row.pop(jj, None)
    return pivots


class Quotient:
    """Canonical basis of the degree-m part of CD(skeleton) modulo 4T and FI.

    ``fi=False`` gives the framed quotient (4T only).
    """

    def __init__(self, skel: Skeleton, degree: int, shuffle_seed: int | None = None, fi: bool = True):
        self.skeleton = skel
        self.degree = degree
        self.framed = not fi
        diagrams = list(enumerate_diagrams(skel, degree))
        if shuffle_seed is not None:
            random.Random(shuffle_seed).shuffle(diagrams)
        self.diagrams = diagrams
        self.index = {d: i for i, d in enumerate(diagrams)}
        self.fi = {i for i, d in enumerate(diagrams) if has_isolated(d)} if fi else set()
        live = {d: i for d, i in self.index.items() if i not in self.fi}
        pivots = _echelon(_four_term_rows(skel, degree, live)) if degree else {}
        self.basis = [d for i, d in enumerate(diagrams) if i not in self.fi and i not in pivots]
        bpos = {self.index[d]: k for k, d in enumerate(self.basis)}
        self.table: dict = {}
        for i, d in enumerate(diagrams):
            if i in self.fi:
                self.table[d] = {}
            elif i in pivots:
                self.table[d] = {bpos[j]: -v for j, v in pivots[i].items() if j != i}
            else:
                self.table[d] = {bpos[i]: Fraction(1)}
        self.basis_index = {d: k for k, d in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def fingerprint(self) -> str:
        return hashlib.sha1(repr((self.skeleton.fingerprint(), self.degree, self.basis)).encode()).hexdigest()[:12]

    def coords(self, d: tuple) -> dict:
        try:
            return self.table[d]
        except KeyError:
            raise ValueError(f"diagram {d} does not live on {self.skeleton}") from None

    def to_json(self) -> dict:
        sparse = {
            json.dumps(d): {str(k): f"{v}" for k, v in row.items()}
            for d, row in self.table.items()
            if d not in self.basis_index
        }
        return {"degree": self.degree, "basis": [json.dumps(d) for d in self.basis], "table": sparse}

    @classmethod
    def from_json(cls, skel: Skeleton, data: dict, fi: bool = True) -> "Quotient":
        q = cls.__new__(cls)
        q.skeleton = skel
        q.degree = data["degree"]
        q.framed = not fi
        q.basis = [_load_diagram(s) for s in data["basis"]]
        q.basis_index = {d: k for k, d in enumerate(q.basis)}
        q.table = {d: {k: Fraction(1)} for d, k in q.basis_index.items()}
        for s, row in data["table"].items():
            q.table[_load_diagram(s)] = {int(k): Fraction(v) for k, v in row.items()}
        q.diagrams = sorted(q.table)
        q.index = {d: i for i, d in enumerate(q.diagrams)}
        q.fi = {q.index[d] for d in q.diagrams if has_isolated(d)} if fi else set()
        return q


def _load_diagram(text: str) -> tuple:
    return tuple(tuple(tuple(p) for p in ch) for ch in json.loads(text))


_QCACHE: dict = {}
_QLOCK = threading.Lock()


def quotient(skel: Skeleton, degree: int, fi: bool = True) -> Quotient:
    """Cached quotient basis; persisted under GT_CACHE_DIR when that is set."""
    key = (skel, degree, fi)
    q = _QCACHE.get(key)
    if q is not None:
        return q
    with _QLOCK:
        q = _QCACHE.get(key)
        if q is not None:
            return q
        cache_dir = os.environ.get("GT_CACHE_DIR")
        path = None
        if cache_dir:
            tag = "" if fi else "framed-"
            path = os.path.join(cache_dir, f"cd-{tag}{skel.fingerprint()}-{degree}.json")
            if os.path.exists(path):
                with open(path) as fh:
                    q = Quotient.from_json(skel, json.load(fh), fi)
        if q is None:
            q = Quotient(skel, degree, fi=fi)
            if path:
                os.makedirs(cache_dir, exist_ok=True)
                tmp = path + f".{os.getpid()}.tmp"
                with open(tmp, "w") as fh:
                    json.dump(q.to_json(), fh)
                os.replace(tmp, path)
        _QCACHE[key] = q
        return q


# ---------------------------------------------------------------------------
# unreduced linear combinations


def _acc(out: dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


class RawVector:
    """A formal linear combination of canonical diagrams on one skeleton."""

    __slots__ = ("skeleton", "maxdeg", "terms")

    def __init__(self, skel: Skeleton, maxdeg: int, terms: Mapping | None = None):
        self.skeleton = skel
        self.maxdeg = maxdeg
        self.terms: dict = {}
        for d, c in (terms or {}).items():
            if len(d) <= maxdeg and c:
                _acc(self.terms, d, as_scalar(c))

    @classmethod
    def unit(cls, skel: Skeleton, maxdeg: int) -> "RawVector":
        return cls(skel, maxdeg, {(): 1})

    def like(self, terms: dict) -> "RawVector":
        out = RawVector.__new__(RawVector)
        out.skeleton, out.maxdeg, out.terms = self.skeleton, self.maxdeg, terms
        return out

    def __add__(self, other: "RawVector") -> "RawVector":
        if other.skeleton != self.skeleton:
            raise ValueError("skeleton mismatch")
        out = dict(self.terms)
        for d, c in other.terms.items():
            if len(d) <= self.maxdeg:
                _acc(out, d, c)
        return self.like(out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: Scalar) -> "RawVector":
        if not c:
            return self.like({})
        return self.like({d: v * c for d, v in self.terms.items() if v * c})

    def truncate(self, maxdeg: int) -> "RawVector":
        return RawVector(self.skeleton, maxdeg, {d: c for d, c in self.terms.items() if len(d) <= maxdeg})

    def reduce(self) -> "ChordVector":
        return reduce(self.skeleton, self.terms.items(), self.maxdeg)

    def __len__(self) -> int:
        return len(self.terms)


# ---------------------------------------------------------------------------
# reduced vectors


class ChordVector:
    """Element of CD(skeleton) truncated at maxdeg, in reduced coordinates."""

    __slots__ = ("skeleton", "maxdeg", "parts")

    def __init__(self, skel: Skeleton, maxdeg: int, parts: Mapping | None = None):
        self.skeleton = skel
        self.maxdeg = maxdeg
        self.parts: dict = {}
        for m, row in (parts or {}).items():
            row = {k: as_scalar(v) for k, v in row.items() if v}
            if row and m <= maxdeg:
                self.parts[m] = row

    @classmethod
    def unit(cls, skel: Skeleton, maxdeg: int) -> "ChordVector":
        return RawVector.unit(skel, maxdeg).reduce()

    @classmethod
    def zero(cls, skel: Skeleton, maxdeg: int) -> "ChordVector":
        return cls(skel, maxdeg)

    def _check(self, other: "ChordVector") -> None:
        if self.skeleton != other.skeleton:
            raise ValueError(f"skeleton mismatch: {self.skeleton} vs {other.skeleton}")

    def __add__(self, other: "ChordVector") -> "ChordVector":
        self._check(other)
        n = min(self.maxdeg, other.maxdeg)
        parts: dict = {}
        for src in (self.parts, other.parts):
            for m, row in src.items():
                if m > n:
                    continue
                tgt = parts.setdefault(m, {})
                for k, v in row.items():
                    _acc(tgt, k, v)
        return ChordVector(self.skeleton, n, parts)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: Scalar) -> "ChordVector":
        return ChordVector(self.skeleton, self.maxdeg, {m: {k: v * c for k, v in row.items()} for m, row in self.parts.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def degree_part(self, m: int) -> "ChordVector":
        return ChordVector(self.skeleton, self.maxdeg, {m: self.parts[m]} if m in self.parts else {})

    def truncate(self, maxdeg: int) -> "ChordVector":
        return ChordVector(self.skeleton, maxdeg, {m: r for m, r in self.parts.items() if m <= maxdeg})

    def coefficient(self, m: int, k: int) -> Scalar:
        return self.parts.get(m, {}).get(k, Fraction(0))

    def is_zero(self) -> bool:
        return not self.parts

    def lowest_degree(self) -> int | None:
        return min(self.parts, default=None)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChordVector):
            return NotImplemented
        return self.skeleton == other.skeleton and self.maxdeg == other.maxdeg and self.parts == other.parts

    def __hash__(self):
        return hash((self.skeleton, self.maxdeg, frozenset((m, frozenset(r.items())) for m, r in self.parts.items())))

    def agrees(self, other: "ChordVector", through: int | None = None) -> bool:
        """Equality of parts of degree <= through (default: common maxdeg)."""
        self._check(other)
        n = min(self.maxdeg, other.maxdeg) if through is None else through
        return all(self.parts.get(m, {}) == other.parts.get(m, {}) for m in range(n + 1))

    def to_raw(self) -> RawVector:
        terms: dict = {}
        for m, row in self.parts.items():
            q = quotient(self.skeleton, m)
            for k, v in row.items():
                _acc(terms, q.basis[k], v)
        return RawVector(self.skeleton, self.maxdeg, terms)

    def __str__(self) -> str:
        if not self.parts:
            return "0"
        out = []
        for m in sorted(self.parts):
            for k, v in sorted(self.parts[m].items()):
                out.append(f"({format_scalar(v)})*D[{m},{k}]")
        return " + ".join(out)

    __repr__ = __str__

    def to_json(self) -> dict:
        return {
            "skeleton": self.skeleton.to_json(),
            "maxdeg": self.maxdeg,
            "fingerprints": {str(m): quotient(self.skeleton, m).fingerprint() for m in range(self.maxdeg + 1)},
            "entries": [
                {"degree": m, "index": k, "coeff": scalar_to_json(v)}
                for m in sorted(self.parts)
                for k, v in sorted(self.parts[m].items())
            ],
        }


def reduce(skel: Skeleton, formal_sum: Iterable, maxdeg: int) -> ChordVector:
    """Reduce a formal sum of (diagram, coefficient) pairs modulo 4T and FI."""
    parts: dict = {}
    for d, c in formal_sum:
        if not c:
            continue
        m = len(d)
        if m > maxdeg:
            raise ValueError(f"diagram degree {m} exceeds maxdeg {maxdeg}")
        q = quotient(skel, m)
        tgt = parts.setdefault(m, {})
        for k, v in q.coords(d).items():
            _acc(tgt, k, c * v)
    return ChordVector(skel, maxdeg, parts)


# ---------------------------------------------------------------------------
# gluing


@lru_cache(maxsize=None)
def _glue(top: Skeleton, bottom: Skeleton):
    """Stack ``top`` on ``bottom``; returns (skeleton, mapping).

    ``mapping[(side, comp)] = (new comp, piece order)`` with side 0 for the
    bottom factor and 1 for the top factor.
    """
    if bottom.target != top.source:
        raise ValueError(
            f"cannot compose: target {orient_str(bottom.target)!r} of the lower factor "
            f"does not match source {orient_str(top.source)!r} of the upper factor"
        )

    def glob(side, p):
        if side == 0:
            return ("B", p[1]) if p[0] == "b" else ("J", p[1])
        return ("J", p[1]) if p[0] == "b" else ("T", p[1])

    pieces = []
    for side, sk in ((0, bottom), (1, top)):
        for c, (s, e) in enumerate(sk.arcs):
            pieces.append(((side, c), glob(side, s), glob(side, e)))
    starts = {}
    for pc in pieces:
        if pc[1][0] == "J":
            starts[pc[1]] = pc
    chains = []
    used = set()
    for pc in pieces:
        if pc[1][0] == "J":
            continue
        chain = [pc]
        used.add(pc[0])
        cur = pc
        while cur[2][0] == "J":
            cur = starts[cur[2]]
            chain.append(cur)
            used.add(cur[0])
        chains.append(chain)
    loops = []
    for pc in pieces:
        if pc[0] in used:
            continue
        chain = [pc]
        used.add(pc[0])
        cur = starts[pc[2]]
        while cur[0] not in used:
            chain.append(cur)
            used.add(cur[0])
            cur = starts[cur[2]]
        loops.append(chain)

    def outer(p):
        return ("b", p[1]) if p[0] == "B" else ("t", p[1])

    arcs = [(outer(ch[0][1]), outer(ch[-1][2])) for ch in chains]
    new = Skeleton(bottom.source, top.target, tuple(arcs), len(loops) + top.circles + bottom.circles)
    mapping = {}
    for ch in chains:
        comp = new.comp_at(outer(ch[0][1]))
        for order, pc in enumerate(ch):
            mapping[pc[0]] = (comp, order)
    nxt = len(new.arcs)
    for ch in loops:
        for order, pc in enumerate(ch):
            mapping[pc[0]] = (nxt, order)
        nxt += 1
    for side, sk in ((0, bottom), (1, top)):
        for c in range(len(sk.arcs), sk.ncomp):
            mapping[(side, c)] = (nxt, 0)
            nxt += 1
    return new, mapping


def _compose_diagrams(new: Skeleton, mapping: dict, dt: tuple, db: tuple) -> tuple:
    raw = []
    for side, d in ((0, db), (1, dt)):
        for a, b in d:
            ca, oa = mapping[(side, a[0])]
            cb, ob = mapping[(side, b[0])]
            raw.append(((ca, (oa, a[1])), (cb, (ob, b[1]))))
    return canonical(new, raw)


def compose_raw(top: RawVector, bottom: RawVector, maxdeg: int | None = None) -> RawVector:
    new, mapping = _glue(top.skeleton, bottom.skeleton)
    n = min(top.maxdeg, bottom.maxdeg) if maxdeg is None else maxdeg
    out: dict = {}
    bl = sorted(bottom.terms.items(), key=lambda t: len(t[0]))
    for dt, ct in top.terms.items():
        room = n - len(dt)
        if room < 0:
            continue
        for db, cb in bl:
            if len(db) > room:
                break
            _acc(out, _compose_diagrams(new, mapping, dt, db), ct * cb)
    return _raw(new, n, out)


def _raw(skel, n, terms) -> RawVector:
    out = RawVector.__new__(RawVector)
    out.skeleton, out.maxdeg, out.terms = skel, n, terms
    return out


def compose(a, b):
    """``a`` stacked on top of ``b`` (ChordVector or RawVector)."""
    if isinstance(a, RawVector) and isinstance(b, RawVector):
        return compose_raw(a, b)
    ra = a.to_raw() if isinstance(a, ChordVector) else a
    rb = b.to_raw() if isinstance(b, ChordVector) else b
    return compose_raw(ra, rb).reduce()


@lru_cache(maxsize=None)
def _tensor_skel(left: Skeleton, right: Skeleton):
    ns, nt = len(left.source), len(left.target)

    def sh(p):
        return (p[0], p[1] + (ns if p[0] == "b" else nt))

    arcs = list(left.arcs) + [(sh(s), sh(e)) for s, e in right.arcs]
    new = Skeleton(left.source + right.source, left.target + right.target, tuple(arcs), left.circles + right.circles)
    mapping = {}
    for c, (s, _) in enumerate(left.arcs):
        mapping[(0, c)] = new.comp_at(s)
    for c, (s, _) in enumerate(right.arcs):
        mapping[(1, c)] = new.comp_at(sh(s))
    nxt = len(new.arcs)
    for side, sk in ((0, left), (1, right)):
        for c in range(len(sk.arcs), sk.ncomp):
            mapping[(side, c)] = nxt
            nxt += 1
    return new, mapping


def tensor(a: RawVector, b: RawVector, maxdeg: int | None = None) -> RawVector:
    """Place ``a`` to the left of ``b``."""
    new, mapping = _tensor_skel(a.skeleton, b.skeleton)
    n = min(a.maxdeg, b.maxdeg) if maxdeg is None else maxdeg
    out: dict = {}
    for da, ca in a.terms.items():
        for db, cb in b.terms.items():
            if len(da) + len(db) > n:
                continue
            raw = [((mapping[(0, x[0])], x[1]), (mapping[(0, y[0])], y[1])) for x, y in da]
            raw += [((mapping[(1, x[0])], x[1]), (mapping[(1, y[0])], y[1])) for x, y in db]
            _acc(out, canonical(new, raw), ca * cb)
    return _raw(new, n, out)


# ---------------------------------------------------------------------------
# horizontal chords and permutations


def t_alphabet(n: int) -> tuple:
    """Letters t_ij (1 <= i < j <= n) in lexicographic order."""
    sep = "" if n < 10 else ","
    return tuple(f"t{i}{sep}{j}" for i in range(1, n + 1) for j in range(i + 1, n + 1))


@lru_cache(maxsize=None)
def t_pairs(n: int) -> tuple:
    return tuple((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1))


def _horizontal_diagram(skel: Skeleton, eps: tuple, word: Sequence) -> tuple:
    k = len(word)
    raw = []
    for pos, (i, j) in enumerate(word):
        h = k - 1 - pos
        pts = []
        for s in (i - 1, j - 1):
            pts.append((skel.strand(s), h if eps[s] == UP else -h))
        raw.append(tuple(pts))
    return canonical(skel, raw)


def _sign(eps, word) -> int:
    s = 1
    for i, j in word:
        s *= eps[i - 1] * eps[j - 1]
    return s


def horizontal(n: int, orientations: Sequence[int], word: Sequence, coeff: Scalar = 1, maxdeg: int | None = None) -> RawVector:
    """The product t_{i1 j1} ... t_{ik jk} (leftmost on top) on the n-strand skeleton."""
    eps = tuple(orientations)
    if len(eps) != n:
        raise ValueError("orientation length must equal the strand count")
    for i, j in word:
        if not (1 <= i < j <= n):
            raise IndexError(f"bad horizontal chord t_{i}{j} on {n} strands")
    skel = Skeleton.string_link(eps)
    n_max = len(word) if maxdeg is None else maxdeg
    if len(word) > n_max:
        return RawVector(skel, n_max)
    return RawVector(skel, n_max, {_horizontal_diagram(skel, eps, word): coeff * _sign(eps, word)})


def horizontal_series(orientations: Sequence[int], s: TruncSeries, maxdeg: int | None = None) -> RawVector:
    """Free series in the letters t_alphabet(n) realised as horizontal diagrams."""
    eps = tuple(orientations)
    n = len(eps)
    pairs = t_pairs(n)
    skel = Skeleton.string_link(eps)
    top = s.maxdeg if maxdeg is None else maxdeg
    out: dict = {}
    for w, c in s.terms.items():
        if len(w) > top:
            continue
        word = [pairs[a] for a in w]
        _acc(out, _horizontal_diagram(skel, eps, word), c * _sign(eps, word))
    return _raw(skel, top, out)


def perm_compose(p: Sequence[int], q: Sequence[int]) -> tuple:
    """(p q)(i) = p(q(i)): q applied first (lower in a stack)."""
    return tuple(p[q[i]] for i in range(len(q)))


def perm_inverse(p: Sequence[int]) -> tuple:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def permute(perm: Sequence[int], v):
    """The crossed-product element perm * v: the permutation placed above v."""
    rv = v.to_raw() if isinstance(v, ChordVector) else v
    if len(perm) != len(rv.skeleton.target):
        raise ValueError("permutation size does not match the strand count")
    p = RawVector.unit(Skeleton.permutation(tuple(perm), rv.skeleton.target), rv.maxdeg)
    out = compose_raw(p, rv)
    return out.reduce() if isinstance(v, ChordVector) else out


# ---------------------------------------------------------------------------
# string-link operations


def _require_string_link(skel: Skeleton, i: int) -> None:
    if not skel.is_string_link():
        raise ValueError("operation needs a string-link skeleton")
    if not 0 <= i < len(skel.source):
        raise IndexError(f"strand {i} out of range")


def _per_strand(skel: Skeleton) -> dict:
    return {skel.strand(i): i for i in range(len(skel.source))}


def _apply_linear(v, fn):
    rv = v.to_raw() if isinstance(v, ChordVector) else v
    new_skel, terms = fn(rv)
    out = _raw(new_skel, rv.maxdeg, terms)
    return out.reduce() if isinstance(v, ChordVector) else out


def double(v, strand: int):
    """Double strand ``strand`` (0-based), summing over all lifts of chord endpoints."""

    def fn(rv):
        skel = rv.skeleton
        _require_string_link(skel, strand)
        eps = skel.source
        new_eps = eps[:strand] + (eps[strand],) + eps[strand:]
        new = Skeleton.string_link(new_eps)
        which = _per_strand(skel)
        terms: dict = {}
        for d, c in rv.terms.items():
            pts = [p for ch in d for p in ch]
            hit = [k for k, p in enumerate(pts) if which[p[0]] == strand]
            for lift in product((0, 1), repeat=len(hit)):
                lifted = dict(zip(hit, lift))
                raw_pts = []
                for k, (comp, r) in enumerate(pts):
                    s = which[comp]
                    if s > strand or (s == strand and lifted.get(k)):
                        s += 1
                    raw_pts.append((new.strand(s), r))
                raw = [(raw_pts[2 * q], raw_pts[2 * q + 1]) for q in range(len(d))]
                _acc(terms, canonical(new, raw), c)
        return new, terms

    return _apply_linear(v, fn)


def delete(v, strand: int):
    """Remove a strand; diagrams with a chord endpoint on it go to zero."""

    def fn(rv):
        skel = rv.skeleton
        _require_string_link(skel, strand)
        eps = skel.source
        new = Skeleton.string_link(eps[:strand] + eps[strand + 1 :])
        which = _per_strand(skel)
        terms: dict = {}
        for d, c in rv.terms.items():
            if any(which[p[0]] == strand for ch in d for p in ch):
                continue
            raw = []
            for ch in d:
                raw.append(tuple((new.strand(which[p[0]] - (which[p[0]] > strand)), p[1]) for p in ch))
            _acc(terms, canonical(new, raw), c)
        return new, terms

    return _apply_linear(v, fn)


def reverse(v, strand: int):
    """Reverse the orientation of one strand.

    Sign convention: the geometric diagram is multiplied by (-1)^(endpoints on
    the strand), which keeps horizontal t_ij words unchanged.
    """

    def fn(rv):
        skel = rv.skeleton
        _require_string_link(skel, strand)
        eps = list(skel.source)
        eps[strand] = -eps[strand]
        new = Skeleton.string_link(tuple(eps))
        which = _per_strand(skel)
        comp = skel.strand(strand)
        terms: dict = {}
        for d, c in rv.terms.items():
            raw = []
            hits = 0
            for ch in d:
                pts = []
                for p in ch:
                    s = which[p[0]]
                    if p[0] == comp:
                        hits += 1
                        pts.append((new.strand(s), -p[1]))
                    else:
                        pts.append((new.strand(s), p[1]))
                raw.append(tuple(pts))
            _acc(terms, canonical(new, raw), -c if hits % 2 else c)
        return new, terms

    return _apply_linear(v, fn)


def closure(v):
    """Close a single open strand into a circle."""

    def fn(rv):
        skel = rv.skeleton
        if len(skel.arcs) != 1 or skel.circles or len(skel.source) != 1:
            raise ValueError("closure needs a single open strand")
        new = Skeleton.circle()
        terms: dict = {}
        for d, c in rv.terms.items():
            _acc(terms, canonical(new, [((0, a[1]), (0, b[1])) for a, b in d]), c)
        return new, terms

    return _apply_linear(v, fn)


def cut(w, orientation: int = UP):
    """Cut a circle diagram open at the start of its canonical word.

    Endpoint order along the orientation is kept, so ``closure`` inverts it.
    """

    def fn(rv):
        skel = rv.skeleton
        if skel != Skeleton.circle():
            raise ValueError("cut needs the circle skeleton")
        new = Skeleton.interval(orientation)
        terms: dict = {}
        for d, c in rv.terms.items():
            _acc(terms, canonical(new, [((0, a[1]), (0, b[1])) for a, b in d]), c)
        return new, terms

    return _apply_linear(w, fn)


def connected_sum(a, b):
    """a # b on the circle: cut both, compose, close."""
    return closure(compose(cut(a), cut(b)))


# ---------------------------------------------------------------------------
# normal form of the horizontal algebra U p_n
#
# U p_n = U f_{n-1} (t_{1n}, ..., t_{n-1,n}) (x) U p_{n-1} as a vector space;
# a normal monomial is (w_n, w_{n-1}, ..., w_2) with w_k a word in the letters
# i (meaning t_{ik}); it stands for the product w_n w_{n-1} ... w_2.  The
# generators t_ij (i < j < k) act on the free factor by the derivations
#   t_ik -> [t_ik, t_jk],  t_jk -> [t_jk, t_ik],  t_lk -> 0,
# which are the infinitesimal braid relations rewritten.


@lru_cache(maxsize=None)
def _derive(i: int, j: int, f: tuple) -> tuple:
    out: dict = {}
    for p, l in enumerate(f):
        if l == i:
            s = 1
        elif l == j:
            s = -1
        else:
            continue
        _acc(out, f[:p] + (i, j) + f[p + 1 :], s)
        _acc(out, f[:p] + (j, i) + f[p + 1 :], -s)
    return tuple(out.items())


@lru_cache(maxsize=None)
def _commute(gens: tuple, f: tuple) -> tuple:
    """u * f = sum f' * u' for u a product of lower generators (pairs)."""
    if not gens:
        return ((f, (), 1),)
    x = gens[0]
    out: dict = {}
    for fp, up, c in _commute(gens[1:], f):
        _acc(out, (fp, (x,) + up), c)
        for fq, cq in _derive(x[0], x[1], fp):
            _acc(out, (fq, up), c * cq)
    return tuple((k[0], k[1], v) for k, v in out.items())


def _gens_of(mono: tuple, n: int) -> tuple:
    """Generators (i, k) of a normal monomial of U p_n, in product order."""
    out = []
    for pos, w in enumerate(mono):
        k = n - pos
        out.extend((i, k) for i in w)
    return tuple(out)


def _mono_of(gens: tuple, n: int) -> tuple:
    levels = [[] for _ in range(n - 1)]
    for i, k in gens:
        levels[n - k].append(i)
    return tuple(tuple(w) for w in levels)


@lru_cache(maxsize=1 << 18)
def _pn_mul(n: int, m1: tuple, m2: tuple) -> tuple:
    if n <= 1:
        return (((), 1),)
    f1, u1 = m1[0], m1[1:]
    f2, u2 = m2[0], m2[1:]
    if not any(u1):
        if n == 2:
            return (((f1 + f2,), 1),)
        return tuple(((f1 + f2,) + u, c) for u, c in _pn_mul(n - 1, u1, u2))
    out: dict = {}
    for fp, up, c in _commute(_gens_of(u1, n - 1), f2):
        f = f1 + fp
        um = _mono_of(up, n - 1)
        for u, c2 in _pn_mul(n - 1, um, u2):
            _acc(out, (f,) + u, c * c2)
    return tuple(out.items())


class PnAlgebra:
    """The truncated algebra U p_n in its normal-form basis."""

    def __init__(self, n: int, maxdeg: int):
        self.n = n
        self.maxdeg = maxdeg

    def one(self) -> "PnElement":
        return PnElement(self, {tuple(() for _ in range(self.n - 1)): Fraction(1)})

    def zero(self) -> "PnElement":
        return PnElement(self, {})

    def t(self, i: int, j: int, coeff: Scalar = 1) -> "PnElement":
        if i > j:
            i, j = j, i
        if not (1 <= i < j <= self.n):
            raise IndexError(f"t_{i}{j} outside {self.n} strands")
        levels = [() for _ in range(self.n - 1)]
        levels[self.n - j] = (i,)
        return PnElement(self, {tuple(levels): as_scalar(coeff)})

    def block(self, left: Sequence[int], right: Sequence[int]) -> "PnElement":
        """t_{I,J} = sum of t_ij over i in I, j in J."""
        out = self.zero()
        for i in left:
            for j in right:
                out = out + self.t(i, j)
        return out

    def from_word(self, word: Sequence) -> "PnElement":
        out = self.one()
        for i, j in word:
            out = out * self.t(i, j)
        return out

    def from_free(self, s: TruncSeries) -> "PnElement":
        pairs = t_pairs(self.n)
        out: dict = {}
        for w, c in s.terms.items():
            if len(w) > self.maxdeg:
                continue
            for m, v in self.from_word([pairs[a] for a in w]).terms.items():
                _acc(out, m, c * v)
        return PnElement(self, out)

    def __eq__(self, other):
        return isinstance(other, PnAlgebra) and (self.n, self.maxdeg) == (other.n, other.maxdeg)

    def __hash__(self):
        return hash((self.n, self.maxdeg))


class PnElement:
    __slots__ = ("alg", "terms")

    def __init__(self, alg: PnAlgebra, terms: dict):
        self.alg = alg
        self.terms = {m: c for m, c in terms.items() if c and _mdeg(m) <= alg.maxdeg}

    def like(self, terms):
        out = PnElement.__new__(PnElement)
        out.alg, out.terms = self.alg, terms
        return out

    def constant(self) -> Scalar:
        return self.terms.get(tuple(() for _ in range(self.alg.n - 1)), Fraction(0))

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Coefficient)):
            other = self.alg.one().scale(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            _acc(out, m, c)
        return self.like(out)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        if not c:
            return self.like({})
        return self.like({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Coefficient)):
            return self.scale(other)
        n, top = self.alg.n, self.alg.maxdeg
        by_deg: dict = {}
        for m, c in other.terms.items():
            by_deg.setdefault(_mdeg(m), []).append((m, c))
        out: dict = {}
        for m1, c1 in self.terms.items():
            room = top - _mdeg(m1)
            for d in range(room + 1):
                for m2, c2 in by_deg.get(d, ()):
                    cc = c1 * c2
                    for m, v in _pn_mul(n, m1, m2):
                        _acc(out, m, cc * v)
        return self.like(out)

    __rmul__ = scale

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.alg.one().scale(other)
        return isinstance(other, PnElement) and self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def degree_part(self, d: int) -> "PnElement":
        return self.like({m: c for m, c in self.terms.items() if _mdeg(m) == d})

    def lowest_degree(self):
        return min((_mdeg(m) for m in self.terms), default=None)

    def relabel(self, perm: Sequence[int]) -> "PnElement":
        """Apply t_ij -> t_{perm(i) perm(j)} (perm 0-based on strand indices)."""
        out: dict = {}
        for m, c in self.terms.items():
            for mm, v in _relabel_mono(self.alg.n, self.alg.maxdeg, tuple(perm), m).terms.items():
                _acc(out, mm, c * v)
        return self.like(out)

    def words(self) -> Iterable:
        """Yield (list of pairs, coefficient) for each normal monomial."""
        n = self.alg.n
        for m, c in self.terms.items():
            yield list(_gens_of(m, n)), c

    def to_raw(self, orientations: Sequence[int]) -> RawVector:
        eps = tuple(orientations)
        skel = Skeleton.string_link(eps)
        out: dict = {}
        for word, c in self.words():
            _acc(out, _horizontal_diagram(skel, eps, word), c * _sign(eps, word))
        return _raw(skel, self.alg.maxdeg, out)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for word, c in sorted(self.words(), key=lambda wc: (len(wc[0]), wc[0])):
            w = ".".join(f"t{i}{j}" for i, j in word) or "1"
            parts.append(f"({format_scalar(c)})*{w}")
        return " + ".join(parts)

    __repr__ = __str__


def _mdeg(m: tuple) -> int:
    return sum(len(w) for w in m)


@lru_cache(maxsize=None)
def _relabel_mono(n: int, maxdeg: int, perm: tuple, m: tuple) -> PnElement:
    alg = PnAlgebra(n, maxdeg)
    out = alg.one()
    for i, k in _gens_of(m, n):
        out = out * alg.t(perm[i - 1] + 1, perm[k - 1] + 1)
    return out


def _generic_exp(x, one):
    out = one
    term = one
    k = 1
    while True:
        term = (term * x).scale(Fraction(1, k))
        if not term:
            return out
        out = out + term
        k += 1


def _generic_log(g, one):
    x = g - one
    out = one.scale(0)
    p = one
    k = 1
    while True:
        p = p * x
        if not p:
            return out
        out = out + p.scale(Fraction((-1) ** (k + 1), k))
        k += 1


def _generic_inverse(g, one):
    c = g.constant()
    inv0 = 1 / c if isinstance(c, Fraction) else c.inverse()
    x = one - g.scale(inv0)
    out = one
    p = one
    while True:
        p = p * x
        if not p:
            return out.scale(inv0)
        out = out + p


PnElement.exp = lambda self: _generic_exp(self, self.alg.one())
PnElement.log = lambda self: _generic_log(self, self.alg.one())
PnElement.inverse = lambda self: _generic_inverse(self, self.alg.one())


class CrossedBraid:
    """Element of K[S_n] * (pure part): a map permutation -> pure element.

    The pair (perm, x) stands for perm * x: the horizontal part x sits below
    the permutation.  ``pure`` is either a TruncSeries over ``t_alphabet(n)``
    (free model, used for evaluation) or a PnElement (normal form).
    """

    __slots__ = ("n", "parts")

    def __init__(self, n: int, parts: Mapping):
        self.n = n
        self.parts = {tuple(p): x for p, x in parts.items() if x}

    @staticmethod
    def identity_perm(n: int) -> tuple:
        return tuple(range(n))

    def pure(self):
        """The horizontal part when this element is pure."""
        if set(self.parts) - {self.identity_perm(self.n)}:
            raise ValueError("element is not pure")
        return self.parts.get(self.identity_perm(self.n))

    def is_pure(self) -> bool:
        return set(self.parts) <= {self.identity_perm(self.n)}

    def __add__(self, other: "CrossedBraid") -> "CrossedBraid":
        out = dict(self.parts)
        for p, x in other.parts.items():
            out[p] = out[p] + x if p in out else x
        return CrossedBraid(self.n, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "CrossedBraid":
        return CrossedBraid(self.n, {p: x.scale(c) for p, x in self.parts.items()})

    def __mul__(self, other: "CrossedBraid") -> "CrossedBraid":
        out: dict = {}
        for p1, x1 in self.parts.items():
            for p2, x2 in other.parts.items():
                # x1 * p2 = p2 * relabel_{p2^{-1}}(x1)
                y = relabel(x1, perm_inverse(p2)) * x2
                p = perm_compose(p1, p2)
                out[p] = out[p] + y if p in out else y
        return CrossedBraid(self.n, out)

    def inverse(self) -> "CrossedBraid":
        if len(self.parts) != 1:
            raise ValueError("only monomial crossed elements are inverted here")
        (p, x), = self.parts.items()
        # (p x)^{-1} = x^{-1} p^{-1} = p^{-1} relabel_p(x^{-1})
        return CrossedBraid(self.n, {perm_inverse(p): relabel(x.inverse(), p)})

    def __eq__(self, other):
        return isinstance(other, CrossedBraid) and self.parts == other.parts

    def to_raw(self, orientations: Sequence[int], maxdeg: int) -> RawVector:
        """Realise on the skeleton with source ``orientations``."""
        eps = tuple(orientations)
        out = None
        for p, x in self.parts.items():
            if isinstance(x, TruncSeries):
                h = horizontal_series(eps, x, maxdeg)
            else:
                h = x.to_raw(eps)
            r = compose_raw(RawVector.unit(Skeleton.permutation(p, eps), maxdeg), h, maxdeg)
            out = r if out is None else out + r
        if out is None:
            raise ValueError("empty crossed element has no skeleton")
        return out


def relabel(x, perm: Sequence[int]):
    """t_ij -> t_{perm(i) perm(j)} on a pure element (free series or normal form)."""
    perm = tuple(perm)
    if all(perm[i] == i for i in range(len(perm))):
        return x
    if isinstance(x, PnElement):
        return x.relabel(perm)
    n = len(perm)
    pairs = t_pairs(n)
    idx = {pq: a for a, pq in enumerate(pairs)}
    letter_map = []
    for i, j in pairs:
        a, b = perm[i - 1] + 1, perm[j - 1] + 1
        letter_map.append(idx[(min(a, b), max(a, b))])
    return x.like({tuple(letter_map[a] for a in w): c for w, c in x.terms.items()})
