from fractions import Fraction as F

import pytest

from gt_tangle.diagrams import (
    DOWN,
    UP,
    ChordVector,
    CrossedBraid,
    PnAlgebra,
    Quotient,
    RawVector,
    Skeleton,
    closure,
    compose,
    connected_sum,
    cut,
    delete,
    double,
    enumerate_diagrams,
    has_isolated,
    horizontal,
    perm_compose,
    perm_inverse,
    quotient,
    reverse,
    tensor,
)

UU, UUU = (UP, UP), (UP, UP, UP)


def dims(skel, n, fi=True):
    return [len(quotient(skel, m, fi=fi).basis) for m in range(n + 1)]


def test_circle_dimensions():
    # [DERIVED] brute-force enumeration + row reduction
    assert dims(Skeleton.circle(), 4) == [1, 0, 1, 1, 3]


def test_framed_circle_dimensions():
    assert dims(Skeleton.circle(), 4, fi=False) == [1, 1, 2, 3, 6]


def test_interval_matches_circle():
    assert dims(Skeleton.interval(), 4) == dims(Skeleton.circle(), 4)
    assert dims(Skeleton.interval(DOWN), 3) == dims(Skeleton.circle(), 3)


def test_enumeration_counts_circle():
    # chord diagrams on a circle up to rotation: 1, 1, 2, 5, 18
    assert [len(list(enumerate_diagrams(Skeleton.circle(), m))) for m in range(5)] == [1, 1, 2, 5, 18]


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_shuffle_stability(seed):
    skel = Skeleton.circle()
    ref = quotient(skel, 4)
    q = Quotient(skel, 4, shuffle_seed=seed)
    assert len(q.basis) == len(ref.basis)
    images = [q.coords(b) for b in ref.basis]
    for d in enumerate_diagrams(skel, 4):
        lhs = q.coords(d)
        rhs: dict = {}
        for k, c in ref.coords(d).items():
            for j, v in images[k].items():
                rhs[j] = rhs.get(j, 0) + c * v
        assert {j: v for j, v in lhs.items() if v} == {j: v for j, v in rhs.items() if v}


def test_fi_kills_isolated_chords():
    skel = Skeleton.circle()
    for d in enumerate_diagrams(skel, 3):
        if has_isolated(d):
            assert not quotient(skel, 3).coords(d)


def test_infinitesimal_braid_relations():
    # 4T on horizontal chords: [t12, t13 + t23] = 0 and far commutativity
    n = 3
    lhs = horizontal(3, UUU, [(1, 2), (1, 3)], 1, n) + horizontal(3, UUU, [(1, 2), (2, 3)], 1, n)
    rhs = horizontal(3, UUU, [(1, 3), (1, 2)], 1, n) + horizontal(3, UUU, [(2, 3), (1, 2)], 1, n)
    assert (lhs - rhs).reduce().is_zero()
    eps = (UP,) * 4
    a = horizontal(4, eps, [(1, 2), (3, 4)], 1, 2)
    b = horizontal(4, eps, [(3, 4), (1, 2)], 1, 2)
    assert (a - b).reduce().is_zero()


def test_orientation_sign():
    # t_ij carries the product of the strand orientations, so it is natural under reversal
    ud = horizontal(2, (UP, DOWN), [(1, 2)], 1, 1)
    uu = horizontal(2, UU, [(1, 2)], 1, 1)
    assert reverse(ud, 1).reduce() == uu.reduce()
    assert not ud.reduce().is_zero()


def test_doubling_and_deletion():
    n = 2
    t12 = horizontal(2, UU, [(1, 2)], 1, n)
    d = double(t12, 0)
    expect = horizontal(3, UUU, [(1, 3)], 1, n) + horizontal(3, UUU, [(2, 3)], 1, n)
    assert (d - expect).reduce().is_zero()
    one = RawVector.unit(Skeleton.string_link((UP,)), n)
    assert delete(t12, 0).reduce().is_zero()
    assert delete(RawVector.unit(Skeleton.string_link(UU), n), 1).reduce() == one.reduce()


def test_compose_tensor_units():
    n = 3
    t = horizontal(2, UU, [(1, 2)], 1, n)
    u = RawVector.unit(Skeleton.string_link(UU), n)
    assert compose(t, u).reduce() == t.reduce()
    assert compose(u, t).reduce() == t.reduce()
    side = tensor(t, RawVector.unit(Skeleton.string_link((UP,)), n))
    assert (side - horizontal(3, UUU, [(1, 2)], 1, n)).reduce().is_zero()


def test_close_cut_connected_sum():
    n = 4
    circ = ChordVector.unit(Skeleton.circle(), n)
    assert closure(RawVector.unit(Skeleton.interval(), n)).reduce() == circ
    x = ChordVector(Skeleton.circle(), n, {2: {0: F(1)}})
    assert closure(cut(x)) == x
    assert connected_sum(circ, circ) == circ
    assert connected_sum(x, circ) == x == connected_sum(circ, x)
    assert connected_sum(x, x).lowest_degree() == 4


def test_permutations():
    p, q = (1, 2, 0), (1, 0, 2)
    assert perm_compose(p, perm_inverse(p)) == (0, 1, 2)
    assert perm_compose(p, q) == tuple(p[q[i]] for i in range(3))


def test_pn_normal_form_matches_raw():
    alg = PnAlgebra(3, 3)
    x = alg.t(1, 2) * alg.t(2, 3) + alg.t(1, 3).scale(F(1, 2))
    free = x.to_raw(UUU).reduce()
    raw = horizontal(3, UUU, [(1, 2), (2, 3)], 1, 3) + horizontal(3, UUU, [(1, 3)], F(1, 2), 3)
    assert free == raw.reduce()


def test_crossed_product_relabel():
    alg = PnAlgebra(2, 2)
    s = CrossedBraid(2, {(1, 0): alg.one()})
    t = CrossedBraid(2, {(0, 1): alg.t(1, 2)})
    assert s * t == CrossedBraid(2, {(1, 0): alg.t(1, 2)})
    assert s * s == CrossedBraid(2, {(0, 1): alg.one()})


def test_json_fingerprints():
    v = ChordVector.unit(Skeleton.circle(), 3)
    js = v.to_json()
    assert js["fingerprints"]["3"] == quotient(Skeleton.circle(), 3).fingerprint()
    assert quotient(Skeleton.circle(), 3).fingerprint() == Quotient(Skeleton.circle(), 3).fingerprint()
