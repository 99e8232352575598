import pytest
from hypothesis import given, strategies as st

from hopfss.fplin import Subspace
from hopfss.graded import (GradedMap, GradedSpace, GradedSubspace, RestrictionError, compose, restrict_corestrict,
                           tensor, tensor_map)
from hopfss.hopf import Generator, HopfAlgebra, Presentation


def exterior_one(D=4):
    return HopfAlgebra(Presentation(3, D, (Generator("x", 1, 2),), {}, {}, "E"))


def test_tensor_examples():
    E = exterior_one()
    sq = tensor([E.space, E.space])
    assert sq.dims() == {0: 1, 1: 2, 2: 1}
    assert sorted(sq.fmt(l) for l in sq.labels(1)) == sorted(["x⊗1", "1⊗x"])
    k = GradedSpace.unit(4)
    assert tensor([E.space, k]).dims() == E.space.dims()
    T = HopfAlgebra(Presentation(3, 8, (Generator("xi", 4, 3),), {}, {}, "T"))
    s8 = tensor([T.space, T.space])
    assert sorted(s8.fmt(l) for l in s8.labels(8)) == sorted(["xi^2⊗1", "xi⊗xi", "1⊗xi^2"])


def test_tensor_map_examples():
    E = exterior_one()
    i = GradedMap.identity(E.space, 3)
    assert tensor_map([i, i]) == GradedMap.identity(tensor([E.space, E.space]), 3)
    zero = GradedMap(E.space, E.space, 3)
    assert tensor_map([zero, i]).is_zero()
    k = GradedSpace.unit(4)
    eps = GradedMap.from_function(E.space, k, 3, lambda m: {(): 1} if E.degree(m) == 0 else {})
    f = tensor_map([eps, i])
    x, one = E.monomial("x"), E.unit
    assert f.apply({(x, one): 1, (one, x): 1}) == {((), x): 1}


def test_compose_and_antipode_square():
    E = exterior_one()
    i = GradedMap.identity(E.space, 3)
    c = GradedMap.from_function(E.space, E.space, 3, E.antipode)
    assert compose(c, i) == c
    assert compose(c, c) == i


def test_restriction():
    E = exterior_one()
    i = GradedMap.identity(E.space, 3)
    sub = GradedSubspace(E.space, {1: Subspace.full(1, 3)}, 3)
    r = restrict_corestrict(i, sub, sub)
    assert r == GradedMap.identity(sub.space, 3)
    # x ↦ 1 is not degree preserving; use the swap on E⊗E against the first-factor subspace
    sq = tensor([E.space, E.space])
    swap = GradedMap.from_function(sq, sq, 3, lambda w: {(w[1], w[0]): 1})
    x, one = E.monomial("x"), E.unit
    first = GradedSubspace.span(sq, [{(x, one): 1}], 3)
    with pytest.raises(RestrictionError, match="does not restrict"):
        restrict_corestrict(swap, first, first)


@st.composite
def spaces(draw):
    D = draw(st.integers(1, 6))
    slices = {}
    for u in range(D + 1):
        n = draw(st.integers(0, 2))
        if n:
            slices[u] = [(u, i) for i in range(n)]
    return GradedSpace(slices, D)


@given(spaces(), spaces())
def test_tensor_dims_are_convolutions(a, b):
    t = tensor([a, b])
    D = min(a.max_degree, b.max_degree)
    for u in range(D + 1):
        want = sum(a.dim(i) * b.dim(u - i) for i in range(u + 1))
        assert t.dim(u) == want


@given(spaces(), spaces(), spaces())
def test_tensor_associative_dims(a, b, c):
    assert tensor([tensor([a, b]), c]).dims() == tensor([a, tensor([b, c])]).dims() == tensor([a, b, c]).dims()


@given(spaces(), st.data())
def test_tensor_map_respects_composition(a, data):
    p = 5

    def rand_map(space):
        blocks = {}
        from hopfss.fplin import SparseMatrix
        for u in space.degrees():
            n = space.dim(u)
            dense = data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=n, max_size=n), min_size=n, max_size=n))
            blocks[u] = SparseMatrix.from_dense(dense, p, cols=n)
        return GradedMap(space, space, p, blocks)
    f1, g1, f2, g2 = (rand_map(a) for _ in range(4))
    lhs = tensor_map([compose(f1, g1), compose(f2, g2)])
    rhs = compose(tensor_map([f1, f2]), tensor_map([g1, g2]))
    assert lhs == rhs
