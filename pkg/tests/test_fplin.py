import numpy as np
import pytest
from hypothesis import given, strategies as st

from hopfss.fplin import (LinearAlgebraError, PrimeField, SparseMatrix, Subspace, image, kernel, quotient, rank,
                          rref, subquotient_homology)
from oracles import enumerate_kernel, rank_mod_p

PRIMES = [2, 3, 5, 7]


@st.composite
def matrices(draw, max_rows=6, max_cols=6):
    p = draw(st.sampled_from(PRIMES))
    r = draw(st.integers(0, max_rows))
    c = draw(st.integers(0, max_cols))
    dense = draw(st.lists(st.lists(st.integers(0, p - 1), min_size=c, max_size=c), min_size=r, max_size=r))
    return p, r, c, dense


def sm(dense, p, cols=None):
    return SparseMatrix.from_dense(dense, p, cols=cols)


def test_rref_examples():
    m, piv = rref(sm([[1, 2], [2, 4]], 5))
    assert m.to_dense() == [[1, 2]] and piv == [0]
    m, piv = rref(SparseMatrix.identity(3, 3))
    assert m.to_dense() == SparseMatrix.identity(3, 3).to_dense() and piv == [0, 1, 2]
    m, piv = rref(SparseMatrix.zero(2, 2, 3))
    assert m.rows == 0 and piv == []


def test_kernel_example_matches_enumeration():
    # the enumeration oracle gives span{(1,2)} = span{(3,1)}; see the decisions ledger on "(1,4)"
    k = kernel(sm([[1, 2], [2, 4]], 5))
    assert k.dim == 1
    assert k.vectors() == [{0: 1, 1: 2}]
    brute = enumerate_kernel([[1, 2], [2, 4]], 5)
    assert len(brute) == 5 and (1, 2) in brute
    assert kernel(SparseMatrix.identity(3, 3)).dim == 0
    assert kernel(SparseMatrix.zero(2, 2, 3)).dim == 2


def test_image_examples():
    assert image(sm([[1, 2], [2, 4]], 5)).dim == 1
    assert image(SparseMatrix.identity(3, 3)).dim == 3
    assert image(SparseMatrix.zero(2, 2, 3)).dim == 0


def test_quotient_examples():
    amb = Subspace.full(2, 3)
    reps, proj = quotient(amb, Subspace.span([{0: 1}], 2, 3))
    assert reps == [{1: 1}]
    reps, proj = quotient(amb, amb)
    assert reps == []
    reps, proj = quotient(amb, Subspace.zero(2, 3))
    assert proj == SparseMatrix.identity(2, 3)
    with pytest.raises(LinearAlgebraError, match="not a subspace"):
        quotient(Subspace.span([{0: 1}], 2, 3), Subspace.span([{1: 1}], 2, 3))


def test_homology_examples():
    z = SparseMatrix.zero(2, 2, 3)
    assert subquotient_homology(z, z).dim == 2
    assert subquotient_homology(SparseMatrix.identity(2, 3), SparseMatrix.zero(0, 2, 3)).dim == 0
    h = subquotient_homology(SparseMatrix.zero(2, 0, 5), sm([[1, 2], [2, 4]], 5))
    assert h.dim == 1
    with pytest.raises(LinearAlgebraError, match="not a complex"):
        subquotient_homology(SparseMatrix.identity(2, 3), SparseMatrix.identity(2, 3))


def test_prime_field_rejects_composites():
    with pytest.raises(LinearAlgebraError):
        PrimeField(4)
    assert PrimeField(7).inv(3) == 5


@given(matrices())
def test_rank_matches_dense_oracle(data):
    p, r, c, dense = data
    m = sm(dense, p, cols=c)
    want = rank_mod_p(np.array(dense, dtype=np.int64).reshape(r, c), p) if r and c else 0
    assert rank(m) == want


@given(matrices())
def test_rank_nullity(data):
    p, r, c, dense = data
    m = sm(dense, p, cols=c)
    k = kernel(m)
    assert rank(m) + k.dim == c
    for v in k.vectors():
        assert not m.apply(v)


@given(matrices())
def test_rref_idempotent_and_canonical(data):
    p, r, c, dense = data
    m = sm(dense, p, cols=c)
    a, piv = rref(m)
    b, piv2 = rref(a)
    assert a == b and piv == piv2
    # reversing the row order gives the same canonical basis
    c2, _ = rref(sm(list(reversed(dense)), p, cols=c))
    assert c2 == a


@given(matrices(), st.data())
def test_subspace_dimension_formula(data, more):
    p, r, c, dense = data
    if c == 0:
        return
    other = more.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=c, max_size=c), max_size=5))
    U = Subspace.span([dict(enumerate(row)) for row in dense], c, p)
    V = Subspace.span([dict(enumerate(row)) for row in other], c, p)
    assert (U + V).dim + U.intersect(V).dim == U.dim + V.dim
    assert U.intersect(V).is_subspace_of(U) and U.intersect(V).is_subspace_of(V)


@given(matrices())
def test_quotient_kills_sub(data):
    p, r, c, dense = data
    if c == 0:
        return
    U = Subspace.full(c, p)
    S = Subspace.span([dict(enumerate(row)) for row in dense], c, p)
    reps, proj = quotient(U, S)
    assert len(reps) == c - S.dim
    for v in S.vectors():
        assert not proj.apply(U.coordinates(v))
