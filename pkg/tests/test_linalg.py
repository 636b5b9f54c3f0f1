from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carnoconn.linalg import (
    GramNotSPD,
    IPSpace,
    Mat,
    NotSurjective,
    decompose,
    gram_adjoint,
    gram_pinv,
    induced_gram,
    inverse,
    is_spd,
    solve,
)
from carnoconn.rat import rat

STD1 = IPSpace.standard(1)
STD2 = IPSpace.standard(2)


rationals = st.fractions(
    min_value=Fraction(-5), max_value=Fraction(5), max_denominator=6
).map(rat)


def rational_matrix(max_dim=4):
    return st.integers(1, max_dim).flatmap(
        lambda r: st.integers(1, max_dim).flatmap(
            lambda c: st.lists(
                st.lists(rationals, min_size=c, max_size=c),
                min_size=r,
                max_size=r,
            ).map(Mat)
        )
    )


def test_decompose_diagonal_projector():
    d = decompose(Mat([[1, 0], [0, 0]]))
    assert d.rank == 1
    assert d.kernel_basis.cols == 1
    assert d.kernel_basis.col(0) == [rat(0), rat(1)]


def test_decompose_identity():
    d = decompose(Mat.identity(2))
    assert d.rank == 2
    assert d.kernel_basis.cols == 0


def test_decompose_rank_one():
    # hand Gaussian elimination: kernel spanned by (2, -1)
    m = Mat([[1, 2], [2, 4]])
    d = decompose(m)
    assert d.rank == 1
    k = d.kernel_basis
    assert k.cols == 1
    assert (m @ k).is_zero()
    v = k.col(0)
    assert v[0] * rat(-1) == v[1] * rat(2)


def test_gram_adjoint_identity():
    assert gram_adjoint(Mat.identity(2), STD2, STD2) == Mat.identity(2)


def test_gram_adjoint_transpose_under_standard_gram():
    assert gram_adjoint(Mat([[1, 1]]), STD2, STD1) == Mat([[1], [1]])


def test_gram_adjoint_weighted():
    # <Mv, w>_cod = <v, M*w>_dom solved by hand with dom gram [[4]]
    dom = IPSpace(Mat([[4]]))
    assert gram_adjoint(Mat([[1]]), dom, STD1) == Mat([[rat("1/4")]])


def test_gram_pinv_identity():
    assert gram_pinv(Mat.identity(2), STD2, STD2) == Mat.identity(2)


def test_gram_pinv_normal_equations():
    # M^T (M M^T)^-1 for the surjective row [[1, 1]]
    assert gram_pinv(Mat([[1, 1]]), STD2, STD1) == Mat([["1/2"], ["1/2"]])


def test_gram_pinv_orthogonal_projector_is_own_pinv():
    p = Mat([[1, 0], [0, 0]])
    assert gram_pinv(p, STD2, STD2) == p


def test_gram_pinv_surjective_independent_of_cod_gram():
    m = Mat([[1, 2, 0], [0, 1, 1]])
    dom = IPSpace(Mat([[2, 0, 0], [0, 1, 0], [0, 0, 3]]))
    other = IPSpace(Mat([[5, 1], [1, 2]]))
    assert gram_pinv(m, dom, IPSpace.standard(2)) == gram_pinv(m, dom, other)


def test_induced_gram_identity():
    g = Mat([[2, 1], [1, 3]])
    dom = IPSpace(g)
    assert induced_gram(Mat.identity(2), dom).gram == g


def test_induced_gram_projection():
    assert induced_gram(Mat([[1, 0]]), STD2).gram == Mat([[1]])


def test_induced_gram_row_sum():
    # l^-1 = (1/2, 1/2)^T, squared norm 1/2
    assert induced_gram(Mat([[1, 1]]), STD2).gram == Mat([["1/2"]])


def test_induced_gram_rejects_non_surjective():
    with pytest.raises(NotSurjective):
        induced_gram(Mat([[1, 1], [2, 2]]), STD2)


def test_spd_check():
    assert is_spd(Mat([[2, 1], [1, 1]]))
    assert not is_spd(Mat([[1, 2], [2, 1]]))
    assert not is_spd(Mat([[1, 2], [0, 1]]))
    with pytest.raises(GramNotSPD):
        IPSpace(Mat([[0]]))


def test_solve_consistency():
    m = Mat([[1, 2], [2, 4]])
    assert solve(m, [rat(1), rat(2)]) is not None
    assert solve(m, [rat(1), rat(3)]) is None


def test_inverse_round_trip():
    m = Mat([[2, 1], [1, 1]])
    assert m @ inverse(m) == Mat.identity(2)


def _diag_gram(diag):
    n = len(diag)
    g = Mat.zeros(n, n)
    for i, d in enumerate(diag):
        g.a[i][i] = rat(d)
    return IPSpace(g, check=False)


@settings(max_examples=60, deadline=None)
@given(rational_matrix())
def test_pinv_moore_penrose_identities(m):
    dom = IPSpace.standard(m.cols)
    cod = IPSpace.standard(m.rows)
    p = gram_pinv(m, dom, cod)
    assert m @ p @ m == m
    assert p @ m @ p == p
    # self-adjointness of both composites under the standard Grams
    assert (m @ p).is_symmetric()
    assert (p @ m).is_symmetric()


@settings(max_examples=40, deadline=None)
@given(rational_matrix(), st.lists(st.integers(1, 4), min_size=4, max_size=4))
def test_pinv_weighted_moore_penrose(m, diags):
    dom = _diag_gram(diags[: m.cols] + [1] * max(0, m.cols - len(diags)))
    cod = _diag_gram(diags[: m.rows] + [1] * max(0, m.rows - len(diags)))
    p = gram_pinv(m, dom, cod)
    assert m @ p @ m == m
    assert p @ m @ p == p
    mp = m @ p
    pm = p @ m
    assert gram_adjoint(mp, cod, cod) == mp
    assert gram_adjoint(pm, dom, dom) == pm


@settings(max_examples=60, deadline=None)
@given(rational_matrix())
def test_pinv_and_adjoint_share_image_and_kernel(m):
    dom = IPSpace.standard(m.cols)
    cod = IPSpace.standard(m.rows)
    p = gram_pinv(m, dom, cod)
    adj = gram_adjoint(m, dom, cod)
    # same image
    both = p.hstack(adj)
    assert decompose(both).rank == decompose(p).rank == decompose(adj).rank
    # same kernel
    kp = decompose(p).kernel_basis
    ka = decompose(adj).kernel_basis
    assert (adj @ kp).is_zero()
    assert (p @ ka).is_zero()


@settings(max_examples=60, deadline=None)
@given(rational_matrix())
def test_rank_nullity(m):
    d = decompose(m)
    assert d.rank + d.kernel_basis.cols == m.cols
    assert (m @ d.kernel_basis).is_zero()


def test_pinv_equals_adjoint_for_partial_isometry():
    # m maps (ker m)^perp isometrically onto im m
    m = Mat([[1, 0, 0], [0, 1, 0]])
    dom = IPSpace.standard(3)
    cod = IPSpace.standard(2)
    assert gram_pinv(m, dom, cod) == gram_adjoint(m, dom, cod)
