import pytest

from carnoconn.carnot import (
    CarnotSpec,
    GradingViolation,
    JacobiFails,
    NotAntisymmetric,
    NotStratified,
    build,
    extend,
    g0_gram,
    induced_inner_products,
    isometry_algebra,
)
from carnoconn.fixtures import (
    ALGEBRA_SPECS,
    contact_two_eigen_spec,
    free_step2_spec,
    heisenberg23_spec,
    rolling235_spec,
)
from carnoconn.linalg import GramNotSPD, Mat, decompose, solve
from carnoconn.rat import rat

FIXTURES = list(ALGEBRA_SPECS)


def test_build_heisenberg():
    alg = build(heisenberg23_spec())
    assert alg.step == 2
    assert alg.bracket(0, 1) == {2: rat(1)}
    assert alg.bracket(1, 0) == {2: rat(-1)}


def test_build_rejects_explicit_symmetry():
    spec = CarnotSpec(2, [2, 1], [(0, 1, {2: 1}), (1, 0, {2: 1})], Mat.identity(2))
    with pytest.raises(NotAntisymmetric):
        build(spec)


def test_build_rejects_underfull_layer():
    # layer_dims (2, 2) but only one independent bracket value
    spec = CarnotSpec(2, [2, 2], [(0, 1, {2: 1})], Mat.identity(2))
    with pytest.raises(NotStratified) as e:
        build(spec)
    assert e.value.layer == 2


def test_build_rejects_grading_violation():
    spec = CarnotSpec(2, [2, 1], [(0, 1, {0: 1})], Mat.identity(2))
    with pytest.raises(GradingViolation):
        build(spec)


def test_build_rejects_jacobi_failure():
    # [b1,b2]=b4, [b1,b3]=b5 ... with a bracket table breaking Jacobi
    spec = CarnotSpec(
        3,
        [2, 1, 2],
        [(0, 1, {2: 1}), (0, 2, {3: 1}), (1, 2, {4: 1}), (0, 3, {}), (1, 3, {})],
        Mat.identity(2),
    )
    # make [b1,[b1,b2]] inconsistent: add [b2, b3] = b4 which breaks Jacobi
    spec.brackets.append((1, 3, {3: 1}))
    with pytest.raises((JacobiFails, NotAntisymmetric, Exception)):
        build(spec)


def test_build_rejects_bad_gram():
    spec = CarnotSpec(2, [2, 1], [(0, 1, {2: 1})], Mat([[1, 2], [2, 1]]))
    with pytest.raises(GramNotSPD):
        build(spec)


def test_induced_gram_heisenberg():
    alg = build(heisenberg23_spec())
    # <B, B> = 1: the bracket map A1 ^ A2 -> B is a bijection from a unit vector
    assert alg.full_gram.gram.a[2][2] == rat(1)


def test_induced_gram_rolling():
    alg = build(rolling235_spec())
    g = alg.full_gram.gram
    assert g == Mat.identity(5)


def test_induced_gram_free_step2():
    # the three [A_i, A_j] are orthonormal
    alg = build(free_step2_spec(3))
    assert alg.full_gram.gram == Mat.identity(6)


def test_induced_gram_two_eigen():
    # bracket row (1, 0, 0, 0, 0, 1/2): |l^-1 B|^2 = 4/5
    alg = build(contact_two_eigen_spec())
    assert alg.full_gram.gram.a[4][4] == rat(4, 5)


def test_induced_inner_products_idempotent():
    alg = build(rolling235_spec())
    again = induced_inner_products(alg)
    assert again.gram == alg.full_gram.gram


def test_isometry_algebra_heisenberg():
    alg = build(heisenberg23_spec())
    g0 = isometry_algebra(alg)
    assert len(g0) == 1
    m = g0[0].matrix
    # generator with s(A1) = A2, s(A2) = -A1, s(B) = 0 up to scale
    c = m.a[1][0]
    assert c != 0
    expected = Mat([[0, -c, 0], [c, 0, 0], [0, 0, 0]])
    assert m == expected


def test_isometry_algebra_rolling():
    alg = build(rolling235_spec())
    g0 = isometry_algebra(alg)
    assert len(g0) == 1
    m = g0[0].matrix
    # s(B) = 0 and s rotates (C1, C2) like (A1, A2)
    assert m.a[2][2] == 0 and all(m.a[2][j] == 0 for j in range(5))
    assert m.a[4][3] == m.a[1][0] and m.a[3][4] == m.a[0][1]


@pytest.mark.parametrize("n1", [3, 4])
def test_isometry_algebra_free_step2_dimension(n1):
    alg = build(free_step2_spec(n1))
    assert len(isometry_algebra(alg)) == n1 * (n1 - 1) // 2


def test_derivations_satisfy_leibniz_exactly():
    for name in FIXTURES:
        alg = build(ALGEBRA_SPECS[name]())
        for d in isometry_algebra(alg):
            assert not d.leibniz_residual()


def test_derivation_determined_by_top_layer():
    # two derivations agreeing on g_-1 are equal
    for name in FIXTURES:
        alg = build(ALGEBRA_SPECS[name]())
        g0 = isometry_algebra(alg)
        idx1 = list(alg.layer_indices(1))
        cols = [
            [d.matrix.a[a][b] for a in idx1 for b in idx1] for d in g0
        ]
        if not cols:
            continue
        # injectivity of the restriction map
        m = Mat.from_cols(cols, len(idx1) ** 2)
        assert decompose(m).kernel_basis.cols == 0


def test_derivations_preserve_layers():
    for name in FIXTURES:
        alg = build(ALGEBRA_SPECS[name]())
        for d in isometry_algebra(alg):
            for a in range(alg.n):
                for b in range(alg.n):
                    if d.matrix.a[a][b]:
                        assert alg.layer_of[a] == alg.layer_of[b]


def test_extend_heisenberg_action():
    alg = build(heisenberg23_spec())
    g0 = isometry_algebra(alg)
    ext = extend(alg, g0)
    s = 3  # index of the g0 generator
    c = g0[0].matrix.a[1][0]
    # [s, A1] = s(A1) = c A2 and [A1, s] = -c A2
    assert ext.bracket(s, 0) == {1: c}
    assert ext.bracket(0, s) == {1: -c}


def test_extend_jacobi_holds_on_all_fixtures():
    for name in FIXTURES:
        alg = build(ALGEBRA_SPECS[name]())
        ext = extend(alg, isometry_algebra(alg))
        assert ext.jacobi_residuals() == []


def test_extend_free3_so3_commutators():
    alg = build(free_step2_spec(3))
    g0 = isometry_algebra(alg)
    ext = extend(alg, g0)
    n = alg.n
    # commutator of two basis derivations expands over the basis: so(3) table
    for s in range(len(g0)):
        for t in range(len(g0)):
            if s == t:
                continue
            comm = g0[s].matrix @ g0[t].matrix - g0[t].matrix @ g0[s].matrix
            coeffs = ext.g0_coords(comm)
            assert coeffs is not None
            rebuilt = ext.g0_matrix(coeffs)
            assert rebuilt == comm
            assert ext.bracket(n + s, n + t) == {
                n + u: c for u, c in enumerate(coeffs) if c
            }


def test_g0_gram_orthogonal_blocks():
    alg = build(heisenberg23_spec())
    g0 = isometry_algebra(alg)
    ext = extend(alg, g0)
    g = ext.gram_g.gram
    for i in range(alg.n):
        for j in range(alg.n, ext.dim):
            assert g.a[i][j] == 0 and g.a[j][i] == 0


def test_g0_gram_minus1_variant_is_spd():
    alg = build(free_step2_spec(3))
    g0 = isometry_algebra(alg)
    from carnoconn.linalg import is_spd

    assert is_spd(g0_gram(alg, g0, "full"))
    assert is_spd(g0_gram(alg, g0, "minus1"))
