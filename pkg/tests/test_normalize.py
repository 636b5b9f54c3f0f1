import random

import pytest

from carnoconn.cochain import Cochain, ComplexOperators
from carnoconn.fixtures import extended
from carnoconn.normalize import (
    CurvatureData,
    Degree1System,
    Inconsistent,
    NormalizeError,
    certify,
    check_bianchi_deg1,
    corollary_form_check,
    solve_alpha1,
)
from carnoconn.rat import rat

_OPS = {}


def ops_for(name):
    if name not in _OPS:
        _OPS[name] = ComplexOperators(extended(name))
    return _OPS[name]


PERTURBATIONS = {
    "heisenberg23": [(2, "x1^2*x2"), (2, "x1*x2 + x2^3"), (2, "x1^3 - x2^2")],
    "rolling235": [
        (2, "x1^2*x2"),
        (3, "x1*x2^2 + x2^3"),
        (4, "x1^3 - 2*x2*x1^2"),
        (2, "x1*x2 + x1^3"),
        (3, "x3^2"),
    ],
    "free_step2_n3": [
        (3, "x1^2*x2"),
        (4, "x1*x2*x3"),
        (5, "x2^3 - x1^2*x3"),
    ],
    "contact_std": [(4, "x1^2*x2"), (4, "x1*x3*x4"), (4, "x2^2*x4")],
    "contact_two_eigen": [(4, "x1^2*x2"), (4, "x1*x3*x4")],
}

_REALIZABLE = {}


def realizable_inputs(name):
    """kappa_tilde_1 values at the base point realized by perturbed
    polynomial models of the fixture symbol."""
    if name not in _REALIZABLE:
        from carnoconn.fixtures import perturbed_model
        from carnoconn.frames import MovingFrame, NormalizedFrame

        ops = ops_for(name)
        out = []
        for target, pstr in PERTURBATIONS[name]:
            nf = NormalizedFrame(MovingFrame(perturbed_model(name, target, pstr)))
            vec = [j.value() for j in nf.kappa_tilde_deg1(ops)]
            out.append(Cochain(ops.spaces[2], vec))
        _REALIZABLE[name] = out
    return _REALIZABLE[name]


def slice1_basis(ops, k=2):
    s = ops.spaces[k]
    out = []
    for idx in s.slice_indices(1):
        v = [rat(0)] * s.dim
        v[idx] = rat(1)
        out.append(Cochain(s, v))
    return out


def random_slice1(ops, rng, k=2):
    s = ops.spaces[k]
    v = [rat(0)] * s.dim
    for idx in s.slice_indices(1):
        v[idx] = rat(rng.randint(-5, 5), rng.randint(1, 3))
    return Cochain(s, v)


def valid_random_kt1(ops, rng):
    """Random element of the degree-one slice satisfying Bianchi, built by
    projecting onto ker(d) restricted to the slice."""
    from carnoconn.linalg import decompose, Mat

    s2 = ops.spaces[2]
    sl = s2.slice_indices(1)
    sub = ops.d[2].submatrix(range(ops.spaces[3].dim), sl).to_mat()
    kern = decompose(sub).kernel_basis
    v = [rat(0)] * s2.dim
    for c in range(kern.cols):
        w = rat(rng.randint(-4, 4), rng.randint(1, 3))
        for r in range(kern.rows):
            v[sl[r]] += w * kern.a[r][c]
    return Cochain(s2, v)


# -- input validation ---------------------------------------------------


def test_curvature_data_rejects_nonpositive_homogeneity():
    ops = ops_for("heisenberg23")
    s2 = ops.spaces[2]
    bad = Cochain.single(s2, 2, (0, 1))  # B (x) A1*^A2* has homogeneity 0
    with pytest.raises(NormalizeError):
        CurvatureData(ops, bad)


def test_bianchi_zero_input():
    ops = ops_for("heisenberg23")
    data = CurvatureData(ops, Cochain.zero(ops.spaces[2]))
    assert check_bianchi_deg1(ops, data)


def test_bianchi_on_image_of_d():
    # any kt_1 in im(d) restricted to degree one is closed (d^2 = 0)
    ops = ops_for("rolling235")
    rng = random.Random(11)
    s1 = ops.spaces[1]
    for _ in range(10):
        v = [rat(0)] * s1.dim
        for idx in s1.slice_indices(1):
            v[idx] = rat(rng.randint(-3, 3))
        img = Cochain(ops.spaces[2], ops.d[1].matvec(v))
        data = CurvatureData(ops, img)
        assert check_bianchi_deg1(ops, data)


def test_bianchi_evaluation_is_matrix_vector_product():
    ops = ops_for("heisenberg23")
    s2 = ops.spaces[2]
    # B (x) (A1*^B*) has homogeneity 1 on heisenberg
    kt = Cochain.single(s2, 2, (0, 2))
    data = CurvatureData(ops, kt)
    resid = ops.d[2].matvec(data.kappa_tilde_1.coeffs)
    assert check_bianchi_deg1(ops, data) == (not any(resid))


# -- the solver -----------------------------------------------------------


def test_zero_input_gives_zero_solution():
    for name in ["heisenberg23", "rolling235", "free_step2_n3"]:
        ops = ops_for(name)
        data = CurvatureData(ops, Cochain.zero(ops.spaces[2]))
        sol = solve_alpha1(ops, data)
        assert sol.alpha_1.is_zero()
        assert sol.kappa_1.is_zero()
        assert sol.diagnostics["solution_space_dim"] == 0


def test_heisenberg_kappa1_always_zero():
    # on the (2,3) algebra d: c^1_1 -> c^2_1 is bijective, so kappa_1 = 0
    ops = ops_for("heisenberg23")
    rng = random.Random(2)
    for _ in range(20):
        kt = random_slice1(ops, rng)
        data = CurvatureData(ops, kt)
        sol = solve_alpha1(ops, data)
        assert sol.kappa_1.is_zero()
        # and d alpha_1 = -kt_1
        assert [
            -c for c in ops.d[1].matvec(sol.alpha_1.coeffs)
        ] == data.kappa_tilde_1.coeffs


def rolling_closed_form(ops, kt: Cochain):
    """Independent oracle: the worked small-dimensional solution, with the
    one degree-forced index reading (the B-slot pairing, not C_j) in the
    alpha(B) line."""
    # basis: A1=0, A2=1, B=2, C1=3, C2=4, s=5
    def comp(pair, val):
        return kt.evaluate(pair).get(val, rat(0))

    c1 = -comp((0, 3), 3)  # -<C1, kt(A1, C1)>
    c2 = -comp((1, 4), 4)
    p1 = -(c2 - comp((1, 2), 2))  # -<alpha(C2) - kt(A2, B), B>
    p2 = c1 - comp((0, 2), 2)
    q1 = comp((0, 1), 0) - p1  # <A1, kt(A1,A2) - alpha(B)>
    q2 = comp((0, 1), 1) - p2
    s1 = ops.spaces[1]
    out = [rat(0)] * s1.dim
    out[s1.flat(5, (0,))] = q1
    out[s1.flat(5, (1,))] = q2
    out[s1.flat(0, (2,))] = p1
    out[s1.flat(1, (2,))] = p2
    out[s1.flat(2, (3,))] = c1
    out[s1.flat(2, (4,))] = c2
    return Cochain(s1, out)


def test_rolling_alpha1_matches_worked_solution():
    # the worked small-dimensional display, on realizable inputs and their
    # gauge shifts; unrealizable slice vectors must be flagged, not solved
    ops = ops_for("rolling235")
    system = Degree1System(ops)
    rng = random.Random(4)
    matched = 0
    for kt in realizable_inputs("rolling235"):
        data = CurvatureData(ops, kt)
        assert check_bianchi_deg1(ops, data)
        sol = solve_alpha1(ops, data, system)
        assert sol.alpha_1.coeffs == rolling_closed_form(ops, kt).coeffs
        matched += 1
        # gauge shifts of realizable inputs stay realizable
        s1 = ops.spaces[1]
        delta = [rat(0)] * s1.dim
        for idx in s1.slice_indices(1):
            delta[idx] = rat(rng.randint(-3, 3))
        shifted = Cochain(
            ops.spaces[2],
            [a + b for a, b in zip(kt.coeffs, ops.d[1].matvec(delta))],
        )
        sol2 = solve_alpha1(ops, CurvatureData(ops, shifted), system)
        assert sol2.kappa_1.coeffs == sol.kappa_1.coeffs
    assert matched >= 4
    for kt in slice1_basis(ops):
        data = CurvatureData(ops, kt)
        if not check_bianchi_deg1(ops, data):
            continue
        try:
            sol = solve_alpha1(ops, data, system)
        except Inconsistent:
            continue
        assert sol.alpha_1.coeffs == rolling_closed_form(ops, kt).coeffs


def test_solution_satisfies_stated_equations():
    for name in ["rolling235", "free_step2_n3", "contact_std"]:
        ops = ops_for(name)
        system = Degree1System(ops)
        for kt in realizable_inputs(name):
            data = CurvatureData(ops, kt)
            sol = solve_alpha1(ops, data, system)
            k1 = sol.kappa_1.coeffs
            assert not any(ops.db_pinv[1].matvec(k1))
            dstar = ops.adjoint_d(1)
            lhs = dstar.matvec(k1)
            rhs = dstar.matvec((ops.db_pinv[2] @ ops.db[2]).matvec(k1))
            assert lhs == rhs


def test_unrealizable_bianchi_closed_inputs_are_flagged():
    # Bianchi-closed but unrealizable data must raise Inconsistent with a
    # residual, never be silently projected
    ops = ops_for("rolling235")
    system = Degree1System(ops)
    rng = random.Random(31)
    seen = 0
    for _ in range(20):
        kt = valid_random_kt1(ops, rng)
        try:
            solve_alpha1(ops, CurvatureData(ops, kt), system)
        except Inconsistent as e:
            assert e.residual is not None and any(e.residual)
            seen += 1
    assert seen > 0


def test_gauge_independence():
    # kt_1 -> kt_1 + d delta leaves kappa_1 unchanged
    for name in ["heisenberg23", "rolling235", "contact_two_eigen"]:
        ops = ops_for(name)
        system = Degree1System(ops)
        rng = random.Random(9)
        s1 = ops.spaces[1]
        kt = realizable_inputs(name)[0]
        base = solve_alpha1(ops, CurvatureData(ops, kt), system)
        for _ in range(10):
            delta = [rat(0)] * s1.dim
            for idx in s1.slice_indices(1):
                delta[idx] = rat(rng.randint(-3, 3), rng.randint(1, 2))
            shifted = Cochain(
                ops.spaces[2],
                [a + b for a, b in zip(kt.coeffs, ops.d[1].matvec(delta))],
            )
            sol = solve_alpha1(ops, CurvatureData(ops, shifted), system)
            assert sol.kappa_1.coeffs == base.kappa_1.coeffs


def test_inconsistent_on_bianchi_violation():
    # brute-force search for a slice basis vector outside ker d
    for name in ["rolling235", "free_step2_n3"]:
        ops = ops_for(name)
        found = False
        for kt in slice1_basis(ops):
            data = CurvatureData(ops, kt)
            if check_bianchi_deg1(ops, data):
                continue
            found = True
            with pytest.raises(Inconsistent) as e:
                solve_alpha1(ops, data)
            assert e.value.residual is not None
            break
        assert found


# -- corollary and certificate ---------------------------------------------


def test_corollary_zero():
    ops = ops_for("heisenberg23")
    assert corollary_form_check(ops, Cochain.zero(ops.spaces[2]))


def test_corollary_on_solved_curvature():
    for name in ["heisenberg23", "rolling235", "free_step2_n3"]:
        ops = ops_for(name)
        system = Degree1System(ops)
        for kt in realizable_inputs(name):
            sol = solve_alpha1(ops, CurvatureData(ops, kt), system)
            assert corollary_form_check(ops, sol.kappa_1)


def test_corollary_agrees_with_normalization_condition():
    ops = ops_for("rolling235")
    rng = random.Random(17)
    s2 = ops.spaces[2]
    dstar = ops.adjoint_d(1)
    target = ops.db_pinv[2] @ ops.db[2]
    for _ in range(15):
        kt = random_slice1(ops, rng)
        lhs = dstar.matvec(kt.coeffs)
        rhs = dstar.matvec(target.matvec(kt.coeffs))
        assert corollary_form_check(ops, kt) == (lhs == rhs)


def test_certificate_zero_curvature():
    ops = ops_for("rolling235")
    cert = certify(ops, Cochain.zero(ops.spaces[2]))
    assert cert.all_passed


def test_certificate_flags_homogeneity_zero_component():
    ops = ops_for("heisenberg23")
    s2 = ops.spaces[2]
    kappa = Cochain.single(s2, 2, (0, 1))  # homogeneity 0
    cert = certify(ops, kappa)
    failed = {c["name"] for c in cert if not c["passed"]}
    assert "positive_homogeneity" in failed


def test_certificate_passes_on_solver_output():
    for name in ["rolling235", "contact_std", "free_step2_n3"]:
        ops = ops_for(name)
        system = Degree1System(ops)
        for kt in realizable_inputs(name):
            sol = solve_alpha1(ops, CurvatureData(ops, kt), system)
            cert = certify(ops, sol.kappa_1)
            assert cert.all_passed, [c for c in cert if not c["passed"]]
