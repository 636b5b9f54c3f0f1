"""Degree-one normalization: solve for the unique gauge correction alpha_1
turning a reference curvature kappa_tilde_1 into the canonical kappa_1.

The stacked linear system is the computational form of the main theorem's
two conditions restricted to homogeneity one,

    d*(id - db^-1 db)(d alpha_1 + kt_1) = 0,
    db^-1 (d alpha_1 + kt_1) = 0,

solved exactly over the homogeneity-one slice of c^1.  The system matrix
is constant per algebra, so the same factorization solves rational inputs
and jet-valued inputs from the frames pipeline alike.
"""

from __future__ import annotations

from .cochain import Cochain, ComplexOperators
from .linalg import Mat, decompose, gram_pinv, IPSpace
from .rat import Rat, ZERO, ONE, rat
from .sparse import SpMat


class NormalizeError(ValueError):
    pass


class Inconsistent(NormalizeError):
    """kappa_tilde_1 is not a realizable degree-one curvature."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NonUniqueSolution(AssertionError):
    """Contradicts rigidity of the symbol; signals a broken algebra."""


class CurvatureData:
    """Reference curvature input: a c^2 cochain with strictly positive
    homogeneities, of which the solver consumes the degree-one slice."""

    def __init__(self, ops: ComplexOperators, kappa_tilde: Cochain):
        if kappa_tilde.space is not ops.spaces[2]:
            raise NormalizeError("kappa_tilde must live in c^2 of the same operator cache")
        bad = [h for h in kappa_tilde.homogeneities() if h < 1]
        if bad:
            raise NormalizeError(
                "curvature has components of non-positive homogeneity %r" % bad
            )
        self.ops = ops
        self.kappa_tilde = kappa_tilde
        self.kappa_tilde_1 = kappa_tilde.homogeneous_part(1)


class NormalizationSolution:
    def __init__(self, alpha_1, kappa_1, diagnostics):
        self.alpha_1 = alpha_1
        self.kappa_1 = kappa_1
        self.diagnostics = diagnostics


class Certificate:
    """Named exact checks with their residual vectors."""

    def __init__(self):
        self.checks = []

    def add(self, name, residual_coeffs):
        passed = not any(residual_coeffs)
        self.checks.append(
            {"name": name, "passed": passed, "residual": list(residual_coeffs)}
        )

    def add_bool(self, name, passed):
        self.checks.append({"name": name, "passed": bool(passed), "residual": []})

    @property
    def all_passed(self):
        return all(c["passed"] for c in self.checks)

    def __iter__(self):
        return iter(self.checks)


class Degree1System:
    """Constant machinery of the degree-one solve for one operator cache.

    The stacked rows are the literal normalization and extension systems
    d*(id - db^-1 db)(d alpha + kt_1) = 0 and db^-1 (d alpha + kt_1) = 0
    with alpha ranging over the homogeneity-one slice of c^1.  On
    curvature data realizable by an actual constant-symbol structure the
    system is consistent and reproduces the paper's worked solutions; on
    unrealizable inputs it reports Inconsistent rather than projecting.
    """

    def __init__(self, ops: ComplexOperators):
        self.ops = ops
        s1, s2 = ops.spaces[1], ops.spaces[2]
        self.sl1 = s1.slice_indices(1)
        d1 = ops.d[1]
        ker_db = SpMat.identity(s2.dim) - (ops.db_pinv[2] @ ops.db[2])
        self.norm_rows = (ops.adjoint_d(1) @ ker_db).to_mat()
        self.ext_rows = ops.db_pinv[1].to_mat()
        d1_slice = d1.submatrix(range(s2.dim), self.sl1).to_mat()
        self.matrix = (self.norm_rows @ d1_slice).vstack(self.ext_rows @ d1_slice)
        dec = decompose(self.matrix)
        self.rank = dec.rank
        self.kernel_dim = dec.kernel_basis.cols
        self.solver = gram_pinv(
            self.matrix,
            IPSpace.standard(self.matrix.cols),
            IPSpace.standard(self.matrix.rows),
        )

    def rhs(self, kt1_coeffs):
        """Right-hand side [-norm; -ext] applied to kappa_tilde_1; works for
        any coefficient ring with rational scalars (Rat or jets)."""
        top = self.norm_rows.matvec(kt1_coeffs)
        bot = self.ext_rows.matvec(kt1_coeffs)
        return [-x for x in top] + [-x for x in bot]


def check_bianchi_deg1(ops: ComplexOperators, data: CurvatureData) -> bool:
    """True iff d . kappa_tilde_1 = 0 exactly."""
    return not any(ops.d[2].matvec(data.kappa_tilde_1.coeffs))


def bianchi_residual(ops, data):
    return ops.d[2].matvec(data.kappa_tilde_1.coeffs)


def solve_alpha1(
    ops: ComplexOperators, data: CurvatureData, system: Degree1System | None = None
) -> NormalizationSolution:
    """The unique alpha_1 in the homogeneity-one slice of c^1 solving the
    stacked normalization + extension system; kappa_1 = d alpha_1 + kt_1.

    Raises Inconsistent when kt_1 is not realizable (including Bianchi
    violations), NonUniqueSolution when the stacked system has a kernel
    (impossible while ker d meets the slice trivially).
    """
    if not check_bianchi_deg1(ops, data):
        raise Inconsistent(
            "kappa_tilde_1 violates the degree-one Bianchi identity",
            bianchi_residual(ops, data),
        )
    sysm = system or Degree1System(ops)
    if sysm.kernel_dim:
        raise NonUniqueSolution(
            "stacked system has %d-dimensional kernel" % sysm.kernel_dim
        )
    kt1 = data.kappa_tilde_1.coeffs
    r = sysm.rhs(kt1)
    x = sysm.solver.matvec(r)
    res = [a - b for a, b in zip(sysm.matrix.matvec(x), r)]
    if any(res):
        raise Inconsistent(
            "kappa_tilde_1 is not a realizable degree-one curvature", res
        )
    s1 = ops.spaces[1]
    alpha = [ZERO] * s1.dim
    for pos, idx in enumerate(sysm.sl1):
        alpha[idx] = x[pos]
    alpha_1 = Cochain(s1, alpha)
    kappa_1 = Cochain(
        ops.spaces[2],
        [a + b for a, b in zip(ops.d[1].matvec(alpha), kt1)],
    )
    diagnostics = {
        "system_rank": sysm.rank,
        "solution_space_dim": sysm.kernel_dim,
        "unknowns": len(sysm.sl1),
        "residual_zero": True,
    }
    return NormalizationSolution(alpha_1, kappa_1, diagnostics)


def contraction(ops: ComplexOperators, v: int) -> SpMat:
    """Interior product iota_v : c^2 -> c^1 against the g_minus basis
    vector with global index v."""
    s2, s1 = ops.spaces[2], ops.spaces[1]
    out = SpMat(s1.dim, s2.dim)
    for idx in range(s2.dim):
        a, (i, j) = s2.unflat(idx)
        if v == i:
            out.add_at(s1.flat(a, (j,)), idx, ONE)
        elif v == j:
            out.add_at(s1.flat(a, (i,)), idx, -ONE)
    return out


def corollary_form_check(ops: ComplexOperators, kappa_1: Cochain) -> bool:
    """d*(iota_A kappa_1) = d*(iota_A db^-1 db kappa_1) for every basis A
    of g_minus."""
    dstar0 = ops.adjoint_d(0)  # c^1 -> c^0
    target = ops.db_pinv[2] @ ops.db[2]
    k1 = kappa_1.coeffs
    tk1 = target.matvec(k1)
    for v in range(ops.ext.minus.n):
        iv = contraction(ops, v)
        lhs = dstar0.matvec(iv.matvec(k1))
        rhs = dstar0.matvec(iv.matvec(tk1))
        if lhs != rhs:
            return False
    return True


def certify(
    ops: ComplexOperators, kappa: Cochain, system: Degree1System | None = None
) -> Certificate:
    """Exact certificate for a full curvature candidate kappa in c^2:
    extension condition, degree-one normalization, strictly positive
    homogeneity, and the orthogonality restatement
    <Pi kappa_1, Pi d e> = 0 over the degree-one slice basis of c^1."""
    cert = Certificate()
    k1 = kappa.homogeneous_part(1)
    cert.add("extension_db_pinv_kappa_zero", ops.db_pinv[1].matvec(kappa.coeffs))
    dstar = ops.adjoint_d(1)
    lhs = dstar.matvec(k1.coeffs)
    rhs = dstar.matvec((ops.db_pinv[2] @ ops.db[2]).matvec(k1.coeffs))
    cert.add("normalization_dstar", [a - b for a, b in zip(lhs, rhs)])
    bad = [h for h in kappa.homogeneities() if h < 1]
    cert.add_bool("positive_homogeneity", not bad)
    pi2 = ops.Pi[2]
    pik1 = pi2.matvec(k1.coeffs)
    s2 = ops.spaces[2]
    resid = []
    for idx in ops.spaces[1].slice_indices(1):
        e = [ZERO] * ops.spaces[1].dim
        e[idx] = ONE
        pide = pi2.matvec(ops.d[1].matvec(e))
        resid.append(s2.inner(pik1, pide))
    cert.add("pi_kappa1_orthogonal_to_pi_d_c11", resid)
    return cert
