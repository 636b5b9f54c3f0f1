"""Carnot algebras, their induced inner products, isometry algebras and the
extended algebra g = g_minus + g_0.

A Carnot algebra is a negatively graded, stratified nilpotent Lie algebra
g_minus = g_{-step} + ... + g_{-1} with a chosen inner product on the top
layer g_{-1}.  The basis is ordered layer by layer from -1 downward, each
layer in spec order; every downstream index in the package is fixed by
this ordering.
"""

from __future__ import annotations

from .linalg import (
    GramNotSPD,
    IPSpace,
    Mat,
    decompose,
    induced_gram,
    inverse,
    is_spd,
    solve,
)
from .rat import Rat, ZERO, ONE, rat


class CarnotError(ValueError):
    pass


class NotAntisymmetric(CarnotError):
    pass


class JacobiFails(CarnotError):
    def __init__(self, triple, residual):
        self.triple = triple
        self.residual = residual
        super().__init__(
            "Jacobi identity fails on basis triple %r" % (triple,)
        )


class NotStratified(CarnotError):
    def __init__(self, layer):
        self.layer = layer
        super().__init__(
            "[g_-1, g_-%d] does not span g_-%d" % (layer - 1, layer)
        )


class GradingViolation(CarnotError):
    pass


class CarnotSpec:
    """Raw description of a Carnot algebra.

    brackets lists (i, j, {k: coeff}) with global basis indices into the
    graded basis (layers -1, -2, ... in order, spec order inside a layer).
    """

    def __init__(self, step, layer_dims, brackets, gram_minus1):
        self.step = int(step)
        self.layer_dims = [int(d) for d in layer_dims]
        self.brackets = [
            (int(i), int(j), {int(k): rat(c) for k, c in target.items()})
            for i, j, target in brackets
        ]
        self.gram_minus1 = (
            gram_minus1 if isinstance(gram_minus1, Mat) else Mat(gram_minus1)
        )

    @property
    def dim(self):
        return sum(self.layer_dims)


def _add_into(vec, other, c=ONE):
    for k, v in other.items():
        s = vec.get(k, ZERO) + c * v
        if s:
            vec[k] = s
        else:
            vec.pop(k, None)


class CarnotAlgebra:
    """Validated Carnot algebra with structure constants and full Gram."""

    def __init__(self, spec, brk, layer_of, layer_start, full_gram):
        self.spec = spec
        self.step = spec.step
        self.layer_dims = spec.layer_dims
        self.n = spec.dim
        self.brk = brk  # brk[i][j] -> sparse {k: Rat}
        self.layer_of = layer_of  # 1-based depth per basis index
        self.layer_start = layer_start  # first global index of each layer
        self.full_gram = full_gram  # IPSpace on g_minus

    def layer_indices(self, depth):
        s = self.layer_start[depth - 1]
        return range(s, s + self.layer_dims[depth - 1])

    def bracket(self, i, j):
        return self.brk[i][j]

    def bracket_vec(self, u, v):
        out = {}
        for i, ui in enumerate(u):
            if not ui:
                continue
            row = self.brk[i]
            for j, vj in enumerate(v):
                if vj and row[j]:
                    _add_into(out, row[j], ui * vj)
        return out

    def layer_gram(self, depth):
        idx = list(self.layer_indices(depth))
        return self.full_gram.gram.submatrix(idx, idx)

    def basis_label(self, i):
        return "b%d" % (i + 1)


def _assemble_brackets(spec):
    n = spec.dim
    layer_of = []
    layer_start = []
    pos = 0
    for d, nd in enumerate(spec.layer_dims, start=1):
        layer_start.append(pos)
        layer_of.extend([d] * nd)
        pos += nd
    brk = [[{} for _ in range(n)] for _ in range(n)]
    seen = set()
    for i, j, target in spec.brackets:
        if not (0 <= i < n and 0 <= j < n):
            raise GradingViolation("bracket index out of range: (%d, %d)" % (i, j))
        if (i, j) in seen:
            raise CarnotError("duplicate bracket entry for (%d, %d)" % (i, j))
        seen.add((i, j))
        target = {k: c for k, c in target.items() if c}
        if i == j and target:
            raise NotAntisymmetric("[b%d, b%d] must vanish" % (i + 1, i + 1))
        want = layer_of[i] + layer_of[j]
        for k, c in target.items():
            if not 0 <= k < n:
                raise GradingViolation("bracket target index out of range: %d" % k)
            if layer_of[k] != want:
                raise GradingViolation(
                    "[b%d, b%d] has a component on layer -%d, expected -%d"
                    % (i + 1, j + 1, layer_of[k], want)
                )
        if want > spec.step and target:
            raise GradingViolation(
                "[b%d, b%d] must vanish beyond step %d" % (i + 1, j + 1, spec.step)
            )
        if (j, i) in seen:
            other = brk[j][i]
            neg = {k: -c for k, c in target.items()}
            if other != neg:
                raise NotAntisymmetric(
                    "brackets for (%d, %d) and (%d, %d) are not antisymmetric"
                    % (i + 1, j + 1, j + 1, i + 1)
                )
        brk[i][j] = dict(target)
        brk[j][i] = {k: -c for k, c in target.items()}
    return brk, layer_of, layer_start


def _check_jacobi(n, brk):
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                res = {}
                for a, c in brk[i][j].items():
                    _add_into(res, brk[a][k], c)
                for a, c in brk[k][i].items():
                    _add_into(res, brk[a][j], c)
                for a, c in brk[j][k].items():
                    _add_into(res, brk[a][i], c)
                if res:
                    raise JacobiFails((i, j, k), res)


def build(spec: CarnotSpec) -> CarnotAlgebra:
    """Validate a spec and construct the algebra with its full Gram."""
    if spec.step != len(spec.layer_dims):
        raise GradingViolation("step does not match number of layers")
    if any(d <= 0 for d in spec.layer_dims):
        raise GradingViolation("layer dimensions must be positive")
    if spec.gram_minus1.rows != spec.layer_dims[0]:
        raise GramNotSPD("gram_minus1 has wrong size")
    if not is_spd(spec.gram_minus1):
        raise GramNotSPD("gram_minus1 is not symmetric positive definite")
    brk, layer_of, layer_start = _assemble_brackets(spec)
    n = spec.dim
    _check_jacobi(n, brk)
    # stratified: [g_-1, g_-j] = g_-j-1
    for depth in range(1, spec.step):
        cols = []
        for i in range(layer_start[0], layer_start[0] + spec.layer_dims[0]):
            for j in range(
                layer_start[depth - 1],
                layer_start[depth - 1] + spec.layer_dims[depth - 1],
            ):
                tgt = brk[i][j]
                s = layer_start[depth]
                cols.append([tgt.get(s + t, ZERO) for t in range(spec.layer_dims[depth])])
        m = Mat.from_cols(cols, spec.layer_dims[depth])
        if decompose(m).rank < spec.layer_dims[depth]:
            raise NotStratified(depth + 1)
    alg = CarnotAlgebra(spec, brk, layer_of, layer_start, None)
    alg.full_gram = induced_inner_products(alg)
    return alg


def induced_inner_products(alg: CarnotAlgebra) -> IPSpace:
    """Full Gram on g_minus: gram_minus1 on the top layer, deeper layers
    carry the inner product induced by the bracket map from wedge pairs,
    with the Gram-determinant convention on wedges (the wedge of two unit
    orthogonal elements has length 1).  Layers are mutually orthogonal.
    """
    n = alg.n
    layer_grams = [alg.spec.gram_minus1]
    full = Mat.zeros(n, n)
    idx1 = list(alg.layer_indices(1))
    for a, ia in enumerate(idx1):
        for b, ib in enumerate(idx1):
            full.a[ia][ib] = alg.spec.gram_minus1.a[a][b]
    for depth in range(2, alg.step + 1):
        pairs = [
            (p, q)
            for p in range(n)
            for q in range(p + 1, n)
            if alg.layer_of[p] + alg.layer_of[q] == depth
        ]
        w = Mat.zeros(len(pairs), len(pairs))
        for r, (p, q) in enumerate(pairs):
            for s, (t, u) in enumerate(pairs):
                w.a[r][s] = (
                    full.a[p][t] * full.a[q][u] - full.a[p][u] * full.a[q][t]
                )
        idx = list(alg.layer_indices(depth))
        cols = [
            [alg.brk[p][q].get(i, ZERO) for i in idx] for (p, q) in pairs
        ]
        lmap = Mat.from_cols(cols, len(idx))
        # surjectivity is the stratified condition, already validated
        g = induced_gram(lmap, IPSpace(w)).gram
        layer_grams.append(g)
        for a, ia in enumerate(idx):
            for b, ib in enumerate(idx):
                full.a[ia][ib] = g.a[a][b]
    return IPSpace(full)


class Derivation:
    """Degree-zero derivation of g_minus, skew on g_-1: an element of g_0."""

    def __init__(self, alg, matrix: Mat):
        self.alg = alg
        self.matrix = matrix

    def apply(self, vec):
        return self.matrix.matvec(vec)

    def leibniz_residual(self):
        """Exact residual of D[a,b] - [Da,b] - [a,Db] over all basis pairs."""
        alg = self.alg
        n = alg.n
        worst = {}
        for i in range(n):
            for j in range(i + 1, n):
                res = {}
                for k, c in alg.brk[i][j].items():
                    for a in range(n):
                        if self.matrix.a[a][k]:
                            _add_into(res, {a: self.matrix.a[a][k]}, c)
                for a in range(n):
                    if self.matrix.a[a][i]:
                        _add_into(res, alg.brk[a][j], -self.matrix.a[a][i])
                    if self.matrix.a[a][j]:
                        _add_into(res, alg.brk[i][a], -self.matrix.a[a][j])
                if res:
                    worst[(i, j)] = res
        return worst

    def __repr__(self):
        return "Derivation(%r)" % (self.matrix,)


def isometry_algebra(alg: CarnotAlgebra):
    """Basis of g_0: degree-zero derivations skew-symmetric on g_-1.

    Found by one exact kernel computation with Leibniz and skewness as
    linear constraints on block-diagonal matrix unknowns.
    """
    n = alg.n
    slots = [
        (a, b)
        for a in range(n)
        for b in range(n)
        if alg.layer_of[a] == alg.layer_of[b]
    ]
    slot_index = {s: i for i, s in enumerate(slots)}
    rows = []
    # skewness on g_-1 w.r.t. gram_minus1: G D + D^T G = 0
    g1 = alg.spec.gram_minus1
    idx1 = list(alg.layer_indices(1))
    for a in range(len(idx1)):
        for b in range(a, len(idx1)):
            row = [ZERO] * len(slots)
            for c in range(len(idx1)):
                row[slot_index[(idx1[c], idx1[b])]] += g1.a[a][c]
                row[slot_index[(idx1[c], idx1[a])]] += g1.a[b][c]
            rows.append(row)
    # Leibniz: D[bi, bj] = [D bi, bj] + [bi, D bj] for all pairs
    for i in range(n):
        for j in range(i + 1, n):
            res_rows = {}

            def bump(target, slot, coeff):
                r = res_rows.setdefault(target, [ZERO] * len(slots))
                r[slot] += coeff

            for k, c in alg.brk[i][j].items():
                for a in alg.layer_indices(alg.layer_of[k]):
                    bump(a, slot_index[(a, k)], c)
            for a in alg.layer_indices(alg.layer_of[i]):
                for k, c in alg.brk[a][j].items():
                    bump(k, slot_index[(a, i)], -c)
            for a in alg.layer_indices(alg.layer_of[j]):
                for k, c in alg.brk[i][a].items():
                    bump(k, slot_index[(a, j)], -c)
            rows.extend(res_rows.values())
    constraints = Mat(rows) if rows else Mat.zeros(0, len(slots))
    kernel = decompose(constraints).kernel_basis
    basis = []
    for c in range(kernel.cols):
        m = Mat.zeros(n, n)
        for s, (a, b) in enumerate(slots):
            m.a[a][b] = kernel.a[s][c]
        basis.append(Derivation(alg, m))
    return basis


class ExtendedAlgebra:
    """g = g_minus + g_0 with the induced bracket and inner product.

    Basis: the g_minus basis followed by the g_0 basis.  deg is 0 on g_0
    and -(layer depth) on g_minus.
    """

    def __init__(self, minus, g0_basis, brk, gram_g):
        self.minus = minus
        self.g0_basis = g0_basis
        self.n_minus = minus.n
        self.n0 = len(g0_basis)
        self.dim = self.n_minus + self.n0
        self.brk = brk
        self.gram_g = gram_g
        self.deg = [-minus.layer_of[i] for i in range(minus.n)] + [0] * self.n0

    @property
    def step(self):
        return self.minus.step

    def bracket(self, i, j):
        return self.brk[i][j]

    def bracket_vec(self, u, v):
        out = {}
        for i, ui in enumerate(u):
            if not ui:
                continue
            row = self.brk[i]
            for j, vj in enumerate(v):
                if vj and row[j]:
                    _add_into(out, row[j], ui * vj)
        return out

    def g0_matrix(self, coeffs):
        """Matrix on g_minus of the g_0 element with the given coefficients."""
        n = self.n_minus
        m = Mat.zeros(n, n)
        for s, c in enumerate(coeffs):
            if not c:
                continue
            dm = self.g0_basis[s].matrix
            for a in range(n):
                for b in range(n):
                    if dm.a[a][b]:
                        m.a[a][b] += c * dm.a[a][b]
        return m

    def g0_coords(self, matrix: Mat):
        """Coordinates of a g_minus endomorphism over the g_0 basis, or None."""
        cols = [
            [d.matrix.a[a][b] for a in range(self.n_minus) for b in range(self.n_minus)]
            for d in self.g0_basis
        ]
        flat = [
            matrix.a[a][b] for a in range(self.n_minus) for b in range(self.n_minus)
        ]
        if not cols:
            return [] if not any(flat) else None
        return solve(Mat.from_cols(cols, len(flat)), flat)

    def jacobi_residuals(self):
        out = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k in range(j + 1, self.dim):
                    res = {}
                    for a, c in self.brk[i][j].items():
                        _add_into(res, self.brk[a][k], c)
                    for a, c in self.brk[k][i].items():
                        _add_into(res, self.brk[a][j], c)
                    for a, c in self.brk[j][k].items():
                        _add_into(res, self.brk[a][i], c)
                    if res:
                        out.append(((i, j, k), res))
        return out


def g0_gram(alg: CarnotAlgebra, g0_basis, pairing="full") -> Mat:
    """Gram on g_0 as a subspace of g_minus (x) g_minus^*.

    The Frobenius pairing <D, D'> = tr(D^T G D' G^-1) uses the full
    g_minus Gram; pairing="minus1" restricts to the g_-1 blocks, kept for
    the sensitivity check on the canonical connection.
    """
    if pairing == "full":
        g = alg.full_gram.gram
        gi = alg.full_gram.gram_inv
        mats = [d.matrix for d in g0_basis]
    elif pairing == "minus1":
        idx1 = list(alg.layer_indices(1))
        g = alg.spec.gram_minus1
        gi = inverse(g)
        mats = [d.matrix.submatrix(idx1, idx1) for d in g0_basis]
    else:
        raise ValueError("unknown pairing %r" % pairing)
    m = len(g0_basis)
    out = Mat.zeros(m, m)
    for i in range(m):
        for j in range(i, m):
            prod = mats[i].transpose() @ g @ mats[j] @ gi
            tr = sum((prod.a[t][t] for t in range(prod.rows)), ZERO)
            out.a[i][j] = tr
            out.a[j][i] = tr
    return out


def extend(alg: CarnotAlgebra, g0_basis, g0_pairing="full") -> ExtendedAlgebra:
    """Assemble g = g_minus + g_0 with full bracket table and inner product.

    The bracket follows [A1+s1, A2+s2] = [A1,A2] + s1(A2) - s2(A1)
    + s1 s2 - s2 s1; Jacobi is verified exactly on all basis triples.
    """
    n = alg.n
    m = len(g0_basis)
    dim = n + m
    brk = [[{} for _ in range(dim)] for _ in range(dim)]
    for i in range(n):
        for j in range(n):
            brk[i][j] = dict(alg.brk[i][j])
    for s, d in enumerate(g0_basis):
        for j in range(n):
            col = {
                a: d.matrix.a[a][j] for a in range(n) if d.matrix.a[a][j]
            }
            brk[n + s][j] = col
            brk[j][n + s] = {a: -c for a, c in col.items()}
    for s in range(m):
        for t in range(s + 1, m):
            comm = (
                g0_basis[s].matrix @ g0_basis[t].matrix
                - g0_basis[t].matrix @ g0_basis[s].matrix
            )
            cols = [
                [d.matrix.a[a][b] for a in range(n) for b in range(n)]
                for d in g0_basis
            ]
            flat = [comm.a[a][b] for a in range(n) for b in range(n)]
            coeffs = solve(Mat.from_cols(cols, len(flat)), flat)
            if coeffs is None:
                raise JacobiFails((n + s, n + t, None), {"g0": "not closed"})
            entry = {n + u: c for u, c in enumerate(coeffs) if c}
            brk[n + s][n + t] = entry
            brk[n + t][n + s] = {k: -c for k, c in entry.items()}
    gram = Mat.zeros(dim, dim)
    for i in range(n):
        for j in range(n):
            gram.a[i][j] = alg.full_gram.gram.a[i][j]
    g0g = g0_gram(alg, g0_basis, g0_pairing)
    for i in range(m):
        for j in range(m):
            gram.a[n + i][n + j] = g0g.a[i][j]
    ext = ExtendedAlgebra(alg, g0_basis, brk, IPSpace(gram))
    bad = ext.jacobi_residuals()
    if bad:
        raise JacobiFails(bad[0][0], bad[0][1])
    return ext
