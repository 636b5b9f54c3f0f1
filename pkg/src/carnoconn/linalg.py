"""Exact rational dense linear algebra with Gram-weighted adjoints and
pseudo-inverses.

Matrices are dense, row-major lists of Rat entries.  Everything is a pure
function of immutable inputs; no floating point appears anywhere.  Inner
product spaces carry an explicit symmetric positive definite Gram matrix,
verified by an exact LDL^T decomposition (no square roots are ever taken).
"""

from __future__ import annotations

from .rat import Rat, rat, ZERO, ONE


class LinalgError(ValueError):
    pass


class NotSurjective(LinalgError):
    pass


class GramNotSPD(LinalgError):
    pass


class Mat:
    """Dense matrix over the rationals.

    Entries are stored as a list of row lists.  Instances are treated as
    immutable; operations return new matrices.
    """

    __slots__ = ("rows", "cols", "a")

    def __init__(self, a, rows=None, cols=None):
        if rows is None:
            self.a = [[rat(x) for x in row] for row in a]
            self.rows = len(self.a)
            self.cols = len(self.a[0]) if self.a else 0
        else:
            # trusted constructor: a is already a list of Rat rows
            self.a = a
            self.rows = rows
            self.cols = cols
        for row in self.a:
            if len(row) != self.cols:
                raise LinalgError("ragged rows")

    @classmethod
    def zeros(cls, rows, cols):
        return cls([[ZERO] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, n):
        m = cls.zeros(n, n)
        for i in range(n):
            m.a[i][i] = ONE
        return m

    @classmethod
    def from_cols(cls, cols_list, rows):
        m = cls.zeros(rows, len(cols_list))
        for j, col in enumerate(cols_list):
            for i in range(rows):
                m.a[i][j] = rat(col[i])
        return m

    def col(self, j):
        return [self.a[i][j] for i in range(self.rows)]

    def row(self, i):
        return list(self.a[i])

    def transpose(self):
        return Mat(
            [[self.a[i][j] for i in range(self.rows)] for j in range(self.cols)],
            self.cols,
            self.rows,
        )

    def __eq__(self, other):
        return (
            isinstance(other, Mat)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.a == other.a
        )

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise LinalgError("shape mismatch in add")
        return Mat(
            [
                [self.a[i][j] + other.a[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ],
            self.rows,
            self.cols,
        )

    def __sub__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise LinalgError("shape mismatch in sub")
        return Mat(
            [
                [self.a[i][j] - other.a[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ],
            self.rows,
            self.cols,
        )

    def __neg__(self):
        return self.scale(-ONE)

    def scale(self, c):
        c = rat(c)
        return Mat(
            [[c * x for x in row] for row in self.a], self.rows, self.cols
        )

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise LinalgError("shape mismatch in matmul")
        bt = other.transpose().a
        out = []
        for arow in self.a:
            orow = []
            for bcol in bt:
                s = ZERO
                for x, y in zip(arow, bcol):
                    if x and y:
                        s += x * y
                orow.append(s)
            out.append(orow)
        return Mat(out, self.rows, other.cols)

    def matvec(self, v):
        if self.cols != len(v):
            raise LinalgError("shape mismatch in matvec")
        return [
            sum((x * y for x, y in zip(row, v) if x and y), ZERO)
            for row in self.a
        ]

    def is_zero(self):
        return all(not x for row in self.a for x in row)

    def is_symmetric(self):
        if self.rows != self.cols:
            return False
        return all(
            self.a[i][j] == self.a[j][i]
            for i in range(self.rows)
            for j in range(i + 1, self.cols)
        )

    def submatrix(self, row_idx, col_idx):
        return Mat(
            [[self.a[i][j] for j in col_idx] for i in row_idx],
            len(row_idx),
            len(col_idx),
        )

    def hstack(self, other):
        if self.rows != other.rows:
            raise LinalgError("shape mismatch in hstack")
        return Mat(
            [self.a[i] + other.a[i] for i in range(self.rows)],
            self.rows,
            self.cols + other.cols,
        )

    def vstack(self, other):
        if self.cols != other.cols:
            raise LinalgError("shape mismatch in vstack")
        return Mat([list(r) for r in self.a] + [list(r) for r in other.a])

    def __repr__(self):
        return "Mat(%r)" % (self.a,)


def _rref(m):
    """Reduced row echelon form in place on a copy.

    Returns (rref_rows, pivot_cols).  Deterministic: first nonzero pivot
    in column order, rows scaled to leading 1.
    """
    a = [list(row) for row in m.a]
    rows, cols = m.rows, m.cols
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if a[i][c]:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = ONE / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c]:
                f = a[i][c]
                ai, ar = a[i], a[r]
                for j in range(c, cols):
                    if ar[j]:
                        ai[j] = ai[j] - f * ar[j]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


class Decomposition:
    """Exact rank / kernel / image data of a matrix."""

    __slots__ = ("rank", "kernel_basis", "image_basis", "pivot_cols")

    def __init__(self, rank, kernel_basis, image_basis, pivot_cols):
        self.rank = rank
        self.kernel_basis = kernel_basis
        self.image_basis = image_basis
        self.pivot_cols = pivot_cols


def decompose(m: Mat) -> Decomposition:
    """Rank, kernel basis and image basis of m, all exact.

    Kernel basis columns span ker m (m @ kernel_basis == 0 exactly);
    image basis columns are the pivot columns of m.
    """
    a, pivots = _rref(m)
    rank = len(pivots)
    free = [c for c in range(m.cols) if c not in pivots]
    kcols = []
    for fc in free:
        v = [ZERO] * m.cols
        v[fc] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -a[r][fc]
        kcols.append(v)
    kernel = Mat.from_cols(kcols, m.cols)
    image = m.submatrix(range(m.rows), pivots)
    return Decomposition(rank, kernel, image, list(pivots))


def solve(m: Mat, b) -> list | None:
    """One exact solution x of m x = b, or None when inconsistent."""
    aug = m.hstack(Mat.from_cols([b], m.rows))
    a, pivots = _rref(aug)
    if m.cols in pivots:
        return None
    x = [ZERO] * m.cols
    for r, pc in enumerate(pivots):
        x[pc] = a[r][m.cols]
    return x


def inverse(m: Mat) -> Mat:
    if m.rows != m.cols:
        raise LinalgError("inverse of non-square matrix")
    aug = m.hstack(Mat.identity(m.rows))
    a, pivots = _rref(aug)
    if len(pivots) != m.rows:
        raise LinalgError("matrix is singular")
    return Mat([row[m.cols:] for row in a], m.rows, m.cols)


def ldlt_pivots(g: Mat):
    """Diagonal pivots of the LDL^T decomposition of a symmetric matrix.

    Raises GramNotSPD when g is not symmetric; a non-positive pivot is
    reported by value so callers can decide.
    """
    if not g.is_symmetric():
        raise GramNotSPD("gram matrix is not symmetric")
    n = g.rows
    a = [list(row) for row in g.a]
    pivots = []
    for k in range(n):
        d = a[k][k]
        pivots.append(d)
        if not d:
            # a zero pivot on an SPD candidate means failure; report as-is
            return pivots + [ZERO] * (n - k - 1)
        for i in range(k + 1, n):
            f = a[i][k] / d
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    return pivots


def is_spd(g: Mat) -> bool:
    try:
        return all(p > 0 for p in ldlt_pivots(g))
    except GramNotSPD:
        return False


class IPSpace:
    """Finite dimensional inner product space: a dimension plus an SPD Gram.

    The Gram inverse is computed lazily and cached; it is the only
    derived state.
    """

    __slots__ = ("dim", "gram", "_gram_inv")

    def __init__(self, gram: Mat, check=True):
        if gram.rows != gram.cols:
            raise GramNotSPD("gram matrix must be square")
        if check and not is_spd(gram):
            raise GramNotSPD("gram matrix is not symmetric positive definite")
        self.dim = gram.rows
        self.gram = gram
        self._gram_inv = None

    @classmethod
    def standard(cls, n):
        return cls(Mat.identity(n), check=False)

    @property
    def gram_inv(self) -> Mat:
        if self._gram_inv is None:
            self._gram_inv = inverse(self.gram)
        return self._gram_inv

    def inner(self, v, w):
        gv = self.gram.matvec(w)
        return sum((x * y for x, y in zip(v, gv) if x and y), ZERO)

    def __repr__(self):
        return "IPSpace(dim=%d)" % self.dim


def gram_adjoint(m: Mat, dom: IPSpace, cod: IPSpace) -> Mat:
    """Adjoint m*: cod -> dom with <m v, w>_cod = <v, m* w>_dom.

    Equals G_dom^-1 m^T G_cod.
    """
    if m.cols != dom.dim or m.rows != cod.dim:
        raise LinalgError("gram_adjoint shape mismatch")
    return dom.gram_inv @ m.transpose() @ cod.gram


def gram_pinv(m: Mat, dom: IPSpace, cod: IPSpace) -> Mat:
    """Gram-weighted pseudo-inverse m^-.

    m^- vanishes on the cod-orthogonal complement of im m and inverts m
    from the dom-orthogonal complement of ker m onto im m.  Satisfies the
    four Moore-Penrose identities with self-adjointness taken w.r.t. the
    given Grams.
    """
    if m.cols != dom.dim or m.rows != cod.dim:
        raise LinalgError("gram_pinv shape mismatch")
    dec = decompose(m)
    if dec.rank == 0:
        return Mat.zeros(m.cols, m.rows)
    k = dec.kernel_basis
    if k.cols:
        # W spans (ker m)^perp w.r.t. dom gram
        w = decompose(k.transpose() @ dom.gram).kernel_basis
    else:
        w = Mat.identity(m.cols)
    b = m @ w  # columns form a basis of im m
    bg = b.transpose() @ cod.gram
    core = inverse(bg @ b)
    return w @ core @ bg


def induced_gram(l: Mat, dom: IPSpace) -> IPSpace:
    """Inner product on the codomain induced by a surjective map l.

    <w1, w2> := <l^-1 w1, l^-1 w2>_dom, which does not depend on any inner
    product on the codomain.
    """
    if l.cols != dom.dim:
        raise LinalgError("induced_gram shape mismatch")
    dec = decompose(l)
    if dec.rank < l.rows:
        raise NotSurjective(
            "map has rank %d < %d rows" % (dec.rank, l.rows)
        )
    pinv = gram_pinv(l, dom, IPSpace.standard(l.rows))
    return IPSpace(pinv.transpose() @ dom.gram @ pinv)
