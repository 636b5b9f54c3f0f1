"""Column-major sparse rational matrices for the cochain operator algebra.

Products of homogeneity-degree-zero operators are executed slice by slice
through a denominator-cleared integer matmul, which is what keeps the
exact identity checks on the larger fixture algebras fast.
"""

from __future__ import annotations

from math import lcm

from .linalg import Mat
from .rat import Rat, ZERO, ONE, rat


class SpMat:
    """Sparse matrix stored as one {row: value} dict per column."""

    __slots__ = ("rows", "cols", "c")

    def __init__(self, rows, cols, c=None):
        self.rows = rows
        self.cols = cols
        self.c = c if c is not None else [dict() for _ in range(cols)]

    @classmethod
    def identity(cls, n):
        return cls(n, n, [{i: ONE} for i in range(n)])

    @classmethod
    def from_mat(cls, m: Mat):
        out = cls(m.rows, m.cols)
        for i, row in enumerate(m.a):
            for j, v in enumerate(row):
                if v:
                    out.c[j][i] = v
        return out

    def to_mat(self) -> Mat:
        m = Mat.zeros(self.rows, self.cols)
        for j, col in enumerate(self.c):
            for i, v in col.items():
                m.a[i][j] = v
        return m

    def add_at(self, i, j, v):
        col = self.c[j]
        s = col.get(i, ZERO) + v
        if s:
            col[i] = s
        else:
            col.pop(i, None)

    def nnz(self):
        return sum(len(col) for col in self.c)

    def is_zero(self):
        return all(not col for col in self.c)

    def __eq__(self, other):
        return (
            isinstance(other, SpMat)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.c == other.c
        )

    def scale(self, a):
        a = rat(a)
        out = SpMat(self.rows, self.cols)
        if a:
            out.c = [{i: a * v for i, v in col.items()} for col in self.c]
        return out

    def __add__(self, other):
        out = SpMat(self.rows, self.cols, [dict(col) for col in self.c])
        for j, col in enumerate(other.c):
            for i, v in col.items():
                out.add_at(i, j, v)
        return out

    def __sub__(self, other):
        return self + other.scale(-ONE)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("SpMat shape mismatch")
        out = SpMat(self.rows, other.cols)
        for j, col in enumerate(other.c):
            acc = out.c[j]
            for r, v in col.items():
                for i, w in self.c[r].items():
                    s = acc.get(i, ZERO) + v * w
                    if s:
                        acc[i] = s
                    else:
                        acc.pop(i, None)
        return out

    def matvec(self, vec):
        out = [ZERO] * self.rows
        for j, v in enumerate(vec):
            if v:
                for i, w in self.c[j].items():
                    out[i] += v * w
        return out

    def transpose(self):
        out = SpMat(self.cols, self.rows)
        for j, col in enumerate(self.c):
            for i, v in col.items():
                out.c[i][j] = v
        return out

    def submatrix(self, row_idx, col_idx):
        rmap = {r: i for i, r in enumerate(row_idx)}
        out = SpMat(len(row_idx), len(col_idx))
        for jj, j in enumerate(col_idx):
            for i, v in self.c[j].items():
                if i in rmap:
                    out.c[jj][rmap[i]] = v
        return out

    def column(self, j):
        return dict(self.c[j])


def kron(a: SpMat, b: SpMat) -> SpMat:
    """Kronecker product with index (i_a * b.rows + i_b)."""
    out = SpMat(a.rows * b.rows, a.cols * b.cols)
    for ja, cola in enumerate(a.c):
        for jb, colb in enumerate(b.c):
            dst = out.c[ja * b.cols + jb]
            for ia, va in cola.items():
                for ib, vb in colb.items():
                    dst[ia * b.rows + ib] = va * vb
    return out


def _int_rows(block):
    den = 1
    for row in block:
        for v in row:
            if v:
                den = lcm(den, int(v.denominator))
    out = []
    for row in block:
        out.append([int(v * den) if v else 0 for v in row])
    return den, out


def dense_block_mul(a_rows, b_rows):
    """Exact product of two dense rational blocks through integer matmul."""
    da, na = _int_rows(a_rows)
    db, nb = _int_rows(b_rows)
    cols_b = list(zip(*nb))
    scale = Rat(1, da * db)
    out = []
    for arow in na:
        orow = []
        for bcol in cols_b:
            s = 0
            for x, y in zip(arow, bcol):
                if x and y:
                    s += x * y
            orow.append(scale * s if s else ZERO)
        out.append(orow)
    return out


def sliced_mul(a: SpMat, b: SpMat, out_slices, mid_slices, in_slices) -> SpMat:
    """Product of degree-zero operators, block by homogeneity slice.

    a maps mid -> out and b maps in -> mid; the slice dicts give, per
    homogeneity, the index lists in each space.  Entries of a or b
    outside their slices would be silently dropped, so callers must have
    verified degree-zero structure first.
    """
    out = SpMat(a.rows, b.cols)
    for h, mid_idx in mid_slices.items():
        out_idx = out_slices.get(h, [])
        in_idx = in_slices.get(h, [])
        if not (out_idx and mid_idx and in_idx):
            continue
        ablock = a.submatrix(out_idx, mid_idx)
        bblock = b.submatrix(mid_idx, in_idx)
        dense = dense_block_mul(
            [
                [ablock.c[j].get(i, ZERO) for j in range(ablock.cols)]
                for i in range(ablock.rows)
            ],
            [
                [bblock.c[j].get(i, ZERO) for j in range(bblock.cols)]
                for i in range(bblock.rows)
            ],
        )
        for jj, j in enumerate(in_idx):
            col = out.c[j]
            for ii, i in enumerate(out_idx):
                v = dense[ii][jj]
                if v:
                    col[i] = v
    return out


def degree_zero(op: SpMat, out_h, in_h) -> bool:
    """True when op maps every homogeneity slice into the same slice."""
    for j, col in enumerate(op.c):
        hj = in_h[j]
        for i in col:
            if out_h[i] != hj:
                return False
    return True
