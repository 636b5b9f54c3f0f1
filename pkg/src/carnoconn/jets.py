"""Truncated Taylor expansions ("jets") at a base point, with exactness
tracking.

A Jet holds the coefficients of a function in shifted coordinates
t = x - p up to total degree `cap`.  The `order` attribute is the largest
total degree whose coefficients are guaranteed exact; None means the jet
coincides with the function (a polynomial of degree <= cap held in full).
Arithmetic propagates the guarantee: products take the minimum order,
derivatives lose one order unless the jet is exact, and dividing by a
unit (nonzero constant term) is a finite series inversion.

Every value the frames pipeline reports is read off a jet whose order is
checked to be >= the number of derivatives taken, so reported rationals
are exact, never truncated.
"""

from __future__ import annotations

from .poly import Poly
from .rat import Rat, ZERO, ONE, rat


class JetError(ValueError):
    pass


def _min_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class Jet:
    __slots__ = ("cap", "n", "terms", "order")

    def __init__(self, n, cap, terms=None, order=None):
        self.n = n
        self.cap = cap
        self.order = order
        self.terms = {}
        if terms:
            for e, c in terms.items():
                if c and sum(e) <= cap:
                    self.terms[tuple(e)] = rat(c)

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, n, cap):
        return cls(n, cap)

    @classmethod
    def const(cls, n, cap, c):
        j = cls(n, cap)
        c = rat(c)
        if c:
            j.terms[(0,) * n] = c
        return j

    @classmethod
    def from_poly(cls, p: Poly, center, cap):
        """Expand an exact polynomial around `center` (t = x - center)."""
        shifted = p.substitute(
            [Poly.coordinate(p.n, i) + Poly.const(p.n, center[i]) for i in range(p.n)]
        )
        order = None if shifted.degree() <= cap else cap
        return cls(p.n, cap, shifted.terms, order)

    # -- queries -------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def value(self):
        """Value at the base point (constant coefficient)."""
        self._need(0)
        return self.terms.get((0,) * self.n, ZERO)

    def coefficient(self, exps):
        self._need(sum(exps))
        return self.terms.get(tuple(exps), ZERO)

    def _need(self, k):
        if self.order is not None and self.order < k:
            raise JetError(
                "jet only exact to order %d, needs %d; raise the degree cap"
                % (self.order, k)
            )

    def unit_at_base(self):
        return bool(self.terms.get((0,) * self.n, ZERO))

    # -- ring operations ------------------------------------------------
    def _check(self, other):
        if self.n != other.n or self.cap != other.cap:
            raise JetError("jet arena mismatch")

    def __add__(self, other):
        if not isinstance(other, Jet):
            other = Jet.const(self.n, self.cap, other)
        self._check(other)
        out = Jet(self.n, self.cap, order=_min_order(self.order, other.order))
        out.terms = dict(self.terms)
        for e, c in other.terms.items():
            s = out.terms.get(e, ZERO) + c
            if s:
                out.terms[e] = s
            else:
                out.terms.pop(e, None)
        return out

    def __sub__(self, other):
        if not isinstance(other, Jet):
            other = Jet.const(self.n, self.cap, other)
        return self + other.scale(-ONE)

    def __neg__(self):
        return self.scale(-ONE)

    def scale(self, c):
        c = rat(c)
        out = Jet(self.n, self.cap, order=self.order)
        if c:
            out.terms = {e: c * v for e, v in self.terms.items()}
        return out

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self.scale(other)
        self._check(other)
        cap = self.cap
        out = {}
        dropped = False
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > cap:
                    dropped = True
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, ZERO) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        order = _min_order(self.order, other.order)
        if dropped:
            order = _min_order(order, cap)
        j = Jet(self.n, cap, order=order)
        j.terms = out
        return j

    __rmul__ = __mul__
    __radd__ = __add__

    def __rsub__(self, other):
        return (-self) + other

    def diff(self, i):
        out = Jet(
            self.n,
            self.cap,
            order=None if self.order is None else max(self.order - 1, -1),
        )
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out.terms[tuple(ne)] = c * e[i]
        return out

    def inverse(self):
        """1/self, defined when the constant term is nonzero."""
        c0 = self.terms.get((0,) * self.n, ZERO)
        if not c0:
            raise JetError("division by a jet vanishing at the base point")
        nil = self - Jet.const(self.n, self.cap, c0)
        if nil.is_zero():
            return Jet.const(self.n, self.cap, ONE / c0)
        inv_c0 = ONE / c0
        w = nil.scale(-inv_c0)
        acc = Jet.const(self.n, self.cap, ONE)
        power = Jet.const(self.n, self.cap, ONE)
        for _ in range(self.cap):
            power = power * w
            if power.is_zero():
                break
            acc = acc + power
        out = acc.scale(inv_c0)
        out.order = _min_order(self.order, self.cap)
        return out

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self.scale(ONE / rat(other))
        return self * other.inverse()

    def __eq__(self, other):
        return (
            isinstance(other, Jet)
            and self.n == other.n
            and self.cap == other.cap
            and self.terms == other.terms
        )

    def __repr__(self):
        p = Poly(self.n, self.terms)
        tag = "exact" if self.order is None else "ord%d" % self.order
        return "Jet[%s](%s)" % (tag, p)


class JetArena:
    """Shared (n, cap, center) context with convenience constructors."""

    def __init__(self, n, cap, center):
        self.n = n
        self.cap = cap
        self.center = [rat(c) for c in center]

    def zero(self):
        return Jet.zero(self.n, self.cap)

    def const(self, c):
        return Jet.const(self.n, self.cap, c)

    def of_poly(self, p: Poly) -> Jet:
        return Jet.from_poly(p, self.center, self.cap)

    def of_polyvec(self, v):
        return [self.of_poly(c) for c in v.components]


# -- linear algebra over the jet ring ---------------------------------

def jet_matvec(m, v):
    out = []
    for row in m:
        acc = None
        for a, b in zip(row, v):
            t = a * b
            acc = t if acc is None else acc + t
        out.append(acc)
    return out


def jet_matmul(a, b):
    bt = list(zip(*b))
    return [[_dot(row, col) for col in bt] for row in a]


def _dot(row, col):
    acc = None
    for x, y in zip(row, col):
        t = x * y
        acc = t if acc is None else acc + t
    return acc


def _pivot_search(a, rows_left, c):
    unit = None
    nonzero = False
    for i in rows_left:
        if a[i][c].is_zero():
            continue
        nonzero = True
        if a[i][c].unit_at_base():
            unit = i
            break
    return unit, nonzero


def jet_solve(a, rhs_cols):
    """Solve a X = B over the jet ring for a square matrix invertible at
    the base point.  rhs_cols is a list of column vectors; returns the
    solution columns.
    """
    n = len(a)
    aug = [list(row) + [col[i] for col in rhs_cols] for i, row in enumerate(a)]
    width = n + len(rhs_cols)
    rows_left = list(range(n))
    piv_rows = []
    for c in range(n):
        unit, nonzero = _pivot_search(aug, rows_left, c)
        if unit is None:
            raise JetError(
                "matrix not invertible at the base point (column %d)" % c
            )
        rows_left.remove(unit)
        piv_rows.append((unit, c))
        inv = aug[unit][c].inverse()
        aug[unit] = [x * inv for x in aug[unit]]
        for i in range(n):
            if i != unit and not aug[i][c].is_zero():
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[unit])]
    sol_rows = [None] * n
    for r, c in piv_rows:
        sol_rows[c] = aug[r][n:width]
    return [[sol_rows[i][j] for i in range(n)] for j in range(len(rhs_cols))]


def jet_kernel(a, ncols, zero):
    """Kernel basis of a jet matrix of constant rank near the base point.

    Pivots must be units (nonzero at the base point); a column whose
    remaining entries are nonzero jets all vanishing at the base point
    signals a rank drop and raises.
    """
    rows = [list(r) for r in a]
    nrows = len(rows)
    rows_left = list(range(nrows))
    pivots = []  # (row, col)
    for c in range(ncols):
        unit, nonzero = _pivot_search(rows, rows_left, c)
        if unit is None:
            if nonzero:
                raise JetError("rank drop at the base point (column %d)" % c)
            continue
        rows_left.remove(unit)
        inv = rows[unit][c].inverse()
        rows[unit] = [x * inv for x in rows[unit]]
        for i in range(nrows):
            if i != unit and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[unit])]
        pivots.append((unit, c))
    pivot_cols = [c for _, c in pivots]
    free = [c for c in range(ncols) if c not in pivot_cols]
    basis = []
    for fc in free:
        col = [zero for _ in range(ncols)]
        col[fc] = Jet.const(zero.n, zero.cap, ONE)
        for r, pc in pivots:
            col[pc] = -rows[r][fc]
        basis.append(col)
    return basis, pivot_cols
