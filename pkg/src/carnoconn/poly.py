"""Exact multivariate polynomials and polynomial vector fields.

Polynomials are sparse maps from exponent tuples to rational coefficients
over variables x1..xn.  The accepted text syntax is a sum of terms

    term := [rational] ['*' var] ['*' var] ...
    var  := x<k> ['^' <nat>]

for example "3/4*x1^2*x3 - x2 + 1"; whitespace is ignored.
"""

from __future__ import annotations

import re

from .rat import Rat, ZERO, ONE, rat


class PolyError(ValueError):
    pass


class Poly:
    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        self.terms = {}
        if terms:
            for e, c in terms.items():
                if c:
                    self.terms[tuple(e)] = rat(c)

    @classmethod
    def zero(cls, n):
        return cls(n)

    @classmethod
    def const(cls, n, c):
        p = cls(n)
        c = rat(c)
        if c:
            p.terms[(0,) * n] = c
        return p

    @classmethod
    def coordinate(cls, n, i):
        p = cls(n)
        e = [0] * n
        e[i] = 1
        p.terms[tuple(e)] = ONE
        return p

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(sum(e) == 0 for e in self.terms)

    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def __add__(self, other):
        if isinstance(other, Poly):
            out = Poly(self.n)
            out.terms = dict(self.terms)
            for e, c in other.terms.items():
                s = out.terms.get(e, ZERO) + c
                if s:
                    out.terms[e] = s
                else:
                    out.terms.pop(e, None)
            return out
        return self + Poly.const(self.n, other)

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.n, other)
        return self + other.scale(-ONE)

    def __neg__(self):
        return self.scale(-ONE)

    def scale(self, c):
        c = rat(c)
        out = Poly(self.n)
        if c:
            out.terms = {e: c * v for e, v in self.terms.items()}
        return out

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        out = Poly(self.n)
        t = out.terms
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = t.get(e, ZERO) + c1 * c2
                if s:
                    t[e] = s
                else:
                    t.pop(e, None)
        return out

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Poly) and self.n == other.n and self.terms == other.terms

    def diff(self, i):
        out = Poly(self.n)
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out.terms[tuple(ne)] = c * e[i]
        return out

    def eval(self, point):
        total = ZERO
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                for _ in range(k):
                    v = v * x
            total += v
        return total

    def substitute(self, polys):
        """Substitute x_i -> polys[i]; all polys share the output variable count."""
        n_out = polys[0].n
        out = Poly.zero(n_out)
        for e, c in self.terms.items():
            term = Poly.const(n_out, c)
            for i, k in enumerate(e):
                for _ in range(k):
                    term = term * polys[i]
            out = out + term
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=lambda t: (sum(t), t)):
            c = self.terms[e]
            factors = []
            for i, k in enumerate(e):
                if k == 1:
                    factors.append("x%d" % (i + 1))
                elif k > 1:
                    factors.append("x%d^%d" % (i + 1, k))
            if not factors or c != 1:
                from .rat import rat_str

                factors.insert(0, rat_str(c))
            parts.append("*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


_TOKEN = re.compile(r"\s*(x\d+|\d+/\d+|\d+|\^|\*|\+|-)")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise PolyError("bad polynomial syntax at %r" % text[pos:])
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_poly(text, n) -> Poly:
    toks = _tokenize(text)
    if not toks:
        return Poly.zero(n)
    result = Poly.zero(n)
    i = 0
    while i < len(toks):
        sign = ONE
        while i < len(toks) and toks[i] in "+-":
            if toks[i] == "-":
                sign = -sign
            i += 1
        if i >= len(toks):
            raise PolyError("dangling sign")
        term = Poly.const(n, sign)
        expect_factor = True
        while i < len(toks):
            t = toks[i]
            if t in "+-":
                break
            if t == "*":
                if expect_factor:
                    raise PolyError("misplaced '*'")
                expect_factor = True
                i += 1
                continue
            if not expect_factor:
                raise PolyError("missing '*' before %r" % t)
            if t.startswith("x"):
                var = int(t[1:]) - 1
                if not 0 <= var < n:
                    raise PolyError("variable %s out of range for dim %d" % (t, n))
                exp = 1
                if i + 1 < len(toks) and toks[i + 1] == "^":
                    if i + 2 >= len(toks) or not toks[i + 2].isdigit():
                        raise PolyError("bad exponent")
                    exp = int(toks[i + 2])
                    i += 2
                term = term * _power(Poly.coordinate(n, var), exp)
            else:
                term = term * Poly.const(n, rat(t))
            expect_factor = False
            i += 1
        if expect_factor:
            raise PolyError("dangling '*'")
        result = result + term
    return result


def _power(p, k):
    out = Poly.const(p.n, ONE)
    for _ in range(k):
        out = out * p
    return out


Poly.parse = staticmethod(parse_poly)


class PolyVec:
    """Polynomial vector field on R^n in the coordinate frame."""

    __slots__ = ("n", "components")

    def __init__(self, components):
        self.components = list(components)
        self.n = len(self.components)
        for c in self.components:
            if c.n != self.n:
                raise PolyError("component variable count must equal the dimension")

    @classmethod
    def parse(cls, strings, n):
        if len(strings) != n:
            raise PolyError("expected %d components" % n)
        return cls([parse_poly(s, n) for s in strings])

    @classmethod
    def zero(cls, n):
        return cls([Poly.zero(n) for _ in range(n)])

    def eval(self, point):
        return [c.eval(point) for c in self.components]

    def __add__(self, other):
        return PolyVec([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return PolyVec([a - b for a, b in zip(self.components, other.components)])

    def scale(self, c):
        return PolyVec([p.scale(c) for p in self.components])

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other):
        return isinstance(other, PolyVec) and self.components == other.components

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"

    __repr__ = __str__


def bracket(x: PolyVec, y: PolyVec) -> PolyVec:
    """Lie bracket [x, y]^i = sum_j (x^j d_j y^i - y^j d_j x^i), exact."""
    if x.n != y.n:
        raise PolyError("bracket of fields on different spaces")
    n = x.n
    comps = []
    for i in range(n):
        acc = Poly.zero(n)
        for j in range(n):
            if not x.components[j].is_zero():
                acc = acc + x.components[j] * y.components[i].diff(j)
            if not y.components[j].is_zero():
                acc = acc - y.components[j] * x.components[i].diff(j)
        comps.append(acc)
    return PolyVec(comps)
