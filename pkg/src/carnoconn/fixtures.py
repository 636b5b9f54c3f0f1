"""Canonical algebra specs and polynomial frame models used across the
test-suite and as CLI sample inputs.

Left-invariant frames are generated in exponential coordinates via the
finite Bernoulli series of ad_x, so every nilpotent algebra gets an exact
polynomial model for free.  Perturbed models are pushforwards of those
frames under polynomial shear diffeomorphisms; these preserve the symbol
while producing nonzero structure functions.
"""

from __future__ import annotations

from .carnot import CarnotSpec, build, extend, isometry_algebra
from .linalg import Mat
from .poly import Poly, PolyVec
from .rat import ZERO, ONE, rat

# Bernoulli series for ad_x / (1 - exp(-ad_x)): 1 + t/2 + t^2/12 - t^4/720 + ...
_AD_SERIES = [rat(1), rat(1, 2), rat(1, 12), rat(0), rat(-1, 720), rat(0)]


def heisenberg23_spec():
    """[A1, A2] = B with A1, A2 orthonormal."""
    return CarnotSpec(2, [2, 1], [(0, 1, {2: 1})], Mat.identity(2))


def rolling235_spec():
    """[A1, A2] = B, [Aj, B] = Cj; growth vector (2, 3, 5)."""
    return CarnotSpec(
        3,
        [2, 1, 2],
        [(0, 1, {2: 1}), (0, 2, {3: 1}), (1, 2, {4: 1})],
        Mat.identity(2),
    )


def free_step2_spec(n1):
    """Free nilpotent of step 2 on n1 orthonormal generators."""
    pairs = [(i, j) for i in range(n1) for j in range(i + 1, n1)]
    brackets = [
        (i, j, {n1 + pairs.index((i, j)): 1}) for (i, j) in pairs
    ]
    return CarnotSpec(2, [n1, len(pairs)], brackets, Mat.identity(n1))


def contact_spec(lams):
    """Heisenberg Carnot algebra of dimension 2*len(lams)+1.

    lams lists one eigenvalue per complex line; the basis of g_-1 is
    e_1, i e_1, e_2, i e_2, ... and [e_r, i e_r] = lam_r B.  Repeating an
    eigenvalue enlarges its eigenspace (contact_spec([1, 1]) is the
    standard 5-dimensional Heisenberg algebra).
    """
    lams = [rat(l) for l in lams]
    n1 = 2 * len(lams)
    brackets = [(2 * r, 2 * r + 1, {n1: l}) for r, l in enumerate(lams)]
    return CarnotSpec(2, [n1, 1], brackets, Mat.identity(n1))


def contact_std_spec():
    return contact_spec([1, 1])


def contact_two_eigen_spec():
    return contact_spec([1, rat(1, 2)])


ALGEBRA_SPECS = {
    "heisenberg23": heisenberg23_spec,
    "rolling235": rolling235_spec,
    "free_step2_n3": lambda: free_step2_spec(3),
    "free_step2_n4": lambda: free_step2_spec(4),
    "contact_std": contact_std_spec,
    "contact_two_eigen": contact_two_eigen_spec,
}

_EXT_CACHE = {}


def extended(name):
    """Built-and-extended fixture algebra, cached by name."""
    if name not in _EXT_CACHE:
        alg = build(ALGEBRA_SPECS[name]())
        _EXT_CACHE[name] = extend(alg, isometry_algebra(alg))
    return _EXT_CACHE[name]


def _ad_matrix(alg, x):
    """Matrix of ad_x on g_minus for a coefficient vector x of Polys."""
    n = alg.n
    cols = []
    for j in range(n):
        col = [Poly.zero(n) for _ in range(n)]
        for i in range(n):
            xi = x[i]
            if xi.is_zero():
                continue
            for k, c in alg.brk[i][j].items():
                col[k] = col[k] + xi * c
        cols.append(col)
    return cols  # cols[j][k]: coefficient of b_k in ad_x(b_j)


def left_invariant_fields(alg):
    """Left-invariant frame in exponential coordinates x_1..x_n.

    X_A(x) = (ad_x / (1 - e^{-ad_x}))(A), a polynomial since the algebra
    is nilpotent; coordinates follow the graded basis order.
    """
    n = alg.n
    x = [Poly.coordinate(n, i) for i in range(n)]
    fields = []
    for j in range(n):
        vec = [Poly.zero(n) for _ in range(n)]
        vec[j] = Poly.const(n, ONE)
        acc = [Poly.const(n, c) if (i == j and (c := _AD_SERIES[0])) else Poly.zero(n) for i in range(n)]
        cur = vec
        for power in range(1, alg.step + 1):
            if power >= len(_AD_SERIES):
                break
            nxt = [Poly.zero(n) for _ in range(n)]
            for b in range(n):
                if cur[b].is_zero():
                    continue
                for i in range(n):
                    if x[i].is_zero():
                        continue
                    for k, c in alg.brk[i][b].items():
                        nxt[k] = nxt[k] + x[i] * cur[b] * c
            cur = nxt
            coeff = _AD_SERIES[power]
            if coeff:
                acc = [a + c * coeff for a, c in zip(acc, cur)]
        fields.append(PolyVec(acc))
    return fields


def left_invariant_model(name):
    """Horizontal frame and base point (origin) for a fixture algebra."""
    from .frames import FrameSpec

    alg = build(ALGEBRA_SPECS[name]())
    fields = left_invariant_fields(alg)
    horizontal = fields[: alg.layer_dims[0]]
    point = [ZERO] * alg.n
    return FrameSpec(alg.n, horizontal, point, alg.spec)


def shear_pushforward(fields, target, poly):
    """Pushforward of fields under phi: x_target += poly(x), evaluated back
    in the source coordinates (valid whenever poly does not involve
    x_target, making phi a polynomial shear with polynomial inverse).
    """
    n = fields[0].n
    out = []
    for f in fields:
        comps = list(f.components)
        extra = Poly.zero(n)
        for i in range(n):
            extra = extra + comps[i] * poly.diff(i)
        comps[target] = comps[target] + extra
        out.append(PolyVec(comps))
    # substitute x_target -> x_target - poly(x) so the frame is expressed
    # at the image point of phi
    subs = [Poly.coordinate(n, i) for i in range(n)]
    subs[target] = subs[target] - poly
    return [PolyVec([c.substitute(subs) for c in f.components]) for f in out]


def heis23_perturbed_model():
    """X1 = d/dx, X2 = d/dy + x(1+y) d/dz at the origin; f1 = 0, f2 = 1."""
    from .frames import FrameSpec

    x1 = PolyVec.parse(["1", "0", "0"], 3)
    x2 = PolyVec.parse(["0", "1", "x1 + x1*x2"], 3)
    return FrameSpec(3, [x1, x2], [ZERO] * 3, heisenberg23_spec())


def perturbed_model(name, target, poly_str):
    """Left-invariant model pushed forward by a polynomial shear."""
    from .frames import FrameSpec

    alg = build(ALGEBRA_SPECS[name]())
    fields = left_invariant_fields(alg)[: alg.layer_dims[0]]
    poly = Poly.parse(poly_str, alg.n)
    fields = shear_pushforward(fields, target, poly)
    return FrameSpec(alg.n, fields, [ZERO] * alg.n, alg.spec)
