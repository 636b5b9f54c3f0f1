"""Exact rational scalar type used everywhere in the package.

gmpy2.mpq is used when available (much faster gcd-normalized arithmetic),
with fractions.Fraction as a drop-in fallback.  Both store numerator /
positive denominator in lowest terms.  All public entry points accept
ints, rationals, or "p/q" strings.
"""

from __future__ import annotations

from fractions import Fraction

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    Rat = Fraction

ZERO = Rat(0)
ONE = Rat(1)


def rat(value, den=None):
    """Coerce to Rat.  Accepts int, Rat, Fraction, or 'p/q' / 'p' strings."""
    if den is not None:
        return Rat(value, den)
    if isinstance(value, str):
        return Rat(value.strip())
    return Rat(value)


def rat_str(q) -> str:
    """Canonical string form: 'p' for integers, 'p/q' otherwise."""
    q = Rat(q)
    if q.denominator == 1:
        return str(q.numerator)
    return "%d/%d" % (q.numerator, q.denominator)


def is_rational(value) -> bool:
    return isinstance(value, (int, type(ZERO), Fraction))
