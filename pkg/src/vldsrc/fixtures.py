"""Built-in example sources.

Three exact-rational sources exercise the interesting regimes:

* ``skewed-triple`` — three atoms (1/2, 1/3, 1/6), no useful side
  information; small enough to check every quantity by hand.
* ``point-uniform8`` — side information picks either a point mass or a
  uniform octet, so the per-y information density is constant (conditional
  variance 0) while the unconditional variance is 9/4.
* ``zeta-geometric`` — Y with a 1/y^2 law, X geometric with success rate
  1/y given y, truncated per row to a tail tolerance and renormalized; the
  per-y variance grows with y, which separates the two dispersion notions.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ValidationError
from .sources import JointSource

_F = Fraction


def skewed_triple() -> JointSource:
    pmf = ((_F(1, 2),), (_F(1, 3),), (_F(1, 6),))
    return JointSource.from_pmf(("1", "2", "3"), ("0",), pmf, "rational")


def point_uniform8() -> JointSource:
    x_alphabet = tuple(str(i) for i in range(9))
    rows = [(_F(1, 2), _F(0))]
    rows.extend((_F(0), _F(1, 16)) for _ in range(8))
    return JointSource.from_pmf(x_alphabet, ("0", "1"), tuple(rows), "rational")


def _coerce_tol(tail_tol) -> Fraction:
    if isinstance(tail_tol, float):
        tol = Fraction(tail_tol).limit_denominator(10**12)
    else:
        tol = Fraction(tail_tol)
    if not 0 < tol < 1:
        raise ValidationError(
            f"tail tolerance must lie in (0, 1), got {tail_tol!r}", "tail_tol"
        )
    return tol


def zeta_geometric_source(y_max: int = 3, tail_tol=Fraction(1, 10**9)) -> JointSource:
    """Truncated power-law/geometric pair, exact rationals throughout.

    P(Y=y) is proportional to 1/y^2 on {1..y_max}; given y, X is geometric
    with parameter 1/y.  Each row keeps the smallest prefix whose discarded
    mass is at most ``tail_tol`` and renormalizes, so row y=1 degenerates to
    a point mass at 1.
    """
    if y_max < 1:
        raise ValidationError(f"y_max must be >= 1, got {y_max!r}", "y_max")
    tol = _coerce_tol(tail_tol)
    y_values = tuple(range(1, y_max + 1))
    weight = [_F(1, y * y) for y in y_values]
    total_w = sum(weight)
    p_y = [w / total_w for w in weight]

    columns = []
    for y in y_values:
        ratio = _F(y - 1, y)
        # smallest x_max with ratio**x_max <= tol; the discarded tail of the
        # untruncated geometric after x_max atoms is exactly ratio**x_max
        masses = []
        term = _F(1, y)
        tail = ratio
        masses.append(term)
        while tail > tol:
            term = term * ratio
            tail = tail * ratio
            masses.append(term)
        kept = 1 - tail
        columns.append([m / kept for m in masses])

    x_total = max(len(col) for col in columns)
    x_alphabet = tuple(range(1, x_total + 1))
    pmf = tuple(
        tuple(p_y[j] * (columns[j][i] if i < len(columns[j]) else _F(0)) for j in range(y_max))
        for i in range(x_total)
    )
    return JointSource.from_pmf(x_alphabet, y_values, pmf, "rational")


FIXTURES = {
    "skewed-triple": skewed_triple,
    "point-uniform8": point_uniform8,
    "zeta-geometric": zeta_geometric_source,
}

FIXTURE_NAMES = tuple(sorted(FIXTURES))


def fixture(name: str, **kwargs) -> JointSource:
    try:
        factory = FIXTURES[name]
    except KeyError:
        known = ", ".join(FIXTURE_NAMES)
        raise ValidationError(f"unknown fixture {name!r}; available: {known}", "name") from None
    return factory(**kwargs)
