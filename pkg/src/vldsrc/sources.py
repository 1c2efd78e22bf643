"""Finite correlated source pairs and their single-letter information measures.

A :class:`JointSource` stores the joint pmf of a pair (X, Y) over finite
alphabets, either with exact rational masses or with float64 masses.  All
probability *comparisons* (sorting, tail sums, thresholds) happen in the
stored arithmetic; logarithms are always evaluated in float64 because the
resulting entropies are irrational anyway.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Sequence

from .errors import BudgetExceededError, InvariantError, ValidationError

RATIONAL = "rational"
FLOAT = "float"

_FLOAT_TOTAL_TOL = 1e-12
# Decimal eps values are snapped to a nearby rational before exact
# comparisons against rational masses; 1e9 keeps 9 decimal digits intact.
_EPS_DENOMINATOR_LIMIT = 10**9


def _log2(p) -> float:
    """log2 of a positive Fraction or float, safe for huge numerators."""
    if isinstance(p, Fraction):
        return math.log2(p.numerator) - math.log2(p.denominator)
    return math.log2(p)


def parse_probability(entry: Any, mode: str, path: str):
    """Parse one pmf entry according to the source mode."""
    if mode == RATIONAL:
        if isinstance(entry, str):
            try:
                value = Fraction(entry)
            except (ValueError, ZeroDivisionError) as exc:
                raise ValidationError(f"malformed rational {entry!r} ({exc})", path)
        elif isinstance(entry, int):
            value = Fraction(entry)
        elif isinstance(entry, Fraction):
            value = entry
        else:
            raise ValidationError(
                f"rational mode requires 'p/q' strings or integers, got {entry!r}", path
            )
    else:
        if isinstance(entry, bool) or not isinstance(entry, (int, float)):
            raise ValidationError(f"float mode requires numbers, got {entry!r}", path)
        value = float(entry)
    if value < 0:
        raise ValidationError(f"negative mass {entry!r}", path)
    return value


def coerce_eps(eps, exact: bool):
    """Normalize an error-probability argument.

    Accepts floats, Fractions, ints and ``"p/q"`` / decimal strings.  For the
    exact lane, decimals become rationals with denominator at most 10^9 so
    that threshold comparisons against rational masses are decidable.
    """
    if isinstance(eps, str):
        text = eps.strip()
        try:
            value = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse probability {eps!r} ({exc})", "eps")
        if "/" not in text:
            # decimal notation: snap to a bounded-denominator rational
            value = value.limit_denominator(_EPS_DENOMINATOR_LIMIT)
    elif isinstance(eps, Fraction):
        value = eps
    elif isinstance(eps, int) and not isinstance(eps, bool):
        value = Fraction(eps)
    elif isinstance(eps, float):
        if not math.isfinite(eps):
            raise ValidationError(f"non-finite probability {eps!r}", "eps")
        value = Fraction(eps).limit_denominator(_EPS_DENOMINATOR_LIMIT) if exact else eps
    else:
        raise ValidationError(f"cannot parse probability {eps!r}", "eps")
    if not 0 <= value <= 1:
        raise ValidationError(f"probability {eps!r} outside [0, 1]", "eps")
    return value if exact else float(value)


@dataclass(frozen=True)
class JointSource:
    """Joint pmf of (X, Y); ``pmf[i][j] = P(X = x_alphabet[i], Y = y_alphabet[j])``.

    Construct through :meth:`from_pmf` (or :func:`load_source`), which
    validates and drops y symbols with zero marginal mass.  x symbols of zero
    total mass are kept in the alphabet but never appear in any conditional
    support.
    """

    x_alphabet: tuple
    y_alphabet: tuple
    pmf: tuple  # tuple of rows (one per x), entries Fraction or float
    mode: str

    @classmethod
    def from_pmf(cls, x_alphabet, y_alphabet, pmf, mode) -> "JointSource":
        if mode not in (RATIONAL, FLOAT):
            raise ValidationError(f"unknown mode {mode!r}", "mode")
        xs = tuple(x_alphabet)
        ys = tuple(y_alphabet)
        if not xs:
            raise ValidationError("empty alphabet", "x_alphabet")
        if not ys:
            raise ValidationError("empty alphabet", "y_alphabet")
        if len(set(xs)) != len(xs):
            raise ValidationError("duplicate symbols", "x_alphabet")
        if len(set(ys)) != len(ys):
            raise ValidationError("duplicate symbols", "y_alphabet")
        rows = []
        if len(pmf) != len(xs):
            raise ValidationError(
                f"expected {len(xs)} rows, got {len(pmf)}", "pmf"
            )
        for i, raw_row in enumerate(pmf):
            if len(raw_row) != len(ys):
                raise ValidationError(
                    f"expected {len(ys)} columns, got {len(raw_row)}", f"pmf[{i}]"
                )
            rows.append(tuple(raw_row))
        total = sum(sum(row) for row in rows)
        if mode == RATIONAL:
            if total != 1:
                raise ValidationError(f"non-unit total mass {total}", "pmf")
        elif abs(total - 1.0) > _FLOAT_TOTAL_TOL:
            raise ValidationError(f"non-unit total mass {total!r}", "pmf")
        # Drop y symbols that carry no mass at all.
        col_mass = [sum(row[j] for row in rows) for j in range(len(ys))]
        keep = [j for j, m in enumerate(col_mass) if m > 0]
        if not keep:
            raise ValidationError("no y symbol has positive mass", "pmf")
        ys = tuple(ys[j] for j in keep)
        rows = tuple(tuple(row[j] for j in keep) for row in rows)
        return cls(x_alphabet=xs, y_alphabet=ys, pmf=rows, mode=mode)

    # -- basic views ------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.mode == RATIONAL

    @cached_property
    def y_marginal(self) -> tuple:
        return tuple(
            sum(self.pmf[i][j] for i in range(len(self.x_alphabet)))
            for j in range(len(self.y_alphabet))
        )

    @cached_property
    def x_index(self) -> dict:
        return {x: i for i, x in enumerate(self.x_alphabet)}

    @cached_property
    def y_index(self) -> dict:
        return {y: j for j, y in enumerate(self.y_alphabet)}

    def conditional_masses(self, j: int) -> tuple:
        """Conditional masses P(x_i | y_j) for every x, zeros included."""
        py = self.y_marginal[j]
        return tuple(self.pmf[i][j] / py for i in range(len(self.x_alphabet)))

    def joint_items(self):
        """Yield (i, j, mass) over strictly positive support points."""
        for i in range(len(self.x_alphabet)):
            for j in range(len(self.y_alphabet)):
                m = self.pmf[i][j]
                if m > 0:
                    yield i, j, m


@dataclass(frozen=True)
class ConditionalRow:
    """One conditional pmf P(X | Y = y) sorted into non-increasing order.

    ``perm[k]`` is the original x symbol holding rank k+1; ties between equal
    masses are broken by ascending original symbol index, so sorting is
    deterministic and idempotent.
    """

    y: Any
    probs_sorted: tuple
    perm: tuple

    def __post_init__(self):
        for a, b in zip(self.probs_sorted, self.probs_sorted[1:]):
            if a < b:
                raise InvariantError("probs_sorted is not non-increasing")  # pragma: no cover


@dataclass(frozen=True)
class MeasureSet:
    """Entropy and information-variance summary of a source (all in bits^s)."""

    H: float
    V_c: float
    V_u: float
    T_u: float
    per_y: dict  # y -> (H_y, V_y, T_y); conditional central moments


def load_source(document) -> JointSource:
    """Parse a source document (JSON text, bytes, or an already-parsed dict)."""
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON ({exc})", "$")
    elif isinstance(document, dict):
        data = document
    else:
        raise ValidationError(f"unsupported document type {type(document).__name__}", "$")
    for field in ("mode", "x_alphabet", "y_alphabet", "pmf"):
        if field not in data:
            raise ValidationError("missing field", field)
    mode = data["mode"]
    if mode not in (RATIONAL, FLOAT):
        raise ValidationError(f"unknown mode {mode!r}", "mode")
    xs = data["x_alphabet"]
    ys = data["y_alphabet"]
    if not isinstance(xs, list) or not isinstance(ys, list):
        raise ValidationError("alphabets must be arrays", "x_alphabet")
    raw = data["pmf"]
    if not isinstance(raw, list):
        raise ValidationError("pmf must be an array of rows", "pmf")
    if len(raw) != len(xs):
        raise ValidationError(f"expected {len(xs)} rows, got {len(raw)}", "pmf")
    pmf = []
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != len(ys):
            raise ValidationError(f"expected {len(ys)} columns", f"pmf[{i}]")
        pmf.append(
            [parse_probability(entry, mode, f"pmf[{i}][{j}]") for j, entry in enumerate(row)]
        )
    return JointSource.from_pmf(xs, ys, pmf, mode)


def dump_source(src: JointSource) -> dict:
    """Serialize back to the documented JSON schema (round-trips exactly)."""
    if src.exact:
        rows = [[f"{m.numerator}/{m.denominator}" for m in row] for row in src.pmf]
    else:
        rows = [[float(m) for m in row] for row in src.pmf]
    return {
        "mode": src.mode,
        "x_alphabet": [_plain_label(x) for x in src.x_alphabet],
        "y_alphabet": [_plain_label(y) for y in src.y_alphabet],
        "pmf": rows,
    }


def _plain_label(label):
    if isinstance(label, (str, int, float, bool)):
        return label
    return str(label)


def info_density(src: JointSource, x, y) -> float:
    """-log2 P(x|y); a domain error on zero conditional mass (no infinities)."""
    try:
        i = src.x_index[x]
        j = src.y_index[y]
    except KeyError as exc:
        raise ValidationError(f"symbol {exc.args[0]!r} not in alphabet")
    py = src.y_marginal[j]
    mass = src.pmf[i][j]
    if mass <= 0:
        raise ValidationError(f"zero conditional mass at (x={x!r}, y={y!r})")
    return -_log2(mass / py)


def sorted_rows(src: JointSource) -> list[ConditionalRow]:
    """Conditional rows sorted by decreasing mass (stable; zero masses dropped)."""
    rows = []
    for j, y in enumerate(src.y_alphabet):
        cond = src.conditional_masses(j)
        support = [i for i, m in enumerate(cond) if m > 0]
        # sort() is stable, so equal masses stay in ascending symbol order
        support.sort(key=lambda i: cond[i], reverse=True)
        rows.append(
            ConditionalRow(
                y=y,
                probs_sorted=tuple(cond[i] for i in support),
                perm=tuple(src.x_alphabet[i] for i in support),
            )
        )
    return rows


def measures(src: JointSource) -> MeasureSet:
    """All single-letter measures, with the 0 log 0 = 0 convention.

    Per-y entries are the conditional central moments (entropy, variance,
    third absolute moment) of the information density given Y = y; the
    unconditional moments V_u and T_u center the density at the global H
    instead.
    """
    per_y: dict = {}
    H = 0.0
    for j, y in enumerate(src.y_alphabet):
        py = float(src.y_marginal[j])
        cond = [m for m in src.conditional_masses(j) if m > 0]
        iotas = [-_log2(w) for w in cond]
        weights = [float(w) for w in cond]
        h_y = math.fsum(w * t for w, t in zip(weights, iotas))
        v_y = math.fsum(w * (t - h_y) ** 2 for w, t in zip(weights, iotas))
        t_y = math.fsum(w * abs(t - h_y) ** 3 for w, t in zip(weights, iotas))
        per_y[y] = (h_y, v_y, t_y)
        H += py * h_y
    V_c = math.fsum(float(src.y_marginal[j]) * per_y[y][1] for j, y in enumerate(src.y_alphabet))
    V_u = 0.0
    T_u = 0.0
    for j, y in enumerate(src.y_alphabet):
        py = float(src.y_marginal[j])
        for w in src.conditional_masses(j):
            if w <= 0:
                continue
            t = -_log2(w)
            V_u += py * float(w) * (t - H) ** 2
            T_u += py * float(w) * abs(t - H) ** 3
    return MeasureSet(H=H, V_c=V_c, V_u=V_u, T_u=T_u, per_y=per_y)


_PRODUCT_CELL_LIMIT = 2_000_000


def product_source(src: JointSource, n: int, max_cells: int = _PRODUCT_CELL_LIMIT) -> JointSource:
    """Materialize the n-fold i.i.d. product source with tuple-valued symbols.

    Only sensible for small alphabets/blocklengths: the pmf table has
    |X|^n * |Y|^n cells and is rejected beyond ``max_cells``.
    """
    if n < 1:
        raise ValidationError(f"blocklength must be >= 1, got {n}", "n")
    if n == 1:
        return src
    nx, ny = len(src.x_alphabet), len(src.y_alphabet)
    cells = (nx**n) * (ny**n)
    if cells > max_cells:
        raise BudgetExceededError(
            f"product source would need {cells} pmf cells (limit {max_cells})"
        )
    from itertools import product as iproduct

    xs = tuple(iproduct(src.x_alphabet, repeat=n))
    ys = tuple(iproduct(src.y_alphabet, repeat=n))
    xi, yi = src.x_index, src.y_index
    one = Fraction(1) if src.exact else 1.0
    pmf = []
    for xseq in xs:
        row = []
        for yseq in ys:
            m = one
            for a, b in zip(xseq, yseq):
                m = m * src.pmf[xi[a]][yi[b]]
            row.append(m)
        pmf.append(tuple(row))
    return JointSource.from_pmf(xs, ys, tuple(pmf), src.mode)
