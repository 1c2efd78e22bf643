"""Exact n-letter spectra for i.i.d. products of a finite source.

Everything here runs on empirical types, never on raw sequences, so the
work is polynomial in the blocklength.  Two refinements keep the counts
small:

* the conditional law of an x-block given a y-block depends only on the
  y-block's empirical counts, so y-sequences collapse to y-marginal types;
* within a conditional row, symbols sharing one mass value are
  interchangeable, so row types run over *distinct mass values* with a
  per-symbol multiplicity factor folded into the sequence count.

The second point matters: a uniform row contributes exactly one likelihood
class at every blocklength instead of a stars-and-bars explosion.

In rational mode, likelihoods are exact Fractions and sequence counts exact
integers; class merging is by exact likelihood equality.  In float mode,
likelihoods are carried as log2 values and counts as float64 (exact only
below 2^53), and atom merging happens within 1e-12 — the float lane trades
exactness for speed by design.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import backend
from .cutoff import ValueSpectrum
from .errors import BudgetExceededError, ValidationError
from .sources import JointSource, _log2

DEFAULT_TYPE_BUDGET = 10**8
_ENV_BUDGET = "VLDSRC_MAX_TYPES"


def resolve_budget(max_types=None) -> int:
    """Explicit argument, then the VLDSRC_MAX_TYPES env var, then 10^8."""
    if max_types is not None:
        budget = int(max_types)
    else:
        env = os.environ.get(_ENV_BUDGET)
        budget = int(env) if env else DEFAULT_TYPE_BUDGET
    if budget < 1:
        raise ValidationError(f"type budget must be positive, got {budget}", "max_types")
    return budget


def compositions(n: int, k: int):
    """Yield all k-tuples of nonnegative ints summing to n (C(n+k-1, k-1) many)."""
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in compositions(n - first, k - 1):
            yield (first,) + rest


def multinomial(n: int, counts) -> int:
    out = 1
    remaining = n
    for c in counts:
        out *= math.comb(remaining, c)
        remaining -= c
    return out


@dataclass(frozen=True)
class TypeClass:
    """One joint empirical type over the positive support of (X, Y)."""

    support: tuple  # ((i, j) alphabet index pairs), fixed per enumeration
    counts: tuple  # occurrences per support point, sums to n
    weight: int  # number of sequence pairs realizing these counts
    likelihood: Fraction | None  # exact product of masses (rational mode)
    log2_likelihood: float


@dataclass(frozen=True)
class YType:
    """Empirical type of the side-information block."""

    counts: tuple  # aligned with y_alphabet, sums to n
    weight: int
    probability: object  # weight * prod P_Y(y)^count


@dataclass(frozen=True)
class RankClass:
    likelihood: Fraction | None
    log2_likelihood: float
    count: object  # int (exact) or float


@dataclass(frozen=True)
class RankSpectrum:
    """Conditional likelihood classes in strictly decreasing order.

    ``classes[k]`` occupies ranks [1 + sum of earlier counts, ...) in the
    most-likely-first ordering of x-blocks given the y-block type.
    """

    classes: tuple
    exact: bool

    def total_count(self):
        return sum(c.count for c in self.classes)


def enumerate_joint_types(src: JointSource, n: int, max_types=None):
    """Stream every joint type of blocklength n over the positive support."""
    if n < 1:
        raise ValidationError(f"blocklength must be >= 1, got {n}", "n")
    budget = resolve_budget(max_types)
    support = tuple((i, j) for i, j, _ in src.joint_items())
    m = len(support)
    total = math.comb(n + m - 1, m - 1)
    if total > budget:
        raise BudgetExceededError(
            f"{total} joint types exceed the budget of {budget} (support {m}, n {n})"
        )
    probs = [src.pmf[i][j] for i, j in support]
    log2p = [_log2(p) for p in probs]
    for counts in compositions(n, m):
        weight = multinomial(n, counts)
        log2_l = sum(c * lp for c, lp in zip(counts, log2p))
        if src.exact:
            likelihood = Fraction(1)
            for p, c in zip(probs, counts):
                if c:
                    likelihood *= p**c
        else:
            likelihood = None
        yield TypeClass(
            support=support,
            counts=counts,
            weight=weight,
            likelihood=likelihood,
            log2_likelihood=log2_l,
        )


def y_marginal_types(src: JointSource, n: int, max_types=None) -> list:
    """All empirical types of the y-block, with exact probabilities."""
    if n < 1:
        raise ValidationError(f"blocklength must be >= 1, got {n}", "n")
    budget = resolve_budget(max_types)
    k = len(src.y_alphabet)
    total = math.comb(n + k - 1, k - 1)
    if total > budget:
        raise BudgetExceededError(
            f"{total} side-information types exceed the budget of {budget}"
        )
    out = []
    one = Fraction(1) if src.exact else 1.0
    for counts in compositions(n, k):
        weight = multinomial(n, counts)
        prob = one * weight
        for py, c in zip(src.y_marginal, counts):
            if c:
                prob = prob * py**c
        out.append(YType(counts=counts, weight=weight, probability=prob))
    return out


def _row_groups(src: JointSource, j: int) -> list:
    """Distinct conditional masses of row j with multiplicities."""
    groups: dict = {}
    for w in src.conditional_masses(j):
        if w > 0:
            groups[w] = groups.get(w, 0) + 1
    return sorted(groups.items(), key=lambda kv: kv[0], reverse=True)


def _row_class_count(src: JointSource, j: int, k: int) -> int:
    d = len(_row_groups(src, j))
    return math.comb(k + d - 1, d - 1)


def _row_class_dict(src: JointSource, j: int, k: int) -> dict:
    """Likelihood classes of k-letter blocks drawn from conditional row j.

    Returns {likelihood_key: count}; the key is the exact Fraction likelihood
    in rational mode and the log2 likelihood in float mode.  The count folds
    in the choice of concrete symbols within equal-mass groups.
    """
    groups = _row_groups(src, j)
    if src.exact:
        out: dict = {}
        for counts in compositions(k, len(groups)):
            like = Fraction(1)
            ways = multinomial(k, counts)
            for (w, mult), c in zip(groups, counts):
                if c:
                    like *= w**c
                    ways *= mult**c
            out[like] = out.get(like, 0) + ways
        return out
    out = {}
    for counts in compositions(k, len(groups)):
        log2_like = 0.0
        ways = float(multinomial(k, counts))
        for (w, mult), c in zip(groups, counts):
            if c:
                log2_like += c * math.log2(w)
                ways *= float(mult) ** c
        out[log2_like] = out.get(log2_like, 0.0) + ways
    return out


def _check_conditional_budget(src: JointSource, y_counts, budget: int, used: int = 0) -> int:
    est = 1
    for j, k in enumerate(y_counts):
        if k:
            est *= _row_class_count(src, j, k)
    if used + est > budget:
        raise BudgetExceededError(
            f"conditional likelihood classes ({used + est}) exceed the budget of {budget}"
        )
    return est


def conditional_class_dict(src: JointSource, y_counts, max_types=None) -> dict:
    """Convolution of per-row class dicts for a y-block with these counts."""
    if len(y_counts) != len(src.y_alphabet) or any(c < 0 for c in y_counts):
        raise ValidationError("y_counts must align with the y alphabet", "y_counts")
    budget = resolve_budget(max_types)
    _check_conditional_budget(src, y_counts, budget)
    if src.exact:
        acc = {Fraction(1): 1}
        for j, k in enumerate(y_counts):
            if not k:
                continue
            row = _row_class_dict(src, j, k)
            nxt: dict = {}
            for la, ca in acc.items():
                for lb, cb in row.items():
                    key = la * lb
                    nxt[key] = nxt.get(key, 0) + ca * cb
            acc = nxt
        return acc
    acc = {0.0: 1.0}
    for j, k in enumerate(y_counts):
        if not k:
            continue
        row = _row_class_dict(src, j, k)
        nxt = {}
        for la, ca in acc.items():
            for lb, cb in row.items():
                key = la + lb  # log2 domain
                nxt[key] = nxt.get(key, 0.0) + ca * cb
        acc = nxt
    return acc


def rank_spectrum(src: JointSource, n: int, y_counts, max_types=None) -> RankSpectrum:
    """Likelihood classes of x-blocks given the y-block type, best first."""
    if sum(y_counts) != n:
        raise ValidationError(f"y_counts sum to {sum(y_counts)}, expected n = {n}", "y_counts")
    d = conditional_class_dict(src, y_counts, max_types=max_types)
    if src.exact:
        items = sorted(d.items(), key=lambda kv: kv[0], reverse=True)
        classes = tuple(
            RankClass(likelihood=like, log2_likelihood=_log2(like), count=cnt)
            for like, cnt in items
        )
    else:
        items = sorted(d.items(), key=lambda kv: kv[0], reverse=True)
        classes = tuple(
            RankClass(likelihood=None, log2_likelihood=l2, count=cnt) for l2, cnt in items
        )
    return RankSpectrum(classes=classes, exact=src.exact)


def _floor_log_masses_exact(spectrum: RankSpectrum) -> dict:
    out: dict = {}
    rank = 1
    for cls in spectrum.classes:
        end = rank + cls.count
        while rank < end:
            j = rank.bit_length() - 1
            block_end = 1 << (j + 1)
            take = min(end, block_end) - rank
            out[j] = out.get(j, Fraction(0)) + cls.likelihood * take
            rank += take
    return out


def floor_log_rank_spectrum(src: JointSource, n: int, y_counts, max_types=None) -> ValueSpectrum:
    """Law of floor(log2 rank) under the conditional law for this y-type.

    The class occupying ranks [s, s + c) contributes likelihood * overlap to
    value j for its overlap with each dyadic block [2^j, 2^{j+1}).
    """
    spec = rank_spectrum(src, n, y_counts, max_types=max_types)
    if src.exact:
        masses = _floor_log_masses_exact(spec)
        atoms = sorted(masses.items())
        return ValueSpectrum.from_atoms(atoms, exact=True)
    total = sum(float(c.count) for c in spec.classes)
    n_values = max(1, int(math.floor(math.log2(total))) + 2)
    out = backend.split_rank_classes_float(
        np.asarray([c.log2_likelihood for c in spec.classes], dtype=np.float64),
        np.asarray([float(c.count) for c in spec.classes], dtype=np.float64),
        n_values,
    )
    atoms = [(j, float(m)) for j, m in enumerate(out) if m > 0]
    return ValueSpectrum.from_atoms(atoms, exact=False)


def pooled_floor_log_rank_spectrum(src: JointSource, n: int, max_types=None) -> ValueSpectrum:
    """Unconditional law of floor(log2 rank): mixture over y-block types."""
    pooled: dict = {}
    zero = Fraction(0) if src.exact else 0.0
    for ytype in y_marginal_types(src, n, max_types=max_types):
        spec = floor_log_rank_spectrum(src, n, ytype.counts, max_types=max_types)
        for v, m in zip(spec.values, spec.masses):
            pooled[v] = pooled.get(v, zero) + ytype.probability * m
    return ValueSpectrum.from_atoms(sorted(pooled.items()), exact=src.exact)


def iota_spectrum_n(src: JointSource, n: int, y_counts=None, max_types=None) -> ValueSpectrum:
    """Exact law of the n-letter information density -log2 P(x-block|y-block).

    With ``y_counts`` the law is conditional on that y-type; without it, the
    mixture over all y-types (the unconditional law).  Atoms are grouped by
    the exact conditional likelihood in rational mode.
    """
    if n < 1:
        raise ValidationError(f"blocklength must be >= 1, got {n}", "n")
    budget = resolve_budget(max_types)
    if y_counts is not None:
        d = conditional_class_dict(src, y_counts, max_types=budget)
        if src.exact:
            atoms = [(-_log2(like), like * cnt) for like, cnt in d.items()]
            keys = list(d.keys())
            return ValueSpectrum.from_atoms(atoms, exact=True, keys=keys)
        atoms = [(-l2, 2.0 ** l2 * cnt) for l2, cnt in d.items()]
        return ValueSpectrum.from_atoms(atoms, exact=False)
    # budget the whole mixture up front
    used = 0
    ytypes = y_marginal_types(src, n, max_types=budget)
    for ytype in ytypes:
        used += _check_conditional_budget(src, ytype.counts, budget, used=used)
    if src.exact:
        merged: dict = {}
        for ytype in ytypes:
            d = conditional_class_dict(src, ytype.counts, max_types=budget)
            for like, cnt in d.items():
                merged[like] = merged.get(like, Fraction(0)) + ytype.probability * like * cnt
        atoms = [(-_log2(like), mass) for like, mass in merged.items()]
        return ValueSpectrum.from_atoms(atoms, exact=True, keys=list(merged.keys()))
    merged_f: dict = {}
    for ytype in ytypes:
        d = conditional_class_dict(src, ytype.counts, max_types=budget)
        for l2, cnt in d.items():
            merged_f[l2] = merged_f.get(l2, 0.0) + float(ytype.probability) * 2.0 ** l2 * cnt
    atoms = [(-l2, mass) for l2, mass in merged_f.items()]
    return ValueSpectrum.from_atoms(atoms, exact=False)
