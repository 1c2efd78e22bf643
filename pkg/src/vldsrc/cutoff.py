"""The eps-cutoff transformation of a nonnegative discrete spectrum.

Given a nonnegative random variable Z with atoms (v_k, m_k) and a target
error probability eps, the cutoff keeps Z below a threshold eta, keeps a
(1 - beta) share of the mass sitting exactly at eta, and zeroes everything
above, where

    P{Z > eta} + beta * P{Z = eta} = eps,   0 <= beta < 1,

with eta the smallest atom value whose strict tail is <= eps (that
minimality forces beta < 1).  The retained expectation

    E = sum_{v < eta} v m(v) + (1 - beta) eta m(eta)

is what optimal variable-length codeword lengths and cutoff entropies are
made of.  Three independent evaluation routes live here:

* :func:`expected_cutoff` — the threshold formula above;
* :func:`min_kept_oracle` — direct greedy minimization of the retained
  expectation over fractional drop maps with drop budget eps
  (fractional-knapsack from the largest value down);
* :func:`integral_form_expected_cutoff` — the tail-integral identity
  (1-eps) E[Z] - integral_eta^inf P{Z > t} dt - eps (eta - E[Z]).

All three must agree to 1e-12 on any valid spectrum; the test suite and the
acceptance gate enforce exactly that.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import backend
from .errors import ValidationError
from .sources import JointSource, _log2, coerce_eps

_FLOAT_ATOM_TOL = 1e-12


def _is_exact_number(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


@dataclass(frozen=True)
class ValueSpectrum:
    """Sorted atoms (values ascending) of a nonnegative discrete law.

    ``exact`` means masses are Fractions and mass arithmetic is exact.  In
    exact mode atoms are grouped by ``keys`` (an exact per-atom likelihood
    key) when present, otherwise by exact value equality; in float mode atoms
    within 1e-12 of each other are merged.  With keys present, two distinct
    keys may in principle round to the same float value, so strict value
    increase is only guaranteed key-wise.
    """

    values: tuple
    masses: tuple
    exact: bool
    keys: tuple | None = None

    @classmethod
    def from_atoms(cls, atoms, exact: bool, keys=None) -> "ValueSpectrum":
        """Build from (value, mass) pairs; groups, sorts and validates.

        ``keys``, when given, must align with ``atoms`` and provides the
        exact grouping identity for exact-mode spectra.
        """
        atoms = list(atoms)
        if keys is not None:
            keys = list(keys)
            if len(keys) != len(atoms):
                raise ValidationError("keys and atoms length mismatch")
        if exact:
            grouped: dict = {}
            for idx, (v, m) in enumerate(atoms):
                if m <= 0:
                    if m < 0:
                        raise ValidationError(f"negative mass {m}")
                    continue
                k = keys[idx] if keys is not None else v
                if k in grouped:
                    gv, gm = grouped[k]
                    grouped[k] = (gv, gm + m)
                else:
                    grouped[k] = (v, m)
            items = sorted(grouped.items(), key=lambda kv: kv[1][0])
            vals = tuple(v for _, (v, _) in items)
            mass = tuple(m for _, (_, m) in items)
            out_keys = tuple(k for k, _ in items) if keys is not None else None
            total = sum(mass)
            if total != 1:
                raise ValidationError(f"spectrum mass sums to {total}, not 1")
            if out_keys is None:
                for a, b in zip(vals, vals[1:]):
                    if not a < b:
                        raise ValidationError("values not strictly increasing")
        else:
            if atoms:
                v_arr, m_arr = zip(*atoms)
            else:
                v_arr, m_arr = (), ()
            mv, mm = backend.merge_float_atoms(
                np.asarray(v_arr, dtype=np.float64),
                np.asarray(m_arr, dtype=np.float64),
                _FLOAT_ATOM_TOL,
            )
            if abs(float(np.sum(mm)) - 1.0) > 1e-10:
                raise ValidationError(f"spectrum mass sums to {float(np.sum(mm))!r}, not 1")
            vals = tuple(float(x) for x in mv)
            mass = tuple(float(x) for x in mm)
            out_keys = None
        if vals and vals[0] < 0:
            raise ValidationError("spectrum has negative values; cutoffs need Z >= 0")
        if not vals:
            raise ValidationError("empty spectrum")
        return cls(values=vals, masses=mass, exact=exact, keys=out_keys)

    def __len__(self) -> int:
        return len(self.values)

    @cached_property
    def tails(self) -> tuple:
        """Strict suffix tails: tails[i] = P{Z > values[i]} (tails[-1] = 0)."""
        acc = Fraction(0) if self.exact else 0.0
        out = []
        for m in reversed(self.masses):
            out.append(acc)
            acc = acc + m
        return tuple(reversed(out))

    def mean(self):
        return sum(v * m for v, m in zip(self.values, self.masses))

    def atoms(self):
        return tuple(zip(self.values, self.masses))


@dataclass(frozen=True)
class CutoffSpec:
    """Solution (eta, beta) of the cutoff equation at a given eps."""

    eta: object
    beta: object
    eps: object
    index: int


def _native_eps(spec: ValueSpectrum, eps):
    return coerce_eps(eps, exact=spec.exact)


def cutoff_spec(spec: ValueSpectrum, eps) -> CutoffSpec:
    """Solve for (eta, beta); defined for 0 <= eps < 1 only.

    eps = 1 has no solution with beta < 1 (a full point mass cannot be
    absorbed by the boundary share); callers special-case it to 0.
    """
    e = _native_eps(spec, eps)
    if not 0 <= e < 1:
        raise ValidationError(f"eps must lie in [0, 1), got {eps!r}", "eps")
    tails = spec.tails
    # smallest index whose strict tail is <= eps; exists since tails end at 0
    idx = bisect.bisect_left([-t for t in tails], -e)
    if idx >= len(tails):  # pragma: no cover - defensive; tails[-1] == 0
        idx = len(tails) - 1
    beta = (e - tails[idx]) / spec.masses[idx]
    return CutoffSpec(eta=spec.values[idx], beta=beta, eps=e, index=idx)


def _zero_like(spec: ValueSpectrum):
    if spec.exact and all(_is_exact_number(v) for v in spec.values):
        return Fraction(0)
    return 0.0


def expected_cutoff(spec: ValueSpectrum, eps):
    """Retained expectation of the cutoff; exact when values and masses are.

    Integer-valued exact spectra (floor-log rank laws) yield a Fraction;
    float-valued spectra (information densities) yield a float.
    """
    e = _native_eps(spec, eps)
    if e == 1:
        return _zero_like(spec)
    cs = cutoff_spec(spec, e)
    i = cs.index
    kept = sum(
        (v * m for v, m in zip(spec.values[:i], spec.masses[:i])),
        start=_zero_like(spec),
    )
    return kept + (1 - cs.beta) * spec.values[i] * spec.masses[i]


def expected_cutoff_grid(spec: ValueSpectrum, eps_grid):
    """Vectorized expected_cutoff over many eps values.

    Float spectra go through the kernel backend; exact spectra walk the
    cached tails per eps (still cheap: one bisect each).
    """
    if not spec.exact:
        out = backend.batch_expected_cutoff(
            np.asarray(spec.values, dtype=np.float64),
            np.asarray(spec.masses, dtype=np.float64),
            np.asarray([float(e) for e in eps_grid], dtype=np.float64),
        )
        return [float(x) for x in out]
    return [expected_cutoff(spec, e) for e in eps_grid]


def min_kept_oracle(spec: ValueSpectrum, eps):
    """Independent minimizer of the retained expectation.

    Minimizes E[(1 - d(Z)) Z] over drop maps d : support -> [0, 1] with
    E[d(Z)] <= eps.  Since Z >= 0, the optimum spends the whole drop budget
    on the largest values first (fractional knapsack); no threshold search
    involved, which is what makes this an oracle for :func:`expected_cutoff`.
    """
    e = _native_eps(spec, eps)
    if not 0 <= e <= 1:
        raise ValidationError(f"eps must lie in [0, 1], got {eps!r}", "eps")
    budget = e
    total = _zero_like(spec)
    for v, m in zip(reversed(spec.values), reversed(spec.masses)):
        if budget > 0:
            dropped = m if m < budget else budget
            budget = budget - dropped
            total = total + v * (m - dropped)
        else:
            total = total + v * m
    return total


def integral_form_expected_cutoff(spec: ValueSpectrum, eps):
    """Tail-integral identity for the retained expectation.

    (1 - eps) E[Z] - integral_eta^infinity P{Z > t} dt - eps (eta - E[Z]),
    with the integral of the piecewise-constant tail evaluated in closed
    form.  Must equal expected_cutoff to 1e-12.
    """
    e = _native_eps(spec, eps)
    if e == 1:
        return _zero_like(spec)
    cs = cutoff_spec(spec, e)
    i = cs.index
    mean = spec.mean()
    tail_integral = _zero_like(spec)
    for k in range(i, len(spec) - 1):
        tail_integral = tail_integral + spec.tails[k] * (spec.values[k + 1] - spec.values[k])
    return (1 - e) * mean - tail_integral - e * (spec.values[i] - mean)


# ---------------------------------------------------------------------------
# information-density spectra and the cutoff entropies


def row_iota_spectrum(src: JointSource, j: int) -> ValueSpectrum:
    """Law of the information density -log2 P(X|y) for the j-th y symbol."""
    cond = src.conditional_masses(j)
    atoms = []
    keys = []
    for w in cond:
        if w <= 0:
            continue
        atoms.append((-_log2(w), w))
        keys.append(w)
    return ValueSpectrum.from_atoms(atoms, exact=src.exact, keys=keys if src.exact else None)


def mixture_iota_spectrum(src: JointSource) -> ValueSpectrum:
    """Unconditional law of -log2 P(X|Y): the P_Y-mixture of the row laws."""
    atoms = []
    keys = []
    for j in range(len(src.y_alphabet)):
        py = src.y_marginal[j]
        for w in src.conditional_masses(j):
            if w <= 0:
                continue
            atoms.append((-_log2(w), py * w))
            keys.append(w)
    return ValueSpectrum.from_atoms(atoms, exact=src.exact, keys=keys if src.exact else None)


def cond_cutoff_entropy(src: JointSource, eps, n: int = 1, max_types=None) -> float:
    """Average over side information of per-row cutoff expectations (bits).

    At eps = 0 this is the conditional entropy of the blocklength-n source;
    at eps = 1 it is 0.
    """
    e = coerce_eps(eps, exact=src.exact)
    if e == 1:
        return 0.0
    if n == 1:
        return float(
            sum(
                float(src.y_marginal[j])
                * expected_cutoff(row_iota_spectrum(src, j), e)
                for j in range(len(src.y_alphabet))
            )
        )
    from .lift import iota_spectrum_n, y_marginal_types

    total = 0.0
    for ytype in y_marginal_types(src, n, max_types=max_types):
        spec = iota_spectrum_n(src, n, y_counts=ytype.counts, max_types=max_types)
        total += float(ytype.probability) * float(expected_cutoff(spec, e))
    return total


def uncond_cutoff_entropy(src: JointSource, eps, n: int = 1, max_types=None) -> float:
    """Cutoff expectation of the unconditional density spectrum (bits)."""
    e = coerce_eps(eps, exact=src.exact)
    if e == 1:
        return 0.0
    if n == 1:
        spec = mixture_iota_spectrum(src)
    else:
        from .lift import iota_spectrum_n

        spec = iota_spectrum_n(src, n, max_types=max_types)
    return float(expected_cutoff(spec, e))
