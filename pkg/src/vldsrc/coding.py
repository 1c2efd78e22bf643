"""Optimal variable-length coding with side information.

Codewords come from the full set of finite binary strings including the
empty one, enumerated lexicographically by length: b_1 = "", b_2 = "0",
b_3 = "1", b_4 = "00", ...; so b_i has length floor(log2 i) and the decoder
is just the inverse enumeration.  Without a prefix-free constraint the best
deterministic map sends the k-th most likely symbol (given y) to b_k, and
the optimal code at error budget eps keeps the top kappa ranks, keeps rank
kappa + 1 with just enough probability to spend the whole budget, and sends
everything else to the empty string.

``lstar`` never searches over codes: the exact optimum is the retained
expectation of the floor-log-rank law under the eps-cutoff (per side
information for the maximum criterion, pooled for the average criterion).
``build_code`` constructs the matching executable plan, whose analytic
length must coincide with ``lstar`` — a tested invariant, not an assumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .cutoff import (
    cond_cutoff_entropy,
    expected_cutoff_grid,
    uncond_cutoff_entropy,
)
from .errors import InvariantError, ValidationError
from .lift import floor_log_rank_spectrum, pooled_floor_log_rank_spectrum, y_marginal_types
from .montecarlo import SimulationResult, run_chunked, summarize_value_and_error
from .sources import JointSource, coerce_eps, measures, product_source, sorted_rows

CRITERIA = ("max", "avg")


def validate_criterion(criterion: str) -> str:
    if criterion not in CRITERIA:
        raise ValidationError(f"criterion must be 'max' or 'avg', got {criterion!r}", "criterion")
    return criterion


@dataclass(frozen=True)
class BinaryString:
    """The i-th binary string in the by-length lexicographic enumeration."""

    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValidationError(f"string index must be >= 1, got {self.index}")

    @property
    def length(self) -> int:
        return self.index.bit_length() - 1

    @property
    def bits(self) -> str:
        j = self.length
        if j == 0:
            return ""
        return format(self.index - (1 << j), f"0{j}b")

    @classmethod
    def from_bits(cls, bits: str) -> "BinaryString":
        if bits and set(bits) - {"0", "1"}:
            raise ValidationError(f"not a binary string: {bits!r}")
        if not bits:
            return cls(1)
        return cls((1 << len(bits)) + int(bits, 2))

    def __str__(self) -> str:
        return self.bits


def string_length(rank: int) -> int:
    """Codeword length of b_rank: floor(log2 rank), exact for big ints."""
    return rank.bit_length() - 1


# ---------------------------------------------------------------------------
# exact optimal lengths


def lstar_profile(src: JointSource, n: int, eps_list, criterion: str, max_types=None) -> list:
    """Exact optimal expected codeword length at several eps values.

    The spectra are built once and swept over the grid, which is what makes
    dense eps sweeps cheap.  Rational-mode results are exact Fractions.
    """
    validate_criterion(criterion)
    eps_native = [coerce_eps(e, exact=src.exact) for e in eps_list]
    if criterion == "avg":
        spec = pooled_floor_log_rank_spectrum(src, n, max_types=max_types)
        return expected_cutoff_grid(spec, eps_native)
    zero = Fraction(0) if src.exact else 0.0
    totals = [zero] * len(eps_native)
    for ytype in y_marginal_types(src, n, max_types=max_types):
        spec = floor_log_rank_spectrum(src, n, ytype.counts, max_types=max_types)
        for k, val in enumerate(expected_cutoff_grid(spec, eps_native)):
            totals[k] = totals[k] + ytype.probability * val
    return totals


def lstar(src: JointSource, n: int, eps, criterion: str, max_types=None):
    """Optimal expected length (bits); Fraction in rational mode."""
    return lstar_profile(src, n, [eps], criterion, max_types=max_types)[0]


@dataclass(frozen=True)
class OneShotBounds:
    lower: float
    exact: object
    upper: float

    def holds(self, slack: float = 1e-9) -> bool:
        return self.lower <= float(self.exact) + slack and float(self.exact) <= self.upper + slack


def one_shot_bounds(src: JointSource, n: int, eps, criterion: str, max_types=None) -> OneShotBounds:
    """Sandwich the exact optimum between cutoff-entropy bounds.

    upper: the matching eps-cutoff entropy of the blocklength-n source;
    lower: upper - log2(n H(X|Y) + 1) - log2 e.
    """
    validate_criterion(criterion)
    if criterion == "max":
        upper = cond_cutoff_entropy(src, eps, n=n, max_types=max_types)
    else:
        upper = uncond_cutoff_entropy(src, eps, n=n, max_types=max_types)
    H = measures(src).H
    lower = upper - math.log2(n * H + 1.0) - math.log2(math.e)
    exact = lstar(src, n, eps, criterion, max_types=max_types)
    return OneShotBounds(lower=lower, exact=exact, upper=upper)


# ---------------------------------------------------------------------------
# executable code plans


@dataclass(frozen=True)
class PlanRow:
    """Per-side-information slice of a code plan.

    ``perm[k]`` is the x symbol at rank k+1; ``masses`` are the conditional
    masses in rank order; ranks 1..kappa map to b_1..b_kappa, rank kappa+1
    (when the row is long enough) maps to b_{kappa+1} with probability
    ``keep_prob`` and to the empty string otherwise; all later ranks go to
    the empty string outright.
    """

    y: object
    perm: tuple
    masses: tuple
    kappa: int
    keep_prob: object

    @property
    def boundary_rank(self):
        return self.kappa + 1 if len(self.masses) > self.kappa else None

    def expected_length(self):
        out = sum(
            (m * string_length(r + 1) for r, m in enumerate(self.masses[: self.kappa])),
            start=self.masses[0] * 0,
        )
        b = self.boundary_rank
        if b is not None:
            out = out + self.keep_prob * self.masses[b - 1] * string_length(b)
        return out

    def error_probability(self):
        """True per-row error; dropping rank 1 is harmless (empty string
        still decodes to rank 1), which is why kappa = 0 rows undershoot
        the design eps."""
        zero = self.masses[0] * 0
        b = self.boundary_rank
        if b is None:
            return zero
        beyond = sum(self.masses[b:], start=zero)
        if b == 1:
            return beyond
        return beyond + (1 - self.keep_prob) * self.masses[b - 1]


@dataclass(frozen=True)
class CodePlan:
    criterion: str
    eps: object
    n: int
    source: JointSource  # blocklength-n source the rows index into
    rows: tuple

    @cached_property
    def rank_of(self) -> dict:
        return {
            row.y: {x: r + 1 for r, x in enumerate(row.perm)} for row in self.rows
        }

    @cached_property
    def row_by_y(self) -> dict:
        return {row.y: row for row in self.rows}

    @cached_property
    def analytic_length(self):
        return sum(
            py * row.expected_length()
            for py, row in zip(self.source.y_marginal, self.rows)
        )

    @cached_property
    def per_y_error(self) -> dict:
        return {row.y: row.error_probability() for row in self.rows}

    @cached_property
    def analytic_error(self):
        errs = self.per_y_error
        if self.criterion == "max":
            return max(errs.values())
        return sum(py * errs[row.y] for py, row in zip(self.source.y_marginal, self.rows))


def _keep_threshold(masses, eps):
    """kappa = max{k : top-k mass <= 1 - eps}, and the leftover gamma."""
    budget = 1 - eps
    cum = masses[0] * 0
    kappa = 0
    for m in masses:
        if cum + m <= budget:
            cum = cum + m
            kappa += 1
        else:
            break
    return kappa, budget - cum


def build_code(src: JointSource, n: int, eps, criterion: str, max_cells=None) -> CodePlan:
    """Construct the optimal stochastic code plan at blocklength n.

    eps = 1 is rejected: the boundary share cannot absorb a full point mass,
    so the all-empty code is out of the design range.
    """
    validate_criterion(criterion)
    e = coerce_eps(eps, exact=src.exact)
    if e == 1:
        raise ValidationError("eps = 1 is outside the design range of code plans", "eps")
    if n > 1:
        kwargs = {"max_cells": max_cells} if max_cells is not None else {}
        src_n = product_source(src, n, **kwargs)
    else:
        src_n = src
    rows = sorted_rows(src_n)
    plan_rows = []
    if criterion == "max":
        for row in rows:
            kappa, gamma = _keep_threshold(row.probs_sorted, e)
            if kappa < len(row.probs_sorted):
                keep = gamma / row.probs_sorted[kappa]
            else:
                if gamma != 0:
                    raise InvariantError("full row kept but budget unspent")
                keep = gamma * 0
            plan_rows.append(
                PlanRow(
                    y=row.y,
                    perm=row.perm,
                    masses=row.probs_sorted,
                    kappa=kappa,
                    keep_prob=keep,
                )
            )
    else:
        y_marg = src_n.y_marginal
        max_rank = max(len(r.probs_sorted) for r in rows)
        zero = Fraction(0) if src_n.exact else 0.0
        pooled = []
        for r in range(max_rank):
            pooled.append(
                sum(
                    (py * row.probs_sorted[r] for py, row in zip(y_marg, rows)
                     if len(row.probs_sorted) > r),
                    start=zero,
                )
            )
        kappa, gamma = _keep_threshold(tuple(pooled), e)
        if kappa < max_rank:
            keep = gamma / pooled[kappa]
        else:
            if gamma != 0:
                raise InvariantError("full pooled law kept but budget unspent")
            keep = zero
        for row in rows:
            plan_rows.append(
                PlanRow(
                    y=row.y,
                    perm=row.perm,
                    masses=row.probs_sorted,
                    kappa=kappa,
                    keep_prob=keep,
                )
            )
    return CodePlan(criterion=criterion, eps=e, n=n, source=src_n, rows=tuple(plan_rows))


def encode_decode(plan: CodePlan, x, y, randomness: float):
    """One encode/decode pass; ``randomness`` drives the boundary keep draw.

    Returns (codeword, decoded_symbol); the outcome is an error exactly when
    the decoded symbol differs from x.
    """
    row = plan.row_by_y.get(y)
    if row is None:
        raise ValidationError(f"side information {y!r} not in the plan")
    rank = plan.rank_of[y].get(x)
    if rank is None:
        raise ValidationError(f"symbol {x!r} has zero mass given y={y!r}")
    if rank <= row.kappa:
        word = BinaryString(rank)
    elif rank == row.kappa + 1 and randomness < float(row.keep_prob):
        word = BinaryString(rank)
    else:
        word = BinaryString(1)
    decoded = row.perm[word.index - 1]
    return word, decoded


def _simulation_tables(plan: CodePlan):
    probs = []
    keep_p = []
    len_kept = []
    correct_dropped = []
    src = plan.source
    for py, row in zip(src.y_marginal, plan.rows):
        for r, m in enumerate(row.masses, start=1):
            probs.append(float(py * m))
            if r <= row.kappa:
                keep_p.append(1.0)
            elif r == row.kappa + 1:
                keep_p.append(float(row.keep_prob))
            else:
                keep_p.append(0.0)
            len_kept.append(float(string_length(r)))
            correct_dropped.append(1.0 if r == 1 else 0.0)
    cum = np.cumsum(np.asarray(probs, dtype=np.float64))
    cum[-1] = 1.0
    return (
        cum,
        np.asarray(keep_p, dtype=np.float64),
        np.asarray(len_kept, dtype=np.float64),
        np.asarray(correct_dropped, dtype=np.float64),
    )


def simulate_code(plan: CodePlan, trials: int, seed: int, workers: int = 1) -> SimulationResult:
    """Monte Carlo check of a plan; deterministic given (seed, trials)."""
    cum, keep_p, len_kept, correct_dropped = _simulation_tables(plan)

    def worker(rng, size):
        u = rng.random((2, size))
        idx = np.searchsorted(cum, u[0], side="right")
        kept = u[1] < keep_p[idx]
        lengths = np.where(kept, len_kept[idx], 0.0)
        correct = np.where(kept, 1.0, correct_dropped[idx])
        return (
            float(np.sum(lengths)),
            float(np.sum(lengths * lengths)),
            float(size - np.sum(correct)),
        )

    partials = run_chunked(worker, trials, seed, workers=workers)
    return summarize_value_and_error(partials, trials)


# ---------------------------------------------------------------------------
# the documented flawed pruning procedure, replayed step by step


@dataclass(frozen=True)
class TraceStep:
    label: str
    mean_length: Fraction
    error_rate: Fraction


@dataclass(frozen=True)
class FlawedTrace:
    eps: Fraction
    steps: tuple
    exceeds_eps: bool
    optimal_mean_length: Fraction


_TRACE_PMF = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6))


def _trace_stats(pmf, encoder, decoder):
    mean = Fraction(0)
    err = Fraction(0)
    for sym, mix in encoder.items():
        for word_index, p in mix.items():
            if p == 0:
                continue
            mean += pmf[sym] * p * string_length(word_index)
            if decoder.get(word_index) != sym:
                err += pmf[sym] * p
    return mean, err


def flawed_procedure_trace(src, eps) -> FlawedTrace:
    """Replay the documented four-step pruning heuristic on its counterexample.

    The heuristic starts from a randomized code, prunes mass on mismatched
    codewords to the empty string, swaps symbols so that b_i decodes to the
    i-th most likely symbol, and finally maps every symbol past the budget
    threshold M to the empty string.  The trace exposes the flaw: the final
    step spends error mass twice, ending above the design eps even though
    each intermediate step looked safe.  Defined only for the documented
    three-symbol instance at eps = 1/6 — the steps below replay its exact
    published intermediate code states.
    """
    if isinstance(src, JointSource):
        if len(src.y_alphabet) != 1 or not src.exact:
            raise ValidationError("the replay needs the rational three-symbol instance")
        marginal = tuple(sorted((row[0] for row in src.pmf), reverse=True))
    else:
        marginal = tuple(sorted((Fraction(p) for p in src), reverse=True))
    e = coerce_eps(eps, exact=True)
    if marginal != _TRACE_PMF or e != Fraction(1, 6):
        raise ValidationError(
            "the replay is defined for masses (1/2, 1/3, 1/6) at eps = 1/6 only"
        )
    pmf = dict(enumerate(_TRACE_PMF, start=1))  # symbol k = k-th most likely
    # initial randomized code: symbol 1 -> b_2 w.p. 5/6, b_3 w.p. 1/6;
    # symbol 2 -> empty; symbol 3 -> b_2 or b_3 evenly. Decoder: b_1 -> 2,
    # b_2 -> 1, b_3 -> 3.
    encoder = {
        1: {2: Fraction(5, 6), 3: Fraction(1, 6)},
        2: {1: Fraction(1)},
        3: {2: Fraction(1, 2), 3: Fraction(1, 2)},
    }
    decoder = {1: 2, 2: 1, 3: 3}
    steps = [TraceStep("initial", *_trace_stats(pmf, encoder, decoder))]

    # step 1: mass on any codeword that decodes to a different symbol moves
    # to the empty string
    for sym, mix in encoder.items():
        moved = Fraction(0)
        for w in list(mix):
            if w != 1 and decoder.get(w) != sym:
                moved += mix.pop(w)
        if moved:
            mix[1] = mix.get(1, Fraction(0)) + moved
    steps.append(TraceStep("prune-mismatched", *_trace_stats(pmf, encoder, decoder)))

    # step 2: for i = 1..M make b_i decode to symbol i by swapping symbol
    # roles (M = largest k whose strict tail mass still meets eps)
    tail = Fraction(0)
    M = len(pmf)
    for k in range(len(pmf), 0, -1):
        tail += pmf[k]
        if tail >= e:
            M = k - 1
            break
    for i in range(1, M + 1):
        m0 = decoder.get(i)
        if m0 == i or m0 is None:
            continue
        encoder[m0], encoder[i] = encoder[i], encoder[m0]
        for w, sym in decoder.items():
            if sym == i:
                decoder[w] = m0
            elif sym == m0:
                decoder[w] = i
    steps.append(TraceStep("interchange", *_trace_stats(pmf, encoder, decoder)))

    # step 3: every symbol past M goes to the empty string outright
    for sym in range(M + 1, len(pmf) + 1):
        encoder[sym] = {1: Fraction(1)}
    steps.append(TraceStep("tail-to-empty", *_trace_stats(pmf, encoder, decoder)))

    if isinstance(src, JointSource):
        fixture = src
    else:
        fixture = JointSource.from_pmf(
            ("1", "2", "3"), ("0",), tuple((p,) for p in _TRACE_PMF), "rational"
        )
    optimum = lstar(fixture, 1, e, "avg")
    return FlawedTrace(
        eps=e,
        steps=tuple(steps),
        exceeds_eps=steps[-1].error_rate > e,
        optimal_mean_length=optimum,
    )
