"""Sequential guessing with a giving-up policy.

The guesser probes symbols in decreasing conditional probability; before
guess k it aborts with probability pi(k|y), and an abort (or exhausting the
support) costs c_e instead of the guess count.  The optimal policy mirrors
the optimal code: never give up through rank kappa, give up at the boundary
rank with the probability that spends the error budget exactly, always give
up beyond.  Unlike coding, an abort can never be accidentally correct, so
the achieved error equals eps in every case, including kappa = 0.

The cost c_e must not be an integer — log2(G) on failure must be
distinguishable from log2 of a genuine guess count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .coding import build_code, lstar, validate_criterion
from .errors import BudgetExceededError, ValidationError
from .lift import rank_spectrum, y_marginal_types
from .montecarlo import run_chunked
from .sources import JointSource, coerce_eps, product_source

_LN2 = math.log(2.0)
_DIRECT_SUM_LIMIT = 2048
_FLOAT_RANK_LIMIT = 1 << 1000


def validate_cost(c_e):
    if isinstance(c_e, str):
        c_e = Fraction(c_e)
    if isinstance(c_e, bool) or not isinstance(c_e, (int, float, Fraction)):
        raise ValidationError(f"cost must be a number, got {c_e!r}", "c_e")
    value = Fraction(c_e) if not isinstance(c_e, Fraction) else c_e
    if value <= 0:
        raise ValidationError(f"cost must be positive, got {c_e!r}", "c_e")
    if value.denominator == 1:
        raise ValidationError(
            f"integer cost {c_e!r} is ambiguous with a guess count; pick a non-integer", "c_e"
        )
    return c_e


def sum_log2_range(start: int, stop: int) -> float:
    """Sum of log2 r over integer ranks start <= r < stop.

    Small ranges sum directly (math.log2 is exact on big ints); large ranges
    use a cancellation-free Stirling difference
        lnGamma(stop) - lnGamma(start)
          = (s - 1/2) ln(1 + c/s) + c (ln(e') - 1) + [1/(12e') - 1/(12s)]
    written so that no two large near-equal terms are subtracted.
    """
    if stop <= start:
        return 0.0
    count = stop - start
    if count <= _DIRECT_SUM_LIMIT:
        return math.fsum(math.log2(r) for r in range(start, stop))
    if stop > _FLOAT_RANK_LIMIT:
        raise BudgetExceededError("rank magnitudes exceed the float evaluation range")
    s = float(start)
    c = float(count)
    e = float(stop)
    d_ln = (s - 0.5) * math.log1p(c / s) + c * (math.log(e) - 1.0)
    d_ln += 1.0 / (12.0 * e) - 1.0 / (12.0 * s)
    return d_ln / _LN2


@dataclass(frozen=True)
class StrategyRow:
    """Guess order and abort schedule for one side-information value.

    ``pi[k-1]`` is the probability of giving up immediately before guess k;
    beyond the stored schedule the policy always gives up.
    """

    y: object
    perm: tuple
    masses: tuple
    kappa: int
    keep_prob: object
    pi: tuple


@dataclass(frozen=True)
class GivingUpStrategy:
    criterion: str
    eps: object
    error_cost: object
    rows: tuple

    def row_for(self, y) -> StrategyRow:
        for row in self.rows:
            if row.y == y:
                return row
        raise ValidationError(f"side information {y!r} not covered by the strategy")


@dataclass(frozen=True)
class StrategyValue:
    expected_log_guess: float
    error_prob: object


@dataclass(frozen=True)
class BracketReport:
    achieved: float
    lstar: object
    bound: float
    holds: bool


@dataclass(frozen=True)
class GuessSimulationResult:
    mean_log_guess: float
    error_rate: float
    stderr_log_guess: float
    stderr_error: float
    trials: int

    def as_dict(self) -> dict:
        return {
            "mean_log_guess": self.mean_log_guess,
            "error_rate": self.error_rate,
            "stderr_log_guess": self.stderr_log_guess,
            "stderr_error": self.stderr_error,
            "trials": self.trials,
        }


def build_strategy(src: JointSource, eps, criterion: str, c_e) -> GivingUpStrategy:
    """Optimal giving-up policy matching the optimal code's thresholds."""
    validate_criterion(criterion)
    c_e = validate_cost(c_e)
    plan = build_code(src, 1, eps, criterion)
    rows = []
    for plan_row in plan.rows:
        R = len(plan_row.masses)
        one = 1 if src.exact else 1.0
        pi = []
        for k in range(1, R + 1):
            if k <= plan_row.kappa:
                pi.append(one * 0)
            elif k == plan_row.kappa + 1:
                pi.append(one - plan_row.keep_prob)
            else:
                pi.append(one)
        rows.append(
            StrategyRow(
                y=plan_row.y,
                perm=plan_row.perm,
                masses=plan_row.masses,
                kappa=plan_row.kappa,
                keep_prob=plan_row.keep_prob,
                pi=tuple(pi),
            )
        )
    return GivingUpStrategy(
        criterion=criterion, eps=plan.eps, error_cost=c_e, rows=tuple(rows)
    )


def _evaluate_single_letter(strategy: GivingUpStrategy, src: JointSource) -> StrategyValue:
    log_cost = math.log2(float(strategy.error_cost))
    zero = Fraction(0) if src.exact else 0.0
    expected = 0.0
    err_total = zero
    for srow in strategy.rows:
        if srow.y not in src.y_index:
            raise ValidationError(f"side information {srow.y!r} not in the source")
        j = src.y_index[srow.y]
        py = src.y_marginal[j]
        cond = src.conditional_masses(j)
        support = {src.x_alphabet[i] for i, m in enumerate(cond) if m > 0}
        if not support <= set(srow.perm):
            raise ValidationError(
                f"strategy guess order for y={srow.y!r} misses source symbols"
            )
        survive = 1 if src.exact else 1.0
        for k, x in enumerate(srow.perm, start=1):
            survive = survive * (1 - srow.pi[k - 1])
            m = cond[src.x_index[x]] if x in src.x_index else zero
            if m <= 0:
                continue
            expected += float(py * m * survive) * math.log2(k)
            err_total = err_total + py * m * (1 - survive)
    expected += float(err_total) * log_cost
    return StrategyValue(expected_log_guess=expected, error_prob=err_total)


def _expected_log_kept(spec, eps):
    """Kept-rank contribution sum m(r) log2 r plus boundary share, and the
    boundary data, for a rank spectrum under budget 1 - eps."""
    exact = spec.exact
    budget = (1 - eps) if exact else (1.0 - eps)
    cum = Fraction(0) if exact else 0.0
    out = 0.0
    rank = 1
    for cls in spec.classes:
        like = cls.likelihood if exact else 2.0 ** cls.log2_likelihood
        cnt = cls.count
        mass = like * cnt
        if cum + mass <= budget:
            out += float(like) * sum_log2_range(rank, rank + cnt)
            cum = cum + mass
            rank += cnt
            continue
        remaining = budget - cum
        full = int(remaining / like)
        if full:
            out += float(like) * sum_log2_range(rank, rank + full)
        gamma = remaining - like * full
        if gamma > 0:
            out += float(gamma) * math.log2(rank + full)
        return out
    return out


def evaluate_strategy(
    strategy: GivingUpStrategy, src: JointSource, n: int = 1, max_types: int | None = None
) -> StrategyValue:
    """Exact expected log2 guess count and failure probability at blocklength n.

    n = 1 evaluates the stored abort schedule literally.  For n > 1 the
    strategy's design parameters (eps, criterion) define the policy at every
    blocklength; thresholds are recomputed on the blocklength-n rank classes
    and the expectation evaluated in closed form over rank ranges.
    """
    if n < 1:
        raise ValidationError(f"blocklength must be >= 1, got {n}", "n")
    if n == 1:
        return _evaluate_single_letter(strategy, src)
    eps = coerce_eps(strategy.eps, exact=src.exact)
    log_cost = math.log2(float(strategy.error_cost))
    expected = 0.0
    if strategy.criterion == "max":
        for ytype in y_marginal_types(src, n, max_types):
            spec = rank_spectrum(src, n, ytype.counts, max_types)
            expected += float(ytype.probability) * _expected_log_kept(spec, eps)
    else:
        pooled = _pooled_rank_classes(src, n, max_types)
        expected = _expected_log_kept(pooled, eps)
    expected += float(eps) * log_cost
    return StrategyValue(expected_log_guess=expected, error_prob=eps)


@dataclass(frozen=True)
class _PooledClass:
    likelihood: object
    log2_likelihood: float
    count: object


@dataclass(frozen=True)
class _PooledSpectrum:
    classes: tuple
    exact: bool


def _pooled_rank_classes(src: JointSource, n: int, max_types: int | None = None) -> _PooledSpectrum:
    """Average-criterion pooled rank-mass runs at blocklength n.

    Per y-type, the rank-r mass is the class likelihood; pooling weights it
    by the y-type probability.  Runs of consecutive ranks with identical
    pooled mass are merged per y-type, then aligned by splitting at run
    boundaries across y-types.
    """
    runs = []  # per y-type: list of (pooled_mass_per_rank, count)
    for ytype in y_marginal_types(src, n, max_types):
        spec = rank_spectrum(src, n, ytype.counts, max_types)
        p = ytype.probability
        if src.exact:
            runs.append([(p * c.likelihood, c.count) for c in spec.classes])
        else:
            runs.append([(p * 2.0 ** c.log2_likelihood, c.count) for c in spec.classes])
    # walk all per-type run lists in parallel, splitting at every boundary
    pooled = []
    cursors = [0] * len(runs)
    offsets = [0] * len(runs)  # ranks consumed inside the current run
    zero = Fraction(0) if src.exact else 0.0
    while True:
        active = [i for i in range(len(runs)) if cursors[i] < len(runs[i])]
        if not active:
            break
        step = min(runs[i][cursors[i]][1] - offsets[i] for i in active)
        mass = zero
        for i in active:
            mass = mass + runs[i][cursors[i]][0]
        pooled.append((mass, step))
        for i in active:
            offsets[i] += step
            if offsets[i] == runs[i][cursors[i]][1]:
                cursors[i] += 1
                offsets[i] = 0
    classes = tuple(
        _PooledClass(
            likelihood=mass if src.exact else None,
            log2_likelihood=math.log2(float(mass)) if mass > 0 else -math.inf,
            count=cnt,
        )
        for mass, cnt in pooled
    )
    return _PooledSpectrum(classes=classes, exact=src.exact)


def bracket_check(src: JointSource, n: int, eps, criterion: str, c_e) -> BracketReport:
    """Coding-versus-guessing sandwich: the achieved expected log guess count
    lies within [L* - |log2 c_e|, L* + 1 + |log2 c_e|]."""
    c_e = validate_cost(c_e)
    strategy = build_strategy(src, eps, criterion, c_e)
    value = evaluate_strategy(strategy, src, n)
    exact = lstar(src, n, eps, criterion)
    slack = abs(math.log2(float(c_e)))
    tol = 1e-9
    lo = float(exact) - slack - tol
    hi = float(exact) + 1.0 + slack + tol
    holds = lo <= value.expected_log_guess <= hi
    return BracketReport(
        achieved=value.expected_log_guess, lstar=exact, bound=1.0 + slack, holds=holds
    )


def _guess_tables(strategy: GivingUpStrategy, src: JointSource):
    probs = []
    survive_p = []
    log_rank = []
    for srow in strategy.rows:
        j = src.y_index[srow.y]
        py = src.y_marginal[j]
        cond = src.conditional_masses(j)
        survive = 1.0
        for k, x in enumerate(srow.perm, start=1):
            survive *= 1.0 - float(srow.pi[k - 1])
            m = cond[src.x_index[x]]
            if m <= 0:
                continue
            probs.append(float(py * m))
            survive_p.append(survive)
            log_rank.append(math.log2(k))
    cum = np.cumsum(np.asarray(probs, dtype=np.float64))
    cum[-1] = 1.0
    return (
        cum,
        np.asarray(survive_p, dtype=np.float64),
        np.asarray(log_rank, dtype=np.float64),
    )


def simulate_guessing(
    strategy: GivingUpStrategy, src: JointSource, n: int, trials: int, seed: int, workers: int = 1
) -> GuessSimulationResult:
    """Monte Carlo run of the guessing loop; deterministic given the seed.

    Only the boundary abort gate is genuinely random (earlier gates never
    fire, later gates always do), so one uniform per trial decides survival
    — distributionally identical to drawing every gate in sequence.
    """
    if n > 1:
        lifted = product_source(src, n)
        strategy = build_strategy(lifted, strategy.eps, strategy.criterion, strategy.error_cost)
        src = lifted
    cum, survive_p, log_rank = _guess_tables(strategy, src)
    log_cost = math.log2(float(strategy.error_cost))

    def worker(rng, size):
        u = rng.random((2, size))
        idx = np.searchsorted(cum, u[0], side="right")
        ok = u[1] < survive_p[idx]
        values = np.where(ok, log_rank[idx], log_cost)
        return (
            float(np.sum(values)),
            float(np.sum(values * values)),
            float(size - np.sum(ok)),
        )

    partials = run_chunked(worker, trials, seed, workers=workers)
    total_v = sum(p[0] for p in partials)
    total_v2 = sum(p[1] for p in partials)
    total_err = sum(p[2] for p in partials)
    mean = total_v / trials
    var = max(total_v2 / trials - mean * mean, 0.0)
    p_err = total_err / trials
    return GuessSimulationResult(
        mean_log_guess=mean,
        error_rate=p_err,
        stderr_log_guess=math.sqrt(var / trials),
        stderr_error=math.sqrt(max(p_err * (1.0 - p_err), 0.0) / trials),
        trials=trials,
    )
