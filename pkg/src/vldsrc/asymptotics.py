"""Gaussian toolkit, second-order length approximations, and residual scans.

The normal quantile uses a rational minimax approximation (Acklam's
coefficients) polished by one Halley step against the erfc-based CDF, which
lands comfortably below the 1e-9 accuracy target everywhere on (0, 1).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .coding import lstar, validate_criterion
from .cutoff import cond_cutoff_entropy, uncond_cutoff_entropy
from .errors import BudgetExceededError, ValidationError
from .lift import y_marginal_types
from .sources import JointSource, coerce_eps, measures

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation coefficients for the normal quantile.
_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_P_LOW = 0.02425


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _ppf_estimate(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    if p > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return -(num / den)
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def norm_ppf(p: float) -> float:
    """Normal quantile on (0, 1); exact 0 at p = 1/2."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValidationError(f"quantile argument must lie in (0, 1), got {p!r}", "p")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        # 1 - p is an exact float subtraction here, and on the lower tail
        # Phi(x) - p avoids the cancellation that erfc near 1 would cause
        return -norm_ppf(1.0 - p)
    x = _ppf_estimate(p)
    # One Halley step: u = (Phi(x) - p)/phi(x); x <- x - u / (1 + x u / 2).
    err = norm_cdf(x) - p
    u = err * _SQRT_2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def f_gaussian(s) -> float:
    """Density of the standard normal evaluated at its own s-quantile.

    Defined as 0 at s in {0, 1}; peaks at 1/sqrt(2 pi) for s = 1/2.
    """
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"argument must lie in [0, 1], got {s!r}", "s")
    if s == 0.0 or s == 1.0:
        return 0.0
    return norm_pdf(norm_ppf(s))


@dataclass(frozen=True)
class SecondOrderEstimate:
    n: int
    eps: float
    criterion: str
    first_order: float
    dispersion_term: float
    approx: float

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "eps": self.eps,
            "criterion": self.criterion,
            "first_order": self.first_order,
            "dispersion_term": self.dispersion_term,
            "approx": self.approx,
        }


def second_order(src: JointSource, n: int, eps, criterion: str) -> SecondOrderEstimate:
    """Two-term length approximation n(1-eps)H - sqrt(nV) f_gaussian(eps).

    The variance is the conditional one under the maximum criterion and the
    unconditional one under the average criterion.  A degenerate conditional
    variance makes the maximum-criterion expansion unreliable, so that case
    warns rather than fails.
    """
    validate_criterion(criterion)
    if n < 1:
        raise ValidationError(f"blocklength must be >= 1, got {n}", "n")
    e = float(coerce_eps(eps, exact=False))
    ms = measures(src)
    if criterion == "max":
        V = ms.V_c
        degenerate = [y for y, (_, v_y, _) in ms.per_y.items() if v_y == 0.0]
        if degenerate or ms.V_c == 0.0:
            warnings.warn(
                "conditional information variance vanishes for some side "
                f"information ({degenerate!r}); the max-criterion two-term "
                "approximation is not supported there",
                RuntimeWarning,
                stacklevel=2,
            )
    else:
        V = ms.V_u
    first = n * (1.0 - e) * ms.H
    disp = math.sqrt(n * V) * f_gaussian(e)
    return SecondOrderEstimate(
        n=n,
        eps=e,
        criterion=criterion,
        first_order=first,
        dispersion_term=disp,
        approx=first - disp,
    )


def exact_dispersion_mean(src: JointSource, n: int, max_types: int | None = None) -> float:
    """E[sqrt(sum_i v(X|Y_i))] over the length-n side-information law.

    The summand depends on Y^n only through its type, so the average runs
    over y-types; it is bounded above by sqrt(n V_c) (Jensen), with equality
    exactly when the per-y variance is constant on the support.
    """
    if n < 1:
        raise ValidationError(f"blocklength must be >= 1, got {n}", "n")
    ms = measures(src)
    v_by_index = [ms.per_y[y][1] for y in src.y_alphabet]
    total = 0.0
    for ytype in y_marginal_types(src, n, max_types):
        inner = sum(c * v for c, v in zip(ytype.counts, v_by_index))
        total += float(ytype.probability) * math.sqrt(inner)
    return total


@dataclass(frozen=True)
class ResidualRow:
    n: int
    eps: float
    criterion: str
    exact: float | None
    first_order: float | None
    dispersion_term: float | None
    approx: float | None
    residual: float | None
    residual_per_log_n: float | None
    residual_per_sqrt_n: float | None
    cutoff_exact: float | None = None
    cutoff_approx: float | None = None
    cutoff_residual: float | None = None
    status: str = "ok"

    def as_csv_dict(self) -> dict:
        return {
            "n": self.n,
            "eps": self.eps,
            "criterion": self.criterion,
            "exact": self.exact,
            "first_order": self.first_order,
            "dispersion_term": self.dispersion_term,
            "approx": self.approx,
            "residual": self.residual,
            "residual_per_log_n": self.residual_per_log_n,
            "residual_per_sqrt_n": self.residual_per_sqrt_n,
        }


@dataclass(frozen=True)
class ResidualReport:
    rows: tuple
    flagged: tuple  # n values whose |residual|/log2 n exceeded the threshold
    flag_threshold: float | None

    def complete(self) -> bool:
        return all(row.status == "ok" for row in self.rows)


def _residual_row(src, e, criterion, n, max_types) -> ResidualRow:
    est = second_order(src, n, e, criterion)
    eps_exact = coerce_eps(e, exact=src.exact)
    try:
        exact = float(lstar(src, n, eps_exact, criterion, max_types=max_types))
        if criterion == "max":
            cutoff_exact = cond_cutoff_entropy(src, eps_exact, n, max_types=max_types)
            cutoff_approx = est.first_order - exact_dispersion_mean(
                src, n, max_types
            ) * f_gaussian(e)
        else:
            cutoff_exact = uncond_cutoff_entropy(src, eps_exact, n, max_types=max_types)
            cutoff_approx = est.approx
    except BudgetExceededError:
        return ResidualRow(
            n=n,
            eps=e,
            criterion=criterion,
            exact=None,
            first_order=est.first_order,
            dispersion_term=est.dispersion_term,
            approx=est.approx,
            residual=None,
            residual_per_log_n=None,
            residual_per_sqrt_n=None,
            status="budget-exceeded",
        )
    residual = exact - est.approx
    log_n = math.log2(n) if n > 1 else 1.0
    return ResidualRow(
        n=n,
        eps=e,
        criterion=criterion,
        exact=exact,
        first_order=est.first_order,
        dispersion_term=est.dispersion_term,
        approx=est.approx,
        residual=residual,
        residual_per_log_n=residual / log_n,
        residual_per_sqrt_n=residual / math.sqrt(n),
        cutoff_exact=cutoff_exact,
        cutoff_approx=cutoff_approx,
        cutoff_residual=cutoff_exact - cutoff_approx,
    )


def residual_scan(
    src: JointSource,
    eps,
    criterion: str,
    n_list,
    max_types: int | None = None,
    flag_threshold: float | None = None,
    workers: int = 1,
) -> ResidualReport:
    """Exact-minus-approximation residuals over a blocklength sweep.

    Each row compares the exact optimal length with the two-term
    approximation, normalized by log2 n and sqrt n; rows whose blocklength
    blows the type budget are kept but marked, so partial sweeps stay
    visible.  Rows with |residual|/log2 n above ``flag_threshold`` are
    flagged.
    """
    validate_criterion(criterion)
    e = float(coerce_eps(eps, exact=False))
    ns = sorted(set(int(n) for n in n_list))
    if not ns or ns[0] < 1:
        raise ValidationError("blocklength list must contain integers >= 1", "n_list")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(
                    pool.map(lambda n: _residual_row(src, e, criterion, n, max_types), ns)
                )
        else:
            rows = [_residual_row(src, e, criterion, n, max_types) for n in ns]
    flagged = ()
    if flag_threshold is not None:
        flagged = tuple(
            row.n
            for row in rows
            if row.residual_per_log_n is not None
            and abs(row.residual_per_log_n) > flag_threshold
        )
    return ResidualReport(rows=tuple(rows), flagged=flagged, flag_threshold=flag_threshold)
