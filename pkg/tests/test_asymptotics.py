import math
import warnings
from fractions import Fraction

import pytest

from vldsrc import (
    ValidationError,
    exact_dispersion_mean,
    f_gaussian,
    fixture,
    measures,
    norm_cdf,
    norm_pdf,
    norm_ppf,
    residual_scan,
    second_order,
)

from oracles import f_gaussian_reference, ppf_reference

F = Fraction


# ------------------------------------------------------ normal helpers -----


def test_ppf_spot_values():
    assert norm_ppf(0.5) == 0.0
    assert norm_ppf(0.975) == pytest.approx(1.9599639845400538, abs=1e-12)
    assert norm_ppf(0.025) == pytest.approx(-1.9599639845400538, abs=1e-12)


@pytest.mark.parametrize("p", [1e-9, 1e-4, 0.02425, 0.1, 0.3, 0.5, 0.77, 0.97575, 0.9999, 1 - 1e-9])
def test_ppf_matches_high_precision_reference(p):
    assert norm_ppf(p) == pytest.approx(ppf_reference(p), abs=1e-10)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.7])
def test_ppf_domain(p):
    with pytest.raises(ValidationError):
        norm_ppf(p)


def test_cdf_ppf_roundtrip():
    for k in range(1, 40):
        p = k / 40
        assert norm_cdf(norm_ppf(p)) == pytest.approx(p, abs=1e-13)


def test_pdf_peak():
    assert norm_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-16)


def test_f_gaussian_shape():
    assert f_gaussian(0) == 0.0
    assert f_gaussian(1) == 0.0
    assert f_gaussian(0.5) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-15)
    assert f_gaussian(0.1) == pytest.approx(0.17549833193248685, abs=1e-12)
    assert f_gaussian(F(1, 10)) == f_gaussian(0.1)
    # symmetric around 1/2, increasing up to it
    for k in range(1, 25):
        s = k / 50
        assert f_gaussian(s) == pytest.approx(f_gaussian(1 - s), abs=1e-12)
        assert f_gaussian(s) < f_gaussian(s + 1 / 50)


@pytest.mark.parametrize("s", [0.003, 0.04, 0.2, 0.5, 0.86, 0.999])
def test_f_gaussian_matches_reference(s):
    assert f_gaussian(s) == pytest.approx(f_gaussian_reference(s), abs=1e-12)


def test_f_gaussian_domain():
    with pytest.raises(ValidationError):
        f_gaussian(-0.1)
    with pytest.raises(ValidationError):
        f_gaussian(1.1)


# -------------------------------------------------------- second order -----


def test_second_order_point_uniform8(two_row):
    est = second_order(two_row, 100, 0.1, "avg")
    assert est.first_order == pytest.approx(135.0, abs=1e-9)
    assert est.dispersion_term == pytest.approx(2.6324749789873025, abs=1e-10)
    assert est.approx == pytest.approx(132.3675250210127, abs=1e-9)


def test_second_order_zero_eps_is_first_order(skewed):
    est = second_order(skewed, 64, 0, "avg")
    H = measures(skewed).H
    assert est.approx == est.first_order == pytest.approx(64 * H, abs=1e-9)
    assert est.dispersion_term == 0.0


def test_second_order_criteria_coincide_without_side_information(skewed):
    a = second_order(skewed, 50, 0.2, "max")
    b = second_order(skewed, 50, 0.2, "avg")
    assert a.approx == pytest.approx(b.approx, abs=1e-12)


def test_second_order_warns_on_degenerate_conditional_variance(two_row):
    # the point row has zero conditional variance, so the max-criterion
    # normal approximation degrades; the call still returns but warns
    with pytest.warns(RuntimeWarning):
        est = second_order(two_row, 100, 0.1, "max")
    assert est.criterion == "max"


def test_second_order_validates(skewed):
    with pytest.raises(ValidationError):
        second_order(skewed, 0, 0.1, "avg")
    with pytest.raises(ValidationError):
        second_order(skewed, 10, 0.1, "median")


# --------------------------------------------- exact dispersion average -----


def test_dispersion_mean_zero_for_point_uniform8(two_row):
    # every y-sequence mixes rows whose conditional laws are a point mass or
    # uniform -- each type has zero dispersion only when all letters hit the
    # point row; here the conditional variance per row is 0 (point) and 0
    # (uniform), so the average collapses
    assert exact_dispersion_mean(two_row, 4) == 0.0


def test_dispersion_mean_equals_sqrt_nv_when_constant(skewed):
    m = measures(skewed)
    for n in (1, 3, 8):
        want = math.sqrt(n * m.V_c)
        assert exact_dispersion_mean(skewed, n) == pytest.approx(want, rel=1e-12)


def test_dispersion_mean_strictly_below_sqrt_nv_when_varying():
    src = fixture("zeta-geometric")
    m = measures(src)
    n = 6
    mean = exact_dispersion_mean(src, n)
    upper = math.sqrt(n * m.V_c)
    assert mean < upper - 1e-6
    assert mean > 0


# ------------------------------------------------------- residual scan -----


def test_residual_scan_rows(skewed):
    report = residual_scan(skewed, 0.1, "avg", [4, 16])
    assert [row.n for row in report.rows] == [4, 16]
    for row in report.rows:
        assert row.status == "ok"
        assert row.approx == pytest.approx(row.first_order - row.dispersion_term, abs=1e-9)
        assert row.residual == pytest.approx(row.exact - row.approx, abs=1e-12)
        assert row.residual_per_log_n == pytest.approx(row.residual / math.log2(row.n), abs=1e-12)
        assert row.residual_per_sqrt_n == pytest.approx(row.residual / math.sqrt(row.n), abs=1e-12)
    assert report.complete()
    assert report.flagged == ()


def test_residual_scan_flags_large_residuals(skewed):
    report = residual_scan(skewed, 0.1, "avg", [4], flag_threshold=1e-6)
    assert report.flagged == (4,)
    assert not report.complete() or report.rows[0].status == "ok"


def test_residual_scan_budget_exceeded(two_row):
    report = residual_scan(two_row, 0.1, "avg", [64], max_types=3)
    (row,) = report.rows
    assert row.status == "budget-exceeded"
    assert row.exact is None and row.residual is None
    assert not report.complete()


def test_residual_scan_workers_match(skewed):
    seq = residual_scan(skewed, 0.25, "max", [2, 4, 8], workers=1)
    par = residual_scan(skewed, 0.25, "max", [2, 4, 8], workers=3)
    assert seq.rows == par.rows
