import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vldsrc import (
    BudgetExceededError,
    GivingUpStrategy,
    StrategyRow,
    ValidationError,
    bracket_check,
    build_strategy,
    evaluate_strategy,
    load_source,
    product_source,
    simulate_guessing,
    sum_log2_range,
    validate_cost,
)

from oracles import random_rational_source

F = Fraction


# ---------------------------------------------------------------- cost -----


def test_validate_cost_accepts_non_integers():
    assert validate_cost(F(5, 2)) == F(5, 2)
    assert validate_cost(2.5) == 2.5
    assert validate_cost("5/2") == F(5, 2)


@pytest.mark.parametrize("bad", [2, 3.0, "7", -1.5, 0, F(4, 2), True])
def test_validate_cost_rejects(bad):
    with pytest.raises(ValidationError):
        validate_cost(bad)


# ------------------------------------------------------ sum_log2_range -----


def test_sum_log2_range_small_exact():
    assert sum_log2_range(1, 1) == 0.0
    assert sum_log2_range(5, 3) == 0.0
    assert sum_log2_range(1, 9) == pytest.approx(math.log2(math.factorial(8)), abs=1e-12)
    assert sum_log2_range(7, 12) == pytest.approx(
        sum(math.log2(r) for r in range(7, 12)), abs=1e-12
    )


def test_sum_log2_range_large_matches_direct():
    # straddle the direct-sum cutoff with a range wide enough to force the
    # closed form, and check it against a straightforward accumulation
    start, stop = 10_000, 16_000
    direct = math.fsum(math.log2(r) for r in range(start, stop))
    assert sum_log2_range(start, stop) == pytest.approx(direct, rel=1e-13)


@given(
    start=st.integers(min_value=1, max_value=50_000),
    count=st.integers(min_value=0, max_value=8_000),
)
@settings(max_examples=60, deadline=None)
def test_sum_log2_range_agrees_with_fsum(start, count):
    direct = math.fsum(math.log2(r) for r in range(start, start + count))
    assert sum_log2_range(start, start + count) == pytest.approx(direct, rel=1e-12, abs=1e-12)


def test_sum_log2_range_rejects_astronomical_ranks():
    with pytest.raises(BudgetExceededError):
        sum_log2_range(1 << 1001, (1 << 1001) + 5000)


# ----------------------------------------------------------- strategy -----


def test_strategy_schedule_skewed(skewed, sixth):
    strat = build_strategy(skewed, sixth, "avg", F(5, 2))
    (row,) = strat.rows
    assert row.perm == ("1", "2", "3")
    assert row.kappa == 2
    assert row.pi == (0, 0, 1)


def test_strategy_value_skewed(skewed, sixth):
    strat = build_strategy(skewed, sixth, "avg", F(5, 2))
    value = evaluate_strategy(strat, skewed)
    # kept: 1/2 log 1 + 1/3 log 2; failures pay log2(5/2)
    by_hand = 1 / 3 + 1 / 6 * math.log2(2.5)
    assert value.expected_log_guess == pytest.approx(0.5536546824812271, abs=1e-15)
    assert value.expected_log_guess == pytest.approx(by_hand, abs=1e-12)
    assert value.error_prob == sixth


def test_strategy_value_zero_eps(skewed):
    strat = build_strategy(skewed, 0, "avg", F(5, 2))
    value = evaluate_strategy(strat, skewed)
    assert value.expected_log_guess == pytest.approx(0.5974937501201927, abs=1e-15)
    assert value.error_prob == 0


def test_point_mass_needs_one_guess():
    src = load_source({"x_alphabet": ["a"], "y_alphabet": ["0"], "pmf": [["1"]], "mode": "rational"})
    strat = build_strategy(src, 0, "avg", F(3, 2))
    value = evaluate_strategy(strat, src)
    assert value.expected_log_guess == 0.0
    assert value.error_prob == 0


def test_always_give_up_pays_error_cost(skewed):
    row = StrategyRow(
        y="0", perm=("1", "2", "3"), masses=(F(1, 2), F(1, 3), F(1, 6)),
        kappa=0, keep_prob=F(0), pi=(1, 1, 1),
    )
    strat = GivingUpStrategy(criterion="avg", eps=F(1, 6), error_cost=F(5, 2), rows=(row,))
    value = evaluate_strategy(strat, skewed)
    assert value.error_prob == 1
    assert value.expected_log_guess == pytest.approx(math.log2(2.5), abs=1e-12)


def test_strategy_rejects_missing_symbols(skewed):
    row = StrategyRow(y="0", perm=("1", "2"), masses=(F(1, 2), F(1, 3)),
                      kappa=2, keep_prob=F(0), pi=(0, 0))
    strat = GivingUpStrategy(criterion="avg", eps=F(1, 6), error_cost=F(5, 2), rows=(row,))
    with pytest.raises(ValidationError):
        evaluate_strategy(strat, skewed)
    with pytest.raises(ValidationError):
        strat.row_for("missing")


def test_blocklength_two_routes_agree(skewed, sixth):
    # route A: strategy designed directly on the two-letter product source
    lifted = product_source(skewed, 2)
    strat2 = build_strategy(lifted, sixth, "avg", F(5, 2))
    via_product = evaluate_strategy(strat2, lifted, n=1)
    # route B: single-letter strategy evaluated at blocklength 2
    strat1 = build_strategy(skewed, sixth, "avg", F(5, 2))
    via_classes = evaluate_strategy(strat1, skewed, n=2)
    assert via_classes.expected_log_guess == pytest.approx(
        via_product.expected_log_guess, abs=1e-12
    )
    assert float(via_classes.error_prob) == pytest.approx(float(via_product.error_prob))


def test_blocklength_two_routes_agree_with_side_info(two_row):
    e = F(1, 4)
    for criterion in ("max", "avg"):
        lifted = product_source(two_row, 2)
        strat2 = build_strategy(lifted, e, criterion, F(5, 2))
        via_product = evaluate_strategy(strat2, lifted, n=1)
        strat1 = build_strategy(two_row, e, criterion, F(5, 2))
        via_classes = evaluate_strategy(strat1, two_row, n=2)
        assert via_classes.expected_log_guess == pytest.approx(
            via_product.expected_log_guess, abs=1e-12
        )


def test_evaluate_rejects_bad_blocklength(skewed, sixth):
    strat = build_strategy(skewed, sixth, "avg", F(5, 2))
    with pytest.raises(ValidationError):
        evaluate_strategy(strat, skewed, n=0)


# ------------------------------------------------------------ bracket -----


def test_bracket_skewed(skewed, sixth):
    report = bracket_check(skewed, 1, sixth, "avg", F(5, 2))
    assert report.holds
    assert report.lstar == F(1, 3)
    assert report.achieved == pytest.approx(0.5536546824812271, abs=1e-12)
    assert report.bound == pytest.approx(1 + math.log2(2.5), abs=1e-12)


def test_bracket_holds_on_random_sources():
    rng = random.Random(59)
    for _ in range(8):
        src = random_rational_source(rng, rng.randint(2, 4), rng.randint(1, 2), denom=8)
        for e in (0, F(1, 8), F(1, 2)):
            for criterion in ("max", "avg"):
                for c in (F(3, 2), F(21, 2)):
                    report = bracket_check(src, 1, e, criterion, c)
                    assert report.holds, (src, e, criterion, c)


def test_bracket_blocklength_two(skewed, sixth):
    report = bracket_check(skewed, 2, sixth, "avg", F(5, 2))
    assert report.holds


# --------------------------------------------------------- simulation -----


def test_simulation_agrees_with_exact(skewed, sixth):
    strat = build_strategy(skewed, sixth, "avg", F(5, 2))
    exact = evaluate_strategy(strat, skewed)
    sim = simulate_guessing(strat, skewed, n=1, trials=200_000, seed=11)
    assert sim.trials == 200_000
    assert abs(sim.mean_log_guess - exact.expected_log_guess) < 4 * sim.stderr_log_guess
    assert abs(sim.error_rate - float(exact.error_prob)) < 4 * sim.stderr_error


def test_simulation_deterministic_across_workers(skewed, sixth):
    strat = build_strategy(skewed, sixth, "avg", F(5, 2))
    a = simulate_guessing(strat, skewed, n=1, trials=100_000, seed=5, workers=1)
    b = simulate_guessing(strat, skewed, n=1, trials=100_000, seed=5, workers=3)
    assert a == b


def test_simulation_blocklength_two(skewed, sixth):
    strat = build_strategy(skewed, sixth, "avg", F(5, 2))
    exact = evaluate_strategy(strat, skewed, n=2)
    sim = simulate_guessing(strat, skewed, n=2, trials=150_000, seed=29)
    assert abs(sim.mean_log_guess - exact.expected_log_guess) < 4 * sim.stderr_log_guess
