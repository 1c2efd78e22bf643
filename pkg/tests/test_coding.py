import math
import random
from fractions import Fraction

import pytest

from vldsrc import (
    BinaryString,
    InvariantError,
    ValidationError,
    build_code,
    encode_decode,
    lstar,
    lstar_profile,
    one_shot_bounds,
    simulate_code,
    string_length,
)

from oracles import naive_lstar, random_rational_source

F = Fraction


def test_binary_string_enumeration():
    words = [BinaryString(i) for i in range(1, 8)]
    assert [w.bits for w in words] == ["", "0", "1", "00", "01", "10", "11"]
    assert [w.length for w in words] == [0, 1, 1, 2, 2, 2, 2]
    assert BinaryString.from_bits("10") == BinaryString(6)
    assert BinaryString.from_bits("") == BinaryString(1)
    with pytest.raises(ValidationError):
        BinaryString(0)
    with pytest.raises(ValidationError):
        BinaryString.from_bits("012")


def test_string_length_matches_floor_log():
    for r in (1, 2, 3, 4, 7, 8, 1023, 1024, 3**50):
        assert string_length(r) == int(math.floor(math.log2(r)))


def test_lstar_skewed_sixth(skewed, sixth):
    assert lstar(skewed, 1, sixth, "avg") == F(1, 3)
    assert lstar(skewed, 1, sixth, "max") == F(1, 3)
    assert lstar(skewed, 1, 0, "avg") == F(1, 2)  # lengths 0, 1, 1
    assert lstar(skewed, 1, F(1, 3), "avg") == F(1, 6)
    assert lstar(skewed, 1, F(1, 2), "avg") == 0


def test_lstar_point_uniform8_quarter(two_row):
    assert lstar(two_row, 1, F(1, 4), "max") == F(1, 2)
    assert lstar(two_row, 1, F(1, 4), "avg") == F(1, 4)


def test_lstar_profile_is_pointwise(skewed):
    grid = [F(k, 10) for k in range(11)]
    profile = lstar_profile(skewed, 1, grid, "avg")
    assert profile == [lstar(skewed, 1, e, "avg") for e in grid]
    assert all(a >= b for a, b in zip(profile, profile[1:]))
    assert profile[-1] == 0


def test_lstar_matches_naive_enumeration():
    rng = random.Random(41)
    for _ in range(12):
        src = random_rational_source(rng, rng.randint(2, 4), rng.randint(1, 2), denom=9)
        for n in (1, 2, 3):
            for num in (0, 1, 3, 6):
                e = F(num, 8)
                for criterion in ("max", "avg"):
                    got = lstar(src, n, e, criterion)
                    assert got == naive_lstar(src, n, e, criterion)


def test_lstar_float_lane_close_to_exact(skewed, float_skewed, sixth):
    exact = lstar(skewed, 2, sixth, "avg")
    approx = lstar(float_skewed, 2, 1 / 6, "avg")
    assert approx == pytest.approx(float(exact), abs=1e-9)


def test_build_code_skewed_sixth(skewed, sixth):
    plan = build_code(skewed, 1, sixth, "avg")
    (row,) = plan.rows
    assert row.kappa == 2
    assert row.keep_prob == 0
    assert row.perm == ("1", "2", "3")
    assert plan.analytic_length == F(1, 3)
    assert plan.analytic_error == sixth


def test_build_code_point_uniform8_max(two_row):
    plan = build_code(two_row, 1, F(1, 4), "max")
    by_y = plan.row_by_y
    point = by_y["0"]
    assert point.kappa == 0 and point.keep_prob == F(3, 4)
    # dropping the boundary share of rank 1 is harmless: the empty string
    # still decodes to it, so the true row error is 0, not eps
    assert point.error_probability() == 0
    octet = by_y["1"]
    assert octet.kappa == 6 and octet.keep_prob == 0
    assert octet.error_probability() == F(1, 4)
    assert plan.analytic_length == F(1, 2)
    assert plan.analytic_error == F(1, 4)


def test_build_code_point_uniform8_avg(two_row):
    plan = build_code(two_row, 1, F(1, 4), "avg")
    assert {row.kappa for row in plan.rows} == {4}
    assert plan.analytic_length == F(1, 4)
    assert plan.analytic_error == F(1, 4)


def test_plan_length_equals_lstar_random():
    rng = random.Random(43)
    for _ in range(15):
        src = random_rational_source(rng, rng.randint(2, 4), rng.randint(1, 3), denom=8)
        for criterion in ("max", "avg"):
            for num in (0, 1, 2, 5):
                e = F(num, 8)
                plan = build_code(src, 1, e, criterion)
                assert plan.analytic_length == lstar(src, 1, e, criterion)
                if criterion == "max":
                    assert all(err <= e for err in plan.per_y_error.values())
                else:
                    assert plan.analytic_error <= e


def test_plan_length_equals_lstar_blocklength_two(skewed, sixth):
    plan = build_code(skewed, 2, sixth, "avg")
    assert plan.analytic_length == lstar(skewed, 2, sixth, "avg")


def test_build_code_rejects_eps_one(skewed):
    with pytest.raises(ValidationError):
        build_code(skewed, 1, 1, "avg")
    with pytest.raises(ValidationError):
        build_code(skewed, 1, F(1, 6), "median")


def test_encode_decode_roundtrip(skewed, sixth):
    plan = build_code(skewed, 1, sixth, "avg")
    word, decoded = encode_decode(plan, "1", "0", randomness=0.9)
    assert word.bits == "" and decoded == "1"
    word, decoded = encode_decode(plan, "2", "0", randomness=0.9)
    assert word.bits == "0" and decoded == "2"
    # rank 3 is past the boundary: always the empty string, decodes to rank 1
    word, decoded = encode_decode(plan, "3", "0", randomness=0.0)
    assert word.bits == "" and decoded == "1"
    with pytest.raises(ValidationError):
        encode_decode(plan, "1", "?", 0.5)


def test_encode_decode_boundary_randomization(two_row):
    plan = build_code(two_row, 1, F(1, 4), "max")
    # point row: rank 1 kept with probability 3/4, else empty string --
    # but both decode back to the same symbol
    for u in (0.0, 0.5, 0.9):
        word, decoded = encode_decode(plan, "0", "0", randomness=u)
        assert decoded == "0"
        assert word.bits == ""


def test_one_shot_bounds_fixture(skewed, sixth):
    b = one_shot_bounds(skewed, 1, sixth, "avg")
    assert b.exact == F(1, 3)
    assert b.upper == pytest.approx(0.5 + math.log2(3) / 3, abs=1e-12)
    H = 1.4591479170272448
    assert b.lower == pytest.approx(b.upper - math.log2(H + 1) - math.log2(math.e), abs=1e-9)
    assert b.lower <= float(b.exact) <= b.upper
    assert b.holds()


def test_bounds_sandwich_random():
    rng = random.Random(47)
    for _ in range(10):
        src = random_rational_source(rng, rng.randint(2, 4), rng.randint(1, 2), denom=9)
        for criterion in ("max", "avg"):
            for num in (0, 1, 4):
                b = one_shot_bounds(src, 2, F(num, 8), criterion)
                assert b.lower <= float(b.exact) + 1e-12
                assert float(b.exact) <= b.upper + 1e-12


def test_avg_never_beats_max_and_monotone():
    rng = random.Random(53)
    for _ in range(10):
        src = random_rational_source(rng, 3, 2, denom=7)
        grid = [F(k, 12) for k in range(13)]
        for n in (1, 2):
            prof_max = lstar_profile(src, n, grid, "max")
            prof_avg = lstar_profile(src, n, grid, "avg")
            for a, m in zip(prof_avg, prof_max):
                assert a <= m
            assert all(x >= y for x, y in zip(prof_max, prof_max[1:]))
            assert all(x >= y for x, y in zip(prof_avg, prof_avg[1:]))


def test_simulation_matches_analytics(skewed, sixth):
    plan = build_code(skewed, 1, sixth, "avg")
    sim = simulate_code(plan, 200_000, seed=7)
    assert sim.trials == 200_000
    assert abs(sim.mean_length - 1 / 3) < 4 * sim.stderr_length
    assert abs(sim.error_rate - 1 / 6) < 4 * sim.stderr_error


def test_simulation_deterministic_across_workers(skewed, sixth):
    plan = build_code(skewed, 1, sixth, "avg")
    a = simulate_code(plan, 150_000, seed=123, workers=1)
    b = simulate_code(plan, 150_000, seed=123, workers=4)
    assert a == b
    c = simulate_code(plan, 150_000, seed=124, workers=1)
    assert a != c


def test_simulate_rejects_zero_trials(skewed, sixth):
    plan = build_code(skewed, 1, sixth, "avg")
    with pytest.raises(ValidationError):
        simulate_code(plan, 0, seed=1)
