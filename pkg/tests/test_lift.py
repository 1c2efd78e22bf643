import math
import random
from fractions import Fraction

import pytest

from vldsrc import (
    BudgetExceededError,
    JointSource,
    ValidationError,
    floor_log_rank_spectrum,
    iota_spectrum_n,
    pooled_floor_log_rank_spectrum,
    rank_spectrum,
    y_marginal_types,
)
from vldsrc.lift import compositions, multinomial, resolve_budget

from oracles import (
    naive_floor_log_masses,
    naive_iota_conditional,
    naive_iota_mixture,
    random_rational_source,
)

F = Fraction


def uniform_source(k: int) -> JointSource:
    pmf = tuple((F(1, k),) for _ in range(k))
    return JointSource.from_pmf(tuple(str(i) for i in range(k)), ("y",), pmf, "rational")


def spectrum_as_dict(spec) -> dict:
    return dict(zip(spec.values, spec.masses))


def test_compositions_and_multinomial_counts():
    assert len(list(compositions(4, 4))) == 35
    assert sum(multinomial(4, c) for c in compositions(4, 3)) == 3**4
    assert multinomial(6, (2, 2, 2)) == 90


def test_resolve_budget_env(monkeypatch):
    assert resolve_budget(123) == 123
    monkeypatch.setenv("VLDSRC_MAX_TYPES", "77")
    assert resolve_budget() == 77
    monkeypatch.delenv("VLDSRC_MAX_TYPES")
    assert resolve_budget() == 10**8
    with pytest.raises(ValidationError):
        resolve_budget(0)


def test_y_marginal_types_binary(two_row):
    types = y_marginal_types(two_row, 4)
    assert len(types) == 5
    assert sum(t.probability for t in types) == 1
    lookup = {t.counts: t for t in types}
    assert lookup[(2, 2)].weight == 6
    assert lookup[(2, 2)].probability == F(6, 16)


def test_uniform_row_collapses_to_one_class():
    src = uniform_source(8)
    spec = rank_spectrum(src, 1, (1,))
    assert len(spec.classes) == 1
    assert spec.classes[0].count == 8
    big = rank_spectrum(src, 64, (64,))
    assert len(big.classes) == 1
    assert big.classes[0].count == 8**64
    assert big.classes[0].likelihood == F(1, 8**64)


def test_floor_log_of_uniform8():
    spec = floor_log_rank_spectrum(uniform_source(8), 1, (1,))
    assert spectrum_as_dict(spec) == {0: F(1, 8), 1: F(1, 4), 2: F(1, 2), 3: F(1, 8)}


def test_floor_log_binary_uniform_two_letters():
    spec = floor_log_rank_spectrum(uniform_source(2), 2, (2,))
    assert spectrum_as_dict(spec) == {0: F(1, 4), 1: F(1, 2), 2: F(1, 4)}


def test_rank_spectrum_orders_and_counts(skewed):
    spec = rank_spectrum(skewed, 2, (2,))
    likes = [c.likelihood for c in spec.classes]
    assert likes == sorted(likes, reverse=True)
    assert spec.total_count() == 9
    assert sum(c.likelihood * c.count for c in spec.classes) == 1
    # blocklength-2 products of (1/2, 1/3, 1/6)
    assert likes[0] == F(1, 4) and spec.classes[0].count == 1
    assert F(1, 6) in likes  # 1/2 x 1/3, twice
    lookup = {c.likelihood: c.count for c in spec.classes}
    assert lookup[F(1, 6)] == 2
    assert lookup[F(1, 36)] == 1


def test_rank_spectrum_validates_counts(skewed):
    with pytest.raises(ValidationError):
        rank_spectrum(skewed, 3, (2,))


def test_floor_log_matches_naive_per_type():
    rng = random.Random(23)
    for _ in range(8):
        src = random_rational_source(rng, 2, 2, denom=9)
        for n in (1, 2, 3, 4):
            for ytype in y_marginal_types(src, n):
                y_seq = []
                for j, c in enumerate(ytype.counts):
                    y_seq.extend([j] * c)
                expect = naive_floor_log_masses(src, tuple(y_seq))
                got = spectrum_as_dict(floor_log_rank_spectrum(src, n, ytype.counts))
                assert got == expect


def test_iota_mixture_matches_naive():
    rng = random.Random(29)
    for _ in range(6):
        src = random_rational_source(rng, 2, 2, denom=7)
        for n in (1, 2, 3):
            spec = iota_spectrum_n(src, n)
            got = dict(zip(spec.keys, spec.masses))
            assert got == naive_iota_mixture(src, n)


def test_iota_conditional_matches_naive():
    rng = random.Random(31)
    src = random_rational_source(rng, 3, 2, denom=5)
    for counts in ((2, 1), (0, 3), (3, 0)):
        y_seq = [j for j, c in enumerate(counts) for _ in range(c)]
        spec = iota_spectrum_n(src, 3, y_counts=counts)
        got = dict(zip(spec.keys, spec.masses))
        assert got == naive_iota_conditional(src, tuple(y_seq))


def test_iota_values_are_log2_of_keys(skewed):
    spec = iota_spectrum_n(skewed, 2)
    for v, key in zip(spec.values, spec.keys):
        assert v == pytest.approx(-math.log2(float(key)), abs=1e-12)


def test_pooled_floor_log_is_type_mixture(two_row):
    pooled = pooled_floor_log_rank_spectrum(two_row, 3)
    acc: dict = {}
    for ytype in y_marginal_types(two_row, 3):
        spec = floor_log_rank_spectrum(two_row, 3, ytype.counts)
        for v, m in zip(spec.values, spec.masses):
            acc[v] = acc.get(v, F(0)) + ytype.probability * m
    assert spectrum_as_dict(pooled) == {v: m for v, m in acc.items() if m > 0}
    assert sum(pooled.masses) == 1


def test_budget_guard_trips():
    rng = random.Random(37)
    src = random_rational_source(rng, 4, 3, denom=11)
    with pytest.raises(BudgetExceededError):
        y_marginal_types(src, 64, max_types=10)
    with pytest.raises(BudgetExceededError):
        rank_spectrum(src, 64, (22, 21, 21), max_types=10)


def test_point_uniform8_collapse_scales_to_n_256(two_row):
    # 257 y-types, one likelihood class per row type: the collapse is what
    # makes large blocklengths cheap here
    types = y_marginal_types(two_row, 256)
    assert len(types) == 257
    spec = rank_spectrum(two_row, 256, types[128].counts)
    assert len(spec.classes) == 1
    assert sum(c.likelihood * c.count for c in spec.classes) == 1


def test_float_lane_spectrum_close_to_exact(float_skewed, skewed):
    for n in (1, 2, 3):
        f = floor_log_rank_spectrum(float_skewed, n, (n,))
        r = floor_log_rank_spectrum(skewed, n, (n,))
        assert f.values == pytest.approx([float(v) for v in r.values], abs=1e-9)
        assert f.masses == pytest.approx([float(m) for m in r.masses], abs=1e-9)
