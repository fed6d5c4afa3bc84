import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from normlab.pnormal import (
    DomainError,
    carry_digit_prob,
    carry_sum_stats,
    conditional_digit_prob,
    monte_carlo_carry_sum,
    rauzy_obstruction_l,
)

fractions_in_unit = st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(999, 1000))


def test_half_is_fixed():
    P, pprime = carry_digit_prob(Fraction(1, 2))
    assert P == Fraction(1, 2) and pprime == Fraction(1, 2)
    _, _, pprime0 = conditional_digit_prob(Fraction(1, 2))
    assert pprime0 == Fraction(1, 2)


def test_exact_values_at_one_fifth():
    P, pprime = carry_digit_prob(Fraction(1, 5))
    assert P == Fraction(1, 17)
    assert pprime == Fraction(29, 85)
    Q0, P0, pprime0 = conditional_digit_prob(Fraction(1, 5))
    assert Q0 == Fraction(32, 35)
    assert P0 == Fraction(3, 35)
    assert pprime0 == Fraction(307, 875)
    assert pprime0 > pprime


def test_mirrored_p():
    assert carry_digit_prob(Fraction(4, 5))[1] == 1 - Fraction(29, 85)
    _, _, p0 = conditional_digit_prob(Fraction(4, 5))
    assert p0 > carry_digit_prob(Fraction(4, 5))[1]


def test_domain_checks():
    for bad in (0, 1, Fraction(3, 2)):
        with pytest.raises(DomainError):
            carry_digit_prob(bad)
    with pytest.raises(DomainError):
        rauzy_obstruction_l(Fraction(1, 2))


@given(fractions_in_unit)
def test_two_closed_forms_agree(p):
    q = 1 - p
    _, pprime = carry_digit_prob(p)
    assert pprime == p**2 + 2 * p * q**3 / (p**2 + q**2)


@given(fractions_in_unit)
def test_symmetry_identity(p):
    assert carry_digit_prob(p)[1] + carry_digit_prob(1 - p)[1] == 1


@given(fractions_in_unit)
def test_probability_sanity(p):
    P, pprime = carry_digit_prob(p)
    Q0, P0, pprime0 = conditional_digit_prob(p)
    assert 0 < P < 1 and P + (1 - P) == 1
    assert Q0 + P0 == 1
    assert 0 < pprime < 1 and 0 < pprime0 < 1
    assert pprime0 >= pprime  # equality exactly at p = 1/2


@pytest.mark.parametrize(
    "p, want",
    [(Fraction(9, 10), 1), (Fraction(3, 5), 2), (Fraction(51, 100), 17)],
)
def test_obstruction_lengths(p, want):
    l = rauzy_obstruction_l(p)
    assert l == want
    assert ((1 - p) / p) ** l < p
    if l > 1:
        assert ((1 - p) / p) ** (l - 1) >= p


def test_grid_scan_unique_fixed_point():
    crossings = 0
    prev = None
    for k in range(1, 200):
        p = Fraction(k, 200)
        sign = carry_digit_prob(p)[1] - p
        cur = 0 if sign == 0 else (1 if sign > 0 else -1)
        if prev is not None and cur != prev:
            crossings += 1
        prev = cur
    assert crossings == 2  # + -> 0 at exactly 1/2 -> -


def test_monte_carlo_five_sigma_band():
    mc = monte_carlo_carry_sum(Fraction(1, 5), seed=7, N=10**5)
    _, pprime = carry_digit_prob(Fraction(1, 5))
    sigma = math.sqrt(float(pprime) * (1 - float(pprime)) / mc.tallied)
    assert abs(mc.freq_one - float(pprime)) <= 5 * sigma
    assert mc.dependence > 0
    assert mc.ambiguity_rate <= 0.01


def test_monte_carlo_independence_at_half():
    mc = monte_carlo_carry_sum(Fraction(1, 2), seed=11, N=10**5)
    sigma = math.sqrt(0.25 / mc.tallied_pairs)
    assert abs(mc.dependence) <= 5 * sigma


def test_monte_carlo_needs_enough_digits():
    with pytest.raises(DomainError):
        monte_carlo_carry_sum(Fraction(1, 5), seed=1, N=100)


@pytest.mark.parametrize("n", [10**4, 10**5, 10**6])
def test_monte_carlo_convergence_rate(n):
    # fixed seeds: the estimate tracks the closed form at rate <= 4/sqrt(N)
    mc = monte_carlo_carry_sum(Fraction(1, 5), seed=7, N=n)
    _, pprime = carry_digit_prob(Fraction(1, 5))
    assert abs(mc.freq_one - float(pprime)) <= 4 / math.sqrt(n)


def test_stats_bundle():
    stats = carry_sum_stats(Fraction(7, 10))
    assert stats.l == 1
    assert stats.P == str(Fraction(49, 58))
    d = stats.as_dict()
    assert d["pprime"] == stats.pprime and d["mc_stats"] is None
