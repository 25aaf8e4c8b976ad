from fractions import Fraction

import pytest

from tentctl.control_design import (
    RegimeOffset,
    classify_theta,
    controlled_multiplier,
    count_cycles,
    divisors,
    invariance_guaranteed,
    is_locally_stable,
    mobius,
    negative_axis_rate,
    offset_of_theta,
    subcycle_stable,
    theta_from_offset,
    theta_interval,
    zero_multiplier_theta,
)
from tentctl.errors import ParameterError
from tentctl.tent_map import MapParams, Regime

POS = Regime.POSITIVE_MULTIPLIER
NEG = Regime.NEGATIVE_MULTIPLIER


def test_theta_interval_examples(h3, h4):
    interval = theta_interval(h3, 1, POS)
    assert (interval.lo, interval.hi) == (Fraction(4, 3), Fraction(5, 3))
    interval = theta_interval(h3, 1, "neg")
    assert (interval.lo, interval.hi) == (Fraction(2, 3), Fraction(5, 6))
    interval = theta_interval(h4, 5, NEG)
    assert interval.lo == (1024 - Fraction(1, 4)) / 1025
    assert interval.hi == (1024 + Fraction(1, 4)) / 1025


def test_theta_interval_rejects_bad_period(h3):
    with pytest.raises(ParameterError):
        theta_interval(h3, 0, POS)


def test_theta_from_offset_examples(h3, h4):
    assert theta_from_offset(h4, 5, NEG, RegimeOffset(Fraction(-2, 5))) == (1024 - Fraction(1, 10)) / 1025
    assert theta_from_offset(h4, 5, POS, RegimeOffset("0.4")) == (1024 + Fraction(1, 10)) / 1023
    assert theta_from_offset(h3, 2, POS, RegimeOffset(0)) == Fraction(9, 8)
    assert round(float(theta_from_offset(h4, 5, NEG, RegimeOffset("-0.4"))), 4) == 0.9989


def test_offset_must_be_inside_unit_interval():
    with pytest.raises(ParameterError) as info:
        RegimeOffset(1)
    assert info.value.field == "offset"
    with pytest.raises(ParameterError):
        RegimeOffset("-1.5")


@pytest.mark.parametrize("c", ["-0.99", "-0.4", "0", "0.6", "0.99"])
def test_offsets_land_strictly_inside(h3, c):
    for T in (1, 2, 5):
        for regime in (POS, NEG):
            theta = theta_from_offset(h3, T, regime, RegimeOffset(c))
            interval = theta_interval(h3, T, regime, hi_closed=False)
            assert interval.contains(theta)
            assert classify_theta(h3, T, theta) is regime
            assert offset_of_theta(h3, T, regime, theta) == Fraction(c)


def test_controlled_multiplier_examples():
    assert controlled_multiplier(3, Fraction(3, 2), 1) == 0
    assert controlled_multiplier(3, Fraction(4, 3), 1) == 1
    assert controlled_multiplier(-9, Fraction(9, 10), 2) == 0


def test_is_locally_stable_examples(h3):
    theta = theta_from_offset(h3, 5, POS, RegimeOffset("0.3"))
    assert is_locally_stable(3 ** 5, theta, 5)
    assert not is_locally_stable(9, Fraction(9, 10), 2)
    assert not is_locally_stable(-9, Fraction(9, 8), 2)


@pytest.mark.parametrize("H", [2, 3, 4])
@pytest.mark.parametrize("T", [1, 2, 3, 4, 5, 6])
def test_interval_chains_and_endpoint_marginality(H, T):
    params = MapParams(H)
    H_T = Fraction(H) ** T
    pos = theta_interval(params, T, POS)
    neg = theta_interval(params, T, NEG)
    assert 1 < pos.lo < pos.hi <= Fraction(5, 2)
    assert Fraction(1, 2) <= neg.lo < neg.hi < 1
    if H_T > 2:  # H = 2, T = 1 touches both outer bounds
        assert pos.hi < Fraction(5, 2) and Fraction(1, 2) < neg.lo
    assert pos.width == Fraction(2) / (H * (H_T - 1))
    assert neg.width == Fraction(2) / (H * (H_T + 1))
    for theta in (pos.lo, pos.hi):
        assert abs(controlled_multiplier(H_T, theta, T)) == 1
    for theta in (neg.lo, neg.hi):
        assert abs(controlled_multiplier(-H_T, theta, T)) == 1
    assert controlled_multiplier(H_T, zero_multiplier_theta(params, T, POS), T) == 0
    assert controlled_multiplier(-H_T, zero_multiplier_theta(params, T, NEG), T) == 0
    assert zero_multiplier_theta(params, T, NEG) == H_T / (H_T + 1)


def test_classify_outside_both_regimes(h3):
    assert classify_theta(h3, 2, Fraction(1, 2)) is None
    assert classify_theta(h3, 2, Fraction(1)) is None
    assert classify_theta(h3, 1, Fraction(5, 3)) is POS  # closed upper end


def test_invariance_flag(h3):
    T = 2
    assert invariance_guaranteed(h3, T, Fraction(9, 10))
    assert not invariance_guaranteed(h3, T, theta_interval(h3, T, NEG).hi)
    assert not invariance_guaranteed(h3, T, theta_interval(h3, T, NEG).lo)


def test_negative_axis_rate_is_minus_offset(h3, h4):
    for params in (h3, h4):
        for c in ("-0.7", "-0.2", "0.5"):
            theta = theta_from_offset(params, 3, POS, RegimeOffset(c))
            assert negative_axis_rate(params, 3, theta) == -Fraction(c)


@pytest.mark.parametrize(
    "T, tau, regime, sign, expected",
    [
        (5, 1, POS, 1, True),
        (5, 1, NEG, -1, True),
        (2, 1, NEG, 1, False),
        (2, 1, NEG, -1, False),
        (2, 1, POS, -1, True),
        (2, 1, POS, 1, True),
        (5, 1, POS, -1, False),
        (6, 2, NEG, -1, True),
        (5, 5, NEG, 1, False),
    ],
)
def test_subcycle_stability_table(T, tau, regime, sign, expected):
    assert subcycle_stable(T, tau, regime, sign) is expected


def test_subcycle_stable_agrees_with_multiplier(h3):
    # a tau-cycle seen by the period-T control has mu_T = mu_tau^p
    for T in (2, 3, 4, 6):
        for tau in divisors(T):
            p = T // tau
            for regime in (POS, NEG):
                theta = zero_multiplier_theta(h3, T, regime) + Fraction(1, 10 ** 6)
                for sign in (1, -1):
                    mu_tau = sign * Fraction(3) ** tau
                    factor = theta + (1 - theta) * mu_tau ** p
                    stable = abs(mu_tau * factor ** tau) < 1
                    assert subcycle_stable(T, tau, regime, sign) is stable


def test_subcycle_rejects_non_divisor():
    with pytest.raises(ParameterError):
        subcycle_stable(6, 4, POS, 1)
    with pytest.raises(ParameterError):
        subcycle_stable(6, 2, POS, 0)


def test_count_examples():
    assert count_cycles(5) == 6
    assert count_cycles(1) == 2
    assert count_cycles(6) == 9
    assert count_cycles(12) == 335
    with pytest.raises(ParameterError):
        count_cycles(65)


@pytest.mark.parametrize("T", range(1, 25))
def test_orbit_point_partition(T):
    assert sum(count_cycles(d) * d for d in divisors(T)) == 2 ** T


@pytest.mark.parametrize("T", [2, 3, 5, 7, 11, 13, 31, 61])
def test_fermat_consistency(T):
    assert count_cycles(T) * T == 2 ** T - 2


def test_number_theory_helpers():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert divisors(1) == [1]
    assert [mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
