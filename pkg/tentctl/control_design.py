"""
Control-parameter design for the predictive control scheme
Admissible theta intervals, multipliers of controlled cycles, subcycle stability
and the number of T-cycles. Everything here is exact rational arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Union

from tentctl.errors import ParameterError
from tentctl.hp_real import parse_rational
from tentctl.tent_map import MapParams, Regime

MAX_COUNT_PERIOD = 64


@dataclass(frozen=True)
class ThetaInterval:
    lo: Fraction  # open
    hi: Fraction
    hi_closed: bool
    regime: Regime

    def contains(self, theta: Fraction) -> bool:
        if self.hi_closed:
            return self.lo < theta <= self.hi
        return self.lo < theta < self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


@dataclass(frozen=True)
class RegimeOffset:
    """theta = (H^T + c/H)/(H^T -+ 1); |c| < 1 keeps theta strictly inside the regime interval"""
    c: Fraction

    def __post_init__(self):
        c = parse_rational(self.c, field="offset")
        if abs(c) >= 1:
            raise ParameterError(f"offset must satisfy |c| < 1, got {c}", field="offset")
        object.__setattr__(self, "c", c)


def _check_period(T: int):
    if int(T) != T or T < 1:
        raise ParameterError(f"period must be a positive integer, got {T}", field="T")


def _denominator(params: MapParams, T: int, regime: Regime) -> Fraction:
    H_T = params.H ** T
    return H_T - 1 if regime is Regime.POSITIVE_MULTIPLIER else H_T + 1


def theta_interval(params: MapParams, T: int, regime: Union[Regime, str], hi_closed: bool = True) -> ThetaInterval:
    """
    Interval of theta values stabilizing T-cycles of the regime's multiplier sign.
    hi_closed=True is the boundedness/invariance form; pass False for the strict
    stability condition.
    """
    _check_period(T)
    regime = Regime.parse(regime)
    H_T = params.H ** T
    d = _denominator(params, T, regime)
    return ThetaInterval(
        lo=(H_T - 1 / params.H) / d,
        hi=(H_T + 1 / params.H) / d,
        hi_closed=hi_closed,
        regime=regime,
    )


def theta_from_offset(params: MapParams, T: int, regime: Union[Regime, str], offset: RegimeOffset) -> Fraction:
    _check_period(T)
    regime = Regime.parse(regime)
    return (params.H ** T + offset.c / params.H) / _denominator(params, T, regime)


def offset_of_theta(params: MapParams, T: int, regime: Union[Regime, str], theta: Fraction) -> Fraction:
    _check_period(T)
    regime = Regime.parse(regime)
    return (theta * _denominator(params, T, regime) - params.H ** T) * params.H


def zero_multiplier_theta(params: MapParams, T: int, regime: Union[Regime, str]) -> Fraction:
    """Midpoint of the regime interval; the matching T-cycles become super-stable there"""
    return theta_from_offset(params, T, regime, RegimeOffset(Fraction(0)))


def classify_theta(params: MapParams, T: int, theta: Fraction) -> Optional[Regime]:
    for regime in (Regime.POSITIVE_MULTIPLIER, Regime.NEGATIVE_MULTIPLIER):
        if theta_interval(params, T, regime).contains(theta):
            return regime
    return None


def invariance_guaranteed(params: MapParams, T: int, theta: Fraction) -> bool:
    """theta in (lo, H^T/(H^T+1)]: [0, H/2] is then an invariant set of F"""
    interval = theta_interval(params, T, Regime.NEGATIVE_MULTIPLIER)
    return interval.lo < theta <= params.H ** T / (params.H ** T + 1)


def negative_axis_rate(params: MapParams, T: int, theta: Fraction) -> Fraction:
    """alpha with F(x) = alpha*x for x <= 0"""
    H_T = params.H ** T
    return params.H * (H_T - theta * (H_T - 1))


def controlled_multiplier(mu: Fraction, theta: Fraction, T: int) -> Fraction:
    """lambda = mu*(theta + (1 - theta)*mu)^T"""
    mu = Fraction(mu)
    theta = Fraction(theta)
    return mu * (theta + (1 - theta) * mu) ** T


def is_locally_stable(mu: Fraction, theta: Fraction, T: int) -> bool:
    return abs(controlled_multiplier(mu, theta, T)) < 1


def subcycle_stable(T: int, tau: int, regime: Union[Regime, str], mu_tau_sign: int) -> bool:
    """
    Stability of a tau-cycle (tau | T) under the period-T control.
    Positive regime: stable iff mu_tau > 0, or mu_tau < 0 and T/tau even.
    Negative regime: stable iff mu_tau < 0 and T/tau odd.
    """
    _check_period(T)
    if tau < 1 or T % tau != 0:
        raise ParameterError(f"tau={tau} does not divide T={T}", field="tau")
    if mu_tau_sign not in (1, -1):
        raise ParameterError(f"multiplier sign must be +1 or -1, got {mu_tau_sign}", field="sign")
    p = T // tau
    if Regime.parse(regime) is Regime.POSITIVE_MULTIPLIER:
        return mu_tau_sign > 0 or p % 2 == 0
    return mu_tau_sign < 0 and p % 2 == 1


def divisors(n: int) -> List[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def mobius(n: int) -> int:
    """Moebius function by trial division"""
    if n < 1:
        raise ParameterError(f"mobius is defined for n >= 1, got {n}", field="n")
    result = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


def count_cycles(T: int) -> int:
    """Number of distinct proper T-cycles of the tent map for H > 2"""
    _check_period(T)
    if T > MAX_COUNT_PERIOD:
        raise ParameterError(f"period must be <= {MAX_COUNT_PERIOD}, got {T}", field="T")
    if T == 1:
        return 2
    total = sum(mobius(d) * 2 ** (T // d) for d in divisors(T))
    return total // T
