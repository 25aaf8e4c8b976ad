from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tentctl.errors import ParameterError
from tentctl.hp_real import HPReal, parse_rational


def test_parse_rational_forms():
    assert parse_rational("9/8") == Fraction(9, 8)
    assert parse_rational("2.5") == Fraction(5, 2)
    assert parse_rational("1e-15") == Fraction(1, 10 ** 15)
    assert parse_rational(7) == 7


def test_parse_rational_rejects_garbage():
    with pytest.raises(ParameterError) as info:
        parse_rational("nine/eight", field="theta")
    assert info.value.field == "theta"


def test_decimal_literal_is_exact():
    x = HPReal.of("0.123456789012345678", 18)
    assert x.value == Decimal("0.123456789012345678")
    assert x.to_fraction() == Fraction(123456789012345678, 10 ** 18)


def test_rational_text_rounds_to_nearest():
    third = HPReal.of("1/3", 20)
    assert str(third) == "0.33333333333333333333"
    assert third < Fraction(1, 3)
    assert HPReal.of("2/3", 5).value == Decimal("0.66667")


def test_division_rounds_at_precision():
    assert (HPReal.of(1, 10) / 3).value == Decimal("0.3333333333")
    with pytest.raises(ZeroDivisionError):
        HPReal.of(1, 10) / HPReal.of(0, 10)


def test_result_precision_is_operand_minimum():
    total = HPReal.of(1, 30) + HPReal.of("1e-20", 10)
    assert total.precision == 10
    assert total == 1


def test_reflected_operations():
    x = HPReal.of("0.25", 12)
    assert (1 - x).value == Decimal("0.75")
    assert (3 * x).value == Decimal("0.75")
    assert (1 / x).value == Decimal(4)
    assert -x == Fraction(-1, 4)
    assert abs(-x) == x


def test_malformed_literal():
    with pytest.raises(ParameterError):
        HPReal.of("zero point five", 10)
    with pytest.raises(ParameterError):
        HPReal.of("0.5", 0)


def test_power_of_ten_and_str():
    assert HPReal.power_of_ten(-15, 18).value == Decimal("1e-15")
    assert str(HPReal.of(0, 5)) == "0"
    assert float(HPReal.of("0.5", 5)) == 0.5


@given(
    st.fractions(min_value=-1000, max_value=1000, max_denominator=10 ** 6),
    st.fractions(min_value=-1000, max_value=1000, max_denominator=10 ** 6),
    st.integers(min_value=10, max_value=60),
)
@settings(max_examples=200, deadline=None)
def test_operations_have_bounded_relative_error(a, b, precision):
    x, y = HPReal.of(a, precision), HPReal.of(b, precision)
    bound = Fraction(1, 10 ** (precision - 1))
    exact_x, exact_y = x.to_fraction(), y.to_fraction()
    for computed, exact in ((x + y, exact_x + exact_y), (x - y, exact_x - exact_y), (x * y, exact_x * exact_y)):
        assert abs(computed.to_fraction() - exact) <= bound * abs(exact)
    if exact_y != 0:
        quotient = exact_x / exact_y
        assert abs((x / y).to_fraction() - quotient) <= bound * abs(quotient)


@given(st.fractions(min_value=-10, max_value=10, max_denominator=1000), st.fractions(min_value=-10, max_value=10, max_denominator=1000))
@settings(max_examples=100, deadline=None)
def test_comparisons_are_exact_on_stored_values(a, b):
    x, y = HPReal.of(a, 40), HPReal.of(b, 40)
    assert (x < y) == (x.to_fraction() < y.to_fraction())
    assert (x <= y) == (x.to_fraction() <= y.to_fraction())
