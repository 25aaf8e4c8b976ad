"""
Arbitrary-precision decimal reals
HPReal pairs a Decimal with the number of significant digits it is carried at.
Every operation rounds to nearest at the smaller operand precision.
"""
from __future__ import annotations

from decimal import Decimal, Context, ROUND_HALF_EVEN, InvalidOperation
from fractions import Fraction
from functools import lru_cache
from typing import Union

from tentctl.errors import ParameterError

Number = Union["HPReal", int, Fraction, Decimal, str, float]

MAX_EXPONENT = 999_999_999


@lru_cache(maxsize=None)
def decimal_context(precision: int) -> Context:
    """Round-to-nearest context carrying `precision` significant digits"""
    return Context(
        prec=precision,
        rounding=ROUND_HALF_EVEN,
        Emax=MAX_EXPONENT,
        Emin=-MAX_EXPONENT,
    )


def parse_rational(text: Union[str, int, Fraction], field: str = "value") -> Fraction:
    """Parse '9/8', '2.5', '1e-15' or an integer into an exact Fraction"""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ParameterError(f"malformed rational {text!r}: {e}", field=field)


def fraction_to_decimal(value: Fraction, precision: int) -> Decimal:
    ctx = decimal_context(precision)
    return ctx.divide(Decimal(value.numerator), Decimal(value.denominator))


class HPReal:
    __slots__ = ("value", "precision")

    def __init__(self, value: Decimal, precision: int):
        # callers hand in values already rounded to `precision`
        self.value = value
        self.precision = precision

    @classmethod
    def of(cls, x: Number, precision: int) -> "HPReal":
        """Round any supported number (or decimal/rational literal) to `precision` digits"""
        if precision < 1:
            raise ParameterError(f"precision must be positive, got {precision}", field="precision")
        ctx = decimal_context(precision)
        if isinstance(x, HPReal):
            return cls(ctx.plus(x.value), precision)
        if isinstance(x, Fraction):
            return cls(fraction_to_decimal(x, precision), precision)
        if isinstance(x, (int, Decimal)):
            return cls(ctx.plus(Decimal(x)), precision)
        if isinstance(x, float):
            return cls(ctx.plus(Decimal(x)), precision)
        text = str(x).strip()
        if "/" in text:
            return cls(fraction_to_decimal(parse_rational(text), precision), precision)
        try:
            return cls(ctx.create_decimal(text), precision)
        except InvalidOperation:
            raise ParameterError(f"malformed decimal {text!r}", field="value")

    @classmethod
    def power_of_ten(cls, exponent: int, precision: int) -> "HPReal":
        return cls(Decimal(1).scaleb(exponent), precision)

    def with_precision(self, precision: int) -> "HPReal":
        return HPReal.of(self, precision)

    def to_fraction(self) -> Fraction:
        return Fraction(self.value)

    def to_decimal(self) -> Decimal:
        return self.value

    def _coerce(self, other: Number) -> "HPReal":
        if isinstance(other, HPReal):
            return other
        return HPReal.of(other, self.precision)

    def _binary(self, other: Number, op) -> "HPReal":
        other = self._coerce(other)
        precision = min(self.precision, other.precision)
        return HPReal(op(decimal_context(precision), self.value, other.value), precision)

    def __add__(self, other):
        return self._binary(other, Context.add)

    def __radd__(self, other):
        return self._coerce(other)._binary(self, Context.add)

    def __sub__(self, other):
        return self._binary(other, Context.subtract)

    def __rsub__(self, other):
        return self._coerce(other)._binary(self, Context.subtract)

    def __mul__(self, other):
        return self._binary(other, Context.multiply)

    def __rmul__(self, other):
        return self._coerce(other)._binary(self, Context.multiply)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.value == 0:
            raise ZeroDivisionError("HPReal division by zero")
        return self._binary(other, Context.divide)

    def __rtruediv__(self, other):
        return self._coerce(other).__truediv__(self)

    def __neg__(self):
        return HPReal(decimal_context(self.precision).minus(self.value), self.precision)

    def __abs__(self):
        return HPReal(decimal_context(self.precision).abs(self.value), self.precision)

    # comparisons are exact on the stored (already rounded) values
    def __eq__(self, other):
        if isinstance(other, HPReal):
            return self.value == other.value
        if isinstance(other, (int, Fraction, Decimal)):
            return self.value == other
        return NotImplemented

    def __lt__(self, other):
        return self.value < self._coerce_exact(other)

    def __le__(self, other):
        return self.value <= self._coerce_exact(other)

    def __gt__(self, other):
        return self.value > self._coerce_exact(other)

    def __ge__(self, other):
        return self.value >= self._coerce_exact(other)

    def _coerce_exact(self, other):
        if isinstance(other, HPReal):
            return other.value
        if isinstance(other, (int, Fraction, Decimal)):
            return other
        return self._coerce(other).value

    def __hash__(self):
        return hash(self.value)

    def __float__(self):
        return float(self.value)

    def __str__(self):
        if self.value == 0:
            return "0"
        return format(self.value, f".{self.precision}g")

    def __repr__(self):
        return f"HPReal('{self.value}', precision={self.precision})"
