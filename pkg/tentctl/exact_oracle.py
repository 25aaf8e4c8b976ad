"""
Exact enumeration of tent-map cycles through symbolic dynamics
Each canonical primitive necklace over {L, R} is composed into an affine map,
its fixed point is solved in rationals and kept when every orbit point sits on
the branch its symbol names.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Union

from tentctl.control_design import count_cycles
from tentctl.errors import OracleRangeError, ParameterError
from tentctl.tent_map import HALF, MapParams, tent_exact

MAX_ORACLE_PERIOD = 24

Numeric = Union[Fraction, Any]


@dataclass(frozen=True)
class SymbolSequence:
    symbols: str  # over "LR"; L = left branch (x <= 1/2), R = right branch (x > 1/2)

    def __post_init__(self):
        if not self.symbols or set(self.symbols) - {"L", "R"}:
            raise ParameterError(f"symbol sequence must be a non-empty word over L/R, got {self.symbols!r}", field="symbols")

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return self.symbols

    def rotate(self, k: int) -> "SymbolSequence":
        k %= len(self.symbols)
        return SymbolSequence(self.symbols[k:] + self.symbols[:k])

    @property
    def r_count(self) -> int:
        return self.symbols.count("R")

    @property
    def sign(self) -> int:
        return -1 if self.r_count % 2 else 1

    @property
    def is_primitive(self) -> bool:
        n = len(self.symbols)
        return all(self.symbols != self.rotate(k).symbols for k in range(1, n))

    @property
    def is_canonical(self) -> bool:
        n = len(self.symbols)
        return all(self.symbols <= self.rotate(k).symbols for k in range(1, n))

    def canonical(self) -> "SymbolSequence":
        return min((self.rotate(k) for k in range(len(self.symbols))), key=lambda s: s.symbols)


@dataclass(frozen=True)
class AffineForm:
    a: Fraction
    b: Fraction


@dataclass(frozen=True)
class ExactCycle:
    points: tuple  # of Fraction, rotation starting at the smallest point
    symbols: SymbolSequence  # itinerary aligned with points
    multiplier_sign: int
    T: int

    @property
    def necklace(self) -> SymbolSequence:
        return self.symbols.canonical()

    def to_record(self) -> Dict[str, Any]:
        return {
            "T": self.T,
            "symbols": str(self.symbols),
            "sign": self.multiplier_sign,
            "points": [f"{p.numerator}/{p.denominator}" for p in self.points],
        }


def _check_range(T: int):
    if int(T) != T or not 1 <= T <= MAX_ORACLE_PERIOD:
        raise OracleRangeError(f"period must be in 1..{MAX_ORACLE_PERIOD}, got {T}", field="T")


def _lyndon_words(n: int) -> Iterator[List[int]]:
    """Duval's generator of binary Lyndon words of length exactly n, in lexicographic order"""
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if m == n:
            yield list(w)
        while len(w) < n:
            w.append(w[-m])
        while w and w[-1] == 1:
            w.pop()


def primitive_necklaces(T: int) -> List[SymbolSequence]:
    """Canonical primitive binary necklaces of length T (L < R)"""
    _check_range(T)
    return [SymbolSequence("".join("LR"[bit] for bit in word)) for word in _lyndon_words(T)]


def affine_compose(seq: SymbolSequence, params: MapParams) -> AffineForm:
    """(a, b) with f_{s_T} o ... o f_{s_1}(x) = a*x + b, f_L(x) = Hx, f_R(x) = H - Hx"""
    H = params.H
    a, b = Fraction(1), Fraction(0)
    for symbol in seq.symbols:
        if symbol == "L":
            a, b = H * a, H * b
        else:
            a, b = -H * a, H - H * b
    return AffineForm(a, b)


def _on_branch(x: Fraction, symbol: str) -> bool:
    return x <= HALF if symbol == "L" else x > HALF


def _solve_orbit(seq: SymbolSequence, params: MapParams) -> Optional[List[Fraction]]:
    """Orbit realizing `seq` from its first symbol, or None when a point leaves its branch"""
    form = affine_compose(seq, params)
    x = form.b / (1 - form.a)  # |a| = H^T > 1
    orbit = []
    for symbol in seq.symbols:
        if not _on_branch(x, symbol):
            return None
        # orbits through 1/2 or 1 only occur at H = 2 and end at 0
        if x == HALF or x == 1 or not 0 <= x <= 1:
            return None
        orbit.append(x)
        x = tent_exact(x, params)
    return orbit


def solve_cycle(seq: SymbolSequence, params: MapParams) -> Optional[ExactCycle]:
    if not (seq.is_primitive and seq.is_canonical):
        raise ParameterError(f"{seq} is not a canonical primitive necklace", field="symbols")
    orbit = _solve_orbit(seq, params)
    if orbit is None:
        return None
    start = orbit.index(min(orbit))
    return ExactCycle(
        points=tuple(orbit[start:] + orbit[:start]),
        symbols=seq.rotate(start),
        multiplier_sign=seq.sign,
        T=len(seq),
    )


def enumerate_cycles(params: MapParams, T: int) -> List[ExactCycle]:
    """All proper T-cycles, sorted by smallest point"""
    _check_range(T)
    cycles = []
    for seq in primitive_necklaces(T):
        cycle = solve_cycle(seq, params)
        if cycle is not None:
            cycles.append(cycle)
    cycles.sort(key=lambda c: c.points[0])

    expected = count_cycles(T)
    if params.H > 2 and len(cycles) != expected:
        logging.error(f"Oracle found {len(cycles)} cycles of period {T} at H={params.H}, expected {expected}")
    elif len(cycles) != expected:
        logging.info(f"H=2: {expected - len(cycles)} necklaces of period {T} touch 1/2 or 1 and were rejected")
    return cycles


def as_fraction(x: Numeric) -> Fraction:
    if hasattr(x, "to_fraction"):
        return x.to_fraction()
    return Fraction(x)


def itinerary(points: Sequence[Numeric]) -> SymbolSequence:
    """Symbols read off orbit points (L iff x <= 1/2)"""
    return SymbolSequence("".join("L" if as_fraction(p) <= HALF else "R" for p in points))


def exact_cycle_for(points: Sequence[Numeric], params: MapParams) -> Optional[List[Fraction]]:
    """Exact cycle with the same itinerary as `points`, aligned with them"""
    seq = itinerary(points)
    if not seq.is_primitive:
        return None
    return _solve_orbit(seq, params)


def base_digits(x: Fraction, base: int, n: int) -> List[int]:
    """First n digits of x in [0, 1) written in `base` (truncated expansion)"""
    if not 0 <= x < 1:
        raise ParameterError(f"digit expansion needs 0 <= x < 1, got {x}", field="x")
    digits = []
    for _ in range(n):
        x *= base
        digit = x.numerator // x.denominator
        digits.append(digit)
        x -= digit
    return digits


def record_points(record: Dict[str, Any]) -> List[Fraction]:
    """Parse the points of an ExactCycle or NumericCycle JSON record"""
    try:
        return [Fraction(p) for p in record["points"]]
    except (KeyError, TypeError, ValueError) as e:
        raise ParameterError(f"malformed cycle record: {e}", field="input")
