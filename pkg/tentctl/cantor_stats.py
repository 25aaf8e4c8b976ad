"""
Distribution statistics for periodic points and first-type Cantor points
Histograms are computed from exact rationals wherever the points allow it,
so bin membership never depends on float rounding.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from tentctl.control_design import divisors, subcycle_stable
from tentctl.errors import ParameterError
from tentctl.exact_oracle import as_fraction, base_digits, enumerate_cycles
from tentctl.orbit_finder import NumericCycle, deduplicate, default_threshold, grid_search, resolve_precision, search_seeds
from tentctl.hp_real import HPReal
from tentctl.tent_map import MapParams, Regime

DEFAULT_BINS = 50
CANTOR_DIGITS = 40
INT64_DEPTH = 39  # 3^39 < 2^63


class Normalization(str, Enum):
    COUNTS = "counts"
    DENSITY = "density"


@dataclass(frozen=True)
class HistogramSpec:
    bins: int = DEFAULT_BINS
    normalization: Normalization = Normalization.COUNTS

    def __post_init__(self):
        if int(self.bins) != self.bins or self.bins < 1:
            raise ParameterError(f"bins must be a positive integer, got {self.bins}", field="bins")
        object.__setattr__(self, "normalization", Normalization(self.normalization))


@dataclass
class FirstTypeSample:
    """Points sum(alpha_j * 2/3^j, j = 1..depth) stored as numerators over 3^depth"""
    depth: int
    count: int
    seed: int
    numerators: Union[np.ndarray, List[int]]

    @property
    def denominator(self) -> int:
        return 3 ** self.depth

    @property
    def points(self) -> List[Fraction]:
        return [Fraction(int(n), self.denominator) for n in self.numerators]

    def __len__(self):
        return self.count


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample_first_type(depth: int, count: int, seed: int) -> FirstTypeSample:
    """Draw `count` first-type points with independent fair ternary digits 0/2"""
    if depth < 1:
        raise ParameterError(f"depth must be >= 1, got {depth}", field="depth")
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}", field="count")
    if not 0 <= seed < 2 ** 64:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}", field="seed")

    rng = _generator(seed)
    bits = rng.integers(0, 2, size=(count, depth), dtype=np.uint8)
    if depth <= INT64_DEPTH:
        weights = np.array([2 * 3 ** (depth - j) for j in range(1, depth + 1)], dtype=np.int64)
        numerators = bits.astype(np.int64) @ weights
    else:
        weights = [2 * 3 ** (depth - j) for j in range(1, depth + 1)]
        numerators = [sum(w for bit, w in zip(row, weights) if bit) for row in bits.tolist()]
    return FirstTypeSample(depth=depth, count=count, seed=seed, numerators=numerators)


def bin_indices(points: Union[Sequence[Any], FirstTypeSample], bins: int) -> np.ndarray:
    """floor(x * bins) computed exactly, with x = 1 folded into the last bin"""
    if isinstance(points, FirstTypeSample):
        if points.depth <= INT64_DEPTH and points.denominator * bins < 2 ** 63:
            index = (np.asarray(points.numerators, dtype=np.int64) * bins) // points.denominator
        else:
            index = np.array([int(n) * bins // points.denominator for n in points.numerators], dtype=np.int64)
        return np.minimum(index, bins - 1)

    index = np.empty(len(points), dtype=np.int64)
    for i, x in enumerate(points):
        exact = as_fraction(x)
        if not 0 <= exact <= 1:
            raise ParameterError(f"point {i} = {x} is outside [0, 1]", field="points")
        index[i] = min(int(exact * bins), bins - 1)
    return index


def histogram(points: Union[Sequence[Any], FirstTypeSample], spec: HistogramSpec) -> List[Union[int, float]]:
    """Bin values over [i/B, (i+1)/B), last bin closed; Density is counts / (M/B)"""
    counts = np.bincount(bin_indices(points, spec.bins), minlength=spec.bins)
    if spec.normalization is Normalization.COUNTS:
        return counts.tolist()
    total = int(counts.sum())
    if total == 0:
        return [0.0] * spec.bins
    return (counts * spec.bins / total).tolist()


def histogram_rows(points: Union[Sequence[Any], FirstTypeSample], bins: int) -> List[Tuple[str, str, int, str]]:
    """(bin_left, bin_right, count, density) per bin for the cantor CSV"""
    counts = histogram(points, HistogramSpec(bins, Normalization.COUNTS))
    densities = histogram(points, HistogramSpec(bins, Normalization.DENSITY))
    return [
        (f"{Fraction(i, bins)}", f"{Fraction(i + 1, bins)}", count, repr(float(density)))
        for i, (count, density) in enumerate(zip(counts, densities))
    ]


def ternary_is_cantor(x: Any, digits: int = CANTOR_DIGITS) -> bool:
    """Base-3 expansion free of the digit 1 up to `digits` digits (terminating ...1 = ...0222 allowed)"""
    x = as_fraction(x)
    if x == 1:
        return True
    if not 0 <= x < 1:
        return False
    expansion = base_digits(x, 3, digits)
    if 1 not in expansion:
        return True
    i = expansion.index(1)
    truncated = sum(Fraction(d, 3 ** (j + 1)) for j, d in enumerate(expansion[: i + 1]))
    return truncated == x


def _meets_cantor(lo: Fraction, hi: Fraction, left: Fraction = Fraction(0), width: Fraction = Fraction(1)) -> bool:
    right = left + width
    if hi < left or lo > right:
        return False
    if lo <= left <= hi or lo <= right <= hi:
        return True
    third = width / 3
    return _meets_cantor(lo, hi, left, third) or _meets_cantor(lo, hi, right - third, third)


def gap_bins(bins: int) -> List[int]:
    """Indices i whose closed bin [i/B, (i+1)/B] holds no point of the middle-thirds Cantor set"""
    HistogramSpec(bins)
    return [i for i in range(bins) if not _meets_cantor(Fraction(i, bins), Fraction(i + 1, bins))]


def coefficient_of_variation(values: Sequence[float]) -> float:
    """std/mean over the nonempty bins"""
    data = np.asarray(values, dtype=float)
    data = data[data > 0]
    if data.size == 0:
        return 0.0
    return float(np.std(data) / np.mean(data))


class CloudMode(str, Enum):
    ORACLE = "oracle"
    FINDER = "finder"


@dataclass
class CycleCloud:
    points: List[Any]
    cycle_count: int
    mode: CloudMode
    cycles: List[Any] = field(default_factory=list)


def _oracle_cloud(params: MapParams, T: int, regimes: Sequence[Regime], include_subcycles: bool) -> CycleCloud:
    cycles = []
    periods = divisors(T) if include_subcycles else [T]
    for tau in periods:
        for cycle in enumerate_cycles(params, tau):
            if any(subcycle_stable(T, tau, regime, cycle.multiplier_sign) for regime in regimes):
                cycles.append(cycle)
    points = sorted(p for cycle in cycles for p in cycle.points)
    return CycleCloud(points=points, cycle_count=len(cycles), mode=CloudMode.ORACLE, cycles=cycles)


def _finder_cloud(
    params: MapParams,
    T: int,
    regimes: Sequence[Regime],
    offsets: Sequence[Any],
    include_subcycles: bool,
    seeds: Optional[Sequence[str]],
    grid_size: Optional[int],
    precision: Optional[int],
    **finder_options,
) -> CycleCloud:
    if not offsets:
        raise ParameterError("finder mode needs at least one offset", field="offset")
    if seeds is None and grid_size is None:
        raise ParameterError("finder mode needs seeds or a grid size", field="grid_size")
    precision = resolve_precision(params, T, precision)
    found: List[NumericCycle] = []
    for regime, offset in product(regimes, offsets):
        if seeds is not None:
            found.extend(search_seeds(params, T, regime, seeds, precision, offset=offset, **finder_options))
        else:
            found.extend(grid_search(params, T, regime, offset, grid_size, precision, **finder_options))
    if not include_subcycles:
        found = [c for c in found if not c.is_subcycle]
    threshold = finder_options.get("threshold")
    tolerance = 10 * (default_threshold(precision) if threshold is None else HPReal.of(threshold, precision))
    cycles = deduplicate(found, tolerance)
    points = sorted((p for cycle in cycles for p in cycle.points), key=lambda p: p.value)
    return CycleCloud(points=points, cycle_count=len(cycles), mode=CloudMode.FINDER, cycles=cycles)


def cycle_point_cloud(
    params: MapParams,
    T: int,
    regimes: Sequence[Union[Regime, str]] = (Regime.POSITIVE_MULTIPLIER, Regime.NEGATIVE_MULTIPLIER),
    offsets: Sequence[Any] = (),
    mode: Union[CloudMode, str] = CloudMode.ORACLE,
    include_subcycles: bool = True,
    seeds: Optional[Sequence[str]] = None,
    grid_size: Optional[int] = None,
    precision: Optional[int] = None,
    **finder_options,
) -> CycleCloud:
    """
    Union of the cycle points the requested regimes stabilize.
    Oracle mode enumerates them exactly; finder mode runs the orbit finder for
    every (regime, offset) pair and keeps what converged.
    """
    regimes = [Regime.parse(r) for r in regimes]
    if not regimes:
        raise ParameterError("at least one regime is required", field="regime")
    mode = CloudMode(mode)
    if mode is CloudMode.ORACLE:
        cloud = _oracle_cloud(params, T, regimes, include_subcycles)
    else:
        cloud = _finder_cloud(params, T, regimes, offsets, include_subcycles, seeds, grid_size, precision, **finder_options)
    logging.info(f"{mode.value} cloud H={params.H} T={T}: {cloud.cycle_count} cycles, {len(cloud.points)} points")
    return cloud
