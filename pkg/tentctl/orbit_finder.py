"""
Orbit finder for the controlled tent map
Iterates F from seed points, watches the two residual checkpoints
U_n = |F(x_n) - f(x_n)| and Uhat_n = |x_{n+T} - x_n|, extracts the proper
period of converged orbits and merges the cycles found from many seeds.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from tentctl.config import settings
from tentctl.control_design import RegimeOffset, divisors, theta_from_offset
from tentctl.errors import ParameterError
from tentctl.exact_oracle import ExactCycle, as_fraction, exact_cycle_for
from tentctl.hp_real import HPReal, fraction_to_decimal, parse_rational
from tentctl.tent_map import ControlConfig, MapParams, Regime, control_eval, controlled_step

GUARD_DIGITS = 5
WINDOW_MARGIN = 5
DEDUP_FACTOR = 10


def required_precision(params: MapParams, T: int) -> int:
    """ceil(1.05*T*log10(H)) + 10 significant digits"""
    return math.ceil(1.05 * T * math.log10(float(params.H))) + 10


def resolve_precision(params: MapParams, T: int, requested: Optional[int] = None) -> int:
    """Explicit request, else the TENTCTL_PRECISION override, else the precision rule"""
    rule = required_precision(params, T)
    if requested is not None:
        if requested < 1:
            raise ParameterError(f"precision must be positive, got {requested}", field="precision")
        return requested
    if settings.precision is not None:
        if settings.precision < rule:
            logging.warning(
                f"TENTCTL_PRECISION={settings.precision} is below the {rule} digits needed "
                f"for H={params.H}, T={T}; using {rule}"
            )
            return rule
        return settings.precision
    return rule


def default_threshold(precision: int) -> HPReal:
    return HPReal.power_of_ten(-(precision - GUARD_DIGITS), precision)


def control_digits(theta: Fraction) -> Optional[int]:
    """p with 10^-p ~ |1 - theta|; None when theta = 1"""
    gap = abs(1 - theta)
    if gap == 0:
        return None
    return -fraction_to_decimal(gap, 30).adjusted()


@dataclass
class SearchConfig:
    cfg: ControlConfig
    x0: HPReal
    max_iters: int
    residual_threshold: HPReal
    divergence_bound: HPReal
    precision: int
    window: Optional[int] = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be positive, got {self.max_iters}", field="max_iters")
        rule = required_precision(self.cfg.params, self.cfg.T)
        if self.precision < rule:
            raise ParameterError(
                f"precision {self.precision} is below the {rule} digits needed for H={self.cfg.params.H}, T={self.cfg.T}",
                field="precision",
            )
        p = control_digits(self.cfg.theta)
        if p is not None and self.residual_threshold > HPReal.power_of_ten(-(p + 2), self.precision):
            raise ParameterError(
                f"threshold {self.residual_threshold} must be <= 1e-{p + 2} since |1 - theta| ~ 1e-{p}",
                field="threshold",
            )
        if self.window is None:
            self.window = self.cfg.T + WINDOW_MARGIN
        if self.window < 1:
            raise ParameterError(f"window must be positive, got {self.window}", field="window")
        self.x0 = self.x0.with_precision(self.precision)
        self.residual_threshold = self.residual_threshold.with_precision(self.precision)
        self.divergence_bound = self.divergence_bound.with_precision(self.precision)

    @classmethod
    def build(
        cls,
        cfg: ControlConfig,
        x0: Union[HPReal, str, Fraction],
        precision: int,
        threshold: Union[HPReal, str, None] = None,
        max_iters: Optional[int] = None,
        divergence_bound: Union[HPReal, str, None] = None,
        window: Optional[int] = None,
    ) -> "SearchConfig":
        """SearchConfig with the documented defaults filled in"""
        return cls(
            cfg=cfg,
            x0=HPReal.of(x0, precision),
            max_iters=settings.max_iters if max_iters is None else max_iters,
            residual_threshold=default_threshold(precision) if threshold is None else HPReal.of(threshold, precision),
            divergence_bound=HPReal.of(10 * cfg.params.H ** 2 if divergence_bound is None else divergence_bound, precision),
            precision=precision,
            window=window,
        )


class VerdictKind(str, Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    MAX_ITERS = "max_iters"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    step: Optional[int] = None  # n1 for CONVERGED, index of the escaping state for DIVERGED

    @property
    def converged(self) -> bool:
        return self.kind is VerdictKind.CONVERGED


@dataclass
class OrbitTrace:
    """States x_1, x_2, ... (1-based in residual bookkeeping); U[n-1] = U_n, Uhat[n-1] = Uhat_n"""
    cfg: ControlConfig
    states: List[HPReal]
    residuals_U: List[HPReal]
    residuals_Uhat: List[HPReal]
    verdict: Verdict


@dataclass(frozen=True)
class NumericCycle:
    points: Tuple[HPReal, ...]  # canonical rotation starting at the smallest point
    proper_period: int
    target_period: int
    max_residual: HPReal
    theta: Fraction
    regime: Regime
    seed: Optional[str] = None
    threshold: Optional[HPReal] = None  # residual threshold the finder ran with

    @property
    def is_subcycle(self) -> bool:
        return self.proper_period < self.target_period

    def to_record(self) -> Dict[str, Any]:
        return {
            "T": self.target_period,
            "tau": self.proper_period,
            "theta": f"{self.theta.numerator}/{self.theta.denominator}",
            "regime": self.regime.value,
            "points": [str(p) for p in self.points],
            "max_residual": format(self.max_residual.value, ".3e"),
            "seed": self.seed,
            "threshold": None if self.threshold is None else format(self.threshold.value, ".1e"),
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "NumericCycle":
        try:
            texts = [str(p) for p in record["points"]]
            precision = max(len(t.replace("-", "").replace(".", "").split("e")[0].split("E")[0]) for t in texts)
            return cls(
                points=tuple(HPReal.of(t, max(precision, 1)) for t in texts),
                proper_period=int(record["tau"]),
                target_period=int(record["T"]),
                max_residual=HPReal.of(record.get("max_residual", "0"), max(precision, 1)),
                theta=parse_rational(record["theta"], field="theta"),
                regime=Regime.parse(record["regime"]),
                seed=record.get("seed"),
                threshold=None if record.get("threshold") is None else HPReal.of(record["threshold"], 5),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParameterError(f"malformed cycle record: {e}", field="input")


@dataclass
class SeedOutcome:
    seed: str
    verdict: Verdict
    cycle: Optional[NumericCycle] = None


def iterate_controlled(search: SearchConfig) -> OrbitTrace:
    """
    Iterate x_{n+1} = F(x_n) from search.x0 until both checkpoints hold for
    `window` consecutive recorded steps, the orbit leaves the divergence bound,
    or max_iters runs out.
    """
    cfg = search.cfg
    T = cfg.T
    threshold = search.residual_threshold
    states = [search.x0]
    residuals_U: List[HPReal] = []
    residuals_Uhat: List[HPReal] = []
    last_bad = 0
    verdict = Verdict(VerdictKind.MAX_ITERS)

    for n in range(1, search.max_iters + 1):
        image, following = controlled_step(states[-1], cfg)
        u = abs(following - image)
        states.append(following)
        residuals_U.append(u)
        if u >= threshold:
            last_bad = n

        k = len(states) - T  # Uhat_k is now available
        if k >= 1:
            u_hat = abs(following - states[k - 1])
            residuals_Uhat.append(u_hat)
            if u_hat >= threshold:
                last_bad = max(last_bad, k)

        if abs(following) > search.divergence_bound:
            verdict = Verdict(VerdictKind.DIVERGED, len(states))
            break

        n1 = last_bad + 1
        if k - n1 + 1 >= search.window:
            verdict = Verdict(VerdictKind.CONVERGED, n1)
            break

    return OrbitTrace(cfg, states, residuals_U, residuals_Uhat, verdict)


def _rotate_to_smallest(points: Sequence[HPReal]) -> Tuple[HPReal, ...]:
    start = min(range(len(points)), key=lambda i: points[i].value)
    return tuple(points[start:]) + tuple(points[:start])


def extract_cycle(trace: OrbitTrace, T: int, threshold: HPReal) -> Optional[NumericCycle]:
    """Smallest divisor tau of T for which the tail of the trace is tau-periodic"""
    if not trace.verdict.converged:
        raise ParameterError(f"cannot extract a cycle from a {trace.verdict.kind.value} trace", field="trace")
    states = trace.states
    for d in divisors(T):
        if len(states) < T + d:
            continue
        tail = range(len(states) - d - T, len(states) - d)
        if all(abs(states[j + d] - states[j]) < threshold for j in tail):
            points = _rotate_to_smallest(states[-d:])
            residual = max(abs(control_eval(points[i], trace.cfg) - points[(i + 1) % d]) for i in range(d))
            return NumericCycle(
                points=points,
                proper_period=d,
                target_period=T,
                max_residual=residual,
                theta=trace.cfg.theta,
                regime=trace.cfg.regime,
                threshold=threshold,
            )
    logging.warning(f"False convergence flag: no divisor of T={T} makes the trace tail periodic")
    return None


def cycle_distance(a: Sequence[HPReal], b: Sequence[HPReal]) -> Optional[HPReal]:
    """Max pointwise difference minimized over rotations; None for different lengths"""
    if len(a) != len(b):
        return None
    n = len(a)
    best = None
    for shift in range(n):
        distance = max(abs(a[i] - b[(i + shift) % n]) for i in range(n))
        if best is None or distance < best:
            best = distance
    return best


def deduplicate(cycles: Sequence[NumericCycle], tolerance: HPReal) -> List[NumericCycle]:
    """Keep the first of every group of cycles agreeing within tolerance, sorted by smallest point"""
    distinct: List[NumericCycle] = []
    for cycle in cycles:
        duplicate = False
        for kept in distinct:
            distance = cycle_distance(cycle.points, kept.points)
            if distance is not None and distance <= tolerance:
                duplicate = True
                break
        if not duplicate:
            distinct.append(cycle)
    return sorted(distinct, key=lambda c: (c.points[0].value, c.proper_period))


def resolve_theta(
    params: MapParams,
    T: int,
    regime: Union[Regime, str],
    offset: Union[RegimeOffset, str, Fraction, None] = None,
    theta: Union[Fraction, str, None] = None,
) -> Fraction:
    if theta is not None:
        return parse_rational(theta, field="theta")
    if offset is None:
        raise ParameterError("either an offset or theta is required", field="offset")
    if not isinstance(offset, RegimeOffset):
        offset = RegimeOffset(parse_rational(offset, field="offset"))
    return theta_from_offset(params, T, regime, offset)


def grid_seeds(grid_size: int) -> List[Tuple[str, Fraction]]:
    """Seeds k/(G+1), k = 1..G; the endpoints 0 and 1 are excluded"""
    if grid_size < 2:
        raise ParameterError(f"grid size must be >= 2, got {grid_size}", field="grid_size")
    return [(f"{k}/{grid_size + 1}", Fraction(k, grid_size + 1)) for k in range(1, grid_size + 1)]


def run_seeds(
    cfg: ControlConfig,
    seeds: Sequence[Tuple[str, Union[Fraction, str, HPReal]]],
    precision: int,
    threshold: Union[HPReal, str, None] = None,
    max_iters: Optional[int] = None,
    window: Optional[int] = None,
    workers: Optional[int] = None,
) -> List[SeedOutcome]:
    """Run the finder independently from every (label, seed); outcomes keep seed order"""
    searches = [
        (label, SearchConfig.build(cfg, seed, precision, threshold=threshold, max_iters=max_iters, window=window))
        for label, seed in seeds
    ]

    def run(item: Tuple[str, SearchConfig]) -> SeedOutcome:
        label, search = item
        trace = iterate_controlled(search)
        if not trace.verdict.converged:
            logging.debug(f"Seed {label}: {trace.verdict.kind.value} at step {trace.verdict.step}")
            return SeedOutcome(label, trace.verdict)
        cycle = extract_cycle(trace, cfg.T, search.residual_threshold)
        if cycle is not None:
            cycle = replace(cycle, seed=label)
        return SeedOutcome(label, trace.verdict, cycle)

    workers = settings.workers if workers is None else workers
    if workers < 1:
        raise ParameterError(f"workers must be positive, got {workers}", field="workers")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, searches))
    else:
        outcomes = [run(item) for item in searches]

    diverged = sum(1 for o in outcomes if o.verdict.kind is VerdictKind.DIVERGED)
    if diverged:
        logging.warning(f"{diverged} of {len(outcomes)} seeds diverged (theta={cfg.theta}, T={cfg.T})")
    return outcomes


def search_seeds(
    params: MapParams,
    T: int,
    regime: Union[Regime, str],
    seeds: Sequence[Union[str, Fraction]],
    precision: Optional[int] = None,
    offset: Union[RegimeOffset, str, Fraction, None] = None,
    theta: Union[Fraction, str, None] = None,
    threshold: Union[HPReal, str, None] = None,
    max_iters: Optional[int] = None,
    window: Optional[int] = None,
    workers: Optional[int] = None,
) -> List[NumericCycle]:
    """Distinct cycles reached from an explicit list of seeds"""
    labelled = [(str(s), s) for s in seeds]
    return _search(params, T, regime, labelled, precision, offset, theta, threshold, max_iters, window, workers)


def grid_search(
    params: MapParams,
    T: int,
    regime: Union[Regime, str],
    offset: Union[RegimeOffset, str, Fraction, None],
    grid_size: int,
    precision: Optional[int] = None,
    theta: Union[Fraction, str, None] = None,
    threshold: Union[HPReal, str, None] = None,
    max_iters: Optional[int] = None,
    window: Optional[int] = None,
    workers: Optional[int] = None,
) -> List[NumericCycle]:
    """Distinct cycles reached from the seeds k/(G+1) of (0, 1)"""
    return _search(
        params, T, regime, grid_seeds(grid_size), precision, offset, theta, threshold, max_iters, window, workers
    )


def _search(params, T, regime, seeds, precision, offset, theta, threshold, max_iters, window, workers) -> List[NumericCycle]:
    regime = Regime.parse(regime)
    cfg = ControlConfig(params, T, regime, resolve_theta(params, T, regime, offset, theta))
    precision = resolve_precision(params, T, precision)
    outcomes = run_seeds(cfg, seeds, precision, threshold, max_iters, window, workers)
    found = [o.cycle for o in outcomes if o.cycle is not None]
    tolerance = DEDUP_FACTOR * (default_threshold(precision) if threshold is None else HPReal.of(threshold, precision))
    distinct = deduplicate(found, tolerance)
    logging.info(
        f"H={params.H} T={T} regime={regime.value}: {len(found)} of {len(outcomes)} seeds converged, "
        f"{len(distinct)} distinct cycles"
    )
    return distinct


def _exact_deviation(points: Sequence[Any], exact: Sequence[Fraction]) -> Optional[Fraction]:
    if len(points) != len(exact):
        return None
    found = [as_fraction(p) for p in points]
    n = len(found)
    return min(max(abs(found[i] - exact[(i + shift) % n]) for i in range(n)) for shift in range(n))


@dataclass
class CycleMatch:
    found_index: int
    exact_index: int
    deviation: Fraction
    subcycle: bool


@dataclass
class MatchReport:
    matches: List[CycleMatch] = field(default_factory=list)
    missing: List[int] = field(default_factory=list)  # exact cycles nobody matched
    unmatched: List[int] = field(default_factory=list)  # found cycles with no exact partner
    ambiguous: List[int] = field(default_factory=list)  # found cycles whose partner was already taken

    @property
    def ok(self) -> bool:
        return not self.unmatched and not self.ambiguous

    @property
    def max_deviation(self) -> Optional[Fraction]:
        return max((m.deviation for m in self.matches), default=None)

    def to_dict(self, exact: Sequence[ExactCycle]) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "max_deviation": None if self.max_deviation is None else format(float(self.max_deviation), ".3e"),
            "matches": [
                {
                    "found": m.found_index,
                    "exact": m.exact_index,
                    "symbols": str(exact[m.exact_index].symbols),
                    "deviation": format(float(m.deviation), ".3e"),
                    "subcycle": m.subcycle,
                }
                for m in self.matches
            ],
            "missing": [exact[i].to_record() for i in self.missing],
            "unmatched": self.unmatched,
            "ambiguous": self.ambiguous,
        }


def verify_against_oracle(
    found: Sequence[NumericCycle],
    exact: Sequence[ExactCycle],
    tol: Union[HPReal, Fraction, str],
) -> MatchReport:
    """Greedy nearest matching of found cycles to exact ones of the same length"""
    tol = as_fraction(tol) if not isinstance(tol, str) else parse_rational(tol, field="tol")
    pairs = []
    for i, cycle in enumerate(found):
        for j, reference in enumerate(exact):
            deviation = _exact_deviation(cycle.points, reference.points)
            if deviation is not None and deviation <= tol:
                pairs.append((deviation, i, j))
    pairs.sort()

    report = MatchReport()
    taken_found, taken_exact, contested = set(), set(), set()
    for deviation, i, j in pairs:
        if i in taken_found:
            continue
        if j in taken_exact:
            contested.add(i)
            continue
        taken_found.add(i)
        taken_exact.add(j)
        report.matches.append(CycleMatch(i, j, deviation, found[i].is_subcycle))

    report.matches.sort(key=lambda m: m.found_index)
    report.ambiguous = sorted(contested - taken_found)
    report.unmatched = [i for i in range(len(found)) if i not in taken_found and i not in contested]
    report.missing = [j for j in range(len(exact)) if j not in taken_exact]
    if report.ambiguous:
        logging.warning(f"Ambiguous matches for found cycles {report.ambiguous}")
    return report


def oracle_residual(cycle: NumericCycle, params: MapParams) -> Optional[HPReal]:
    """
    Max |x_i - eta_i| against the exact cycle sharing the found cycle's itinerary.
    Evaluating |f^(tau)(x) - x| directly would amplify rounding by H^tau.
    """
    exact = exact_cycle_for(cycle.points, params)
    if exact is None:
        return None
    precision = cycle.points[0].precision
    return max(abs(p - HPReal.of(eta, precision)) for p, eta in zip(cycle.points, exact))


def trace_rows(trace: OrbitTrace) -> List[Tuple[str, str, str, str]]:
    """(n, x_n, U_n, Uhat_n) with blanks where a residual is not yet defined"""
    rows = []
    for n, x in enumerate(trace.states, start=1):
        u = str(trace.residuals_U[n - 1]) if n <= len(trace.residuals_U) else ""
        u_hat = str(trace.residuals_Uhat[n - 1]) if n <= len(trace.residuals_Uhat) else ""
        rows.append((str(n), str(x), u, u_hat))
    return rows
