"""
Generalized tent map f(x) = Hx (x <= 1/2), H(1 - x) (x > 1/2) and its
predictive-control counterpart F(x) = f(theta*x + (1 - theta)*f^(T)(x))
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import List, Sequence, Tuple, Union

from tentctl.errors import ParameterError
from tentctl.hp_real import HPReal, parse_rational

HALF = Fraction(1, 2)


class Regime(str, Enum):
    POSITIVE_MULTIPLIER = "pos"
    NEGATIVE_MULTIPLIER = "neg"

    @classmethod
    def parse(cls, text: Union[str, "Regime"]) -> "Regime":
        if isinstance(text, Regime):
            return text
        key = str(text).strip().lower()
        if key in ("pos", "positive", "+"):
            return cls.POSITIVE_MULTIPLIER
        if key in ("neg", "negative", "-"):
            return cls.NEGATIVE_MULTIPLIER
        raise ParameterError(f"unknown regime {text!r} (expected pos or neg)", field="regime")

    @property
    def sign(self) -> int:
        return 1 if self is Regime.POSITIVE_MULTIPLIER else -1


@dataclass(frozen=True)
class MapParams:
    H: Fraction

    def __post_init__(self):
        H = parse_rational(self.H, field="H")
        if H < 2:
            raise ParameterError(f"H must be >= 2, got {H}", field="H")
        object.__setattr__(self, "H", H)


@dataclass(frozen=True)
class ControlConfig:
    params: MapParams
    T: int
    regime: Regime
    theta: Fraction

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ParameterError(f"period must be a positive integer, got {self.T}", field="T")
        object.__setattr__(self, "regime", Regime.parse(self.regime))
        object.__setattr__(self, "theta", parse_rational(self.theta, field="theta"))

    @property
    def H_T(self) -> Fraction:
        return self.params.H ** self.T


@lru_cache(maxsize=1024)
def _constant(value: Fraction, precision: int) -> HPReal:
    return HPReal.of(value, precision)


def tent_eval(x: HPReal, params: MapParams) -> HPReal:
    """f(x); the boundary x = 1/2 belongs to the left branch"""
    h = _constant(params.H, x.precision)
    if x <= HALF:
        return h * x
    return h * (1 - x)


def tent_iterate(x: HPReal, params: MapParams, k: int) -> HPReal:
    if k < 0:
        raise ParameterError(f"iteration count must be >= 0, got {k}", field="k")
    for _ in range(k):
        x = tent_eval(x, params)
    return x


def tent_exact(x: Fraction, params: MapParams) -> Fraction:
    if x <= HALF:
        return params.H * x
    return params.H * (1 - x)


def tent_iterate_exact(x: Fraction, params: MapParams, k: int) -> Fraction:
    for _ in range(k):
        x = tent_exact(x, params)
    return x


def _mix(x: HPReal, f_T: HPReal, cfg: ControlConfig) -> HPReal:
    # 1 - theta rounded from the exact rational, not from the rounded theta
    theta = _constant(cfg.theta, x.precision)
    one_minus_theta = _constant(1 - cfg.theta, x.precision)
    return theta * x + one_minus_theta * f_T


def zeta_eval(x: HPReal, cfg: ControlConfig) -> HPReal:
    """theta*x + (1 - theta)*f^(T)(x)"""
    return _mix(x, tent_iterate(x, cfg.params, cfg.T), cfg)


def control_eval(x: HPReal, cfg: ControlConfig) -> HPReal:
    """F(x) = f(zeta(x))"""
    return tent_eval(zeta_eval(x, cfg), cfg.params)


def controlled_step(x: HPReal, cfg: ControlConfig) -> Tuple[HPReal, HPReal]:
    """Return (f(x), F(x)), sharing the first tent evaluation"""
    image = tent_eval(x, cfg.params)
    f_T = tent_iterate(image, cfg.params, cfg.T - 1)
    return image, tent_eval(_mix(x, f_T, cfg), cfg.params)


def hat_root(params: MapParams, T: int) -> Fraction:
    """Root of zeta(x) = 1/2 right of 1/2 at theta = H^T/(H^T+1); F peaks there at H/2"""
    H = params.H
    return Fraction(3, 4) - 1 / (2 * H) + 1 / (4 * H ** T)


def superstable_cycle(params: MapParams, T: int) -> List[Fraction]:
    """{H^T, H, H^2, ..., H^(T-1)} / (H^T + 1): the cycle F reaches in one step from x >= hat_root"""
    H = params.H
    denominator = H ** T + 1
    return [H ** T / denominator] + [H ** k / denominator for k in range(1, T)]


def graph_rows(cfg: ControlConfig, samples: int, precision: int) -> List[Tuple[HPReal, ...]]:
    """(x, f(x), f^T(x), zeta(x), F(x)) on the uniform grid i/(samples-1) of [0, 1]"""
    if samples < 2:
        raise ParameterError(f"samples must be >= 2, got {samples}", field="samples")
    rows = []
    for i in range(samples):
        x = HPReal.of(Fraction(i, samples - 1), precision)
        f_x = tent_eval(x, cfg.params)
        f_T = tent_iterate(f_x, cfg.params, cfg.T - 1)
        zeta = _mix(x, f_T, cfg)
        rows.append((x, f_x, f_T, zeta, tent_eval(zeta, cfg.params)))
    return rows


def count_flat_runs(values: Sequence[HPReal], tol: HPReal) -> int:
    """Number of maximal runs of consecutive samples whose successive differences are within tol"""
    runs = 0
    in_run = False
    for previous, current in zip(values, values[1:]):
        flat = abs(current - previous) <= tol
        if flat and not in_run:
            runs += 1
        in_run = flat
    return runs
