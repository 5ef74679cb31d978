"""Convergence rates and constants for the expected transport cost of empirical measures.

Covers alpha-Hoelder and s-smooth regularity classes. The regime is chosen by comparing
the ambient dimension ``d`` against twice the regularity exponent; the comparison is exact
(``fractions.Fraction``) so there is no flapping around the critical dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Union

Number = Union[int, float, Fraction]


class Regime(Enum):
    BELOW_CRITICAL = "below"  # d < 2 * exponent
    CRITICAL = "critical"  # d == 2 * exponent
    ABOVE_CRITICAL = "above"  # d > 2 * exponent


class Kind(Enum):
    HOLDER = "holder"
    SMOOTH = "smooth"


@dataclass(frozen=True)
class RegularityClass:
    kind: Kind
    exponent: Number  # alpha for Hoelder, s for smooth
    ambient_dim: int

    def __post_init__(self):
        if int(self.ambient_dim) != self.ambient_dim or self.ambient_dim < 1:
            raise ValueError(f"ambient_dim must be a positive integer, got {self.ambient_dim}")
        e = self.exponent
        if not math.isfinite(float(e)):
            raise ValueError("exponent must be finite")
        if self.kind is Kind.HOLDER and not (0 < e <= 1):
            raise ValueError(f"Hoelder exponent must lie in (0, 1], got {e}")
        if self.kind is Kind.SMOOTH and e < 1:
            raise ValueError(f"smoothness order must be >= 1, got {e}")

    @classmethod
    def holder(cls, alpha: Number, ambient_dim: int) -> "RegularityClass":
        return cls(Kind.HOLDER, alpha, int(ambient_dim))

    @classmethod
    def smooth(cls, order: Number, ambient_dim: int) -> "RegularityClass":
        return cls(Kind.SMOOTH, order, int(ambient_dim))

    @property
    def regime(self) -> Regime:
        # Fraction(float) is the exact binary value, so equality is never tolerance-based.
        d = Fraction(self.ambient_dim)
        two_e = 2 * Fraction(self.exponent)
        if d < two_e:
            return Regime.BELOW_CRITICAL
        if d == two_e:
            return Regime.CRITICAL
        return Regime.ABOVE_CRITICAL


@dataclass(frozen=True)
class RateEntry:
    constant: float
    rate_fn: Callable[[int], float]
    regime: Regime
    constant_is_explicit: bool = True


def _check_n(n: int) -> int:
    if n < 0 or int(n) != n:
        raise ValueError(f"sample count must be a nonnegative integer, got {n}")
    return int(n)


def holder_constant(reg: RegularityClass) -> float:
    """Explicit constant ``C_{d,alpha}`` of the Hoelder rows."""
    if reg.kind is not Kind.HOLDER:
        raise ValueError("smooth constants are not explicit; supply them to the bound directly")
    a = float(reg.exponent)
    d = reg.ambient_dim
    ln2 = math.log(2.0)
    regime = reg.regime
    if regime is Regime.BELOW_CRITICAL:
        # 1 - 2^(d/2 - a) written with expm1 to survive a -> d/2
        denom = -math.expm1((d / 2 - a) * ln2)
        return d ** (a / 2) * 2.0 ** (d / 2 - 2 * a) / denom
    if regime is Regime.CRITICAL:
        return d ** (a / 2) / (a * 2.0 ** (a + 1))
    gap = d / 2 - a
    denom = -math.expm1((a - d / 2) * ln2)
    base = gap / (2 * a * denom)
    return 2 * base ** (2 * a / d) * (1 + a / (2.0**a * gap)) * d ** (a / 2)


def holder_rate(reg: RegularityClass, n: int) -> float:
    if reg.kind is not Kind.HOLDER:
        raise ValueError("holder_rate needs a Hoelder regularity class")
    n = _check_n(n)
    if n == 0:
        return 0.0
    a = float(reg.exponent)
    regime = reg.regime
    if regime is Regime.BELOW_CRITICAL:
        return n**-0.5
    if regime is Regime.CRITICAL:
        return (a * 2.0 ** (a + 2) + math.log2(n)) / math.sqrt(n)
    return n ** (-a / reg.ambient_dim)


def smooth_rate(reg: RegularityClass, n: int) -> float:
    if reg.kind is not Kind.SMOOTH:
        raise ValueError("smooth_rate needs a smooth regularity class")
    n = _check_n(n)
    if n == 0:
        return 0.0
    regime = reg.regime
    if regime is Regime.BELOW_CRITICAL:
        return n**-0.5
    if regime is Regime.CRITICAL:
        return (math.log(n) + 1) / math.sqrt(n)
    return n ** (-float(reg.exponent) / reg.ambient_dim)


def rate_entry(reg: RegularityClass, smooth_constant: float = 1.0) -> RateEntry:
    """Bundle constant, rate function and regime for ``reg``.

    Smooth constants exist but are not known in closed form; ``smooth_constant`` is used
    verbatim and the entry is marked non-explicit.
    """
    if reg.kind is Kind.HOLDER:
        return RateEntry(holder_constant(reg), lambda n: holder_rate(reg, n), reg.regime)
    if not smooth_constant > 0:
        raise ValueError("smooth_constant must be positive")
    return RateEntry(float(smooth_constant), lambda n: smooth_rate(reg, n), reg.regime, False)
