"""Overflow-safe complex numbers stored as (log|z|, arg z)."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np


def _wrap(phase: float) -> float:
    """Map an angle into (-pi, pi]."""
    w = math.remainder(phase, 2 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class LogComplex:
    """``z = exp(log_mag) * exp(1j * phase)``; zero has ``log_mag == -inf``."""

    log_mag: float
    phase: float = 0.0

    def __post_init__(self):
        if self.log_mag == -math.inf:
            object.__setattr__(self, "phase", 0.0)
        else:
            object.__setattr__(self, "phase", _wrap(float(self.phase)))

    @classmethod
    def zero(cls) -> LogComplex:
        return cls(-math.inf, 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> LogComplex:
        z = complex(z)
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), cmath.phase(z))

    @classmethod
    def product(cls, factors) -> LogComplex:
        """Product of an array of complex factors, summed in the log domain.

        ``math.fsum`` keeps the log-magnitude sum correctly rounded, which
        matters for products of thousands of eigenvalues.
        """
        f = np.asarray(factors, dtype=complex).ravel()
        if f.size == 0:
            return cls(0.0, 0.0)
        mags = np.abs(f)
        if np.any(mags == 0):
            return cls.zero()
        return cls(math.fsum(np.log(mags)), math.fsum(np.angle(f)))

    @property
    def is_zero(self) -> bool:
        return self.log_mag == -math.inf

    def to_complex(self) -> complex:
        """Convert back; raises ``OverflowError`` beyond double range."""
        if self.is_zero:
            return 0j
        return cmath.rect(math.exp(self.log_mag), self.phase)

    def representable(self) -> bool:
        return self.is_zero or self.log_mag < 709.0

    def __mul__(self, other) -> LogComplex:
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag + other.log_mag, self.phase + other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other) -> LogComplex:
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if other.is_zero:
            raise ZeroDivisionError("division by LogComplex zero")
        if self.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag - other.log_mag, self.phase - other.phase)

    def __neg__(self) -> LogComplex:
        return LogComplex(self.log_mag, self.phase + math.pi)

    def __complex__(self) -> complex:
        return self.to_complex()


def log_sum(values: Iterable[LogComplex]) -> LogComplex:
    """Sum of ``LogComplex`` values, rescaled by the largest magnitude."""
    values = [v for v in values if not v.is_zero]
    if not values:
        return LogComplex.zero()
    top = max(v.log_mag for v in values)
    acc = sum(cmath.rect(math.exp(v.log_mag - top), v.phase) for v in values)
    if acc == 0:
        return LogComplex.zero()
    return LogComplex(top + math.log(abs(acc)), cmath.phase(acc))


def cancels(total: LogComplex, terms: Iterable[LogComplex], rtol: float = 1e-13) -> bool:
    """Whether ``total`` is zero to within rounding of the largest of ``terms``."""
    if total.is_zero:
        return True
    mags = [t.log_mag for t in terms if not t.is_zero]
    return bool(mags) and total.log_mag < max(mags) + math.log(rtol)
