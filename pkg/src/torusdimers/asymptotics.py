"""Finite-m evaluators and their m -> infinity limits.

Every evaluator here has a closed-form limit counterpart, and the
``sweep`` helper tabulates the two along an increasing list of even ``m``.
Complex sums use ``math.fsum`` on real and imaginary parts separately so the
results do not depend on summation order.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from ._modes import cis_frac, half_shift_roots
from .errors import DomainError, PoleError, QuadratureError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _csum(values) -> complex:
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _check_even(m):
    if m < 2 or m % 2:
        raise ValueError(f"m must be even and at least 2, got {m}")


# ---------------------------------------------------------------- products

def product_factors(m: int, theta1: int, z: complex) -> np.ndarray:
    return 1 + half_shift_roots(m, theta1) + z / m


def finite_product_logsum(m: int, theta1: int, z: complex) -> float:
    """Product of factor moduli as ``exp`` of a compensated log sum."""
    _check_even(m)
    mags = np.abs(product_factors(m, theta1, z))
    if np.any(mags == 0):
        return 0.0
    return math.exp(math.fsum(np.log(mags)))


def finite_product(m: int, theta1: int, z: complex) -> float:
    """``prod_j |1 + exp(2 pi i (j + theta1/2)/m) + z/m|`` for even ``m``.

    The factors are ``a + w`` over the roots ``w**m == (-1)**theta1`` with
    ``a = 1 + z/m``, so for even ``m`` the product is ``a**m - (-1)**theta1``
    exactly.  That form is used unless it cancels badly, in which case the
    log sum over factors takes over.
    """
    _check_even(m)
    a = 1 + complex(z) / m
    c = -1.0 if theta1 % 2 else 1.0
    if a == 0:
        return 1.0 if theta1 % 2 else 0.0
    am = cmath.exp(m * cmath.log(a))
    value = am - c
    if value != 0 and abs(value) < 1e-6 * max(abs(am), 1.0):
        return finite_product_logsum(m, theta1, z)
    return abs(value)


def product_limit(theta1: int, z: complex) -> float:
    return abs(cmath.exp(z) - (-1) ** (theta1 % 2))


def sine_representation(theta1: int, z: complex) -> float:
    """``2 exp(x/2) |sin(pi theta1/2 + y/2 + i x/2)|`` for ``z = x + iy``."""
    z = complex(z)
    return 2 * math.exp(z.real / 2) * abs(cmath.sin(math.pi * theta1 / 2 + z.imag / 2 + 0.5j * z.real))


# ------------------------------------------------------ A/B decomposition

def _quad(func, a, b, points=None) -> float:
    pts = None
    if points:
        pts = [p for p in points if a < p < b] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(func, a, b, points=pts, epsabs=1e-13, epsrel=1e-13,
                             limit=400, full_output=1)
    value, abserr = res[0], res[1]
    if len(res) > 3 and abserr > 1e-10:
        raise QuadratureError(f"quadrature failed on [{a}, {b}]: {res[3]}")
    return value


def _singular_turn(a: complex) -> float:
    """Fraction of a turn where ``a + exp(2 pi i phi)`` is closest to zero."""
    return (cmath.phase(-a) / (2 * math.pi)) % 1.0


def A_m(m: int, z: complex) -> float:
    """``m`` times the mean of ``log|1 + exp(2 pi i phi) + z/m|`` over a period."""
    if m < 2:
        raise ValueError("m must be at least 2")
    a = 1 + complex(z) / m

    def f(phi):
        return math.log(abs(a + cmath.exp(2j * math.pi * phi)))

    return m * _quad(f, 0.0, 1.0, points=[_singular_turn(a)])


def A_m_jensen(m: int, z: complex) -> float:
    """Closed form of :func:`A_m` by the mean-value property of ``log|.|``."""
    return m * max(math.log(abs(1 + complex(z) / m)), 0.0)


def A_limit(z: complex) -> float:
    return max(complex(z).real, 0.0)


def _cell_integrals(m: int, theta1: int, z: complex) -> np.ndarray:
    """Integral of the log factor over the unit cell around each grid point."""
    a = 1 + complex(z) / m
    u = np.arange(m) + theta1 / 2
    u_star = m * _singular_turn(a)
    dist = np.abs((u - u_star + m / 2) % m - m / 2)
    # Gauss-Legendre on cells far from the near-zero of the factor
    nodes = u[:, None] + 0.5 * _GL_NODES[None, :]
    vals = np.log(np.abs(a + np.exp(2j * np.pi * nodes / m)))
    out = 0.5 * vals @ _GL_WEIGHTS
    for j in np.nonzero(dist <= 2.0)[0]:
        lo, hi = u[j] - 0.5, u[j] + 0.5
        shift = u_star + m * np.round((u[j] - u_star) / m)

        def f(v):
            return math.log(abs(a + cmath.exp(2j * math.pi * v / m)))

        out[j] = _quad(f, lo, hi, points=[shift])
    return out


def B_m(m: int, theta1: int, z: complex) -> float:
    """Log sum of factors minus the matching cell integrals."""
    _check_even(m)
    mags = np.abs(product_factors(m, theta1, z))
    if np.any(mags == 0):
        return -math.inf
    cells = _cell_integrals(m, theta1, z)
    return math.fsum(np.log(mags) - cells)


def C_limit(theta1: int, z: complex) -> float:
    z = complex(z)
    s = cmath.sin(math.pi * theta1 / 2 + z.imag / 2 + 0.5j * z.real)
    return math.log(abs(2 * s)) - abs(z.real) / 2


def _G(u):
    # antiderivative of log(1 + u^2)
    return u * np.log1p(u * u) - 2 * u + 2 * np.arctan(u)


def F_pq(p: float, q: float) -> float:
    if q <= 0:
        raise DomainError("q must be positive")
    return math.log(abs(2 * cmath.sin(math.pi * complex(p, q)))) - math.pi * q


def F_pq_series(p: float, q: float, K: int = 10_000, tail: bool = True) -> float:
    """Truncated lattice-sum form of :func:`F_pq` over ``|k| <= K``.

    Each term pairs the point value with its cell integral (exact
    antiderivative), so no large quantities cancel.  The discarded terms
    behave like ``1/(24 (p+k)^2)``; their integral is added when ``tail``.
    """
    if q <= 0:
        raise DomainError("q must be positive")
    k = np.arange(-K, K + 1, dtype=float)
    u = p + k
    point = np.log1p((u / q) ** 2)
    cell = q * (_G((u + 0.5) / q) - _G((u - 0.5) / q))
    total = 0.5 * math.fsum(point - cell)
    if tail:
        total += (1.0 / (K + 0.5 + p) + 1.0 / (K + 0.5 - p)) / 24.0
    return total


def C_series(theta1: int, z: complex, K: int = 10_000, tail: bool = True) -> float:
    z = complex(z)
    if z.real == 0:
        raise DomainError("series form needs a nonzero real part")
    return F_pq_series(theta1 / 2 + z.imag / (2 * math.pi), abs(z.real) / (2 * math.pi), K, tail)


# --------------------------------------------------------- Fourier sums

def fourier_F_partial(z: complex, s: float, n: int, offset: float = 0.0) -> complex:
    """Symmetric partial sum of ``exp(2 pi i k s) / (2 pi i k + z)``.

    ``k`` runs over ``j + offset`` for integers ``j`` with ``|k| <= n + offset``,
    i.e. ``-n..n`` for ``offset = 0`` and ``-n-1/2..n+1/2`` for ``offset = 1/2``.
    """
    z = complex(z)
    if offset == 0:
        j = np.arange(-n, n + 1)
        twice = 2 * j
    elif offset == 0.5:
        j = np.arange(-n - 1, n + 1)
        twice = 2 * j + 1
    else:
        raise ValueError("offset must be 0 or 1/2")
    denom = 1j * np.pi * twice + z
    if np.any(denom == 0):
        raise PoleError(f"pole hit at k = {-z.imag / (2 * math.pi)}")
    terms = np.exp(1j * np.pi * twice * s) / denom
    return _csum(terms)


def fourier_F_limit(z: complex, s: float, offset: float = 0.0) -> complex:
    """Closed form of the full sum, with the symmetric-sum value at ``s = 0``."""
    e = cmath.exp(-complex(z))
    if not 0 <= s < 1:
        raise DomainError("s must lie in [0, 1)")
    if offset == 0.5:
        # antiperiodic in s: the left limit at 0 is minus the right limit at 1
        return 0.5 * (1 - e) / (1 + e) if s == 0 else cmath.exp(-complex(z) * s) / (1 + e)
    return 0.5 * (1 + e) / (1 - e) if s == 0 else cmath.exp(-complex(z) * s) / (1 - e)


@dataclass(frozen=True)
class CauchyFit:
    constant: float
    n1: tuple
    gaps: tuple
    products: tuple

    def holds(self, spread: float = 4.0) -> bool:
        """``gap * (n1 - |z|)`` stays within a factor ``spread`` across ``n1``.

        The fitted constant bounds every gap by construction; what is being
        tested is that the gaps shrink like ``1/n1``.
        """
        lo, hi = min(self.products), max(self.products)
        return hi <= spread * lo if lo > 0 else hi == 0


def cauchy_bound_fit(z: complex, s: float, n1_list: Sequence[int], n2_factor: int = 10) -> CauchyFit:
    """Fit ``C(s)`` in ``|F_{n2} - F_{n1}| <= C/(n1 - |z|)`` with ``n2 = n2_factor * n1``."""
    gaps, prods = [], []
    for n1 in n1_list:
        gap = abs(fourier_F_partial(z, s, n2_factor * n1) - fourier_F_partial(z, s, n1))
        gaps.append(gap)
        prods.append(gap * (n1 - abs(z)))
    return CauchyFit(max(prods), tuple(n1_list), tuple(gaps), tuple(prods))


# ---------------------------------------------------- inverse-kernel limit

def inverselim_finite(m: int, theta1: int, s: float, z: complex, delta: bool = False) -> complex:
    """Finite-``m`` mode sum whose limit is :func:`inverselim_limit`.

    With ``delta`` the exponent ``floor(s m)`` is replaced by ``-1`` and the
    leading sign ``(-1)**floor(s m)`` is dropped.
    """
    _check_even(m)
    z = complex(z)
    j = np.arange(m)
    denom = product_factors(m, theta1, z)
    bad = np.nonzero(denom == 0)[0]
    if bad.size:
        raise PoleError(f"denominator vanishes at mode j={int(bad[0])}", mode=int(bad[0]))
    if delta:
        k = -1
        lead = 1
    else:
        if not -1 < s < 1:
            raise DomainError("s must lie in (-1, 1)")
        k = math.floor(s * m)
        lead = -1 if k % 2 else 1
    num = cis_frac(-(2 * j + theta1) * k, 2 * m)
    return lead * _csum(num / denom) / m


def inverselim_exact(m: int, theta1: int, s: float, z: complex, delta: bool = False) -> complex:
    """Geometric-series closed form of :func:`inverselim_finite`."""
    a = 1 + complex(z) / m
    c = -1.0 if theta1 % 2 else 1.0
    am = a ** m
    if delta:
        return -c / (am - c)
    k = math.floor(s * m)
    if k < 0:
        return c * a ** (-(k + m) - 1) / (1 - c / am)
    return a ** (-k - 1) / (1 - c / am)


def inverselim_limit(theta1: int, s: float, z: complex, delta: bool = False) -> complex:
    z = complex(z)
    c = -1.0 if theta1 % 2 else 1.0
    e = cmath.exp(-z)
    denom = 1 - c * e
    if abs(denom) < 1e-15:
        raise PoleError("1 - (-1)**theta1 * exp(-z) vanishes")
    if (delta or s == 0) and z.real == 0:
        raise DomainError("Re z = 0 is outside the domain for s = 0 and the shifted variant")
    if delta:
        return -c * e / denom
    if not -1 < s < 1:
        raise DomainError("s must lie in (-1, 1)")
    if s < 0:
        return c * cmath.exp(-z * (s + 1)) / denom
    return cmath.exp(-z * s) / denom


# ------------------------------------------------------------------ sweeps

@dataclass(frozen=True)
class SweepRow:
    m: int
    finite: complex
    limit: complex
    abs_err: float
    rel_err: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple

    @property
    def ms(self) -> list[int]:
        return [r.m for r in self.rows]

    @property
    def rel_errors(self) -> list[float]:
        return [r.rel_err for r in self.rows]

    @property
    def decreasing(self) -> bool:
        errs = self.rel_errors
        return all(b < a for a, b in zip(errs, errs[1:]))

    @property
    def final_rel_err(self) -> float:
        return self.rows[-1].rel_err


def sweep(evaluator: Callable[[int], complex], limit, m_list: Sequence[int]) -> SweepResult:
    """Tabulate ``evaluator(m)`` against ``limit`` along an increasing even ``m_list``.

    ``limit`` is a number or a zero-argument callable.
    """
    m_list = [int(m) for m in m_list]
    if any(m % 2 or m < 2 for m in m_list):
        raise ValueError("sweep values of m must be even")
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValueError("sweep values of m must be strictly increasing")
    target = complex(limit() if callable(limit) else limit)
    rows = []
    for m in m_list:
        val = complex(evaluator(m))
        err = abs(val - target)
        rel = err / abs(target) if target != 0 else err
        rows.append(SweepRow(m, val, target, err, rel))
    return SweepResult(tuple(rows))
