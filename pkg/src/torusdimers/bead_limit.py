"""Continuum bead model on ``n`` circular strings and its discrete counterpart.

Strings are indexed by ``Z_n`` and carry times in ``[0, 1)``.  The
discrete torus of shape ``(m, n)`` with weights ``(1, 1 - lambda/m, T/m)``
approaches this model as even ``m`` grows: vertical steps become beads and
horizontal steps become occupied cells.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

from ._backend import classify_beads
from ._modes import cis_frac, half_shift_roots
from .asymptotics import SweepResult, sweep
from .correlations import (
    EdgeEvent,
    SectorWeights,
    edge_prob_constant,
    edge_prob_theta_constant,
)
from .errors import (
    CoincidentSitesError,
    InconsistentConfigurationError,
    PoleError,
    ZeroPartitionError,
)
from .kasteleyn import THETAS, partition_constant
from .logcomplex import LogComplex, cancels, log_sum
from .torus import Move, Site, TorusShape


def continuum_sign(n: int, theta) -> int:
    """``(-1)**((theta1 + 1) * (theta2 + n + 1))``."""
    return -1 if ((theta[0] + 1) * (theta[1] + n + 1)) % 2 else 1


# ------------------------------------------------------- partition function

def Z_theta_continuum_log(n: int, lam: complex, T: complex, theta) -> LogComplex:
    w = half_shift_roots(n, theta[1])
    c1 = -1.0 if theta[0] else 1.0
    factors = np.exp(complex(T) * w) - c1 * cmath.exp(-complex(lam))
    return LogComplex.product(factors) * (0.5 * continuum_sign(n, theta))


def Z_theta_continuum(n: int, lam: complex, T: complex, theta) -> complex:
    return Z_theta_continuum_log(n, lam, T, theta).to_complex()


def Z_continuum(n: int, lam: complex, T: complex) -> complex:
    return log_sum(Z_theta_continuum_log(n, lam, T, th) for th in THETAS).to_complex()


def sector_weights_continuum(n: int, lam: complex, T: complex) -> SectorWeights:
    logs = {th: Z_theta_continuum_log(n, lam, T, th) for th in THETAS}
    total = log_sum(logs.values())
    if cancels(total, logs.values()):
        raise ZeroPartitionError("continuum partition function vanishes")
    return SectorWeights({th: (logs[th] / total).to_complex() for th in THETAS})


def scaling_weights(m: int, lam: complex, T: complex) -> tuple:
    """Discrete weights ``(alpha, beta, gamma)`` in the bead scaling regime."""
    return 1.0, 1 - complex(lam) / m, complex(T) / m


def scaling_partition_sweep(n: int, lam: complex, T: complex, m_list: Sequence[int]) -> SweepResult:
    def finite(m):
        return partition_constant(TorusShape(m, n), *scaling_weights(m, lam, T))

    return sweep(finite, Z_continuum(n, lam, T), m_list)


# -------------------------------------------------------------- series

def _negacyclic_mul(a, b, n):
    # product in Z[x]/(x^n + 1)
    out = [0] * n
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    k = i + j
                    if k >= n:
                        out[k - n] -= ai * bj
                    else:
                        out[k] += ai * bj
    return out


def _negacyclic_pow(a, e, n):
    result = [1] + [0] * (n - 1)
    base = list(a)
    while e:
        if e & 1:
            result = _negacyclic_mul(result, base, n)
        base = _negacyclic_mul(base, base, n)
        e >>= 1
    return result


def _poly_divmod(num, den):
    """Integer polynomial division by a monic divisor; coefficients low to high."""
    num = list(num)
    q = [0] * max(len(num) - len(den) + 1, 1)
    for i in range(len(num) - len(den), -1, -1):
        coef = num[i + len(den) - 1]
        q[i] = coef
        if coef:
            for j, d in enumerate(den):
                num[i + j] -= coef * d
    rem = num[: len(den) - 1]
    return q, rem


@lru_cache(maxsize=None)
def _cyclotomic(N: int) -> tuple:
    poly = [-1] + [0] * (N - 1) + [1]
    for d in range(1, N):
        if N % d == 0:
            poly, rem = _poly_divmod(poly, list(_cyclotomic(d)))
            assert not any(rem)
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return tuple(poly)


def _root_element(e: int, n: int) -> list:
    """``exp(i pi e / n)`` as an element of ``Z[x]/(x^n + 1)``."""
    e %= 2 * n
    out = [0] * n
    if e >= n:
        out[e - n] = -1
    else:
        out[e] = 1
    return out


@lru_cache(maxsize=None)
def _subset_power_sums(n: int, theta2: int, size: int, power: int) -> tuple:
    """Sum over ``size``-subsets of the roots of ``w**n = (-1)**theta2`` of ``(sum S)**power``."""
    roots = [_root_element(2 * j + theta2, n) for j in range(n)]
    total = [0] * n
    for S in combinations(range(n), size):
        p = [0] * n
        for j in S:
            p = [u + v for u, v in zip(p, roots[j])]
        term = _negacyclic_pow(p, power, n)
        total = [u + v for u, v in zip(total, term)]
    return tuple(total)


def _to_integer(element, n) -> int:
    _, rem = _poly_divmod(list(element) + [0], list(_cyclotomic(2 * n)))
    if any(rem[1:]):
        raise ArithmeticError(f"expected a rational integer, got {rem}")
    return rem[0] if rem else 0


def _volume_exact(n: int, power: int, ell: int) -> Fraction:
    """``power!`` times the ``T**power e**(-lambda ell)`` coefficient, exactly."""
    total = 0
    for th in THETAS:
        c1 = -1 if th[0] else 1
        inner = _to_integer(_subset_power_sums(n, th[1], n - ell, power), n)
        total += continuum_sign(n, th) * (-c1) ** ell * inner
    return Fraction(total, 2)


@dataclass(frozen=True)
class BivariateSeries:
    """``Z_n = sum_{k, ell} coeff[k][ell] T**(n k) exp(-lambda ell)``."""

    n: int
    kmax: int
    volumes: tuple

    def volume(self, k: int, ell: int) -> Fraction:
        return self.volumes[k][ell]

    def coeff(self, k: int, ell: int) -> float:
        return float(self.volumes[k][ell] / math.factorial(self.n * k))

    @property
    def table(self) -> np.ndarray:
        return np.array([[self.coeff(k, l) for l in range(self.n + 1)] for k in range(self.kmax + 1)])

    def evaluate(self, lam: complex, T: complex) -> complex:
        u = cmath.exp(-complex(lam))
        return sum(self.coeff(k, l) * complex(T) ** (self.n * k) * u ** l
                   for k in range(self.kmax + 1) for l in range(self.n + 1))


def Z_series(n: int, kmax: int) -> BivariateSeries:
    """Exact expansion of the continuum partition function.

    Subset sums of roots are powered in the cyclotomic integers, so every
    volume comes out as an exact rational.  Powers of ``T`` that are not
    multiples of ``n`` are checked to vanish.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 <= kmax <= 6:
        raise ValueError("kmax must lie in 0..6")
    for power in range(n * kmax + 1):
        if power % n:
            for ell in range(n + 1):
                if _volume_exact(n, power, ell) != 0:
                    raise ArithmeticError(f"nonzero T**{power} coefficient")
    vols = tuple(
        tuple(_volume_exact(n, n * k, ell) for ell in range(n + 1))
        for k in range(kmax + 1)
    )
    return BivariateSeries(n, kmax, vols)


# --------------------------------------------------------- configurations

class PointClass(Enum):
    BEAD = "B"
    OCCUPIED = "O"
    UNOCCUPIED = "U"


@dataclass(frozen=True)
class QueryPoint:
    t: float
    h: int
    cls: PointClass

    def __post_init__(self):
        if not 0 <= self.t < 1:
            raise ValueError(f"time {self.t} outside [0, 1)")
        object.__setattr__(self, "cls", PointClass(self.cls))


@dataclass(frozen=True)
class BeadConfig:
    """Bead times per string, sorted.  Interlacing is not enforced here."""

    n: int
    times: tuple

    def __post_init__(self):
        if len(self.times) != self.n:
            raise ValueError("one time list per string is required")
        times = tuple(tuple(sorted(float(t) for t in row)) for row in self.times)
        counts = {len(row) for row in times}
        if len(counts) > 1:
            raise ValueError("every string must carry the same number of beads")
        for row in times:
            if any(not 0 <= t < 1 for t in row):
                raise ValueError("bead times must lie in [0, 1)")
            if len(set(row)) != len(row):
                raise ValueError("bead times on a string must be distinct")
        object.__setattr__(self, "times", times)

    @property
    def k(self) -> int:
        return len(self.times[0]) if self.n else 0

    @classmethod
    def from_points(cls, points, n: int) -> BeadConfig:
        rows = [[] for _ in range(n)]
        for t, h in points:
            rows[int(h) % n].append(t)
        return cls(n, tuple(tuple(r) for r in rows))


def _pair_interlaces(A, B) -> bool:
    k = len(A)
    first = all(A[i] <= B[i] for i in range(k)) and all(B[i] < A[i + 1] for i in range(k - 1))
    second = all(B[i] < A[i] for i in range(k)) and all(A[i] <= B[i + 1] for i in range(k - 1))
    return first or second


@dataclass(frozen=True)
class OccupationProcess:
    """Occupied arcs ``[start, end)`` per string, read cyclically, and the occupation number."""

    n: int
    arcs: tuple
    ell: int

    def occupied(self, t: float) -> frozenset:
        out = set()
        for h, arcs in enumerate(self.arcs):
            for start, end in arcs:
                # compare endpoints directly; start + length can round across t
                inside = start <= t < end if start < end else (t >= start or t < end)
                if inside:
                    out.add(h)
        return frozenset(out)

    def count(self, t: float) -> int:
        return len(self.occupied(t))


def occupation_from_beads(config: BeadConfig, mesh: int = 1000) -> OccupationProcess:
    """Occupation process traced from each bead to the next bead above it.

    Raises :class:`InconsistentConfigurationError` when the number of
    occupied strings is not constant in time, which happens exactly when the
    beads do not interlace.
    """
    n, k = config.n, config.k
    if k == 0:
        raise InconsistentConfigurationError("empty configuration has no bead-defined occupation")
    arcs = [[] for _ in range(n)]
    total = 0.0
    for h in range(n):
        above = config.times[(h + 1) % n]
        for t in config.times[h]:
            gap, u = min(((u - t) % 1.0, u) for u in above)
            total += gap
            if gap > 0:
                arcs[(h + 1) % n].append((t, u))
    ell = int(round(total))
    proc = OccupationProcess(n, tuple(tuple(a) for a in arcs), ell)
    if abs(total - ell) > 1e-9:
        raise InconsistentConfigurationError(f"occupied length {total} is not an integer")
    grid = (np.arange(mesh) + 0.5) / mesh
    special = sorted({t for row in config.times for t in row})
    for t in list(grid) + special:
        if proc.count(t) != ell:
            raise InconsistentConfigurationError(
                f"{proc.count(t)} strings occupied at t={t}, expected {ell}"
            )
    return proc


def interlace_check(points, n: int):
    """``(k, ell)`` when ``points`` form a valid configuration on ``n`` strings, else ``None``.

    The empty point set returns ``None``: its occupation number is not
    determined by beads.
    """
    points = list(points)
    if not points:
        return None
    try:
        config = BeadConfig.from_points(points, n)
    except ValueError:
        return None
    for h in range(n):
        if not _pair_interlaces(config.times[h], config.times[(h + 1) % n]):
            return None
    proc = occupation_from_beads(config)
    return config.k, proc.ell


def config_weight(points, n: int, lam: complex) -> complex:
    res = interlace_check(points, n)
    if res is None:
        return 0j
    return cmath.exp(-complex(lam) * res[1])


def config_weight_theta(points, n: int, lam: complex, theta) -> complex:
    res = interlace_check(points, n)
    if res is None:
        return 0j
    k, ell = res
    sign = -1 if ((theta[0] + k + 1) * (theta[1] + n + ell + 1)) % 2 else 1
    return 0.5 * sign * cmath.exp(-complex(lam) * ell)


# ---------------------------------------------------------- Monte Carlo

@dataclass(frozen=True)
class VolumeEstimate:
    n: int
    k: int
    samples: int
    counts: tuple

    @property
    def scale(self) -> float:
        return float(self.n) ** (self.n * self.k)

    def estimate(self, ell: int) -> float:
        return self.scale * self.counts[ell] / self.samples

    def standard_error(self, ell: int) -> float:
        p = self.counts[ell] / self.samples
        return self.scale * math.sqrt(p * (1 - p) / self.samples)

    def total(self) -> tuple:
        """Estimate and standard error for the union over ``ell``."""
        c = sum(self.counts)
        p = c / self.samples
        return self.scale * p, self.scale * math.sqrt(p * (1 - p) / self.samples)


def _mc_batch(n, k, size, seed_seq):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    strings = rng.integers(0, n, size=(size, n * k), dtype=np.int64)
    times = rng.random((size, n * k))
    ells = classify_beads(strings, times, n, k)
    return np.bincount(ells[ells >= 0], minlength=n + 1)[: n + 1]


def volume_mc_all(n: int, k: int, samples: int, seed: int,
                  batch: int = 100_000, threads: int | None = None) -> VolumeEstimate:
    """Labelled uniform sampling of ``n k`` points; counts per occupation number.

    Batches draw from independently spawned Philox streams, and per-batch
    integer counts are added in batch order, so the result depends only on
    ``seed``, ``samples`` and ``batch``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if samples < 1:
        raise ValueError("samples must be positive")
    sizes = [batch] * (samples // batch)
    if samples % batch:
        sizes.append(samples % batch)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    workers = threads or os.cpu_count() or 1
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _mc_batch(n, k, *a), zip(sizes, seeds)))
    else:
        parts = [_mc_batch(n, k, s, ss) for s, ss in zip(sizes, seeds)]
    counts = np.zeros(n + 1, dtype=np.int64)
    for part in parts:
        counts += part
    return VolumeEstimate(n, k, samples, tuple(int(c) for c in counts))


def volume_mc(n: int, k: int, ell: int, samples: int, seed: int, **kwargs) -> tuple[float, float]:
    est = volume_mc_all(n, k, samples, seed, **kwargs)
    if not 0 <= ell <= n:
        return 0.0, 0.0
    return est.estimate(ell), est.standard_error(ell)


# -------------------------------------------------------------- kernels

def _bracket(s: float) -> float:
    return s + 1.0 if s < 0 else s


def _kernel_parts(n, lam, T, theta):
    w = half_shift_roots(n, theta[1])
    a = complex(lam) + theta[0] * math.pi * 1j + complex(T) * w
    denom = 1 - np.exp(-a)
    if np.any(np.abs(denom) < 1e-14):
        j = int(np.argmin(np.abs(denom)))
        raise PoleError(f"1 - exp(-a) vanishes at root index {j}", mode=j)
    return a, denom


def _root_powers(n, theta2, p):
    j = np.arange(n)
    return cis_frac((2 * j + theta2) * p, 2 * n)


def kernel_H(n: int, lam: complex, T: complex, theta, y, yp) -> complex:
    (t, h), (tp, hp) = y, yp
    a, denom = _kernel_parts(n, lam, T, theta)
    zp = _root_powers(n, theta[1], 1 + h - hp)
    terms = zp * np.exp(-a * _bracket(tp - t)) / denom
    return complex(T) / n * complex(np.sum(terms))


def kernel_K(n: int, lam: complex, T: complex, theta, y, yp) -> complex:
    (t, h), (tp, hp) = y, yp
    a, denom = _kernel_parts(n, lam, T, theta)
    zp = _root_powers(n, theta[1], h - hp)
    shift = _bracket(tp - t) + (1.0 if tp == t else 0.0)
    terms = zp * np.exp(-a * shift) / denom
    return -complex(np.sum(terms)) / n


def turner_sides(n: int, lam: complex, T: complex, theta, h: int, hp: int) -> tuple[complex, complex]:
    """Both sides of ``mean_w w**d / (1 - e) = [d == 0] + mean_w w**d e / (1 - e)``."""
    a, denom = _kernel_parts(n, lam, T, theta)
    zp = _root_powers(n, theta[1], h - hp)
    e = np.exp(-a)
    lhs = complex(np.sum(zp / denom)) / n
    rhs = (1.0 if (h - hp) % n == 0 else 0.0) + complex(np.sum(zp * e / denom)) / n
    return lhs, rhs


def _check_distinct(points):
    keys = [(p.t, p.h) for p in points]
    if len(set(keys)) != len(keys):
        raise ValueError("query points must be pairwise distinct")


def gamma_matrix(n: int, lam: complex, T: complex, theta, points: Sequence[QueryPoint]) -> np.ndarray:
    p = len(points)
    M = np.empty((p, p), dtype=complex)
    for i, qi in enumerate(points):
        yi = (qi.t, qi.h % n)
        for j, qj in enumerate(points):
            yj = (qj.t, qj.h % n)
            if qi.cls is PointClass.BEAD:
                M[i, j] = kernel_H(n, lam, T, theta, yi, yj)
            else:
                kval = kernel_K(n, lam, T, theta, yi, yj)
                if qi.cls is PointClass.OCCUPIED:
                    M[i, j] = kval
                else:
                    M[i, j] = (1.0 if i == j else 0.0) - kval
    return M


def gamma_correlation(n: int, lam: complex, T: complex, theta, points: Sequence[QueryPoint]) -> complex:
    """Sector density of the joint bead/occupied/unoccupied event at ``points``."""
    points = list(points)
    if not points:
        return 1.0 + 0j
    _check_distinct(points)
    M = gamma_matrix(n, lam, T, theta, points)
    if len(points) == 1:
        # LAPACK perturbs 1x1 determinants in the last bit
        return complex(M[0, 0])
    return complex(np.linalg.det(M))


def gamma_correlation_mixture(n: int, lam: complex, T: complex, points) -> complex:
    mu = sector_weights_continuum(n, lam, T)
    return sum(mu[th] * gamma_correlation(n, lam, T, th, points) for th in THETAS if mu[th] != 0)


# ------------------------------------------------------ discrete counterpart

_EVENT_MOVE = {
    PointClass.OCCUPIED: Move.STEP_E1,
    PointClass.UNOCCUPIED: Move.STAY,
    PointClass.BEAD: Move.STEP_E2,
}


def discretize_point(t: float, h: int, m: int) -> Site:
    """Site ``(2 floor(t m / 2), h)`` with the column clamped to ``[0, m - 2]``."""
    x1 = 2 * math.floor(t * m / 2)
    return Site(min(max(x1, 0), m - 2), int(h))


def _discrete_events(m, n, points):
    events = []
    seen = set()
    for q in points:
        site = discretize_point(q.t, q.h % n, m)
        if site in seen:
            raise CoincidentSitesError(
                f"points map to the same site {site} at m={m}; increase m"
            )
        seen.add(site)
        events.append(EdgeEvent(site, _EVENT_MOVE[q.cls]))
    return events


def discrete_gamma_correlation(m: int, n: int, lam: complex, T: complex, theta,
                               points: Sequence[QueryPoint]) -> complex:
    """``m**#beads`` times the sector probability of the discretised events."""
    if m < 2 or m % 2:
        raise ValueError("m must be even")
    points = list(points)
    events = _discrete_events(m, n, points)
    nb = sum(q.cls is PointClass.BEAD for q in points)
    value = edge_prob_theta_constant(TorusShape(m, n), *scaling_weights(m, lam, T), theta, events)
    return m ** nb * value


def discrete_gamma_correlation_mixture(m: int, n: int, lam: complex, T: complex, points) -> complex:
    points = list(points)
    events = _discrete_events(m, n, points)
    nb = sum(q.cls is PointClass.BEAD for q in points)
    return m ** nb * edge_prob_constant(TorusShape(m, n), *scaling_weights(m, lam, T), events)
