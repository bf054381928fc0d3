"""Inverse Kasteleyn operators and edge-event probabilities.

Each sector ``theta`` carries a signed measure with unit mass whose event
probabilities are determinants of the inverse operator; the physical
probability is their mixture with weights ``mu_theta = Z_theta / Y``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from ._modes import cis_frac
from .errors import (
    IllConditionedWarning,
    PoleError,
    SingularMatrixError,
    ZeroPartitionError,
)
from .kasteleyn import (
    THETAS,
    WeightField,
    build_K,
    det_lu,
    eigenvalues_constant,
    lu_factorize,
    matching_weights,
    partition_constant_sectors,
    partition_theta_log,
)
from .logcomplex import cancels, log_sum
from .torus import Move, Site, TorusShape, _tables, enumerate_move_codes

CONDITION_WARN = 1e12


@dataclass(frozen=True)
class EdgeEvent:
    """The event that the matching sends ``site`` along ``move``."""

    site: Site
    move: Move

    def __post_init__(self):
        object.__setattr__(self, "move", Move(int(self.move)))


@dataclass(frozen=True)
class SectorWeights:
    values: dict

    def __getitem__(self, theta) -> complex:
        return self.values[tuple(theta)]

    def total(self) -> complex:
        return sum(self.values[th] for th in THETAS)

    def as_tuple(self) -> tuple:
        return tuple(self.values[th] for th in THETAS)


@dataclass(frozen=True)
class _Events:
    xs: np.ndarray
    ys: np.ndarray
    codes: np.ndarray
    g1: int
    g2: int


def _prepare(shape: TorusShape, events: Sequence[EdgeEvent]) -> _Events:
    targets, wrap1, wrap2 = _tables(shape.m1, shape.m2)
    xs = np.array([shape.index(e.site) for e in events], dtype=np.intp)
    if len(set(xs.tolist())) != len(xs):
        raise ValueError("events must involve pairwise distinct sites")
    codes = np.array([int(e.move) for e in events], dtype=np.intp)
    ys = targets[xs, codes] if len(xs) else np.zeros(0, dtype=np.intp)
    g1 = int(np.sum((codes == Move.STEP_E1) & (wrap1[xs] == 1)))
    g2 = int(np.sum((codes == Move.STEP_E2) & (wrap2[xs] == 1)))
    return _Events(xs, ys, codes, g1, g2)


def _wrap_sign(ev: _Events, theta) -> int:
    return -1 if (theta[0] * ev.g1 + theta[1] * ev.g2) % 2 else 1


def inverse_K(w: WeightField, theta=(0, 0)) -> np.ndarray:
    """Dense inverse of the sector operator by pivoted LU.

    Warns with :class:`IllConditionedWarning` when the one-norm condition
    number exceeds ``1e12``.
    """
    K = build_K(w, theta)
    lu, piv = lu_factorize(K)
    Kinv = scipy.linalg.lu_solve((lu, piv), np.eye(K.shape[0], dtype=complex))
    cond = np.linalg.norm(K, 1) * np.linalg.norm(Kinv, 1)
    if not np.isfinite(cond) or cond > CONDITION_WARN:
        warnings.warn(
            f"sector {tuple(theta)} operator has condition number {cond:.3e}",
            IllConditionedWarning,
            stacklevel=2,
        )
    return Kinv


def _check_modes(eig: np.ndarray, scale: float):
    bad = np.argwhere(np.abs(eig) <= 1e-14 * scale)
    if bad.size:
        j2, j1 = (int(v) for v in bad[0])
        raise PoleError(f"Fourier denominator vanishes at mode j=({j1}, {j2})", mode=(j1, j2))


def inverse_K_constant(shape: TorusShape, alpha, beta, gamma, theta, x: Site, y: Site) -> complex:
    """Inverse operator entry ``(x, y)`` for constant weights, by direct mode sum."""
    eig = eigenvalues_constant(shape, alpha, beta, gamma, theta)
    _check_modes(eig, abs(alpha) + abs(beta) + abs(gamma))
    # literal coordinate differences: the kernel is only twisted-periodic
    d1 = y.x1 % shape.m1 - x.x1 % shape.m1
    d2 = y.x2 % shape.m2 - x.x2 % shape.m2
    j1 = np.arange(shape.m1)
    j2 = np.arange(shape.m2)
    # exponent -2*pi*i*[(2 j1 + th1) d1 m2 + (2 j2 + th2) d2 m1] / (2 m1 m2)
    num = -((2 * j1[None, :] + theta[0]) * d1 * shape.m2
            + (2 * j2[:, None] + theta[1]) * d2 * shape.m1)
    phase = cis_frac(num, 2 * shape.m1 * shape.m2)
    terms = phase / eig
    return complex(math.fsum(terms.real.ravel()), math.fsum(terms.imag.ravel())) / shape.n_sites


def kernel_table_constant(shape: TorusShape, alpha, beta, gamma, theta) -> np.ndarray:
    """``L[d2, d1]``: the inverse entry at offset ``y - x = d`` for ``0 <= d < m``, by FFT.

    Offsets outside that range follow ``L(d + m1 e1) = (-1)**theta1 * L(d)``
    (likewise in ``e2``); use :func:`kernel_lookup`.
    """
    eig = eigenvalues_constant(shape, alpha, beta, gamma, theta)
    _check_modes(eig, abs(alpha) + abs(beta) + abs(gamma))
    table = np.fft.fft2(1.0 / eig) / shape.n_sites
    d1 = np.arange(shape.m1)
    d2 = np.arange(shape.m2)
    twist = cis_frac(
        -(theta[0] * d1[None, :] * shape.m2 + theta[1] * d2[:, None] * shape.m1),
        2 * shape.m1 * shape.m2,
    )
    return table * twist


def kernel_lookup(table: np.ndarray, theta, d1, d2):
    """Twisted-periodic lookup of offsets ``d`` with ``-m < d < m``."""
    m2, m1 = table.shape
    d1 = np.asarray(d1)
    d2 = np.asarray(d2)
    flips = theta[0] * (d1 < 0) + theta[1] * (d2 < 0)
    sign = np.where(flips % 2, -1.0, 1.0)
    return sign * table[d2 % m2, d1 % m1]


def sector_mu(w: WeightField) -> SectorWeights:
    logs = {th: partition_theta_log(w, th) for th in THETAS}
    return _mu_from_logs(logs)


def sector_mu_constant(shape: TorusShape, alpha, beta, gamma) -> SectorWeights:
    return _mu_from_logs(partition_constant_sectors(shape, alpha, beta, gamma))


def _mu_from_logs(logs: dict) -> SectorWeights:
    total = log_sum(logs.values())
    if cancels(total, logs.values()):
        raise ZeroPartitionError("partition function vanishes")
    return SectorWeights({th: (logs[th] / total).to_complex() for th in THETAS})


def _event_weight(w: WeightField, ev: _Events) -> complex:
    return complex(np.prod(w.table[ev.xs, ev.codes])) if len(ev.xs) else 1.0 + 0j


def edge_prob_theta(w: WeightField, theta, events: Sequence[EdgeEvent], Kinv=None) -> complex:
    ev = _prepare(w.shape, events)
    if len(ev.xs) == 0:
        return 1.0 + 0j
    if Kinv is None:
        Kinv = inverse_K(w, theta)
    sub = Kinv[np.ix_(ev.ys, ev.xs)]
    det = det_lu(sub).to_complex()
    return _wrap_sign(ev, theta) * _event_weight(w, ev) * det


def edge_prob(w: WeightField, events: Sequence[EdgeEvent]) -> complex:
    if not events:
        return 1.0 + 0j
    mu = sector_mu(w)
    total = 0j
    for th in THETAS:
        if mu[th] == 0:
            continue
        total += mu[th] * edge_prob_theta(w, th, events)
    return total


def edge_prob_enumeration(w: WeightField, events: Sequence[EdgeEvent]) -> complex:
    ev = _prepare(w.shape, events)
    codes = enumerate_move_codes(w.shape)
    weights = matching_weights(w, codes)
    mask = np.all(codes[:, ev.xs] == ev.codes[None, :], axis=1)
    num = weights[mask]
    z = complex(math.fsum(weights.real), math.fsum(weights.imag))
    if z == 0:
        raise ZeroPartitionError("partition function vanishes")
    return complex(math.fsum(num.real), math.fsum(num.imag)) / z


def edge_prob_theta_constant(shape: TorusShape, alpha, beta, gamma, theta,
                             events: Sequence[EdgeEvent], table=None) -> complex:
    """Single-sector event probability for constant weights via the offset kernel."""
    ev = _prepare(shape, events)
    if len(ev.xs) == 0:
        return 1.0 + 0j
    if table is None:
        table = kernel_table_constant(shape, alpha, beta, gamma, theta)
    x1 = ev.xs % shape.m1
    x2 = ev.xs // shape.m1
    y1 = ev.ys % shape.m1
    y2 = ev.ys // shape.m1
    # entry (i, j) is the inverse at (y_i, x_j), offset x_j - y_i
    sub = kernel_lookup(table, theta, x1[None, :] - y1[:, None], x2[None, :] - y2[:, None])
    weights = np.array([alpha, beta, gamma], dtype=complex)[ev.codes]
    det = det_lu(sub).to_complex()
    return _wrap_sign(ev, theta) * complex(np.prod(weights)) * det


def edge_prob_constant(shape: TorusShape, alpha, beta, gamma, events) -> complex:
    if not events:
        return 1.0 + 0j
    mu = sector_mu_constant(shape, alpha, beta, gamma)
    total = 0j
    for th in THETAS:
        if mu[th] == 0:
            continue
        total += mu[th] * edge_prob_theta_constant(shape, alpha, beta, gamma, th, events)
    return total


def condition_number(M) -> float:
    """One-norm condition number from an explicit inverse; ``inf`` if singular."""
    M = np.asarray(M, dtype=complex)
    try:
        lu, piv = lu_factorize(M)
    except SingularMatrixError:
        return math.inf
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(M.shape[0], dtype=complex))
    return float(np.linalg.norm(M, 1) * np.linalg.norm(inv, 1))
