"""Kasteleyn operators, sector determinants and partition functions."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._modes import half_shift_roots
from .errors import SingularMatrixError, TriangleInequalityError
from .logcomplex import LogComplex, log_sum
from .torus import Move, TorusShape, _tables, enumerate_move_codes, sector_sign

THETAS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class WeightField:
    """Per-site complex weights; ``table[i] = (alpha, beta, gamma)`` at site ``i``."""

    shape: TorusShape
    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=complex).reshape(self.shape.n_sites, 3)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def constant(cls, shape: TorusShape, alpha, beta, gamma) -> WeightField:
        row = np.array([alpha, beta, gamma], dtype=complex)
        return cls(shape, np.tile(row, (shape.n_sites, 1)))

    @classmethod
    def uniform(cls, shape: TorusShape) -> WeightField:
        return cls.constant(shape, 1, 1, 1)

    @classmethod
    def random_complex(cls, shape: TorusShape, rng: np.random.Generator) -> WeightField:
        """Entries ``2 + u`` with ``u`` uniform in the unit disc."""
        n = shape.n_sites * 3
        r = np.sqrt(rng.random(n))
        phi = 2 * np.pi * rng.random(n)
        return cls(shape, 2 + r * np.exp(1j * phi))

    @classmethod
    def random_positive(cls, shape: TorusShape, rng: np.random.Generator,
                        low: float = 0.5, high: float = 1.5) -> WeightField:
        return cls(shape, rng.uniform(low, high, size=shape.n_sites * 3))

    def translated(self, v1: int, v2: int) -> WeightField:
        """Field whose value at ``x + v`` is this field's value at ``x``."""
        grid = self.table.reshape(self.shape.m2, self.shape.m1, 3)
        grid = np.roll(grid, shift=(v2, v1), axis=(0, 1))
        return WeightField(self.shape, grid.reshape(-1, 3))


def edge_signs(shape: TorusShape, theta) -> np.ndarray:
    """``(N, 3)`` table of the sector sign attached to each site and move."""
    _, wrap1, wrap2 = _tables(shape.m1, shape.m2)
    signs = np.ones((shape.n_sites, 3))
    signs[:, Move.STEP_E1] = np.where(theta[0] * wrap1 % 2, -1.0, 1.0)
    signs[:, Move.STEP_E2] = np.where(theta[1] * wrap2 % 2, -1.0, 1.0)
    return signs


def build_K(w: WeightField, theta=(0, 0)) -> np.ndarray:
    shape = w.shape
    n = shape.n_sites
    targets = _tables(shape.m1, shape.m2)[0]
    vals = w.table * edge_signs(shape, theta)
    K = np.zeros((n, n), dtype=complex)
    rows = np.repeat(np.arange(n), 3)
    # overlapping targets on degenerate tori must add, hence add.at
    np.add.at(K, (rows, targets.ravel()), vals.ravel())
    return K


def build_w(w: WeightField) -> np.ndarray:
    return build_K(w, (0, 0))


def lu_factorize(M: np.ndarray):
    """Row-pivoted LU via LAPACK; returns ``(lu, piv)`` or raises on a zero pivot."""
    M = np.asarray(M, dtype=complex)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    diag = np.diag(lu)
    if np.any(diag == 0):
        raise SingularMatrixError("matrix is exactly singular (zero pivot)")
    return lu, piv


def _det_from_lu(lu, piv) -> LogComplex:
    diag = np.diag(lu)
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    value = LogComplex.product(diag)
    return -value if swaps % 2 else value


def det_lu(M) -> LogComplex:
    """Determinant in log form; the zero value for singular input."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("square matrix required")
    if M.shape[0] == 0:
        return LogComplex(0.0, 0.0)
    try:
        lu, piv = lu_factorize(M)
    except SingularMatrixError:
        return LogComplex.zero()
    return _det_from_lu(lu, piv)


def partition_theta_log(w: WeightField, theta) -> LogComplex:
    d = det_lu(build_K(w, theta))
    return d * (0.5 * sector_sign(w.shape, theta))


def partition_theta(w: WeightField, theta) -> complex:
    return partition_theta_log(w, theta).to_complex()


def partition_log(w: WeightField) -> LogComplex:
    return log_sum(partition_theta_log(w, th) for th in THETAS)


def partition(w: WeightField) -> complex:
    return partition_log(w).to_complex()


def matching_weights(w: WeightField, codes: np.ndarray) -> np.ndarray:
    """Weight of each row of an ``(count, N)`` move-code array."""
    codes = np.asarray(codes, dtype=np.intp)
    picked = w.table[np.arange(codes.shape[1])[None, :], codes]
    return np.prod(picked, axis=1)


def _csum(values) -> complex:
    values = np.asarray(values, dtype=complex)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def partition_enumeration(w: WeightField) -> complex:
    codes = enumerate_move_codes(w.shape)
    return _csum(matching_weights(w, codes))


def eigenvalues_constant(shape: TorusShape, alpha, beta, gamma, theta) -> np.ndarray:
    """``(m2, m1)`` array of ``alpha + beta*z1[j1] + gamma*z2[j2]``."""
    z1 = half_shift_roots(shape.m1, theta[0])
    z2 = half_shift_roots(shape.m2, theta[1])
    return alpha + beta * z1[None, :] + gamma * z2[:, None]


def partition_constant_sectors(shape: TorusShape, alpha, beta, gamma) -> dict:
    """Sector values ``theta -> LogComplex`` for constant weights."""
    out = {}
    for th in THETAS:
        prod = LogComplex.product(eigenvalues_constant(shape, alpha, beta, gamma, th))
        out[th] = prod * (0.5 * sector_sign(shape, th))
    return out


def partition_constant_log(shape: TorusShape, alpha, beta, gamma) -> LogComplex:
    return log_sum(partition_constant_sectors(shape, alpha, beta, gamma).values())


def partition_constant(shape: TorusShape, alpha, beta, gamma) -> complex:
    return partition_constant_log(shape, alpha, beta, gamma).to_complex()


def check_triangle(alpha, beta, gamma):
    vals = []
    for v in (alpha, beta, gamma):
        v = complex(v)
        if v.imag != 0:
            raise TriangleInequalityError("weights must be real")
        vals.append(v.real)
    a, b, c = vals
    if a > b + c or b > c + a or c > a + b:
        raise TriangleInequalityError(
            f"({a}, {b}, {c}) violates the triangle inequalities"
        )
    return a, b, c


def sign_check_constant(shape: TorusShape, alpha, beta, gamma, theta) -> bool:
    """Whether the real sector determinant has the predicted sign.

    A vanishing determinant (possible only on the boundary of the triangle
    region) is reported as consistent.
    """
    a, b, c = check_triangle(alpha, beta, gamma)
    eig = eigenvalues_constant(shape, a, b, c, theta)
    if np.any(np.abs(eig) <= 1e-12 * (a + b + c)):
        return True
    d = det_lu(build_K(WeightField.constant(shape, a, b, c), theta))
    sign = 1 if math.cos(d.phase) > 0 else -1
    return sign == sector_sign(shape, theta)


def jacobi_minor_check(M, rows, cols, rtol: float = 1e-10) -> bool:
    """Check the complementary-minor identity for ``M`` and index sets ``rows``, ``cols``."""
    M = np.asarray(M, dtype=complex)
    rows = sorted(int(r) for r in rows)
    cols = sorted(int(c) for c in cols)
    if len(rows) != len(cols):
        raise ValueError("row and column sets must have equal size")
    n = M.shape[0]
    lu, piv = lu_factorize(M)
    detM = _det_from_lu(lu, piv).to_complex()
    Minv = scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=complex))
    keep_r = [i for i in range(n) if i not in rows]
    keep_c = [j for j in range(n) if j not in cols]
    lhs = det_lu(M[np.ix_(keep_r, keep_c)]).to_complex()
    sign = -1 if (sum(rows) + sum(cols)) % 2 else 1
    rhs = sign * detM * det_lu(Minv[np.ix_(cols, rows)]).to_complex()
    scale = max(abs(lhs), abs(rhs))
    return abs(lhs - rhs) <= rtol * scale if scale > 0 else True
