"""Roots of unity evaluated with exact quadrant symmetry.

``np.exp(2j*np.pi*p/q)`` leaves residues of order 1e-16 where the true value
is 0 or +-1 (e.g. ``1 + exp(i*pi)``).  The factors of the Kasteleyn spectra
vanish exactly at such points, so the reduction below is done in integer
arithmetic first and only the first-octant angle reaches ``cos``/``sin``.
"""

import numpy as np


def cis_frac(num, den):
    """Return ``exp(2*pi*i*num/den)`` for integer ``num`` and positive ``den``.

    Both arguments broadcast.  The result is exact at multiples of pi/4 up to
    the rounding of ``cos(pi/4)`` and symmetric under conjugation.
    """
    num = np.asarray(num, dtype=np.int64)
    den = np.asarray(den, dtype=np.int64)
    num, den = np.broadcast_arrays(num, den)
    r = np.mod(num, den)
    quadrant = (4 * r) // den
    r4 = 4 * r - quadrant * den  # angle within quadrant is 2*pi*r4/(4*den)
    upper = 2 * r4 > den
    # second half of the quadrant uses the complementary angle
    k = np.where(upper, den - r4, r4)
    ang = (np.pi / 2) * (k / den)
    c = np.cos(ang)
    s = np.sin(ang)
    re = np.where(upper, s, c)
    im = np.where(upper, c, s)
    re, im = (
        np.choose(quadrant, [re, -im, -re, im]),
        np.choose(quadrant, [im, re, -im, -re]),
    )
    return re + 1j * im


def half_shift_roots(m, theta):
    """The ``m`` roots of ``zeta**m == (-1)**theta`` ordered by mode index.

    Entry ``j`` is ``exp(2*pi*i*(j + theta/2)/m)``.
    """
    j = np.arange(m, dtype=np.int64)
    return cis_frac(2 * j + theta, 2 * m)
