import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torusdimers import IllConditionedWarning, PoleError, SingularMatrixError, ZeroPartitionError
from torusdimers.correlations import (
    EdgeEvent,
    condition_number,
    edge_prob,
    edge_prob_constant,
    edge_prob_enumeration,
    edge_prob_theta,
    edge_prob_theta_constant,
    inverse_K,
    inverse_K_constant,
    kernel_lookup,
    kernel_table_constant,
    sector_mu,
    sector_mu_constant,
)
from torusdimers.kasteleyn import THETAS, WeightField, build_K
from torusdimers.torus import Move, Site, TorusShape


def fourier_matrix(shape, a, b, c, theta):
    n = shape.n_sites
    return np.array([[inverse_K_constant(shape, a, b, c, theta, shape.site(i), shape.site(j))
                      for j in range(n)] for i in range(n)])


def random_events(shape, rng, size):
    sites = rng.choice(shape.n_sites, size=size, replace=False)
    return [EdgeEvent(shape.site(int(s)), Move(int(rng.integers(3)))) for s in sites]


def test_inverse_identity_and_closed_form():
    w = WeightField.constant(TorusShape(1, 1), 1, 0, 0)
    np.testing.assert_array_equal(inverse_K(w), [[1]])
    w = WeightField.constant(TorusShape(2, 1), 2, 1, 0.5)
    expected = np.array([[2.5, -1], [1, 2.5]]) / 7.25
    np.testing.assert_allclose(inverse_K(w, (1, 0)), expected, atol=1e-15)


def test_inverse_residual(rng):
    w = WeightField.random_complex(TorusShape(3, 3), rng)
    for th in THETAS:
        K = build_K(w, th)
        assert np.abs(K @ inverse_K(w, th) - np.eye(9)).max() <= 1e-9


def test_inverse_singular():
    w = WeightField.constant(TorusShape(2, 2), 1, 1, 0)
    with pytest.raises(SingularMatrixError):
        inverse_K(w, (0, 0))


def test_inverse_ill_conditioned_warns():
    eps = 1e-14
    w = WeightField.constant(TorusShape(2, 1), 1, 1 + eps, 0)
    with pytest.warns(IllConditionedWarning):
        inverse_K(w, (0, 0))
    assert condition_number(np.ones((2, 2))) == np.inf
    assert condition_number(np.eye(3)) == pytest.approx(1)


def test_inverse_constant_single_site():
    s = TorusShape(1, 1)
    assert inverse_K_constant(s, 2, 1, 0.5, (0, 0), Site(0, 0), Site(0, 0)) == pytest.approx(1 / 3.5)


def test_inverse_constant_pole_names_mode():
    with pytest.raises(PoleError) as info:
        inverse_K_constant(TorusShape(2, 2), 1, 1, 0, (0, 0), Site(0, 0), Site(0, 0))
    assert info.value.mode == (1, 0)


@pytest.mark.parametrize("m1, m2", [(4, 3), (6, 4), (1, 3), (3, 1)])
@pytest.mark.parametrize("theta", THETAS)
def test_fourier_matches_lu(m1, m2, theta, rng):
    shape = TorusShape(m1, m2)
    a, b, c = rng.uniform(0.3, 1.5, 3) * np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
    dense = inverse_K(WeightField.constant(shape, a, b, c), theta)
    assert np.abs(fourier_matrix(shape, a, b, c, theta) - dense).max() <= 1e-9
    table = kernel_table_constant(shape, a, b, c, theta)
    idx = np.arange(shape.n_sites)
    x1, x2 = idx % m1, idx // m1
    via_table = kernel_lookup(table, theta, x1[None, :] - x1[:, None], x2[None, :] - x2[:, None])
    assert np.abs(via_table - dense).max() <= 1e-9


@pytest.mark.parametrize("theta", THETAS)
def test_translation_and_twist(theta):
    shape = TorusShape(5, 4)
    a, b, c = 1.0, 0.6 + 0.1j, 0.3
    x, y = Site(0, 1), Site(2, 2)
    base = inverse_K_constant(shape, a, b, c, theta, x, y)
    # a shift that wraps neither point leaves the entry unchanged
    shifted = inverse_K_constant(shape, a, b, c, theta, Site(2, 2), Site(4, 3))
    assert shifted == pytest.approx(base, abs=1e-14)
    # moving y across the seam in e1 picks up (-1)**theta1
    table = kernel_table_constant(shape, a, b, c, theta)
    for d1 in range(-4, 5):
        for d2 in range(-3, 4):
            if d1 >= 1:
                assert kernel_lookup(table, theta, d1 - 5, d2) == pytest.approx(
                    (-1) ** theta[0] * kernel_lookup(table, theta, d1, d2), abs=1e-14)
            if d2 >= 1:
                assert kernel_lookup(table, theta, d1, d2 - 4) == pytest.approx(
                    (-1) ** theta[1] * kernel_lookup(table, theta, d1, d2), abs=1e-14)


def test_sector_mu_examples():
    mu = sector_mu(WeightField.uniform(TorusShape(1, 1)))
    np.testing.assert_allclose(mu.as_tuple(), [1 / 2, 1 / 6, 1 / 6, 1 / 6], atol=1e-15)
    mu = sector_mu(WeightField.uniform(TorusShape(2, 2)))
    np.testing.assert_allclose(mu.as_tuple(), [1 / 6, 5 / 18, 5 / 18, 5 / 18], atol=1e-15)
    const = sector_mu_constant(TorusShape(2, 2), 1, 1, 1)
    np.testing.assert_allclose(const.as_tuple(), mu.as_tuple(), atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_sector_mu_sums_to_one(m1, m2, seed):
    w = WeightField.random_complex(TorusShape(m1, m2), np.random.default_rng(seed))
    assert abs(sector_mu(w).total() - 1) <= 1e-10


def test_zero_partition():
    w = WeightField.constant(TorusShape(2, 2), 0, 0, 0)
    with pytest.raises(ZeroPartitionError):
        sector_mu(w)
    # alpha + beta + gamma = 0 on one site: the sectors cancel up to rounding
    with pytest.raises(ZeroPartitionError):
        sector_mu(WeightField.constant(TorusShape(1, 1), 1, -0.5, -0.5))


def test_edge_prob_examples():
    w = WeightField.uniform(TorusShape(2, 2))
    assert edge_prob(w, []) == 1
    stay = [EdgeEvent(Site(0, 0), Move.STAY)]
    assert edge_prob(w, stay) == pytest.approx(1 / 3, abs=1e-12)
    assert edge_prob_enumeration(w, stay) == pytest.approx(1 / 3, abs=1e-15)
    total = sum(edge_prob(w, [EdgeEvent(Site(0, 0), mv)]) for mv in Move)
    assert total == pytest.approx(1, abs=1e-10)


def test_edge_prob_rejects_repeated_site():
    w = WeightField.uniform(TorusShape(2, 2))
    with pytest.raises(ValueError):
        edge_prob(w, [EdgeEvent(Site(0, 0), Move.STAY), EdgeEvent(Site(0, 0), Move.STEP_E1)])


@pytest.mark.parametrize("theta", THETAS)
def test_sector_unit_mass(theta, rng):
    w = WeightField.random_positive(TorusShape(2, 2), rng)
    assert edge_prob_theta(w, theta, []) == 1
    for site in TorusShape(2, 2).sites():
        total = sum(edge_prob_theta(w, theta, [EdgeEvent(site, mv)]) for mv in Move)
        assert abs(total - 1) <= 1e-10


def test_mixture_identity(rng):
    w = WeightField.random_complex(TorusShape(3, 2), rng)
    mu = sector_mu(w)
    for size in (1, 2, 3):
        events = random_events(w.shape, rng, size)
        mixed = sum(mu[th] * edge_prob_theta(w, th, events) for th in THETAS)
        assert abs(mixed - edge_prob(w, events)) <= 1e-10


@pytest.mark.parametrize("m1, m2", [(1, 2), (2, 1), (2, 2), (3, 2), (2, 3), (3, 3), (4, 3), (6, 2), (1, 5)])
def test_edge_prob_matches_counting(m1, m2, rng):
    shape = TorusShape(m1, m2)
    w = WeightField.random_positive(shape, rng)
    for size in (1, 2, 3):
        if size > shape.n_sites:
            continue
        for _ in range(4):
            events = random_events(shape, rng, size)
            assert abs(edge_prob(w, events) - edge_prob_enumeration(w, events)) <= 1e-9


def test_constant_path_matches_dense(rng):
    shape = TorusShape(4, 3)
    a, b, c = 1.0, 0.8, 0.6
    w = WeightField.constant(shape, a, b, c)
    for size in (1, 2, 3):
        events = random_events(shape, rng, size)
        for th in THETAS:
            assert edge_prob_theta_constant(shape, a, b, c, th, events) == pytest.approx(
                edge_prob_theta(w, th, events), abs=1e-12)
        assert edge_prob_constant(shape, a, b, c, events) == pytest.approx(
            edge_prob_enumeration(w, events), abs=1e-12)


def test_probabilities_real_for_positive_weights(rng):
    w = WeightField.random_positive(TorusShape(3, 3), rng)
    for _ in range(5):
        p = edge_prob(w, random_events(w.shape, rng, 2))
        assert abs(p.imag) <= 1e-10
        assert -1e-10 <= p.real <= 1 + 1e-10
