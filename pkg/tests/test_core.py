import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jumpiso.core import (FiniteMeasureSpace, JumpKernel, KillingPotential,
                          Semigroup, ValidationError, WeightFunction,
                          bar_extension, compose_kernels, dirichlet_energy,
                          extend_by_zero, generator, instance_from_json,
                          instance_to_json, l1_form, schrodinger_energy)
from jumpiso.instances import random_instance


@pytest.fixture
def two_point():
    space = FiniteMeasureSpace([1.0, 1.0])
    kernel = JumpKernel(space, [[0.0, 3.0], [3.0, 0.0]])
    return space, kernel


def test_dirichlet_two_point_oracles(two_point):
    space, kernel = two_point
    # hand expansion: (1/2)(1*3*1*1 + 1*3*1*1)
    assert dirichlet_energy(space, kernel, [1, 0]) == pytest.approx(3.0, abs=1e-14)
    assert dirichlet_energy(space, kernel, [1, 0], [0, 1]) == pytest.approx(-3.0, abs=1e-14)
    assert dirichlet_energy(space, kernel, [5, 5]) == 0.0


def test_l1_form_oracles(two_point):
    space, kernel = two_point
    ones = WeightFunction.ones(2)
    assert l1_form(space, kernel, ones, [5, 1]) == pytest.approx(24.0)
    assert l1_form(space, kernel, ones, [2, 2]) == 0.0
    # indicator: full double sum equals twice the cut flow
    assert l1_form(space, kernel, ones, [1, 0]) == pytest.approx(2.0 * 3.0)


def test_generator_oracles(two_point):
    space, kernel = two_point
    L = generator(space, kernel)
    assert np.allclose(L, [[3.0, -3.0], [-3.0, 3.0]])
    zero = JumpKernel(space, np.zeros((2, 2)))
    assert np.allclose(generator(space, zero), 0.0)
    pot = KillingPotential([2.0, 5.0])
    assert np.allclose(generator(space, zero, pot), np.diag([2.0, 5.0]))


def test_generator_matches_energy():
    rng = np.random.default_rng(0)
    for seed in range(20):
        space, kernel, _, pot = random_instance(seed, (2, 8), with_potential=(seed % 2 == 0))
        L = generator(space, kernel, pot)
        f = rng.standard_normal(space.m)
        g = rng.standard_normal(space.m)
        lhs = float(np.sum(f * (L @ g) * space.mu))
        rhs = schrodinger_energy(space, kernel, pot, f, g)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_semigroup_two_point_closed_form(two_point):
    space, kernel = two_point
    sg = Semigroup(space, kernel)
    for t in (0.0, 0.1, 1.7):
        P = sg.matrix(t)
        g = np.array([0.4, -1.3])
        diff = (P @ g)[0] - (P @ g)[1]
        assert diff == pytest.approx(math.exp(-6.0 * t) * (g[0] - g[1]), rel=1e-12)
    assert np.allclose(sg.matrix(0.0), np.eye(2))
    # long-time limit: rows approach the mass-average projector
    P = sg.matrix(200.0)
    assert np.allclose(P, 0.5, atol=1e-12)


def test_semigroup_kernel_properties():
    for seed in range(8):
        space, kernel, _, pot = random_instance(seed, (2, 9), with_potential=(seed % 3 == 0))
        sg = Semigroup(space, kernel, pot)
        for t in (0.3, 1.1):
            k = sg.kernel_at(t)
            assert np.max(np.abs(k.p - k.p.T)) <= 1e-10
            rows = k.row_integrals()
            assert np.all(rows <= 1.0 + 1e-9)
            if pot is None:
                assert np.allclose(rows, 1.0, atol=1e-9)
        a, b = sg.kernel_at(0.4), sg.kernel_at(0.9)
        combined = compose_kernels(a, b)
        direct = sg.kernel_at(1.3)
        assert np.max(np.abs(combined.p - direct.p)) <= 1e-9


def test_theta_two_point_and_duality(two_point):
    space, kernel = two_point
    ones = WeightFunction.ones(2)
    sg = Semigroup(space, kernel)
    t = 0.37
    assert sg.theta(t, ones) == pytest.approx(2.0 * math.exp(-6.0 * t), rel=1e-12)
    # homogeneity in the weight
    half = WeightFunction(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert sg.theta(t, half) == pytest.approx(sg.theta(t, ones) / 2.0, rel=1e-12)
    # small times approach the disjoint-atom value 2
    assert sg.theta(1e-9, ones) == pytest.approx(2.0, rel=1e-6)


def test_theta_duality_sampling():
    rng = np.random.default_rng(1)
    for seed in range(5):
        space, kernel, gamma, _ = random_instance(seed, (2, 8), with_gamma=True)
        sg = Semigroup(space, kernel)
        t = 0.5
        theta = sg.theta(t, gamma)
        P = sg.matrix(t)
        m = space.m
        for _ in range(200):
            g = rng.uniform(-1.0, 1.0, m)
            pg = P @ g
            for i in range(m):
                for k in range(i + 1, m):
                    assert abs(pg[i] - pg[k]) / gamma.gamma[i, k] <= theta + 1e-9


def test_theta_integral_two_point(two_point):
    space, kernel = two_point
    ones = WeightFunction.ones(2)
    sg = Semigroup(space, kernel)
    t = 0.8
    assert sg.theta_integral(t, ones) == pytest.approx((1 - math.exp(-6.0 * t)) / 3.0, rel=1e-8)
    assert sg.theta_integral(0.0, ones) == 0.0
    assert sg.theta_integral(0.5, ones) <= sg.theta_integral(1.5, ones)


def test_theta_curve_matches_quadrature(two_point):
    space, kernel = two_point
    ones = WeightFunction.ones(2)
    sg = Semigroup(space, kernel)
    theta_int, total = sg.theta_curve(ones)
    for t in (0.05, 0.3, 2.0, 30.0):
        assert theta_int(t) == pytest.approx((1 - math.exp(-6.0 * t)) / 3.0, rel=1e-3)
    assert total == pytest.approx(1.0 / 3.0, rel=1e-3)


def test_bar_extension_identities():
    rng = np.random.default_rng(2)
    for seed in range(100):
        space, kernel, gamma, pot = random_instance(seed, (2, 8), with_gamma=True,
                                                    with_potential=True)
        s2, k2, g2 = bar_extension(space, kernel, pot, gamma, pot.xi)
        f = rng.standard_normal(space.m)
        a = schrodinger_energy(space, kernel, pot, f)
        b = dirichlet_energy(s2, k2, extend_by_zero(f))
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
        x = int(rng.integers(0, space.m))
        lhs = float(np.sum(g2.gamma[x] ** 2 * k2.j[x] * s2.mu))
        rhs = float(np.sum(gamma.gamma[x] ** 2 * kernel.j[x] * space.mu)) \
            + pot.xi[x] ** 2 * pot.v[x]
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_bar_extension_no_killing(two_point):
    space, kernel = two_point
    pot = KillingPotential([0.0, 0.0], [1.0, 1.0])
    s2, k2, _ = bar_extension(space, kernel, pot, WeightFunction.ones(2))
    f = np.array([0.3, -2.0])
    assert dirichlet_energy(s2, k2, extend_by_zero(f)) == pytest.approx(
        dirichlet_energy(space, kernel, f), rel=1e-14)


def test_json_round_trip_and_rejection():
    space, kernel, gamma, pot = random_instance(4, (3, 6), with_gamma=True,
                                                with_potential=True)
    text = instance_to_json(space, kernel, pot, gamma)
    s2, k2, p2, g2 = instance_from_json(text)
    assert np.allclose(s2.mu, space.mu)
    assert np.allclose(k2.j, kernel.j)
    assert np.allclose(p2.v, pot.v)
    assert np.allclose(g2.gamma, gamma.gamma)
    with pytest.raises(ValidationError, match=r"pair \(0, 1\)"):
        instance_from_json('{"mu": [1, 1], "j": [[0, 2], [1, 0]]}')
    with pytest.raises(ValidationError):
        instance_from_json('{"mu": [1, -1], "j": [[0, 1], [1, 0]]}')
    with pytest.raises(ValidationError):
        instance_from_json('{"mu": [1, 1], "j": [[0.5, 1], [1, 0]]}')


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_energy_psd_and_symmetric(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 7))
    space = FiniteMeasureSpace(np.exp(rng.uniform(-1, 1, m)))
    j = rng.random((m, m)) * (rng.random((m, m)) < 0.7)
    j = j + j.T
    np.fill_diagonal(j, 0.0)
    kernel = JumpKernel(space, j)
    f = rng.standard_normal(m)
    g = rng.standard_normal(m)
    assert dirichlet_energy(space, kernel, f) >= 0.0
    assert dirichlet_energy(space, kernel, f, g) == pytest.approx(
        dirichlet_energy(space, kernel, g, f), rel=1e-12, abs=1e-12)
