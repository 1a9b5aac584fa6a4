import math

import numpy as np
import pytest

from jumpiso.core import (FiniteMeasureSpace, JumpKernel, KillingPotential,
                          Semigroup, WeightFunction)
from jumpiso.instances import random_functions, random_instance
from jumpiso.isoperimetry import enumerate_profile
from jumpiso.superpoincare import certified_rate, rate_power
from jumpiso.theorems import (C_KILLED, C_STAR, cor41, cor41_round_trip,
                              cor41_young, lemma1_core, lemma1_poincare,
                              lemma1_sobolev, rate_from_gauge, thm21_verify,
                              thm21_young, thm41, thm42, thm43)
from jumpiso.young import builtin

SQ = lambda s: np.asarray(s, dtype=float) ** 2


def test_lemma1_core_indicator_single_level():
    space, kernel, gamma, _ = random_instance(0, (3, 6), with_gamma=True)
    f = np.zeros(space.m)
    f[0] = 1.0
    out = lemma1_core(space, kernel, gamma, SQ, f, G_inv=math.sqrt)
    assert out["pass"]
    # normalization: mu(G(c f)) = c^2 mu_0 = 1
    assert out["scale"] == pytest.approx(1.0 / math.sqrt(space.mu[0]), rel=1e-9)


def test_lemma1_core_zero_rejected():
    space, kernel, gamma, _ = random_instance(1, (3, 5), with_gamma=True)
    with pytest.raises(ValueError, match="normalization"):
        lemma1_core(space, kernel, gamma, SQ, np.zeros(space.m))


def test_lemma1_core_random_zero_violations():
    rng = np.random.default_rng(2)
    for seed in range(10):
        space, kernel, gamma, _ = random_instance(seed, (3, 10), with_gamma=(seed % 2 == 0))
        prof = enumerate_profile(space, kernel, gamma)
        for f in random_functions(rng, space.m, 10, grounded=True):
            if not np.any(f):
                continue
            out = lemma1_core(space, kernel, gamma, SQ, f, G_inv=math.sqrt,
                              profile=prof)
            assert out["pass"], (seed, out)


def test_lemma1_poincare():
    rng = np.random.default_rng(3)
    for seed in range(8):
        space, kernel, gamma, _ = random_instance(seed, (3, 9), with_gamma=True)
        prof = enumerate_profile(space, kernel, gamma)
        fam = random_functions(rng, space.m, 30, grounded=True)
        M = space.total_mass
        for s in np.geomspace(space.mu.min() * 0.5, 0.95 * M, 5):
            rep = lemma1_poincare(space, kernel, gamma, float(s), fam, profile=prof)
            assert rep["pass"], (seed, s, rep)
    # constant functions hold up to s = 2 M by plain arithmetic
    space = FiniteMeasureSpace([1.0, 2.0])
    kernel = JumpKernel(space, [[0.0, 1.0], [1.0, 0.0]])
    const = [np.ones(2)]
    for s in (1.0, 4.0, 5.9):
        rep = lemma1_poincare(space, kernel, WeightFunction.ones(2), s, const)
        assert rep["pass"]


def test_lemma1_sobolev_two_point_closed_form():
    space = FiniteMeasureSpace([1.0, 1.0])
    kernel = JumpKernel(space, [[0.0, 3.0], [3.0, 0.0]])
    ones = WeightFunction.ones(2)
    N, rep = lemma1_sobolev(space, kernel, ones, f_family=[np.array([1.0, 0.0])])
    assert rep["pass"]
    # kappa = 3 on (1, 2]: the primitive is r/3 up to r = 1, then flat
    assert float(N(0.2)) == pytest.approx(0.6, rel=1e-12)
    assert math.isinf(float(N(0.5)))
    assert N.inv(0.9) == pytest.approx(0.3, rel=1e-12)


def test_lemma1_sobolev_random():
    rng = np.random.default_rng(4)
    for seed in range(8):
        space, kernel, gamma, _ = random_instance(seed, (3, 9), with_gamma=(seed % 2 == 0))
        fam = random_functions(rng, space.m, 25, grounded=True)
        N, rep = lemma1_sobolev(space, kernel, gamma, f_family=fam)
        assert rep["pass"], (seed, rep)


def test_thm21_traced_constant():
    assert C_STAR == pytest.approx(2.0 / (1.0 - math.exp(-1.0)))
    assert C_KILLED == pytest.approx(2.0 * C_STAR)


def test_thm21_two_point_closed_form_profile():
    # beta(r) = c/r on the symmetric two-point space: Phi has a closed form
    space = FiniteMeasureSpace([1.0, 1.0])
    kernel = JumpKernel(space, [[0.0, 3.0], [3.0, 0.0]])
    sg = Semigroup(space, kernel)
    theta_int, _ = sg.theta_curve(WeightFunction.ones(2))
    c, j = 2.0, 3.0
    built = thm21_young(rate_power(c, 1.0), theta_int, s_max=5.0, points=220)
    assert built["ok"]
    from scipy.integrate import quad
    # hand-computable closed form, matched at construction grid points
    for k in (60, 140, 219):
        s = float(built["grid"][k])
        ref, _ = quad(lambda r: (1 - math.exp(-2 * j * c / r)) / j, 0, s,
                      epsrel=1e-11, epsabs=1e-300)
        assert built["values"][k] == pytest.approx(ref, rel=1e-6)
    assert built["Phi"](0.0) == 0.0


def test_thm21_young_monotone_in_beta():
    space, kernel, gamma, _ = random_instance(5, (3, 6))
    sg = Semigroup(space, kernel)
    theta_int, _ = sg.theta_curve(gamma)
    base = rate_power(1.0, 1.2)
    bigger = base.scaled(2.0)
    a = thm21_young(base, theta_int, s_max=10.0, points=120)
    b = thm21_young(bigger, theta_int, s_max=10.0, points=120)
    # pointwise larger rate -> larger profile -> smaller Young function
    assert np.all(np.asarray(b["values"]) >= np.asarray(a["values"]) - 1e-12)
    for u in np.geomspace(1e-3, 1.0, 8):
        assert float(b["N"](u)) <= float(a["N"](u)) * (1 + 1e-9)


def test_thm21_degenerate_rate_reports_hypothesis():
    space, kernel, gamma, _ = random_instance(6, (3, 6))
    sg = Semigroup(space, kernel)
    theta_int, _ = sg.theta_curve(gamma)
    floor = rate_power(1.0, 0.0)  # constant rate: inverse degenerates at once
    built = thm21_young(floor, theta_int, s_max=10.0)
    assert not built["ok"]
    assert "infinite" in built["note"]


def test_thm21_verify_adversarial_and_random():
    space = FiniteMeasureSpace([10.0, 0.1])
    kernel = JumpKernel(space, [[0.0, 1.0], [1.0, 0.0]])
    rep = thm21_verify(space, kernel, WeightFunction.ones(2), seed=0)
    assert rep.passed
    assert rep.derived["empirical_constant"] <= C_STAR
    for seed in range(4):
        space, kernel, gamma, _ = random_instance(seed, (3, 7), with_gamma=(seed % 2 == 0))
        rep = thm21_verify(space, kernel, gamma, seed=seed)
        assert rep.passed, rep.to_json()
        assert rep.derived["empirical_constant"] <= C_STAR + 1e-9


def test_thm41_closed_form_two_point():
    space = FiniteMeasureSpace([1.0, 1.0])
    kernel = JumpKernel(space, [[0.0, 3.0], [3.0, 0.0]])
    ones = WeightFunction.ones(2)
    N = builtin("power", p=2)
    fam = [np.array([1.0, 0.0]), np.array([0.0, -2.0])]
    r_grid = [0.05, 0.2, 1.0]
    rep = thm41(N, space, kernel, ones, fam, r_grid)
    assert rep.passed
    # indicator constant: ||1_A||_N / l1 = 1 / (2 * 3) with N^{-1}(1) = 1
    assert rep.derived["C_indicator"] == pytest.approx(1.0 / 6.0, rel=1e-9)
    # c_gamma = max_i sum_k j mu = 3
    assert rep.derived["c_gamma"] == pytest.approx(3.0)


def test_thm41_thm42_chain_random():
    rng = np.random.default_rng(7)
    for seed in range(4):
        space, kernel, gamma, _ = random_instance(seed, (3, 7), with_gamma=(seed % 2 == 0))
        M = space.total_mass
        fam = random_functions(rng, space.m, 25, grounded=True)
        r_grid = np.geomspace(1e-3 / M, 1e2 / M, 8)
        N = builtin("power", p=2) if seed % 2 else cor41_young(1, 1.8, 2.5)
        rep1 = thm41(N, space, kernel, gamma, fam, r_grid)
        assert rep1.passed, rep1.to_json()
        beta1 = rate_from_gauge(N, rep1.derived["C_used"], lead=2.0)
        rep2 = thm42(beta1, space, kernel, gamma, fam, r_grid)
        assert rep2.passed, rep2.to_json()


def test_thm41_requires_superlinear():
    space, kernel, gamma, _ = random_instance(8, (3, 5))
    sub = builtin("power", p=1.0)  # N(s)/s constant, boundary case passes
    rep = thm41(sub, space, kernel, gamma, [], [1.0])
    assert rep.passed


def test_cor41_case1_collapse():
    out = cor41(1, "to_rate", {"p1": 2.0, "p2": 2.0})
    beta1 = out["rate"]
    # classical pair: beta1 = 2 (C/r)^{p/(p-1)} with C = 1, p = 2
    for r in (0.1, 1.0, 10.0):
        assert beta1(r) == pytest.approx(2.0 * r ** -2.0, rel=1e-9)
    assert out["c_band"][1] / out["c_band"][0] < 1.001


def test_cor41_case3_q0_reduces_to_power():
    out = cor41(3, "to_rate", {"p1": 2.0, "q": 0.0})
    ref = cor41(1, "to_rate", {"p1": 2.0, "p2": 2.0})
    for r in (0.1, 1.0, 10.0):
        assert out["rate"](r) == pytest.approx(ref["rate"](r), rel=1e-9)


@pytest.mark.parametrize("case,params", [
    (1, {"p1": 1.6, "p2": 2.4}), (2, {"p1": 1.6, "p2": 2.4}),
    (3, {"p1": 2.0, "q": 1.0}), (4, {"p1": 2.0, "q": 1.0})])
def test_cor41_round_trip_slope_fidelity(case, params):
    out = cor41_round_trip(case, params)
    assert out["pass"], out
    assert abs(out["slope_gap_low"]) <= 1e-3
    assert abs(out["slope_gap_high"]) <= 1e-3


def test_thm43_killed_instances():
    for seed in range(3):
        space, kernel, gamma, pot = random_instance(seed, (3, 6), with_gamma=(seed % 2 == 0),
                                                    with_potential=True)
        rep = thm43(space, kernel, pot, gamma, seed=seed)
        assert rep.passed, rep.to_json()
        assert rep.derived["empirical_forward_constant"] <= C_KILLED


def test_thm43_no_killing_reduces():
    space, kernel, gamma, _ = random_instance(9, (3, 5))
    pot = KillingPotential(np.zeros(space.m), np.ones(space.m))
    rep = thm43(space, kernel, pot, gamma, seed=0)
    assert rep.passed
    assert any("reduces" in note for note in rep.notes)


def test_thm43_zero_xi_reported():
    space, kernel, gamma, _ = random_instance(10, (3, 5))
    v = np.zeros(space.m)
    v[0] = 1.0
    pot = KillingPotential(v, np.zeros(space.m))
    rep = thm43(space, kernel, pot, gamma, seed=0)
    assert not rep.passed
    assert any("xi vanishes" in note for note in rep.notes)
