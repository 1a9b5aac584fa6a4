"""Executable theorem engines tying energies, profiles, rates and gauges.

Each engine turns one implication of the inequality calculus into a
verification harness: derived objects (Young functions, rate functions,
constants) are built along the proof route with explicit traced constants,
then the claimed inequality is checked on a supplied function family, and
all slacks land in a TheoremReport.  Empirical best constants are reported
alongside but never used for pass/fail.

Finite-model conventions, used consistently below:

- Isoperimetric curves run over proper nonempty subsets.
- Test families for the L1 gauge inequalities consist of functions that
  vanish somewhere ("grounded"), the finite analog of compact support;
  the regularization route additionally restricts support masses to a
  fixed fraction of the total mass and floors the rate argument
  accordingly.  Reports record those domains.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (KillingPotential, Semigroup, WeightFunction, bar_extension,
                   dirichlet_energy, extend_by_zero, l1_form,
                   schrodinger_energy)
from .isoperimetry import (IsoperimetricProfile, _doubling_enumeration,
                           enumerate_profile)
from .numerics import (INF, cumulative_quad, end_slope, ext_ratio,
                       inv_decreasing, inv_increasing, safe_pow)
from .reports import TheoremReport
from .superpoincare import RateFunction, certified_rate, rate_tabulated, sp_verify
from .young import (YoungFunction, indicator_norm, orlicz_norm,
                    piecewise_linear_young, tabulated_young)

C_STAR = 2.0 / (1.0 - math.exp(-1.0))      # traced constant for the
# regularization route: the gauge comparison costs a dilation by
# 4/(1-1/e) of the argument and the layer-cake bound carries 1/2.
C_KILLED = 2.0 * C_STAR                    # killed route: the extended
# L1 form double-counts the killing term relative to the target bracket.


def _kappa_step_data(profile: IsoperimetricProfile):
    levels, kappas = profile.kappa_steps()
    return np.asarray(levels, dtype=float), np.asarray(kappas, dtype=float)


# ---------------------------------------------------------------------------
# layer-cake core inequality

def lemma1_core(space, kernel, gamma, G, f, G_inv=None, profile=None,
                tol=1e-9) -> dict:
    """Layer-cake bound: mean of the kappa-primitive of |f| against the
    halved L1 form, after rescaling f so that mu(G(|f|)) = 1.

    G must be continuous and strictly increasing with G(0) = 0.  The left
    side integrates the step function kappa(1/G(s)) exactly between the
    breakpoints G^{-1}(1/mass); the reported scale is the normalizing c.
    """
    f = np.abs(np.asarray(f, dtype=float))
    if not np.any(f > 0):
        raise ValueError("normalization impossible: f vanishes identically")

    def mean_G(c):
        return float(np.sum(np.asarray(G(c * f), dtype=float) * space.mu))

    scale = inv_increasing(mean_G, 1.0)
    if not (0 < scale < INF):
        raise ValueError("normalization impossible for this f and G")
    fs = scale * f

    prof = profile if profile is not None else enumerate_profile(space, kernel, gamma)
    levels, kappas = _kappa_step_data(prof)
    if G_inv is None:
        G_inv = lambda r: inv_increasing(lambda s: float(G(s)), r)
    # s-breakpoints, descending with mass level
    t = np.array([G_inv(1.0 / lv) for lv in levels])

    def primitive(F):
        if F <= 0:
            return 0.0
        if F > t[0] * (1 + 1e-9) + 1e-300:
            return INF
        total = kappas[-1] * min(F, t[-1])
        for i in range(len(levels) - 1):
            lo, hi = t[i + 1], t[i]
            total += kappas[i] * max(0.0, min(F, hi) - lo)
        return total

    lhs = float(np.sum(space.mu * np.array([primitive(v) for v in fs])))
    rhs = 0.5 * l1_form(space, kernel, gamma, fs)
    return {"lhs": lhs, "rhs": rhs, "scale": scale, "slack": rhs - lhs,
            "pass": lhs <= rhs + tol * max(1.0, abs(rhs))}


def lemma1_poincare(space, kernel, gamma, s, f_family, profile=None,
                    tol=1e-9) -> dict:
    """Defective L2 bound from kappa(s): for each f,
    ||f||_2^2 <= l1(f^2)/(2 kappa(s)) + (2/s) ||f||_1^2.

    Guaranteed for s below the total mass, and for any s when f vanishes
    somewhere; each row records whether it sits in the guaranteed domain.
    """
    prof = profile if profile is not None else enumerate_profile(space, kernel, gamma)
    kap = prof.kappa(s)
    if kap == 0.0:
        return {"claim": "defective L2 bound", "s": s, "kappa": 0.0,
                "pass": True, "vacuous": True,
                "note": "kappa(s) = 0: inequality vacuous"}
    coeff = 0.0 if math.isinf(kap) else 1.0 / (2.0 * kap)
    rows, nviol, worst = [], 0, INF
    for idx, f in enumerate(f_family):
        f = np.asarray(f, dtype=float)
        lhs = float(np.sum(f * f * space.mu))
        l1sq = float(np.sum(np.abs(f) * space.mu)) ** 2
        rhs = coeff * l1_form(space, kernel, gamma, f * f) + 2.0 / s * l1sq
        slack = rhs - lhs
        fmin = float(np.min(np.abs(f)))
        guaranteed = s <= space.total_mass or fmin == 0.0
        rows.append({"f": idx, "slack": slack, "guaranteed": guaranteed})
        worst = min(worst, slack)
        if slack < -tol:
            nviol += 1
    return {"claim": "defective L2 bound", "s": s, "kappa": kap,
            "worst_slack": worst, "violations": nviol, "rows": rows,
            "pass": nviol == 0}


def lemma1_sobolev(space, kernel, gamma, profile=None, f_family=(),
                   tol=1e-9):
    """Gauge inequality from the exact step curve.

    The primitive Phi(t) = integral of 1/kappa(1/r) is piecewise linear, so
    its inverse is an exact piecewise-linear Young function N with
    ||f||_N <= (1/2) l1(f) for every f vanishing somewhere.  Returns
    (N, report).
    """
    prof = profile if profile is not None else enumerate_profile(space, kernel, gamma)
    levels, kappas = _kappa_step_data(prof)
    if kappas[-1] <= 0.0:
        raise ValueError("kappa hits 0 (disconnected support): profile primitive diverges")
    # ascending r-breakpoints 1/levels reversed; slope 1/kappa on each piece
    r_knots = [0.0]
    phi_knots = [0.0]
    r_prev = 0.0
    slopes = 1.0 / kappas[::-1]          # slope on (1/levels[i+1], 1/levels[i])
    bounds = 1.0 / levels[::-1]
    for slope, r_next in zip(slopes, bounds):
        phi_knots.append(phi_knots[-1] + slope * (r_next - r_prev))
        r_knots.append(r_next)
        r_prev = r_next
    N = piecewise_linear_young(phi_knots, r_knots, cap=phi_knots[-1])

    rows, nviol, worst = [], 0, INF
    for idx, f in enumerate(f_family):
        f = np.asarray(f, dtype=float)
        lhs = orlicz_norm(space, N, f)
        rhs = 0.5 * l1_form(space, kernel, gamma, f)
        slack = rhs - lhs
        rows.append({"f": idx, "slack": slack,
                     "grounded": bool(np.min(np.abs(f)) == 0.0)})
        worst = min(worst, slack)
        if slack < -tol:
            nviol += 1
    report = {"claim": "gauge bound from the step curve", "worst_slack": worst,
              "violations": nviol, "rows": rows, "pass": nviol == 0,
              "phi_cap": phi_knots[-1]}
    return N, report


# ---------------------------------------------------------------------------
# rate -> gauge (regularization route)

def thm21_young(beta: RateFunction, theta_integral_fn, s_max: float,
                r_floor: float = 0.0, s_min: float | None = None,
                points: int = 160) -> dict:
    """Young function from the regularization profile of a valid rate.

    Phi(s) = integral_0^s Theta(beta^{-1}(max(r, r_floor))) dr, inverted on
    a cached log grid.  With r_floor = 0 and a rate that never descends
    below some positive floor, the inner time horizon is infinite from the
    start: the profile is reported as infinite (hypothesis failure), not an
    error.
    """
    probe_r = r_floor if r_floor > 0 else max(s_max * 1e-12, 1e-300)
    horizon = beta.inv(probe_r)
    if math.isinf(horizon):
        return {"ok": False, "N": None, "Phi": None,
                "note": f"profile infinite: rate inverse diverges at r={probe_r!r}"}
    theta_at_floor = theta_integral_fn(horizon)
    if math.isinf(theta_at_floor):
        return {"ok": False, "N": None, "Phi": None,
                "note": "profile infinite: Theta diverges on the needed horizon"}

    def integrand(r):
        return theta_integral_fn(beta.inv(max(r, r_floor)))

    s_lo = s_min if s_min is not None else s_max * 1e-10
    grid = np.concatenate([[0.0], np.geomspace(s_lo, s_max, points)])
    vals = cumulative_quad(integrand, grid, rtol=1e-9, power_head=True)
    # trim the flat tail (where the rate inverse has collapsed to zero) so
    # the log-log tabulation keeps strictly increasing knots
    inc = np.flatnonzero(np.diff(vals) > 1e-14 * max(vals[-1], 1e-300))
    last = inc[-1] + 1 if inc.size else len(vals) - 1
    N = tabulated_young(vals[1:last + 1], grid[1:last + 1],
                        family="rate_profile_inverse")
    phi = lambda s: float(np.interp(s, grid, vals)) if s <= s_max else INF
    return {"ok": True, "N": N, "Phi": phi, "grid": grid[1:], "values": vals[1:]}


def thm21_verify(space, kernel, gamma, beta=None, f_family=None,
                 support_fraction: float = 0.45, r_grid=None, seed: int = 0,
                 tol=1e-9) -> TheoremReport:
    """Rate-to-gauge inequality at the traced constant.

    Builds the regularization Young function from a certified rate and
    checks ||f||_N <= C* l1_gamma(f) with C* = 2/(1 - 1/e) over functions
    supported on subsets of at most ``support_fraction`` of the total mass
    (the finite-model stand-in for compact support; see the report notes for
    the matching rate-argument floor).  The empirical best constant is
    recorded and must not exceed C*.
    """
    rep = TheoremReport("thm21")
    m = space.m
    total = space.total_mass
    rng = np.random.default_rng(seed)
    if r_grid is None:
        r_grid = np.geomspace(1e-3 / total, 1e3 / total, 25)
    if beta is None:
        beta = certified_rate(space, kernel, r_grid, seed=seed)
        rep.note("rate: inflated certified estimate on the r grid")
    sp = sp_verify(space, kernel, beta,
                   [np.asarray(f, float) for f in
                    (list(f_family) if f_family else [])] or
                   [rng.standard_normal(m) for _ in range(20)], r_grid)
    rep.add("rate inequality holds on the family", sp["worst_slack"], tol)

    cap = support_fraction * total
    s_cap = (support_fraction + 0.01) * total
    r_floor = 1.0 / (2.0 * s_cap)
    if math.isinf(beta.inv(r_floor)):
        rep.note("rate floor exceeds the argument floor: profile degenerate")
        rep.add("profile finite", -INF, tol)
        return rep

    sg = Semigroup(space, kernel)
    theta_int, theta_total = sg.theta_curve(gamma)
    built = thm21_young(beta, theta_int, s_max=100.0 / float(space.mu.min()),
                        r_floor=r_floor)
    if not built["ok"]:
        rep.note(built["note"])
        rep.add("profile finite", -INF, tol)
        return rep
    N = built["N"]
    rep.derived["constant"] = C_STAR
    rep.derived["r_floor"] = r_floor
    rep.derived["support_cap_mass"] = cap
    rep.derived["theta_total"] = theta_total

    if f_family is None:
        from .instances import indicators_below, small_support_functions
        f_family = (indicators_below(space, cap) if m <= 14 else []) + \
            small_support_functions(rng, space, cap, 40)
    kept, skipped = [], 0
    for f in f_family:
        f = np.asarray(f, dtype=float)
        supp_mass = float(space.mu[np.abs(f) > 0].sum())
        if supp_mass <= cap + 1e-12:
            kept.append(f)
        else:
            skipped += 1
    if skipped:
        rep.note(f"skipped {skipped} family members with support mass above the cap")

    emp = 0.0
    worst = INF
    for f in kept:
        lhs = orlicz_norm(space, N, f)
        denom = l1_form(space, kernel, gamma, f)
        rhs = C_STAR * denom
        worst = min(worst, rhs - lhs)
        if denom > 0:
            emp = max(emp, lhs / denom)
    rep.add("gauge bound at the traced constant", worst, tol)
    rep.add("empirical constant below traced", C_STAR + tol - emp, tol)
    rep.derived["empirical_constant"] = emp
    rep.derived["family_size"] = len(kept)
    return rep


# ---------------------------------------------------------------------------
# gauge -> rate (and back): the monotone-root constructions

def _check_s_over_N_increasing(N: YoungFunction, lo=1e-8, hi=1e8, points=300):
    s = np.geomspace(lo, hi, points)
    vals = np.asarray(N(s), dtype=float) / s
    finite = np.isfinite(vals)
    v = vals[finite]
    return not np.any(np.diff(v) < -1e-10 * np.abs(v[:-1]))


def indicator_gauge_constant(space, kernel, gamma, N,
                             profile=None) -> float:
    """sup over proper subsets of ||1_A||_N / l1(1_A) (exact)."""
    prof = profile if profile is not None else enumerate_profile(space, kernel, gamma)
    best = 0.0
    for mass, flow in zip(prof.sorted_masses, prof.sorted_flows):
        best = max(best, ext_ratio(indicator_norm(N, mass), 2.0 * flow))
    return best


def rate_from_gauge(N: YoungFunction, C: float, lead: float = 2.0) -> RateFunction:
    """beta(r) = lead * inf{s : C N^{-1}(s)/s <= r}, by monotone root-finding.

    N^{-1}(s)/s is decreasing when s -> N(s)/s is increasing, so the root is
    a generalized inverse; the same construction with lead 4 and the
    Cauchy-Schwarz constant produces the full rate of the square-root route.
    """
    def g(s):
        return C * N.inv(s) / s

    def ev(r):
        root = inv_decreasing(g, r)
        return lead * root if not math.isinf(root) else INF

    def iv(u):
        return inv_decreasing(ev, u)

    return RateFunction("gauge_root", {"C": C, "lead": lead}, ev, iv)


def thm41(N: YoungFunction, space, kernel, gamma, f_family, r_grid,
          C: float | None = None, s_grid=None, tol=1e-9) -> TheoremReport:
    """From the L1 gauge inequality at constant C to: (1) a pointwise lower
    bound on the isoperimetric curve, (2) a defective L2 rate, and (3) a
    full rate under the square-integrability bound on the weighted kernel.

    C is raised to the exact indicator supremum when not supplied, which is
    what conclusions (1)-(3) consume.
    """
    rep = TheoremReport("thm41")
    if not _check_s_over_N_increasing(N):
        raise ValueError("s -> N(s)/s must be increasing for this route")
    prof = enumerate_profile(space, kernel, gamma)
    C_ind = indicator_gauge_constant(space, kernel, gamma, N, prof)
    C_used = max(C or 0.0, C_ind)
    rep.derived["C_used"] = C_used
    rep.derived["C_indicator"] = C_ind

    if s_grid is None:
        masses = prof.sorted_masses
        s_grid = np.unique(np.concatenate([masses * 1.0001, masses * 0.9999,
                                           np.geomspace(masses[0] * 0.5,
                                                        masses[-1] * 2.0, 16)]))
    worst1 = INF
    for s in s_grid:
        bound = ext_ratio(1.0, 2.0 * C_used * s * N.inv(1.0 / s))
        kap = prof.kappa(float(s))
        if math.isinf(kap):
            continue
        worst1 = min(worst1, kap - bound)
    rep.add("curve lower bound 1/(2 C s N^{-1}(1/s))", worst1, tol)

    beta1 = rate_from_gauge(N, C_used, lead=2.0)
    worst2 = INF
    for f in f_family:
        f = np.asarray(f, dtype=float)
        l2 = float(np.sum(f * f * space.mu))
        l1sq = float(np.sum(np.abs(f) * space.mu)) ** 2
        sq = l1_form(space, kernel, gamma, f * f)
        for r in r_grid:
            b = beta1(r)
            if math.isinf(b):
                continue
            worst2 = min(worst2, r * sq + b * l1sq - l2)
    rep.add("defective rate from the gauge root", worst2, tol)

    c_gamma = float(np.max(np.sum(gamma.gamma ** 2 * kernel.j * space.mu[None, :],
                                  axis=1)))
    rep.derived["c_gamma"] = c_gamma
    scale = 2.0 * C_used * math.sqrt(2.0 * c_gamma)

    def beta_full(r):
        root = inv_decreasing(lambda s: N.inv(s) / s, math.sqrt(r) / scale)
        return 4.0 * root if not math.isinf(root) else INF

    worst3 = INF
    for f in f_family:
        f = np.asarray(f, dtype=float)
        l2 = float(np.sum(f * f * space.mu))
        l1sq = float(np.sum(np.abs(f) * space.mu)) ** 2
        en = dirichlet_energy(space, kernel, f)
        for r in r_grid:
            b = beta_full(r)
            if math.isinf(b):
                continue
            worst3 = min(worst3, r * en + b * l1sq - l2)
    rep.add("full rate under the kernel square bound", worst3, tol)
    rep.derived["beta1"] = "2 inf{s : C N^{-1}(s)/s <= r}"
    rep.derived["beta"] = "4 inf{s : N^{-1}(s)/s <= sqrt(r)/(2 C sqrt(2 c_gamma))}"
    return rep


def subset_rate_check(space, kernel, gamma, beta1, r_values, profile=None,
                      tol=1e-9) -> float:
    """Worst slack of mu(A) <= 2 r flow(A) + beta1(r) mu(A)^2 over subsets."""
    prof = profile if profile is not None else enumerate_profile(space, kernel, gamma)
    worst = INF
    for r in r_values:
        if math.isinf(r):
            continue
        b = beta1(r)
        if math.isinf(b):
            continue
        slack = (2.0 * r * prof.sorted_flows + b * prof.sorted_masses ** 2
                 - prof.sorted_masses)
        worst = min(worst, float(slack.min()))
    return worst


def thm42(beta1: RateFunction, space, kernel, gamma, f_family, r_grid,
          s_grid=None, tol=1e-9) -> TheoremReport:
    """From a defective L2 rate to: (1) an isoperimetric lower bound,
    (2) a gauge inequality with N = Phi^{-1}, Phi(t) = 4 int_0^t
    beta1^{-1}(r/2) dr, at constant 1/2, and (3) a full rate.

    The subset form of the defective rate is pre-checked at every inverse
    argument the route uses; grid points where beta1^{-1} degenerates are
    skipped with a note.
    """
    rep = TheoremReport("thm42")
    prof = enumerate_profile(space, kernel, gamma)
    if s_grid is None:
        masses = prof.sorted_masses
        s_grid = np.unique(np.concatenate([masses * 1.0001,
                                           np.geomspace(masses[0] * 0.5,
                                                        masses[-1] * 2.0, 12)]))
    r_stars = []
    worst1, skipped = INF, 0
    for s in s_grid:
        r_star = beta1.inv(1.0 / (2.0 * float(s)))
        if math.isinf(r_star):
            skipped += 1
            continue
        r_stars.append(r_star)
        kap = prof.kappa(float(s))
        bound = ext_ratio(1.0, 4.0 * r_star)
        if math.isinf(kap):
            continue
        worst1 = min(worst1, kap - bound)
    premise = subset_rate_check(space, kernel, gamma, beta1, r_stars, prof)
    rep.add("subset defective rate at the used arguments", premise, tol)
    rep.add("curve lower bound 1/(4 beta1^{-1}(1/(2s)))", worst1, tol)
    if skipped:
        rep.note(f"skipped {skipped} grid points with degenerate rate inverse")

    # gauge side: Phi(t) = 4 int_0^t beta1^{-1}(r/2) dr
    horizon = beta1.inv(max(r_grid[0], 1e-300) / 2.0)
    if math.isinf(horizon):
        rep.note("profile divergent: rate inverse infinite near 0")
        rep.add("profile finite", -INF, tol)
        return rep
    t_max = 10.0 / float(space.mu.min())
    grid = np.concatenate([[0.0], np.geomspace(t_max * 1e-12, t_max, 140)])
    vals = cumulative_quad(lambda r: 4.0 * beta1.inv(r / 2.0), grid, rtol=1e-9,
                           power_head=True)
    if not np.all(np.isfinite(vals)):
        rep.note("profile divergent on the grid")
        rep.add("profile finite", -INF, tol)
        return rep
    N = tabulated_young(vals[1:], grid[1:], family="defective_rate_inverse")
    worst2 = INF
    for f in f_family:
        f = np.asarray(f, dtype=float)
        lhs = orlicz_norm(space, N, f)
        worst2 = min(worst2, 0.5 * l1_form(space, kernel, gamma, f) - lhs)
    rep.add("gauge bound at constant 1/2", worst2, tol)

    c_gamma = float(np.max(np.sum(gamma.gamma ** 2 * kernel.j * space.mu[None, :],
                                  axis=1)))
    rep.derived["c_gamma"] = c_gamma
    worst3 = INF
    for f in f_family:
        f = np.asarray(f, dtype=float)
        l2 = float(np.sum(f * f * space.mu))
        l1sq = float(np.sum(np.abs(f) * space.mu)) ** 2
        en = dirichlet_energy(space, kernel, f)
        for r in r_grid:
            b = 2.0 * beta1(math.sqrt(r) / (2.0 * math.sqrt(2.0 * c_gamma)))
            if math.isinf(b):
                continue
            worst3 = min(worst3, r * en + b * l1sq - l2)
    rep.add("full rate 2 beta1(sqrt(r)/(2 sqrt(2 c_gamma)))", worst3, tol)
    rep.derived["N"] = "Phi^{-1}, Phi(t) = 4 int_0^t beta1^{-1}(r/2) dr"
    return rep


# ---------------------------------------------------------------------------
# the four closed-form correspondences

def _exponent(p: float) -> float:
    return p / (p - 1.0)


def cor41_young(case: int, p1: float, p2: float = None, q: float = 0.0,
                lam: float = 2.0) -> YoungFunction:
    if case == 1:
        ev = lambda s: np.minimum(s ** p1, s ** p2)
        iv = lambda r: max(r ** (1 / p1), r ** (1 / p2))
        hi, lo = max(p1, p2), min(p1, p2)
        dv = lambda s: np.where(s <= 1, hi * s ** (hi - 1), lo * s ** (lo - 1))
        return YoungFunction("cor_case1", {"p1": p1, "p2": p2, "kink": 1.0}, ev, iv, dv)
    if case == 2:
        ev = lambda s: np.maximum(s ** p1, s ** p2)
        iv = lambda r: min(r ** (1 / p1), r ** (1 / p2))
        hi, lo = max(p1, p2), min(p1, p2)
        dv = lambda s: np.where(s <= 1, lo * s ** (lo - 1), hi * s ** (hi - 1))
        return YoungFunction("cor_case2", {"p1": p1, "p2": p2}, ev, iv, dv)
    if case == 3:
        def ev(s):
            s = np.asarray(s, dtype=float)
            with np.errstate(divide="ignore"):
                L = np.log(lam + np.where(s > 0, 1.0 / s, INF))
            return np.where(s > 0, s ** p1 * L ** q, 0.0)

        def dv(s):
            s = np.maximum(np.asarray(s, dtype=float), 1e-300)
            L = np.log(lam + 1.0 / s)
            return s ** (p1 - 1) * L ** (q - 1) * (p1 * L - q / (lam * s + 1.0))
        iv = lambda r: inv_increasing(lambda s: float(ev(s)), r) if r > 0 else 0.0
        return YoungFunction("cor_case3", {"p": p1, "q": q, "lambda": lam}, ev, iv, dv)
    if case == 4:
        def ev(s):
            s = np.asarray(s, dtype=float)
            return s ** p1 * np.log(lam + s) ** q

        def dv(s):
            s = np.asarray(s, dtype=float)
            L = np.log(lam + s)
            return s ** (p1 - 1) * L ** (q - 1) * (p1 * L + q * s / (lam + s))
        iv = lambda r: inv_increasing(lambda s: float(ev(s)), r) if r > 0 else 0.0
        return YoungFunction("cor_case4", {"p": p1, "q": q, "lambda": lam}, ev, iv, dv)
    raise ValueError("case must be 1..4")


def cor41_target_shape(case: int, p1: float, p2: float = None, q: float = 0.0):
    """The matching defective-rate shape (unit constant)."""
    if case == 1:
        a1, a2 = _exponent(p1), _exponent(p2)
        return lambda r: max(safe_pow(r, -a1), safe_pow(r, -a2))
    if case == 2:
        a1, a2 = _exponent(p1), _exponent(p2)
        return lambda r: min(safe_pow(r, -a1), safe_pow(r, -a2))
    a = _exponent(p1)
    qq = q / (p1 - 1.0)
    if case == 3:
        return lambda r: safe_pow(r, -a) * safe_pow(math.log(2.0 + r), -qq)
    if case == 4:
        return lambda r: safe_pow(r, -a) * safe_pow(math.log(2.0 + 1.0 / r), -qq)
    raise ValueError("case must be 1..4")


def cor41(case: int, direction: str, params: dict, C: float = 1.0,
          r_grid=None) -> dict:
    """Convert between a gauge Young function and its defective-rate family.

    direction "to_rate": N with constant C -> beta1 via the monotone root of
    the defective construction; the constant of the target family is fitted
    on a log grid and its spread reported.
    direction "to_young": beta1 (unit constant times ``C``) -> N via the
    primitive of the rate inverse at constant 1/2.
    """
    p1 = params["p1"]
    p2 = params.get("p2", p1)
    q = params.get("q", 0.0)
    lam = params.get("lam", 2.0)
    shape = cor41_target_shape(case, p1, p2, q)
    if r_grid is None:
        r_grid = np.geomspace(1e-8, 1e8, 81)
    if direction == "to_rate":
        N = cor41_young(case, p1, p2, q, lam)
        beta1 = rate_from_gauge(N, C, lead=2.0)
        vals = np.array([beta1(r) for r in r_grid])
        ratios = vals / np.array([shape(r) for r in r_grid])
        return {"rate": beta1, "young": N,
                "fitted_c": float(np.exp(np.mean(np.log(ratios)))),
                "c_band": [float(ratios.min()), float(ratios.max())]}
    if direction == "to_young":
        beta1 = RateFunction("cor_target", {"case": case, "C": C},
                             lambda r: C * shape(r),
                             lambda u: inv_decreasing(lambda r: C * shape(r), u))
        # the grid must reach far enough that the primitive's values cover
        # the slope-measurement windows without extrapolation
        grid = np.concatenate([[0.0], np.geomspace(1e-100, 1e100, 1100)])
        vals = cumulative_quad(lambda r: 4.0 * beta1.inv(r / 2.0), grid, rtol=1e-10,
                               power_head=True)
        N = tabulated_young(vals[1:], grid[1:], family="cor_young")
        return {"rate": beta1, "young": N, "constant": 0.5}
    raise ValueError("direction must be to_rate or to_young")


def cor41_round_trip(case: int, params: dict, tol_slope: float = 1e-3) -> dict:
    """N -> beta1 -> N' and compare fitted end slopes of N'/N.

    The windows sit deep in both tails (around 1e-40 and 1e40) so the
    slowly-varying second-order corrections of the log-modified families are
    below the slope tolerance.
    """
    fwd = cor41(case, "to_rate", params)
    back = cor41(case, "to_young", params, C=fwd["fitted_c"] / 2.0)
    N, N2 = fwd["young"], back["young"]
    out = {"case": case, "params": params}
    for endname, (lo, hi) in (("low", (1e-42, 1e-38)), ("high", (1e38, 1e42))):
        s = np.geomspace(lo, hi, 40)
        ratio = np.asarray(N2(s), dtype=float) / np.asarray(N(s), dtype=float)
        slope = end_slope(s, ratio, "high" if endname == "high" else "low", window=1.0)
        out[f"slope_gap_{endname}"] = slope
        out[f"constant_band_{endname}"] = [float(ratio.min()), float(ratio.max())]
    out["pass"] = (abs(out["slope_gap_low"]) <= tol_slope
                   and abs(out["slope_gap_high"]) <= tol_slope)
    return out


# ---------------------------------------------------------------------------
# killed forms via the cemetery extension

def thm43(space, kernel, potential: KillingPotential, gamma, beta=None,
          f_family=None, r_grid=None, N_converse: YoungFunction | None = None,
          seed: int = 0, support_fraction: float = 0.45, tol=1e-9) -> TheoremReport:
    """Killed-form gauge inequality and its converse rate.

    Forward: extend the state space by a cemetery atom, build the
    regularization Young function on the extension from a rate certified
    there, and verify

        ||f||_N <= C (l1_gamma(f) + sum |f| xi v mu),   C = 4/(1 - 1/e).

    The extension is used because a rate for the killed form does not
    transfer verbatim to the extended form.  Converse: from the same
    inequality at the exact indicator constant, derive the killed-form rate
    beta(r) = 4 inf{s : N^{-1}(s)/s <= sqrt(r)/(2 C sqrt(2 c))} with
    c = sup_x (sum gamma^2 j mu + xi^2 v) and verify it; both traced
    constants are sufficient, not claimed minimal.
    """
    rep = TheoremReport("thm43")
    xi = potential.xi if potential.xi is not None else np.ones(space.m)
    if np.any((xi == 0) & (potential.v > 0)):
        rep.note("xi vanishes where the killing is positive: extension profile infinite")
        rep.add("extension profile finite", -INF, tol)
        return rep
    if not np.any(potential.v > 0):
        rep.note("no killing: reduces to the plain regularization route")
        inner = thm21_verify(space, kernel, gamma, beta=beta, f_family=f_family,
                             support_fraction=support_fraction, seed=seed, tol=tol)
        rep.checks = inner.checks
        rep.derived = inner.derived
        rep.notes += inner.notes
        return rep

    rng = np.random.default_rng(seed)
    total = space.total_mass
    if r_grid is None:
        r_grid = np.geomspace(1e-3 / (total + 1.0), 1e3 / (total + 1.0), 25)
    if f_family is None:
        from .instances import small_support_functions
        f_family = small_support_functions(rng, space,
                                           support_fraction * (total + 1.0), 40)

    # hypothesis check: the supplied (or estimated) rate for the killed form
    if beta is None:
        beta = certified_rate(space, kernel, r_grid, potential=potential, seed=seed)
        rep.note("killed-form rate: inflated certified estimate")
    spv = sp_verify(space, kernel, beta, f_family, r_grid, potential=potential)
    rep.add("killed-form rate inequality on the family", spv["worst_slack"], tol)

    # identity between the killed form and the extension
    space2, kernel2, gamma2 = bar_extension(space, kernel, potential, gamma, xi)
    ident_worst = INF
    for _ in range(20):
        f = rng.standard_normal(space.m)
        a = schrodinger_energy(space, kernel, potential, f)
        b = dirichlet_energy(space2, kernel2, extend_by_zero(f))
        ident_worst = min(ident_worst, -abs(a - b) / max(1.0, abs(a)))
    rep.add("extension energy identity", ident_worst, 1e-12)

    # forward: regularization route on the extension
    bar_beta = certified_rate(space2, kernel2, r_grid, seed=seed)
    sg2 = Semigroup(space2, kernel2)
    theta_int, theta_total = sg2.theta_curve(gamma2)
    s_cap = (support_fraction + 0.01) * space2.total_mass
    r_floor = 1.0 / (2.0 * s_cap)
    built = thm21_young(bar_beta, theta_int,
                        s_max=100.0 / float(space.mu.min()), r_floor=r_floor)
    if not built["ok"]:
        rep.note(built["note"])
        rep.add("extension profile finite", -INF, tol)
        return rep
    N_bar = built["N"]
    rep.derived["forward_constant"] = C_KILLED
    rep.derived["theta_total_extension"] = theta_total

    cap = support_fraction * space2.total_mass
    worst, emp = INF, 0.0
    kept = 0
    for f in f_family:
        f = np.asarray(f, dtype=float)
        if float(space.mu[np.abs(f) > 0].sum()) > cap + 1e-12:
            continue
        kept += 1
        lhs = orlicz_norm(space, N_bar, f)
        bracket = (l1_form(space, kernel, gamma, f)
                   + float(np.sum(np.abs(f) * xi * potential.v * space.mu)))
        worst = min(worst, C_KILLED * bracket - lhs)
        if bracket > 0:
            emp = max(emp, lhs / bracket)
    rep.add("killed gauge bound at the traced constant", worst, tol)
    rep.derived["empirical_forward_constant"] = emp
    rep.derived["forward_family_size"] = kept

    # converse: exact indicator constant over cemetery-free subsets,
    # including the full base space (proper on the extension)
    N_conv = N_converse if N_converse is not None else cor41_young(1, 2.0, 2.0)
    if not _check_s_over_N_increasing(N_conv):
        raise ValueError("converse Young function must have N(s)/s increasing")
    m = space.m
    wE = gamma.gamma * kernel.j * space.mu[:, None] * space.mu[None, :]
    masses, flowsE = _doubling_enumeration(space.mu, wE)
    kill = np.zeros(1 << m)
    add = xi * potential.v * space.mu
    for i in range(m):
        size = 1 << i
        kill[size:2 * size] = kill[:size] + add[i]
    C_conv = 0.0
    for mask in range(1, 1 << m):
        bracket = 2.0 * flowsE[mask] + kill[mask]
        C_conv = max(C_conv, ext_ratio(indicator_norm(N_conv, float(masses[mask])),
                                       bracket))
    rep.derived["converse_C"] = C_conv
    c_bar = float(np.max(np.sum(gamma.gamma ** 2 * kernel.j * space.mu[None, :], axis=1)
                         + xi ** 2 * potential.v))
    rep.derived["c_bar"] = c_bar
    if math.isinf(C_conv):
        rep.note("converse constant infinite (zero bracket subset): rate vacuous")
        return rep
    scale = 2.0 * C_conv * math.sqrt(2.0 * c_bar)

    def beta_conv(r):
        root = inv_decreasing(lambda s: N_conv.inv(s) / s, math.sqrt(r) / scale)
        return 4.0 * root if not math.isinf(root) else INF

    worst_conv = INF
    for f in f_family:
        f = np.asarray(f, dtype=float)
        l2 = float(np.sum(f * f * space.mu))
        l1sq = float(np.sum(np.abs(f) * space.mu)) ** 2
        en = schrodinger_energy(space, kernel, potential, f)
        for r in r_grid:
            b = beta_conv(r)
            if math.isinf(b):
                continue
            worst_conv = min(worst_conv, r * en + b * l1sq - l2)
    rep.add("converse killed rate", worst_conv, tol)
    rep.derived["converse_beta"] = \
        "4 inf{s : N^{-1}(s)/s <= sqrt(r)/(2 C sqrt(2 c_bar))}"
    return rep
