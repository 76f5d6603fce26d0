"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines alongside the pytest verdicts.
"""

import math
import time

import numpy as np

from execwell import (
    ConstantImpact,
    ExponentialImpact,
    LinearImpact,
    MarketModel,
    AxisSpec,
    SweepSpec,
    cash_functional,
    classify_shape,
    closed_form,
    detect_ttpm,
    excess_cash_linear,
    impact_matrix,
    is_b_matrix,
    is_diagonally_dominant,
    is_spd,
    lambert_w0,
    monte_carlo_is,
    run_sweep,
    solve_bvp_shooting,
    solve_optimal,
)
from execwell.discrete import DiscreteImpactGrid, check_bmatrix_sufficient, NotApplicableError


def report(num, description, ok):
    print(f"\n[criterion {num:02d}] {'PASS' if ok else 'FAIL'} :: {description}")
    assert ok, f"criterion {num} failed: {description}"


def grid(theta, eta, T=1.0, Q=1.0):
    return DiscreteImpactGrid(np.asarray(theta, float), np.asarray(eta, float), T, Q)


def test_criterion_01_constant_impact_uniform_rate():
    start = time.time()
    ok = True
    for n in range(2, 51):
        xi = solve_optimal(impact_matrix(grid([1.0] * n, [float(n)] * n)), 1.0).xi
        ok &= bool(np.max(np.abs(xi - 1.0 / n)) <= 1e-10)
    model = MarketModel(ConstantImpact(1, 1), ConstantImpact(1, 1), 1.0, 1.0)
    traj = solve_bvp_shooting(model, steps=2000)
    ok &= bool(np.max(np.abs(traj.zeta - (1.0 - traj.times))) <= 1e-6)
    elapsed = time.time() - start
    ok &= elapsed < 1.0
    report(1, f"uniform-rate schedule under constant impacts ({elapsed:.2f}s)", ok)


def test_criterion_02_definiteness_boundary_17_15():
    start = time.time()

    def spd_at(eta3):
        return is_spd(impact_matrix(grid([1.0, 3.0, 2.0], [2.0, 2.0, eta3])))[0]

    lo, hi = 1.0, 1.3
    assert not spd_at(lo) and spd_at(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if spd_at(mid):
            hi = mid
        else:
            lo = mid
    boundary = 0.5 * (lo + hi)
    elapsed = time.time() - start
    ok = abs(boundary - 17.0 / 15.0) <= 1e-6 and elapsed < 1.0
    report(2, f"definiteness flips at eta3 = {boundary:.8f} vs 17/15 ({elapsed:.2f}s)", ok)


def test_criterion_03_constant_impact_spectrum():
    ok = True
    for n in range(2, 11):
        theta, eta = 0.9, 1.3
        a = impact_matrix(grid([theta] * n, [eta] * n)).entries
        eig = np.sort(np.linalg.eigvalsh(a))
        expected = np.sort([2 * eta - theta] * (n - 1) + [2 * eta + (n - 1) * theta])
        ok &= bool(np.max(np.abs(eig - expected)) <= 1e-8)
    report(3, "constant-impact matrix spectrum {2e-t, 2e+(n-1)t}", ok)


def test_criterion_04_certificate_implications():
    start = time.time()
    rng = np.random.default_rng(2024)
    counterexamples = 0

    # B-matrix implies positive definiteness and sign-consistent optimum
    kept = 0
    while kept < 500:
        n = int(rng.integers(2, 9))
        theta = rng.uniform(0.1, 1.0, n)
        eta = rng.uniform(1.01, 3.0, n) * n * theta.max() / 2.0
        g = grid(theta, eta)
        a = impact_matrix(g)
        if not is_b_matrix(a)[0]:
            continue
        kept += 1
        if not is_spd(a)[0]:
            counterexamples += 1
        q = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
        xi = solve_optimal(a, q).xi
        if not np.all(xi * np.sign(q) >= -1e-12 * (1.0 + abs(q))):
            counterexamples += 1

    # diagonal dominance implies positive definiteness
    for _ in range(500):
        n = int(rng.integers(1, 9))
        theta = rng.uniform(0.1, 2.0, n)
        bound = np.array([theta[:i].sum() + (n - i - 1) * theta[i] for i in range(n)])
        eta = 0.5 * bound * rng.uniform(1.001, 2.0, n) + rng.uniform(0.01, 0.1, n)
        g = grid(theta, eta)
        if not is_diagonally_dominant(g)[0]:
            counterexamples += 1
        if not is_spd(impact_matrix(g))[0]:
            counterexamples += 1

    # restrictive inequality implies the B-matrix property
    kept = 0
    while kept < 500:
        n = int(rng.integers(2, 9))
        theta = np.sort(rng.uniform(0.1, 2.0, n))[::-1].copy()
        step_budget = max(theta[0], theta[-1]) - n * float(np.diff(theta).min())
        worst_row = n * theta[0] - theta[:-1].sum()
        eta = rng.uniform(0.51, 1.5, n) * max(step_budget, worst_row, 0.05)
        g = grid(theta, eta)
        try:
            if not check_bmatrix_sufficient(g):
                continue
        except NotApplicableError:
            continue
        kept += 1
        if not is_b_matrix(impact_matrix(g))[0]:
            counterexamples += 1

    elapsed = time.time() - start
    ok = counterexamples == 0 and elapsed < 30.0
    report(4, f"certificate implications, 500 grids each, {counterexamples} "
              f"counterexamples ({elapsed:.1f}s)", ok)


def test_criterion_05_closed_form_vs_shooting():
    start = time.time()
    rng = np.random.default_rng(505)
    worst = 0.0
    cases = []
    for _ in range(50):  # hyperbolic branch
        q = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
        cases.append(MarketModel(LinearImpact(rng.uniform(0.5, 2.0), rng.uniform(0.1, 4.0), 1.0),
                                 ConstantImpact(rng.uniform(0.2, 2.0), 1.0), 1.0, q))
    for _ in range(50):  # trigonometric branch
        eta = rng.uniform(0.15, 1.0)
        scaled = rng.uniform(0.3, 2.9)
        b = -2.0 * eta * scaled ** 2
        q = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
        cases.append(MarketModel(LinearImpact(abs(b) * 1.25, b, 1.0),
                                 ConstantImpact(eta, 1.0), 1.0, q))
    for _ in range(50):  # conserved eta * velocity
        q = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
        cases.append(MarketModel(ConstantImpact(rng.uniform(0.5, 2.0), 1.0),
                                 ExponentialImpact(rng.uniform(0.3, 2.0),
                                                   rng.uniform(-1.0, 1.5), 1.0), 1.0, q))
    for _ in range(50):  # equal exponential decay
        alpha = rng.uniform(0.1, 2.2)
        kappa = rng.uniform(0.3, 4.0)
        if abs(alpha * kappa - 2.0) < 0.15:
            kappa += 0.3
        q = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
        cases.append(MarketModel(ExponentialImpact(1.0, alpha, 1.0),
                                 ExponentialImpact(kappa, alpha, 1.0), 1.0, q))
    for m in cases:
        analytic = closed_form(m, steps=2000)
        shot = solve_bvp_shooting(m, steps=2000, force=True)
        worst = max(worst, float(np.max(np.abs(analytic.zeta - shot.zeta))) / abs(m.Q))
    elapsed = time.time() - start
    ok = worst <= 1e-5 and elapsed < 60.0
    report(5, f"closed form vs shooting, 4x50 draws, worst {worst:.2e} ({elapsed:.1f}s)", ok)


def test_criterion_06_turning_point_onset():
    rng = np.random.default_rng(606)
    ok = True
    details = []
    for _ in range(10):
        eta = float(rng.uniform(0.1, 2.0))
        T = float(rng.uniform(0.5, 2.0))
        onset = math.pi ** 2 * eta / (2.0 * T ** 2)

        def manipulates(b):
            a = 1.8 * abs(b) * T
            m = MarketModel(LinearImpact(a, b, T), ConstantImpact(eta, T), T, 1.0)
            return detect_ttpm(closed_form(m, steps=1000))[0]

        lo, hi = 0.5 * onset, 1.5 * onset
        assert not manipulates(-lo) and manipulates(-hi)
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if manipulates(-mid):
                hi = mid
            else:
                lo = mid
        found = 0.5 * (lo + hi)
        details.append(abs(found - onset) / onset)
        ok &= abs(found - onset) <= 0.01 * onset
    report(6, f"turning-point onset at pi^2 eta/(2 T^2), worst rel err {max(details):.2e}", ok)


def test_criterion_07_positive_excess_cash_threshold():
    a, eta, T, Q = 5.0, 0.25, 1.0, 1.0
    lo, hi = -4.2, -4.0
    assert excess_cash_linear(a, lo, eta, T, Q) > 0.0
    assert excess_cash_linear(a, hi, eta, T, Q) < 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if excess_cash_linear(a, mid, eta, T, Q) > 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    ok = -4.12 <= root <= -4.07
    for b in (-4.2, -4.0):
        m = MarketModel(LinearImpact(a, b, T), ConstantImpact(eta, T), T, Q)
        quad = cash_functional(m, closed_form(m, steps=2000))
        ok &= abs(quad - excess_cash_linear(a, b, eta, T, Q)) <= 1e-4
    report(7, f"excess cash root at b = {root:.5f}, quadrature agrees to 1e-4", ok)


def test_criterion_08_exponential_heatmaps():
    start = time.time()
    fractions = {}
    ok = True
    for kappa in (0.1, 1.0, 10.0):
        spec = SweepSpec("exponential", "distinct_exponents",
                         AxisSpec("alpha_p", 0.0, 3.0, 41),
                         AxisSpec("alpha_tp", 0.0, 3.0, 41),
                         kappa=kappa, steps=400)
        cells = run_sweep(spec)
        admissible = [c for c in cells if c.admissible]
        ok &= len(admissible) > 0
        for c in admissible:
            ok &= not math.isnan(c.excess_cash) and c.excess_cash <= 1e-8
        turning = [c for c in admissible if c.regime == "concave_one_turning_point"]
        fractions[kappa] = len(turning) / len(admissible)
    ok &= fractions[0.1] > 0.0
    ok &= fractions[10.0] < fractions[0.1]
    elapsed = time.time() - start
    ok &= elapsed < 300.0
    report(8, "exponential heatmaps: no profit on admissible cells, turning-point "
              f"fractions {fractions[0.1]:.3f} / {fractions[1.0]:.3f} / {fractions[10.0]:.3f} "
              f"({elapsed:.0f}s)", ok)


def test_criterion_09_powerlaw_lambert_boundary():
    target = 2.0 * math.pi ** 2 / math.log(2.0)
    lo, hi = 0.0, 10.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) < target:
            lo = mid
        else:
            hi = mid
    oracle = 0.5 * (lo + hi)
    boundary = lambert_w0(target)
    ok = abs(boundary - oracle) <= 1e-6 and abs(boundary - 2.4520) <= 1e-3
    report(9, f"power-law equal-exponent boundary W(2 pi^2/ln 2) = {boundary:.6f}", ok)


def test_criterion_10_monte_carlo_consistency():
    start = time.time()
    noisy = MarketModel(ConstantImpact(1, 1), ConstantImpact(1, 1), 1.0, 1.0,
                        sigma=ConstantImpact(0.1, 1.0, allow_zero=True))
    traj = closed_form(noisy, steps=2000)
    mean, stderr = monte_carlo_is(noisy, traj, paths=100_000, seed=10)
    ok = stderr > 0.0 and abs(mean - (-1.5)) <= 3.0 * stderr

    quiet = MarketModel(ConstantImpact(1, 1), ConstantImpact(1, 1), 1.0, 1.0)
    mean0, stderr0 = monte_carlo_is(quiet, traj, paths=100_000, seed=10)
    ok &= stderr0 == 0.0 and abs(mean0 - cash_functional(quiet, traj)) <= 1e-6
    elapsed = time.time() - start
    ok &= elapsed < 30.0
    report(10, f"Monte-Carlo mean {mean:.5f} +- {stderr:.5f} vs -1.5; "
               f"zero-volatility exact ({elapsed:.1f}s)", ok)


def test_criterion_11_regime_atlas():
    # one representative per non-constant impact-monotonicity cell
    cells = [
        # (temporary, permanent) monotonicity -> accepted shapes
        ("inc x inc", LinearImpact(1.0, 1.0, 1.0), LinearImpact(1.0, 1.0, 1.0),
         {"convex_monotone"}),
        ("inc x dec", ExponentialImpact(1.0, 3.5, 1.0), LinearImpact(0.2, 0.2, 1.0),
         {"concave_one_turning_point"}),
        ("inc x const", ConstantImpact(1.0, 1.0), LinearImpact(0.5, 1.0, 1.0),
         {"convex_monotone"}),
        ("dec x inc", LinearImpact(1.0, 3.0, 1.0), ExponentialImpact(1.0, 2.0, 1.0),
         {"convex_monotone", "concave_monotone"}),
        ("dec x dec", ExponentialImpact(1.0, 1.3, 1.0), ExponentialImpact(0.1, 0.3, 1.0),
         {"concave_one_turning_point"}),
        ("dec x const", ConstantImpact(1.0, 1.0), ExponentialImpact(1.0, 0.8, 1.0),
         {"concave_monotone", "convex_monotone"}),
        ("const x inc", LinearImpact(1.0, 2.0, 1.0), ConstantImpact(0.5, 1.0),
         {"convex_monotone"}),
        ("const x dec", LinearImpact(2.5, -2.0, 1.0), ConstantImpact(0.25, 1.0),
         {"concave_one_turning_point"}),
    ]
    ok = True
    lines = []
    for name, theta, eta, accepted in cells:
        model = MarketModel(theta, eta, 1.0, 1.0)
        traj = solve_bvp_shooting(model, steps=1000, force=True)
        shape = classify_shape(traj)
        lines.append(f"{name}: {shape}")
        ok &= shape in accepted
    report(11, "regime atlas [" + "; ".join(lines) + "]", ok)
