"""Classification of solved schedules and Monte-Carlo cost validation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .impact import MarketModel, discretize
from .discrete import (
    DiscreteStrategy,
    cost,
    impact_matrix,
    is_b_matrix,
    is_diagonally_dominant,
    is_spd,
    solve_optimal,
)
from .continuous import (
    BracketFailureError,
    ToleranceFailureError,
    Trajectory,
    cash_functional,
    check_existence_uniqueness,
    check_second_order,
    solve_bvp_shooting,
)

__all__ = [
    "RegimeReport",
    "detect_ttpm",
    "classify_shape",
    "classify_wellposedness",
    "monte_carlo_is",
]

SHAPES = (
    "convex_monotone",
    "linear_twap",
    "concave_monotone",
    "concave_one_turning_point",
    "other",
)

VERDICTS = ("strong", "weak", "ill_posed", "undetermined")


@dataclass(frozen=True)
class RegimeReport:
    """Shape, manipulation flags, and well-posedness verdict for one program.

    negative_cost means the trader profits from the round trip: a negative
    discrete cost, or a positive continuous excess cash. detail records
    which certificate fired the verdict.
    """

    shape: str
    ttpm: bool
    negative_cost: bool
    wellposedness: str
    turning_points: int
    detail: str = ""

    def to_json(self) -> dict:
        return asdict(self)


def detect_ttpm(subject: Union[Trajectory, DiscreteStrategy]) -> Tuple[bool, int]:
    """Flag trades running against the program, and count velocity sign flips.

    A continuous schedule manipulates when its velocity carries the sign of
    Q (buying during a liquidation) beyond a dead zone of 1e-6*|Q|/T that
    absorbs integrator dust; a discrete schedule manipulates when a trade
    opposes the sign of Q beyond 1e-9*|Q|.
    """
    if isinstance(subject, Trajectory):
        q = float(subject.zeta[0])
        horizon = float(subject.times[-1])
        threshold = 1e-6 * abs(q) / horizon
        series = subject.zeta_dot
        wrong = np.sign(q)
    elif isinstance(subject, DiscreteStrategy):
        q = float(subject.Q)
        threshold = 1e-9 * abs(q)
        series = subject.xi
        wrong = -np.sign(q)
    else:
        raise TypeError("expected a Trajectory or a DiscreteStrategy")
    labels = np.where(series > threshold, 1, np.where(series < -threshold, -1, 0))
    active = labels[labels != 0]
    turning = int(np.count_nonzero(np.diff(active))) if active.size > 1 else 0
    flagged = bool(q != 0.0 and np.any(labels == wrong))
    return flagged, turning


def _shape_label(second_diff: np.ndarray, tol: float, ttpm: bool, turning: int) -> str:
    convex = bool(np.all(second_diff >= -tol))
    concave = bool(np.all(second_diff <= tol))
    if convex and concave:
        return "linear_twap"
    if convex and not ttpm:
        return "convex_monotone"
    if concave and not ttpm:
        return "concave_monotone"
    if concave and ttpm and turning == 1:
        return "concave_one_turning_point"
    return "other"


def classify_shape(traj: Trajectory) -> str:
    """Label the inventory profile by convexity and monotonicity."""
    q = float(traj.zeta[0])
    tol = 1e-6 * (abs(q) if q != 0.0 else 1.0)
    ttpm, turning = detect_ttpm(traj)
    return _shape_label(np.diff(traj.zeta, n=2), tol, ttpm, turning)


def classify_wellposedness(model: MarketModel, n: Optional[int] = None,
                           steps: Optional[int] = None) -> RegimeReport:
    """Run the certificate cascade and classify the solved program.

    Provide ``n`` for the discrete cascade (B-matrix first, then positive
    definiteness) or ``steps`` for the continuous one (existence integral,
    curvature test, then a forced solve). All tests are sufficient only, so
    a failed test alone yields "undetermined"; "ill_posed" requires a hard
    failure (Cholesky breakdown or an unbracketable terminal inventory).
    """
    if (n is None) == (steps is None):
        raise ValueError("provide exactly one of n (discrete) or steps (continuous)")
    if n is not None:
        return _classify_discrete(model, int(n))
    return _classify_continuous(model, int(steps))


def _classify_discrete(model: MarketModel, n: int) -> RegimeReport:
    grid = discretize(model, n)
    matrix = impact_matrix(grid)
    spd_ok, _ = is_spd(matrix)
    if not spd_ok:
        return RegimeReport("other", False, False, "ill_posed", 0, detail="cholesky_failure")
    b_ok, _ = is_b_matrix(matrix)
    dd_ok, _ = is_diagonally_dominant(grid)
    strategy = solve_optimal(matrix, model.Q)
    ttpm, turning = detect_ttpm(strategy)
    value = cost(matrix, strategy)
    negative = value < -1e-12 * (1.0 + model.Q * model.Q)
    inventory = np.concatenate(([model.Q], model.Q - np.cumsum(strategy.xi)))
    tol = 1e-6 * (abs(model.Q) if model.Q else 1.0)
    shape = _shape_label(np.diff(inventory, n=2), tol, ttpm, turning)
    if b_ok:
        verdict, detail = "strong", "b_matrix"
    elif dd_ok:
        verdict, detail = "weak", "diagonally_dominant"
    else:
        verdict, detail = "weak", "spd_cholesky"
    return RegimeReport(shape, ttpm, negative, verdict, turning, detail=detail)


def _classify_continuous(model: MarketModel, steps: int) -> RegimeReport:
    existence = check_existence_uniqueness(model)
    second = check_second_order(model)
    try:
        traj = solve_bvp_shooting(model, steps=steps, force=True)
    except (BracketFailureError, ToleranceFailureError):
        return RegimeReport("other", False, False, "ill_posed", 0, detail="bracket_failure")
    ttpm, turning = detect_ttpm(traj)
    shape = classify_shape(traj)
    negative = traj.cash > 1e-12 * (1.0 + model.Q * model.Q)
    if existence.satisfied and second.weakly_well_posed:
        if ttpm:
            verdict, detail = "weak", "existence+second_order+turning_point"
        else:
            verdict, detail = "strong", "existence+second_order+monotone"
    else:
        failed = []
        if not existence.satisfied:
            failed.append("existence_failed")
        if not second.weakly_well_posed:
            failed.append("second_order_failed")
        verdict, detail = "undetermined", "+".join(failed)
    return RegimeReport(shape, ttpm, negative, verdict, turning, detail=detail)


def monte_carlo_is(model: MarketModel, traj: Trajectory, paths: int = 100_000,
                   seed: int = 0) -> Tuple[float, float]:
    """Sample mean and standard error of the simulated implementation shortfall.

    The price noise is simulated with Euler-Maruyama increments of the
    volatility curve; the impact-drift part of the cash identity is
    evaluated with the same quadrature as cash_functional, so a
    zero-volatility model reproduces the deterministic value exactly with
    zero standard error.
    """
    if paths < 100:
        raise ValueError("paths must be at least 100")
    deterministic = cash_functional(model, traj)
    steps = traj.steps
    if model.sigma is None:
        sig = np.zeros(steps + 1)
    else:
        sig = np.asarray(model.sigma.value(traj.times), dtype=float)
    if not np.any(sig > 0.0):
        return deterministic, 0.0
    dt = float(traj.times[1] - traj.times[0])
    root = math.sqrt(dt)
    vel = traj.zeta_dot
    rng = np.random.default_rng(seed)
    noise_price = np.zeros(paths)
    shortfall_noise = np.zeros(paths)
    for k in range(steps):
        shortfall_noise -= vel[k] * noise_price * dt
        noise_price += sig[k] * root * rng.standard_normal(paths)
    mean = deterministic + float(shortfall_noise.mean())
    stderr = float(shortfall_noise.std(ddof=1) / math.sqrt(paths))
    return mean, stderr
