"""Continuous-time schedules: existence tests, shooting solver, closed forms.

The optimal inventory path solves the second-order boundary-value problem

    2*eta(t)*zeta'' + 2*eta'(t)*zeta' - theta'(t)*zeta = 0,
    zeta(0) = Q,  zeta(T) = 0,

which maximizes the cash functional C = integral(theta*zeta'*zeta -
eta*zeta'^2). The solver integrates with classical fixed-step RK4 and finds
the initial velocity by bisection on the terminal inventory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .impact import (
    ConstantImpact,
    ExponentialImpact,
    ImpactPath,
    LinearImpact,
    MarketModel,
    PowerLawImpact,
    TabulatedImpact,
    summary_gamma,
)

__all__ = [
    "Trajectory",
    "ExistenceCertificate",
    "SecondOrderCertificate",
    "check_existence_uniqueness",
    "check_second_order",
    "solve_bvp_shooting",
    "integrate_initial_velocity",
    "closed_form",
    "cash_functional",
    "excess_cash_linear",
    "BracketFailureError",
    "ToleranceFailureError",
    "SingularModelError",
    "UnsupportedModelError",
    "ExistenceUncertifiedError",
]

EXISTENCE_BOUND = math.log(3.0)
SINGULAR_TOL = 1e-10
BRACKET_DOUBLINGS = 10
MAX_BISECTIONS = 200


class BracketFailureError(Exception):
    """Terminal inventory kept one sign across the whole velocity bracket.

    Signals a likely non-existence or oscillatory regime for the boundary
    problem.
    """


class ToleranceFailureError(Exception):
    """Bisection exhausted its iteration budget before reaching tolerance."""


class SingularModelError(Exception):
    """Parameters sit on a set where the boundary problem has no solution."""


class UnsupportedModelError(Exception):
    """No closed-form schedule is known for this impact combination."""


class ExistenceUncertifiedError(Exception):
    """The existence certificate failed; pass force=True to attempt the solve."""

    def __init__(self, certificate: "ExistenceCertificate"):
        self.certificate = certificate
        super().__init__(
            "existence certificate not satisfied: integrals "
            f"({certificate.integral_theta:.6g}, {certificate.integral_eta:.6g}) "
            f"vs bound {certificate.bound:.6g}; pass force=True to override"
        )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Inventory and velocity sampled on a uniform grid, plus the cash value."""

    times: np.ndarray
    zeta: np.ndarray
    zeta_dot: np.ndarray
    initial_velocity: float
    cash: float

    def __post_init__(self):
        for name in ("times", "zeta", "zeta_dot"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.times.size >= 2 and self.times.size == self.zeta.size == self.zeta_dot.size):
            raise ValueError("times, zeta and zeta_dot must share a length >= 2")
        steps = np.diff(self.times)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValueError("times must form a uniform grid")

    @property
    def steps(self) -> int:
        return int(self.times.size - 1)


@dataclass(frozen=True)
class ExistenceCertificate:
    """Impact-variation integrals against the uniqueness bound log(3)."""

    integral_theta: float
    integral_eta: float
    bound: float
    satisfied: bool


@dataclass(frozen=True)
class SecondOrderCertificate:
    """sqrt(gamma)*T < pi test certifying the extremal point is a maximum."""

    gamma: float
    sqrt_gamma_T: float
    weakly_well_posed: bool


def _simpson(y: np.ndarray, h: float) -> float:
    if (y.size - 1) % 2:
        raise ValueError("Simpson quadrature needs an even number of panels")
    return float(h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum()))


def check_existence_uniqueness(model: MarketModel, quad_points: int = 1024) -> ExistenceCertificate:
    """Sufficient test for a unique solution of the boundary-value problem.

    Computes 0.5*integral(|theta'|/eta) and integral(|eta'|/eta) with
    composite Simpson; the certificate holds when the larger integral is
    strictly below log(3), the supremum of the admissible Lipschitz budget.
    """
    if quad_points < 64:
        raise ValueError("quad_points must be at least 64")
    panels = int(quad_points) + (int(quad_points) % 2)
    ts = np.linspace(0.0, model.T, panels + 1)
    h = model.T / panels
    eta = model.eta.value(ts)
    integral_theta = 0.5 * _simpson(np.abs(model.theta.derivative(ts)) / eta, h)
    integral_eta = _simpson(np.abs(model.eta.derivative(ts)) / eta, h)
    satisfied = max(integral_theta, integral_eta) < EXISTENCE_BOUND
    return ExistenceCertificate(integral_theta, integral_eta, EXISTENCE_BOUND, satisfied)


def check_second_order(model: MarketModel, samples: int = 2049) -> SecondOrderCertificate:
    """Maximum certificate from the impact extremes: sqrt(gamma)*T < pi."""
    _, _, gamma = summary_gamma(model, samples)
    scaled = math.sqrt(gamma) * model.T
    return SecondOrderCertificate(gamma, scaled, scaled < math.pi)


# ---------------------------------------------------------------------------
# RK4 machinery. The system is zeta' = v, v' = c2(t)*zeta + c1(t)*v with
# c1 = -eta'/eta and c2 = theta'/(2*eta). Coefficients are precomputed on
# the half-step grid so every stage reuses the same tables.


def _coefficients(model: MarketModel, steps: int):
    ts = np.linspace(0.0, model.T, 2 * steps + 1)
    eta = model.eta.value(ts)
    c1 = (-model.eta.derivative(ts) / eta).tolist()
    c2 = (model.theta.derivative(ts) / (2.0 * eta)).tolist()
    return c1, c2


def _rk4_step(z, v, a0, b0, a1, b1, a2, b2, h):
    k1z = v
    k1v = b0 * z + a0 * v
    z2 = z + 0.5 * h * k1z
    v2 = v + 0.5 * h * k1v
    k2z = v2
    k2v = b1 * z2 + a1 * v2
    z3 = z + 0.5 * h * k2z
    v3 = v + 0.5 * h * k2v
    k3z = v3
    k3v = b1 * z3 + a1 * v3
    z4 = z + h * k3z
    v4 = v + h * k3v
    k4z = v4
    k4v = b2 * z4 + a2 * v4
    return (z + h * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0,
            v + h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0)


def _terminal_map(c1, c2, h, steps) -> Tuple[float, float]:
    """Terminal inventory as an affine map of the start state.

    The equation is linear, so one RK4 pass over the two basis states
    (1, 0) and (0, 1) yields zeta(T) = A*zeta(0) + B*v0 exactly as the
    direct integration would produce it.
    """
    z1, v1 = 1.0, 0.0
    z2, v2 = 0.0, 1.0
    for k in range(steps):
        i = 2 * k
        a0, b0, a1, b1, a2, b2 = c1[i], c2[i], c1[i + 1], c2[i + 1], c1[i + 2], c2[i + 2]
        z1, v1 = _rk4_step(z1, v1, a0, b0, a1, b1, a2, b2, h)
        z2, v2 = _rk4_step(z2, v2, a0, b0, a1, b1, a2, b2, h)
    return z1, z2


def _path(c1, c2, h, steps, z0, v0):
    zeta = np.empty(steps + 1)
    vel = np.empty(steps + 1)
    z, v = float(z0), float(v0)
    zeta[0], vel[0] = z, v
    for k in range(steps):
        i = 2 * k
        z, v = _rk4_step(z, v, c1[i], c2[i], c1[i + 1], c2[i + 1], c1[i + 2], c2[i + 2], h)
        zeta[k + 1], vel[k + 1] = z, v
    return zeta, vel


def _validate_steps(steps: int) -> int:
    steps = int(steps)
    if steps < 100 or steps % 2:
        raise ValueError("steps must be an even integer >= 100")
    return steps


def _cash(model: MarketModel, times: np.ndarray, zeta: np.ndarray, vel: np.ndarray) -> float:
    h = float(times[1] - times[0])
    integrand = model.theta.value(times) * vel * zeta - model.eta.value(times) * vel * vel
    return _simpson(integrand, h)


def solve_bvp_shooting(model: MarketModel, steps: int = 2000, tol: float = 1e-8,
                       force: bool = False) -> Trajectory:
    """Shooting solve of the execution boundary-value problem.

    Integrates the inventory equation with fixed-step RK4 on ``steps``
    panels, then bisects on the initial velocity over an expanding bracket
    (starting at +-10|Q|/T, doubled up to 2**10 times) until the terminal
    inventory is within ``tol * |Q|``. The existence certificate is enforced
    unless ``force`` is set.
    """
    steps = _validate_steps(steps)
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    certificate = check_existence_uniqueness(model)
    if not certificate.satisfied and not force:
        raise ExistenceUncertifiedError(certificate)
    T, q = model.T, model.Q
    times = np.linspace(0.0, T, steps + 1)
    if q == 0.0:
        zeros = np.zeros(steps + 1)
        return Trajectory(times, zeros, zeros.copy(), 0.0, 0.0)

    h = T / steps
    c1, c2 = _coefficients(model, steps)
    coef_q, coef_v = _terminal_map(c1, c2, h, steps)

    def terminal(v0: float) -> float:
        return coef_q * q + coef_v * v0

    half = 10.0 * abs(q) / T
    lo, hi = -half, half
    f_lo, f_hi = terminal(lo), terminal(hi)

    def bracketed() -> bool:
        return f_lo == 0.0 or f_hi == 0.0 or (f_lo < 0.0) != (f_hi < 0.0)

    expansions = 0
    while not bracketed():
        if expansions >= BRACKET_DOUBLINGS:
            raise BracketFailureError(
                "terminal inventory keeps one sign over the velocity bracket; "
                "the boundary problem likely has no solution in this regime")
        lo *= 2.0
        hi *= 2.0
        f_lo, f_hi = terminal(lo), terminal(hi)
        expansions += 1

    limit = tol * abs(q)
    if abs(f_lo) <= limit:
        v0 = lo
    elif abs(f_hi) <= limit:
        v0 = hi
    else:
        v0 = None
        for _ in range(MAX_BISECTIONS):
            mid = 0.5 * (lo + hi)
            f_mid = terminal(mid)
            if abs(f_mid) <= limit:
                v0 = mid
                break
            if (f_mid < 0.0) == (f_lo < 0.0):
                lo, f_lo = mid, f_mid
            else:
                hi, f_hi = mid, f_mid
        if v0 is None:
            raise ToleranceFailureError(
                f"bisection did not bring |zeta(T)| under {limit:.3g} in {MAX_BISECTIONS} steps")

    zeta, vel = _path(c1, c2, h, steps, q, v0)
    return Trajectory(times, zeta, vel, float(v0), _cash(model, times, zeta, vel))


def integrate_initial_velocity(model: MarketModel, steps: int, v0: float) -> Trajectory:
    """Single RK4 pass from (Q, v0) with no boundary matching.

    Exploration helper: the terminal inventory is whatever the guess
    produces.
    """
    steps = _validate_steps(steps)
    times = np.linspace(0.0, model.T, steps + 1)
    h = model.T / steps
    c1, c2 = _coefficients(model, steps)
    zeta, vel = _path(c1, c2, h, steps, model.Q, v0)
    return Trajectory(times, zeta, vel, float(v0), _cash(model, times, zeta, vel))


def cash_functional(model: MarketModel, traj: Trajectory) -> float:
    """Composite Simpson quadrature of theta*zeta'*zeta - eta*zeta'^2."""
    if traj.steps % 2:
        raise ValueError("trajectory must have an even number of panels")
    return _cash(model, traj.times, traj.zeta, traj.zeta_dot)


# ---------------------------------------------------------------------------
# Closed-form schedules


def _constant_level(path: ImpactPath) -> Optional[float]:
    if isinstance(path, ConstantImpact):
        return float(path.level)
    if isinstance(path, LinearImpact) and path.slope == 0.0:
        return float(path.intercept)
    if isinstance(path, (ExponentialImpact, PowerLawImpact)) and path.alpha == 0.0:
        return float(path.beta)
    if isinstance(path, TabulatedImpact) and float(np.ptp(path.values)) == 0.0:
        return float(path.values[0])
    return None


def closed_form(model: MarketModel, steps: int = 2000) -> Trajectory:
    """Analytic schedule for the recognized impact regimes.

    Supported: constant permanent impact with any temporary impact (which
    covers the constant/constant uniform-rate schedule), linear permanent
    impact with constant temporary impact (hyperbolic branch for increasing,
    trigonometric branch for decreasing), and exponential impacts sharing
    one decay exponent. Raises UnsupportedModelError otherwise and
    SingularModelError on the no-solution parameter sets.
    """
    steps = _validate_steps(steps)
    times = np.linspace(0.0, model.T, steps + 1)
    theta, eta = model.theta, model.eta
    T, q = model.T, model.Q

    if _constant_level(theta) is not None:
        zeta, vel = _inverse_eta_schedule(eta, times, T, q)
    elif isinstance(theta, LinearImpact) and theta.slope != 0.0 and _constant_level(eta) is not None:
        gamma = theta.slope / (2.0 * _constant_level(eta))
        if gamma > 0.0:
            zeta, vel = _sinh_schedule(gamma, times, T, q)
        else:
            zeta, vel = _sin_schedule(gamma, times, T, q)
    elif (isinstance(theta, ExponentialImpact) and isinstance(eta, ExponentialImpact)
          and theta.alpha == eta.alpha):
        zeta, vel = _equal_exponential_schedule(theta, eta, times, T, q)
    else:
        raise UnsupportedModelError("no closed form for this impact combination")

    return Trajectory(times, zeta, vel, float(vel[0]), _cash(model, times, zeta, vel))


def _inverse_impact_integral(eta: ImpactPath, ts: np.ndarray) -> np.ndarray:
    """Cumulative integral of 1/eta from 0 to each grid time."""
    T = eta.horizon
    if isinstance(eta, ConstantImpact):
        return ts / eta.level
    if isinstance(eta, LinearImpact):
        if eta.slope == 0.0:
            return ts / eta.intercept
        return np.log1p(eta.slope * ts / eta.intercept) / eta.slope
    if isinstance(eta, ExponentialImpact):
        if eta.alpha == 0.0:
            return ts / eta.beta
        return (T / (eta.alpha * eta.beta)) * np.expm1(eta.alpha * ts / T)
    if isinstance(eta, PowerLawImpact):
        if eta.alpha == -1.0:
            return (T / eta.beta) * np.log1p(ts / T)
        p = eta.alpha + 1.0
        return (T / (eta.beta * p)) * ((1.0 + ts / T) ** p - 1.0)
    # tabulated fallback: dense trapezoid, then subsample back to the grid
    refine = 32
    fine = np.linspace(0.0, T, refine * (ts.size - 1) + 1)
    inv = 1.0 / eta.value(fine)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (inv[1:] + inv[:-1]) * np.diff(fine))))
    return cum[::refine]


def _inverse_eta_schedule(eta: ImpactPath, times: np.ndarray, T: float, q: float):
    # constant permanent impact: eta(t)*zeta'(t) is conserved
    integral = _inverse_impact_integral(eta, times)
    total = float(integral[-1])
    zeta = q * (1.0 - integral / total)
    vel = -q / (total * eta.value(times))
    return zeta, vel


def _sinh_schedule(gamma: float, times: np.ndarray, T: float, q: float):
    m = math.sqrt(gamma)
    den = math.sinh(m * T)
    zeta = q * np.sinh(m * (T - times)) / den
    vel = -q * m * np.cosh(m * (T - times)) / den
    return zeta, vel


def _sin_schedule(gamma: float, times: np.ndarray, T: float, q: float):
    m = math.sqrt(-gamma)
    den = math.sin(m * T)
    if abs(den) < SINGULAR_TOL:
        raise SingularModelError(
            f"sin({m * T:.9g}) vanishes: the boundary problem has no solution at this decay rate")
    zeta = q * np.sin(m * (T - times)) / den
    vel = -q * m * np.cos(m * (T - times)) / den
    return zeta, vel


def _equal_exponential_schedule(theta: ExponentialImpact, eta: ExponentialImpact,
                                times: np.ndarray, T: float, q: float):
    alpha = float(theta.alpha)
    kappa = float(eta.beta) / (T * float(theta.beta))
    if abs(alpha * kappa - 2.0) <= SINGULAR_TOL:
        raise SingularModelError("decay rate equals 2/kappa: boundary conditions cannot be matched")
    disc = alpha * alpha - 2.0 * alpha / kappa
    r = alpha / (2.0 * T)
    grow = np.exp(r * times)
    if disc > 0.0:
        s = math.sqrt(disc) / (2.0 * T)
        den = math.sinh(s * T)
        zeta = q * grow * np.sinh(s * (T - times)) / den
        vel = q * grow * (r * np.sinh(s * (T - times)) - s * np.cosh(s * (T - times))) / den
    elif disc < 0.0:
        w = math.sqrt(-disc) / (2.0 * T)
        den = math.sin(w * T)
        if abs(den) < SINGULAR_TOL:
            raise SingularModelError(
                f"sin({w * T:.9g}) vanishes: the boundary problem has no solution at this decay rate")
        zeta = q * grow * np.sin(w * (T - times)) / den
        vel = q * grow * (r * np.sin(w * (T - times)) - w * np.cos(w * (T - times))) / den
    else:
        # repeated root; only reachable at alpha = 0 where it is the uniform rate
        zeta = q * grow * (1.0 - times / T)
        vel = q * grow * (r * (1.0 - times / T) - 1.0 / T)
    return zeta, vel


def excess_cash_linear(a: float, b: float, eta: float, T: float, q: float) -> float:
    """Excess cash of the optimal schedule under theta = a + b*t, constant eta.

    Valid for decreasing permanent impact (b < 0) that stays positive
    (a > |b|*T). The cotangent argument carries the horizon explicitly so
    the expression is dimensionally consistent for any T.
    """
    if not b < 0.0:
        raise ValueError("b must be negative (decreasing permanent impact)")
    if not a > abs(b) * T:
        raise ValueError("a must exceed |b|*T so the permanent impact stays positive")
    if not (eta > 0.0 and T > 0.0):
        raise ValueError("eta and T must be positive")
    m = math.sqrt(-b / (2.0 * eta))
    den = math.sin(m * T)
    if abs(den) < SINGULAR_TOL:
        raise SingularModelError(
            f"sin({m * T:.9g}) vanishes: the boundary problem has no solution at this decay rate")
    return 0.5 * q * q * (-a + b * math.cos(m * T) / (den * m))
