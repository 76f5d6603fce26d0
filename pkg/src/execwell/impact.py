"""Time-varying market impact curves, market models, and their discretization.

Impact curves are positive functions of time on a fixed trading horizon.
Permanent impact (theta) is the per-share price displacement that persists
after a trade; temporary impact (eta) is the per-share penalty proportional
to instantaneous trading speed. Both are represented by the same small set
of parametric families plus a tabulated fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "ImpactPath",
    "ConstantImpact",
    "LinearImpact",
    "ExponentialImpact",
    "PowerLawImpact",
    "TabulatedImpact",
    "MarketModel",
    "DiscreteImpactGrid",
    "discretize",
    "summary_gamma",
    "path_from_json",
    "path_to_json",
]

ArrayLike = Union[float, Sequence[float], np.ndarray]

POSITIVITY_SAMPLES = 1001


class ImpactPath:
    """Deterministic impact curve on [0, horizon].

    Concrete families implement ``value`` and ``derivative``. Both accept a
    scalar or a numpy array of times and mirror the input shape. Instances
    are immutable after construction and safe to share across threads.
    """

    horizon: float
    allow_zero: bool

    def _domain(self, t: ArrayLike) -> np.ndarray:
        arr = np.asarray(t, dtype=float)
        slack = 1e-12 * max(1.0, self.horizon)
        if np.any(arr < -slack) or np.any(arr > self.horizon + slack):
            raise ValueError(f"time must lie in [0, {self.horizon}], got {t!r}")
        return np.clip(arr, 0.0, self.horizon)

    @staticmethod
    def _match(t: ArrayLike, out: np.ndarray):
        return float(out) if np.ndim(t) == 0 else out

    def value(self, t: ArrayLike):
        raise NotImplementedError

    def derivative(self, t: ArrayLike):
        raise NotImplementedError

    # Extrema consumed by the curvature certificates. Parametric families
    # override with closed forms; the grid scan is the tabulated fallback.
    def min_value(self, samples: int = 1024) -> float:
        ts = np.linspace(0.0, self.horizon, max(int(samples), 2))
        return float(np.min(self.value(ts)))

    def max_value(self, samples: int = 1024) -> float:
        ts = np.linspace(0.0, self.horizon, max(int(samples), 2))
        return float(np.max(self.value(ts)))

    def max_drop_rate(self, samples: int = 1024) -> float:
        """Fastest instantaneous decrease, the supremum of -derivative."""
        ts = np.linspace(0.0, self.horizon, max(int(samples), 2))
        return float(np.max(-self.derivative(ts)))

    def _validate_horizon(self) -> None:
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon!r}")

    def _validate_positive(self) -> None:
        lo = self.min_value(POSITIVITY_SAMPLES)
        if self.allow_zero:
            if lo < 0.0:
                raise ValueError(f"{type(self).__name__} must be non-negative on the horizon")
        elif lo <= 0.0:
            raise ValueError(f"{type(self).__name__} must stay strictly positive on the horizon")


@dataclass(frozen=True)
class ConstantImpact(ImpactPath):
    level: float
    horizon: float
    allow_zero: bool = False

    def __post_init__(self):
        self._validate_horizon()
        if not math.isfinite(self.level):
            raise ValueError("level must be finite")
        self._validate_positive()

    def value(self, t):
        tt = self._domain(t)
        return self._match(t, np.full_like(tt, float(self.level)))

    def derivative(self, t):
        tt = self._domain(t)
        return self._match(t, np.zeros_like(tt))

    def min_value(self, samples: int = 1024) -> float:
        return float(self.level)

    def max_value(self, samples: int = 1024) -> float:
        return float(self.level)

    def max_drop_rate(self, samples: int = 1024) -> float:
        return 0.0


@dataclass(frozen=True)
class LinearImpact(ImpactPath):
    """a + b*t with intercept a and slope b."""

    intercept: float
    slope: float
    horizon: float
    allow_zero: bool = False

    def __post_init__(self):
        self._validate_horizon()
        if not (math.isfinite(self.intercept) and math.isfinite(self.slope)):
            raise ValueError("intercept and slope must be finite")
        self._validate_positive()

    def value(self, t):
        tt = self._domain(t)
        return self._match(t, self.intercept + self.slope * tt)

    def derivative(self, t):
        tt = self._domain(t)
        return self._match(t, np.full_like(tt, float(self.slope)))

    def min_value(self, samples: int = 1024) -> float:
        return float(min(self.intercept, self.intercept + self.slope * self.horizon))

    def max_value(self, samples: int = 1024) -> float:
        return float(max(self.intercept, self.intercept + self.slope * self.horizon))

    def max_drop_rate(self, samples: int = 1024) -> float:
        return float(-self.slope)


@dataclass(frozen=True)
class ExponentialImpact(ImpactPath):
    """beta * exp(-alpha * t / horizon); positive alpha decays, negative grows."""

    beta: float
    alpha: float
    horizon: float
    allow_zero: bool = False

    def __post_init__(self):
        self._validate_horizon()
        if not (math.isfinite(self.beta) and math.isfinite(self.alpha)):
            raise ValueError("beta and alpha must be finite")
        self._validate_positive()

    def value(self, t):
        tt = self._domain(t)
        return self._match(t, self.beta * np.exp(-self.alpha * tt / self.horizon))

    def derivative(self, t):
        tt = self._domain(t)
        out = -(self.alpha / self.horizon) * self.beta * np.exp(-self.alpha * tt / self.horizon)
        return self._match(t, out)

    def min_value(self, samples: int = 1024) -> float:
        return float(self.beta * math.exp(-max(self.alpha, 0.0)))

    def max_value(self, samples: int = 1024) -> float:
        return float(self.beta * math.exp(max(-self.alpha, 0.0)))

    def max_drop_rate(self, samples: int = 1024) -> float:
        # -derivative = (alpha*beta/T) exp(-alpha t/T); its sup sits at t=0
        # for every sign of alpha.
        return float(self.alpha * self.beta / self.horizon)


@dataclass(frozen=True)
class PowerLawImpact(ImpactPath):
    """beta * (1 + t/horizon)**(-alpha)."""

    beta: float
    alpha: float
    horizon: float
    allow_zero: bool = False

    def __post_init__(self):
        self._validate_horizon()
        if not (math.isfinite(self.beta) and math.isfinite(self.alpha)):
            raise ValueError("beta and alpha must be finite")
        self._validate_positive()

    def value(self, t):
        tt = self._domain(t)
        return self._match(t, self.beta * (1.0 + tt / self.horizon) ** (-self.alpha))

    def derivative(self, t):
        tt = self._domain(t)
        out = -(self.alpha * self.beta / self.horizon) * (1.0 + tt / self.horizon) ** (-self.alpha - 1.0)
        return self._match(t, out)

    def min_value(self, samples: int = 1024) -> float:
        return float(self.beta * 2.0 ** (-max(self.alpha, 0.0)))

    def max_value(self, samples: int = 1024) -> float:
        return float(self.beta * 2.0 ** (max(-self.alpha, 0.0)))

    def max_drop_rate(self, samples: int = 1024) -> float:
        if self.alpha >= 0.0:
            return float(self.alpha * self.beta / self.horizon)
        # Growing curve: -derivative is negative everywhere; the sup is the
        # least negative endpoint value.
        factor = min(1.0, 2.0 ** (-self.alpha - 1.0))
        return float(self.alpha * self.beta / self.horizon * factor)


@dataclass(frozen=True, eq=False)
class TabulatedImpact(ImpactPath):
    """Piecewise-linear curve through strictly increasing knots spanning [0, T]."""

    times: np.ndarray
    values: np.ndarray
    horizon: float
    allow_zero: bool = False

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        self._validate_horizon()
        t, v = self.times, self.values
        if t.ndim != 1 or v.ndim != 1 or t.size != v.size or t.size < 2:
            raise ValueError("times and values must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("times must be strictly increasing")
        tol = 1e-9 * max(1.0, self.horizon)
        if abs(t[0]) > tol or abs(t[-1] - self.horizon) > tol:
            raise ValueError(f"times must span [0, {self.horizon}]")
        # Piecewise-linear minimum sits at a knot, so the knot check is exact.
        self._validate_positive()

    def value(self, t):
        tt = self._domain(t)
        return self._match(t, np.interp(tt, self.times, self.values))

    def derivative(self, t):
        tt = self._domain(t)
        h = self.horizon * 1e-6
        lo = np.maximum(tt - h, 0.0)
        hi = np.minimum(tt + h, self.horizon)
        out = (np.interp(hi, self.times, self.values) - np.interp(lo, self.times, self.values)) / (hi - lo)
        return self._match(t, out)

    def min_value(self, samples: int = 1024) -> float:
        return float(self.values.min())

    def max_value(self, samples: int = 1024) -> float:
        return float(self.values.max())


@dataclass(frozen=True)
class MarketModel:
    """Impact curves, horizon, and quantity for one execution program.

    Q > 0 is a liquidation (sell) program in the continuous-time convention.
    sigma is an optional volatility curve and may be zero.
    """

    theta: ImpactPath
    eta: ImpactPath
    T: float
    Q: float
    sigma: Optional[ImpactPath] = None

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ValueError("T must be positive and finite")
        if not math.isfinite(self.Q):
            raise ValueError("Q must be finite")
        for name, path in (("theta", self.theta), ("eta", self.eta), ("sigma", self.sigma)):
            if path is None:
                continue
            if abs(path.horizon - self.T) > 1e-12 * max(1.0, self.T):
                raise ValueError(f"{name} horizon {path.horizon} does not match T={self.T}")

    @staticmethod
    def from_json(obj: dict) -> "MarketModel":
        if not isinstance(obj, dict):
            raise ValueError("model document must be a JSON object")
        T = float(_require(obj, "T"))
        Q = float(_require(obj, "Q"))
        theta = path_from_json(_require(obj, "theta"), T, name="theta")
        eta = path_from_json(_require(obj, "eta"), T, name="eta")
        sigma = None
        if obj.get("sigma") is not None:
            sigma = path_from_json(obj["sigma"], T, name="sigma", allow_zero=True)
        return MarketModel(theta, eta, T, Q, sigma)

    def to_json(self) -> dict:
        out = {
            "T": self.T,
            "Q": self.Q,
            "theta": path_to_json(self.theta),
            "eta": path_to_json(self.eta),
        }
        if self.sigma is not None:
            out["sigma"] = path_to_json(self.sigma)
        return out


@dataclass(frozen=True, eq=False)
class DiscreteImpactGrid:
    """Per-interval impact coefficients for an N-slice program."""

    theta: np.ndarray
    eta: np.ndarray
    T: float
    Q: float

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float))
        if self.theta.ndim != 1 or self.eta.ndim != 1 or self.theta.size != self.eta.size:
            raise ValueError("theta and eta must be 1-d arrays of equal length")
        if self.theta.size < 1:
            raise ValueError("need at least one interval")
        if np.any(self.theta <= 0.0) or np.any(self.eta <= 0.0):
            raise ValueError("impact coefficients must be strictly positive")
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ValueError("T must be positive and finite")
        if not math.isfinite(self.Q):
            raise ValueError("Q must be finite")

    @property
    def n(self) -> int:
        return int(self.theta.size)


def discretize(model: MarketModel, n: int) -> DiscreteImpactGrid:
    """Sample the model on n equal intervals.

    theta is taken at the left endpoint of each interval. The per-interval
    temporary impact is eta(t_i) * n / T: trades are shares per interval
    while the continuous curve penalizes shares per unit time, and this
    scaling makes the discrete quadratic cost of a sampled schedule converge
    to the continuous cash functional as the grid is refined.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    ts = np.arange(n) * (model.T / n)
    theta = model.theta.value(ts)
    eta = model.eta.value(ts) * (n / model.T)
    return DiscreteImpactGrid(theta, eta, model.T, model.Q)


def summary_gamma(model: MarketModel, samples: int = 2049):
    """Extremes that drive the curvature certificates.

    Returns ``(eta_bar, theta_bar, gamma)``: the minimum temporary impact,
    the fastest decrease rate of permanent impact floored at a tiny positive
    value (so the ratio below is always defined, and vanishes when the
    permanent impact never decreases), and gamma = theta_bar / (2 eta_bar).
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    eta_bar = model.eta.min_value(samples)
    drop = model.theta.max_drop_rate(samples)
    floor = 1e-12 * model.theta.max_value(samples) / model.T
    theta_bar = max(drop, floor)
    return eta_bar, theta_bar, theta_bar / (2.0 * eta_bar)


# ---------------------------------------------------------------------------
# JSON wire format


def _require(obj: dict, key: str, where: str = ""):
    if key not in obj:
        field = f"{where}.{key}" if where else key
        raise ValueError(f"missing field '{field}'")
    return obj[key]


def path_from_json(obj: dict, horizon: float, name: str = "path", allow_zero: bool = False) -> ImpactPath:
    """Build an impact curve from its JSON description."""
    if not isinstance(obj, dict):
        raise ValueError(f"field '{name}' must be a JSON object")
    family = str(_require(obj, "family", name)).lower()
    try:
        if family == "constant":
            return ConstantImpact(float(_require(obj, "c", name)), horizon, allow_zero)
        if family == "linear":
            return LinearImpact(float(_require(obj, "a", name)), float(_require(obj, "b", name)),
                                horizon, allow_zero)
        if family == "exponential":
            return ExponentialImpact(float(_require(obj, "beta", name)), float(_require(obj, "alpha", name)),
                                     horizon, allow_zero)
        if family == "powerlaw":
            return PowerLawImpact(float(_require(obj, "beta", name)), float(_require(obj, "alpha", name)),
                                  horizon, allow_zero)
        if family == "tabulated":
            return TabulatedImpact(np.asarray(_require(obj, "times", name), dtype=float),
                                   np.asarray(_require(obj, "values", name), dtype=float),
                                   horizon, allow_zero)
    except ValueError as exc:
        raise ValueError(f"invalid '{name}': {exc}") from exc
    raise ValueError(
        f"'{name}.family' must be one of constant|linear|exponential|powerlaw|tabulated, got '{family}'")


def path_to_json(path: ImpactPath) -> dict:
    if isinstance(path, ConstantImpact):
        return {"family": "constant", "c": path.level}
    if isinstance(path, LinearImpact):
        return {"family": "linear", "a": path.intercept, "b": path.slope}
    if isinstance(path, ExponentialImpact):
        return {"family": "exponential", "beta": path.beta, "alpha": path.alpha}
    if isinstance(path, PowerLawImpact):
        return {"family": "powerlaw", "beta": path.beta, "alpha": path.alpha}
    if isinstance(path, TabulatedImpact):
        return {"family": "tabulated", "times": path.times.tolist(), "values": path.values.tolist()}
    raise TypeError(f"unknown impact path type {type(path).__name__}")
