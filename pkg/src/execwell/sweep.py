"""Parameter sweeps over impact-decay space: admissibility maps and regime grids."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import IO, List, Optional

import numpy as np

from .impact import ExponentialImpact, MarketModel, PowerLawImpact
from .continuous import BracketFailureError, ToleranceFailureError, solve_bvp_shooting
from .analysis import classify_shape

__all__ = [
    "AxisSpec",
    "SweepSpec",
    "SweepCell",
    "lambert_w0",
    "is_admissible",
    "run_sweep",
    "write_cells_csv",
    "cells_to_json",
]

FAMILIES = ("exponential", "powerlaw")
MODES = ("distinct_exponents", "equal_exponents")

PI_SQUARED = math.pi * math.pi
LOG2 = math.log(2.0)

CSV_HEADER = ("param1", "param2", "admissible", "initial_velocity", "excess_cash", "regime")


def lambert_w0(x: float) -> float:
    """Principal branch of the product logarithm, via Halley iteration.

    Defined for x >= -1/e. Converges to |w*exp(w) - x| <= 1e-12*(1+|x|).
    """
    x = float(x)
    branch = -1.0 / math.e
    if x < branch - 1e-15:
        raise ValueError(f"lambert_w0 requires x >= -1/e, got {x!r}")
    x = max(x, branch)
    if x == 0.0:
        return 0.0
    if x > 0.0:
        w = math.log1p(x)
    else:
        # series start near the branch point
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 * p ** 3 / 72.0
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= 1e-12 * (1.0 + abs(x)):
            return w
        w -= f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0))
    if abs(w * math.exp(w) - x) <= 1e-9 * (1.0 + abs(x)):
        return w
    raise ArithmeticError(f"lambert_w0 did not converge for {x!r}")


def _check_family_mode(family: str, mode: str) -> None:
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def is_admissible(family: str, mode: str, p1: float, p2: float,
                  kappa: Optional[float] = None) -> bool:
    """Strict curvature-certificate inequality for one parameter cell.

    distinct_exponents: p1 is the permanent decay exponent, p2 the temporary
    one, with kappa supplied separately. equal_exponents: p1 is the shared
    exponent and p2 is kappa; these modes also exclude the measure-zero
    singular set alpha = 2/kappa where the boundary conditions degenerate.
    """
    _check_family_mode(family, mode)
    if mode == "distinct_exponents":
        if kappa is None:
            raise ValueError("kappa is required for distinct_exponents sweeps")
        if family == "exponential":
            return p1 < 2.0 * kappa * PI_SQUARED * math.exp(-p2)
        return p1 < PI_SQUARED * kappa * 2.0 ** (1.0 - p2)
    alpha, kap = p1, p2
    if abs(alpha * kap - 2.0) <= 1e-10:
        return False
    if family == "exponential":
        return alpha * math.exp(alpha) < 2.0 * kap * PI_SQUARED
    return alpha < lambert_w0(2.0 * PI_SQUARED * kap / LOG2)


@dataclass(frozen=True)
class AxisSpec:
    """One sweep axis: inclusive range, point count, linear or log spacing."""

    name: str
    lo: float
    hi: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"axis '{self.name}' needs at least 2 points")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ValueError(f"axis '{self.name}' range must be finite with lo < hi")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"axis '{self.name}' scale must be linear or log")
        if self.scale == "log" and self.lo <= 0.0:
            raise ValueError(f"axis '{self.name}' log scale needs lo > 0")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """Family, exponent mode, axes, and solver resolution for one sweep."""

    family: str
    mode: str
    axis1: AxisSpec
    axis2: AxisSpec
    kappa: Optional[float] = None
    steps: int = 600
    Q: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        _check_family_mode(self.family, self.mode)
        if self.mode == "distinct_exponents":
            if self.kappa is None or not self.kappa > 0.0:
                raise ValueError("distinct_exponents sweeps need kappa > 0")
        if self.steps < 100 or self.steps % 2:
            raise ValueError("steps must be an even integer >= 100")
        if not (self.T > 0.0 and math.isfinite(self.Q)):
            raise ValueError("T must be positive and Q finite")

    @staticmethod
    def from_json(obj: dict) -> "SweepSpec":
        if not isinstance(obj, dict):
            raise ValueError("sweep spec must be a JSON object")
        family = str(obj.get("family", "exponential")).lower()
        mode = str(obj.get("mode", "distinct_exponents")).lower()
        _check_family_mode(family, mode)
        if mode == "distinct_exponents":
            default1 = AxisSpec("alpha_p", 0.0, 3.0, 101)
            default2 = AxisSpec("alpha_tp", 0.0, 3.0, 101)
        else:
            default1 = AxisSpec("alpha", 0.0, 3.0, 101)
            default2 = AxisSpec("kappa", 0.05, 20.0, 101, scale="log")
        axis1 = _axis_from_json(obj.get("axis1"), default1)
        axis2 = _axis_from_json(obj.get("axis2"), default2)
        kappa = obj.get("kappa")
        return SweepSpec(
            family=family,
            mode=mode,
            axis1=axis1,
            axis2=axis2,
            kappa=None if kappa is None else float(kappa),
            steps=int(obj.get("grid_M", 600)),
            Q=float(obj.get("Q", 1.0)),
            T=float(obj.get("T", 1.0)),
        )


def _axis_from_json(obj, default: AxisSpec) -> AxisSpec:
    if obj is None:
        return default
    if not isinstance(obj, dict):
        raise ValueError("axis spec must be a JSON object")
    return AxisSpec(
        name=str(obj.get("name", default.name)),
        lo=float(obj.get("min", default.lo)),
        hi=float(obj.get("max", default.hi)),
        count=int(obj.get("count", default.count)),
        scale=str(obj.get("scale", default.scale)),
    )


@dataclass(frozen=True)
class SweepCell:
    """One grid point: parameters, admissibility, and solve outcome."""

    p1: float
    p2: float
    admissible: bool
    initial_velocity: float
    excess_cash: float
    regime: str


def _cell_model(spec: SweepSpec, p1: float, p2: float) -> MarketModel:
    beta_p = 1.0
    if spec.mode == "distinct_exponents":
        alpha_p, alpha_tp, kappa = p1, p2, float(spec.kappa)
    else:
        alpha_p = alpha_tp = p1
        kappa = p2
    beta_tp = spec.T * kappa * beta_p
    family = ExponentialImpact if spec.family == "exponential" else PowerLawImpact
    theta = family(beta_p, alpha_p, spec.T)
    eta = family(beta_tp, alpha_tp, spec.T)
    return MarketModel(theta, eta, spec.T, spec.Q)


def run_sweep(spec: SweepSpec, force: bool = False) -> List[SweepCell]:
    """Solve every cell of the grid, row-major in (axis1, axis2).

    Cells outside the admissible region are skipped (NaN fields) unless
    ``force`` is set. Solver failures are captured per cell as regime
    "failed" rather than aborting the sweep.
    """
    cells: List[SweepCell] = []
    for p1 in spec.axis1.values():
        for p2 in spec.axis2.values():
            p1f, p2f = float(p1), float(p2)
            admissible = is_admissible(spec.family, spec.mode, p1f, p2f, kappa=spec.kappa)
            if not admissible and not force:
                cells.append(SweepCell(p1f, p2f, False, math.nan, math.nan, "skipped"))
                continue
            model = _cell_model(spec, p1f, p2f)
            try:
                traj = solve_bvp_shooting(model, steps=spec.steps, force=True)
            except (BracketFailureError, ToleranceFailureError):
                cells.append(SweepCell(p1f, p2f, admissible, math.nan, math.nan, "failed"))
                continue
            cells.append(SweepCell(p1f, p2f, admissible, traj.initial_velocity,
                                   traj.cash, classify_shape(traj)))
    return cells


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def write_cells_csv(cells: List[SweepCell], fh: IO[str]) -> None:
    """Delimited output, one row per cell; NaN is spelled 'nan'."""
    fh.write(",".join(CSV_HEADER) + "\n")
    for c in cells:
        fh.write(f"{_g17(c.p1)},{_g17(c.p2)},{1 if c.admissible else 0},"
                 f"{_g17(c.initial_velocity)},{_g17(c.excess_cash)},{c.regime}\n")


def cells_to_json(cells: List[SweepCell]) -> List[dict]:
    return [asdict(c) for c in cells]
