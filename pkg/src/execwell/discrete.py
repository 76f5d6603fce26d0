"""Discrete-time execution: impact matrix, closed-form optimum, certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .impact import DiscreteImpactGrid

__all__ = [
    "ImpactMatrix",
    "DiscreteStrategy",
    "NotSPDError",
    "NotApplicableError",
    "impact_matrix",
    "cost",
    "solve_optimal",
    "is_spd",
    "is_diagonally_dominant",
    "is_b_matrix",
    "check_bmatrix_sufficient",
    "brute_force_optimum",
]

PIVOT_SCALE = 1e-12


class NotSPDError(Exception):
    """The impact matrix failed the Cholesky positivity test.

    The constrained quadratic cost then has no minimum (saddle or worse);
    callers should classify the regime instead of solving.
    """

    def __init__(self, smallest_pivot: float):
        self.smallest_pivot = float(smallest_pivot)
        super().__init__(f"NotSPD: smallest Cholesky pivot {self.smallest_pivot:.6g}")


class NotApplicableError(Exception):
    """A certificate's precondition does not hold for this grid."""


@dataclass(frozen=True, eq=False)
class ImpactMatrix:
    """Symmetric matrix encoding the quadratic execution cost."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", a)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError("entries must be a square matrix")
        if not np.array_equal(a, a.T):
            raise ValueError("entries must be exactly symmetric")
        if np.any(np.diag(a) <= 0.0):
            raise ValueError("diagonal entries must be strictly positive")

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])


@dataclass(frozen=True, eq=False)
class DiscreteStrategy:
    """Shares traded per interval, summing to the program quantity."""

    xi: np.ndarray
    Q: float

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        object.__setattr__(self, "xi", xi)
        if xi.ndim != 1 or xi.size < 1:
            raise ValueError("xi must be a non-empty vector")
        if abs(float(xi.sum()) - self.Q) > 1e-9 * (1.0 + abs(self.Q)):
            raise ValueError(f"trades sum to {xi.sum()!r}, expected {self.Q!r}")

    @property
    def n(self) -> int:
        return int(self.xi.size)


def _entries(a: Union[ImpactMatrix, np.ndarray]) -> np.ndarray:
    return a.entries if isinstance(a, ImpactMatrix) else np.asarray(a, dtype=float)


def impact_matrix(grid: DiscreteImpactGrid) -> ImpactMatrix:
    """Cost matrix with 2*eta_i on the diagonal and theta_min(i,j) elsewhere."""
    idx = np.arange(grid.n)
    a = grid.theta[np.minimum.outer(idx, idx)]
    np.fill_diagonal(a, 2.0 * grid.eta)
    return ImpactMatrix(a)


def cost(a: Union[ImpactMatrix, np.ndarray], strategy: Union[DiscreteStrategy, np.ndarray]) -> float:
    """Expected execution cost 0.5 * xi' A xi (shortfall up to the constant Q*S0)."""
    m = _entries(a)
    xi = strategy.xi if isinstance(strategy, DiscreteStrategy) else np.asarray(strategy, dtype=float)
    if xi.shape != (m.shape[0],):
        raise ValueError(f"strategy length {xi.shape} does not match matrix size {m.shape[0]}")
    return 0.5 * float(xi @ m @ xi)


def is_spd(a: Union[ImpactMatrix, np.ndarray], pivot_scale: float = PIVOT_SCALE) -> Tuple[bool, float]:
    """Cholesky factorization test.

    Returns ``(ok, smallest_pivot)``. The matrix counts as positive definite
    only when every pivot clears ``pivot_scale * max|entry|``, which
    separates definite from merely semidefinite matrices.
    """
    m = _entries(a)
    n = m.shape[0]
    thresh = pivot_scale * float(np.abs(m).max())
    lower = np.zeros_like(m)
    smallest = math.inf
    for i in range(n):
        pivot = float(m[i, i] - lower[i, :i] @ lower[i, :i])
        smallest = min(smallest, pivot)
        if not pivot > thresh:
            return False, smallest
        root = math.sqrt(pivot)
        lower[i, i] = root
        if i + 1 < n:
            lower[i + 1:, i] = (m[i + 1:, i] - lower[i + 1:, :i] @ lower[i, :i]) / root
    return True, smallest


def solve_optimal(a: Union[ImpactMatrix, np.ndarray], q: float) -> DiscreteStrategy:
    """Closed-form minimizer of the cost on the hyperplane sum(xi) = q.

    xi* = q * A^-1 1 / (1' A^-1 1). Raises NotSPDError when the matrix is
    not positive definite, in which case no minimizer exists.
    """
    m = _entries(a)
    ok, pivot = is_spd(m)
    if not ok:
        raise NotSPDError(pivot)
    ones = np.ones(m.shape[0])
    y = np.linalg.solve(m, ones)
    denom = float(ones @ y)
    lam = q / denom
    xi = lam * y
    residual = float(np.max(np.abs(m @ xi - lam)))
    if residual > 1e-8 * (1.0 + abs(lam)):
        raise ArithmeticError(f"stationarity residual {residual:.3g} too large; matrix badly conditioned")
    return DiscreteStrategy(xi, q)


def is_diagonally_dominant(grid: DiscreteImpactGrid) -> Tuple[bool, Optional[int]]:
    """Row-wise strict dominance 2*eta_i > sum_{j<i} theta_j + (n-i)*theta_i.

    Returns ``(ok, first_violation_row)`` with 1-based row indexing.
    """
    theta, eta, n = grid.theta, grid.eta, grid.n
    prefix = np.concatenate(([0.0], np.cumsum(theta)))
    for i in range(n):
        off_diag = prefix[i] + (n - (i + 1)) * theta[i]
        if not 2.0 * eta[i] > off_diag:
            return False, i + 1
    return True, None


def is_b_matrix(a: Union[ImpactMatrix, np.ndarray]) -> Tuple[bool, Optional[int]]:
    """Row-mean criterion: mean of row i strictly exceeds max(0, off-diagonals).

    Equivalent to requiring positive row sums with every off-diagonal below
    the row mean. Returns ``(ok, first_violation_row)`` 1-based.
    """
    m = _entries(a)
    n = m.shape[0]
    for i in range(n):
        mean = float(m[i].sum()) / n
        off = np.delete(m[i], i)
        biggest = max(0.0, float(off.max())) if off.size else 0.0
        if not mean > biggest:
            return False, i + 1
    return True, None


def check_bmatrix_sufficient(grid: DiscreteImpactGrid) -> bool:
    """Restrictive one-line test implying the B-matrix property.

    Requires a non-increasing permanent impact. Evaluates the decreasing-step
    budget 2*min(eta) >= max(theta_1, theta_n) - n * min step of theta,
    tightened by the exact worst-row requirement 2*min(eta) > n*theta_1 -
    sum(theta_1..theta_{n-1}). The step budget alone can pass while a late
    row's mean still sits below theta_1 once n exceeds 4, so the tightening
    is what makes a pass always certify the row-mean property.
    """
    lhs, step_budget, worst_row = _restrictive_terms(grid)
    return lhs >= step_budget and lhs > worst_row


def _restrictive_terms(grid: DiscreteImpactGrid) -> Tuple[float, float, float]:
    theta, eta, n = grid.theta, grid.eta, grid.n
    steps = np.diff(theta)
    if steps.size and np.any(steps > 0.0):
        raise NotApplicableError("permanent impact must be non-increasing")
    min_step = float(steps.min()) if steps.size else 0.0
    lhs = 2.0 * float(eta.min())
    step_budget = max(float(theta[0]), float(theta[-1])) - n * min_step
    worst_row = n * float(theta[0]) - float(theta[:-1].sum()) if n > 1 else float(theta[0])
    return lhs, step_budget, worst_row


def brute_force_optimum(a: Union[ImpactMatrix, np.ndarray], q: float,
                        box_halfwidth: Optional[float] = None, grid_points: int = 21,
                        samples: int = 1_000_000, seed: int = 0) -> DiscreteStrategy:
    """Search oracle for the constrained optimum, independent of solve_optimal.

    Explores the hyperplane sum(xi) = q inside the box [q/n - w, q/n + w]^n:
    an exhaustive mesh for n <= 4, random feasible points otherwise, each
    followed by a projected-gradient polish that stays inside the box. The
    default half-width w = 5*max(|q|, 1) leaves room for overshooting
    schedules. Intended for tests and saddle diagnosis.
    """
    m = _entries(a)
    n = m.shape[0]
    if box_halfwidth is not None:
        w = float(box_halfwidth)
    else:
        w = 5.0 * abs(q) if q != 0.0 else 5.0
    center = q / n
    if n == 1:
        return DiscreteStrategy(np.array([float(q)]), q)

    if n <= 4:
        axis = np.linspace(center - w, center + w, int(grid_points))
        mesh = np.meshgrid(*([axis] * (n - 1)), indexing="ij")
        head = np.stack([g.ravel() for g in mesh], axis=1)
        tail = q - head.sum(axis=1)
        pts = np.column_stack([head, tail])
        pts = pts[np.abs(tail - center) <= w]
        pts = np.vstack([pts, np.full(n, center)])
        best = pts[int(np.argmin(_batch_cost(m, pts)))]
    else:
        rng = np.random.default_rng(seed)
        best = np.full(n, center)
        best_cost = cost(m, best)
        remaining = int(samples)
        while remaining > 0:
            chunk = min(remaining, 100_000)
            remaining -= chunk
            x = center + rng.uniform(-w, w, size=(chunk, n))
            x += (q - x.sum(axis=1, keepdims=True)) / n
            inside = np.all(np.abs(x - center) <= w, axis=1)
            x = x[inside]
            if not x.size:
                continue
            c = _batch_cost(m, x)
            k = int(np.argmin(c))
            if c[k] < best_cost:
                best, best_cost = x[k], float(c[k])
    best = _polish(m, best, center, w)
    return DiscreteStrategy(best, q)


def _batch_cost(m: np.ndarray, pts: np.ndarray) -> np.ndarray:
    return 0.5 * np.einsum("ij,jk,ik->i", pts, m, pts)


def _polish(m: np.ndarray, x: np.ndarray, center: float, w: float, iters: int = 400) -> np.ndarray:
    """Gradient descent along the constraint hyperplane, clipped to the box."""
    x = x.astype(float).copy()
    best = 0.5 * float(x @ m @ x)
    base_step = 1.0 / max(1.0, float(np.abs(m).sum(axis=1).max()))
    for _ in range(iters):
        g = m @ x
        g = g - g.mean()  # tangent to sum(x) = const
        gn = float(g @ g)
        if gn <= 1e-30:
            break
        step = base_step
        moved = False
        while step > 1e-18:
            cand = x - step * g
            # shrink the step so the candidate stays inside the box
            over = np.abs(cand - center) - w
            if np.any(over > 0.0):
                with np.errstate(divide="ignore", invalid="ignore"):
                    room = (w - np.abs(x - center)) / (step * np.abs(g))
                room = room[(np.abs(g) > 0.0) & (room >= 0.0)]
                frac = float(min(1.0, room.min())) if room.size else 0.0
                if frac <= 1e-12:
                    break
                cand = x - frac * step * g
            c = 0.5 * float(cand @ m @ cand)
            if c < best:
                x, best, moved = cand, c, True
                break
            step *= 0.5
        if not moved:
            break
    return x
