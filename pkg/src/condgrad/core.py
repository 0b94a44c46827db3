"""Shared primitives: the scaled simplex, counted first-order oracles, the
exact vertex oracle, the gap function, and Armijo backtracking."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

# Feasibility tolerances: absolute slack on the mass constraint and the
# allowed dip below zero on coordinates. Convex-combination steps preserve
# both analytically; these absorb rounding only.
MASS_TOL = 1e-9
COORD_FLOOR = -1e-12

# Largest backtracking exponent before the line search is declared broken.
MAX_BACKTRACKS = 60


class LineSearchError(RuntimeError):
    """Armijo backtracking exhausted its exponent budget.

    Carries the point, direction and directional derivative that produced
    the failure so the caller can diagnose the run.
    """

    def __init__(self, message: str, *, point=None, direction=None,
                 directional_derivative=None, trials=None):
        super().__init__(message)
        self.point = point
        self.direction = direction
        self.directional_derivative = directional_derivative
        self.trials = trials


class Status(str, Enum):
    """Terminal state of a solve."""

    CONVERGED = "Converged"
    ITERATION_CAP = "IterationCapReached"
    ERROR = "Error"


def as_vector(x, n: Optional[int] = None) -> np.ndarray:
    """Validate `x` as a finite 1-d float64 vector, optionally of length `n`."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got array of shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"dimension mismatch: expected length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite entries")
    return v


@dataclass(frozen=True)
class SimplexSet:
    """The scaled standard simplex {x in R^n : x >= 0, sum(x) = b}.

    Every linear function attains its minimum over this set at one of the
    n vertices b*e_i, which is what makes the vertex oracle exact and cheap.
    """

    n: int
    b: float = 10.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n}")
        if not (math.isfinite(self.b) and self.b > 0):
            raise ValueError(f"mass must be a positive finite real, got {self.b}")

    @property
    def diameter(self) -> float:
        """Distance between two distinct vertices, b*sqrt(2)."""
        return self.b * math.sqrt(2.0)

    @property
    def diameter_squared(self) -> float:
        """Exact square of the diameter, 2*b**2 (avoids sqrt round-off)."""
        return 2.0 * self.b * self.b

    def contains(self, x) -> bool:
        """Membership up to the feasibility tolerances."""
        v = np.asarray(x, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] != self.n:
            return False
        if not np.all(np.isfinite(v)):
            return False
        return abs(float(v.sum()) - self.b) <= MASS_TOL and float(v.min()) >= COORD_FLOOR

    def vertex(self, i: int) -> np.ndarray:
        """The i-th vertex b*e_i."""
        if not 0 <= i < self.n:
            raise ValueError(f"vertex index {i} out of range for dimension {self.n}")
        v = np.zeros(self.n)
        v[i] = self.b
        return v

    def barycenter(self) -> np.ndarray:
        """The uniform point (b/n, ..., b/n)."""
        return np.full(self.n, self.b / self.n)


class SmoothObjective(ABC):
    """Counted first-order oracle for a smooth function on R^n.

    Call accounting is exact and unconditional: `value` adds 1 to `kf`,
    `gradient` adds n to `kg`, `partial` adds 1 to `kg`.
    `gradient_dot_point` returns <f'(x), x> for free when it is derivable
    from the state of a value evaluation (returns None when it is not, in
    which case callers fall back to a full gradient).

    Component i of `gradient(x)` equals `partial(x, i)` bit-for-bit: both
    read the same cached per-point state. The cache only avoids recomputing
    work; it never changes the accounting.
    """

    def __init__(self, n: int):
        self.n = int(n)
        self.kf = 0
        self.kg = 0
        self._cache_x: Optional[np.ndarray] = None
        self._cache_state: Optional[dict] = None

    # hooks -----------------------------------------------------------------

    @abstractmethod
    def _make_state(self, x: np.ndarray) -> dict:
        """Per-point intermediate quantities shared by value/gradient/partial."""

    @abstractmethod
    def _value_impl(self, x: np.ndarray, state: dict) -> float:
        ...

    @abstractmethod
    def _partial_impl(self, x: np.ndarray, state: dict, i: int) -> float:
        ...

    def _gradient_impl(self, x: np.ndarray, state: dict) -> np.ndarray:
        # default path: assemble from the partial formula, which guarantees
        # the bit-exact gradient/partial agreement
        return np.array([self._partial_impl(x, state, i) for i in range(self.n)])

    def _gradient_dot_point_impl(self, x: np.ndarray, state: dict) -> Optional[float]:
        return None

    # counted public interface ----------------------------------------------

    def _state_at(self, x: np.ndarray) -> dict:
        if self._cache_x is not None and np.array_equal(x, self._cache_x):
            return self._cache_state
        state = self._make_state(x)
        self._cache_x = x.copy()
        self._cache_state = state
        return state

    def value(self, x) -> float:
        """f(x); one kf charge."""
        x = as_vector(x, self.n)
        self.kf += 1
        return float(self._value_impl(x, self._state_at(x)))

    def gradient(self, x) -> np.ndarray:
        """f'(x); n kg charges."""
        x = as_vector(x, self.n)
        self.kg += self.n
        return self._gradient_impl(x, self._state_at(x))

    def partial(self, x, i: int) -> float:
        """f'_i(x); one kg charge."""
        x = as_vector(x, self.n)
        if not 0 <= i < self.n:
            raise ValueError(f"partial index {i} out of range for dimension {self.n}")
        self.kg += 1
        return float(self._partial_impl(x, self._state_at(x), i))

    def gradient_dot_point(self, x) -> Optional[float]:
        """<f'(x), x> without any kg charge, or None if no fast path exists."""
        x = as_vector(x, self.n)
        out = self._gradient_dot_point_impl(x, self._state_at(x))
        return None if out is None else float(out)


@dataclass
class Counters:
    """Per-run oracle cost: iterations, value calls, scalar derivative calls,
    stage transitions. All fields only ever increase during a run."""

    it: int = 0
    kf: int = 0
    kg: int = 0
    restarts: int = 0


@dataclass(frozen=True)
class StageRecord:
    """One tolerance stage of a restarted solver: its index, tolerance,
    iteration count, the exact gap certified when the stage ended by
    exhaustion (None if the run was capped mid-stage), and its end point."""

    stage: int
    delta: float
    iterations: int
    exit_gap: Optional[float]
    end_point: np.ndarray


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solver run."""

    x: np.ndarray
    f: float
    gap: float
    counters: Counters
    status: Status
    stages: Optional[list] = None
    f_history: Optional[list] = None


def exact_lmo(gradient, feasible_set: SimplexSet):
    """Minimize <gradient, y> over the simplex exactly.

    Returns (i, b*e_i) with i the smallest index attaining min_j gradient_j;
    ties break toward the lowest index for reproducible runs.
    """
    g = as_vector(gradient, feasible_set.n)
    i = int(np.argmin(g))
    return i, feasible_set.vertex(i)


def gap(x, gradient, feasible_set: SimplexSet) -> float:
    """max_{y in D} <gradient, x - y> = <g, x> - b * min_i g_i.

    Nonnegative (up to rounding) for feasible x; zero exactly at stationary
    points. Raises ValueError when x is infeasible.
    """
    g = as_vector(gradient, feasible_set.n)
    xv = as_vector(x, feasible_set.n)
    if not feasible_set.contains(xv):
        raise ValueError("gap is only defined for feasible points")
    return float(np.dot(g, xv)) - feasible_set.b * float(np.min(g))


def step_point(x: np.ndarray, z: np.ndarray, lam: float) -> np.ndarray:
    """(1-lam)*x + lam*z. The convex-combination form keeps iterates on the
    mass constraint to machine precision; x + lam*(z-x) would drift."""
    return (1.0 - lam) * x + lam * z


class ArmijoResult(NamedTuple):
    step: float
    trials: int
    new_value: float
    new_point: np.ndarray


def armijo_step(f: SmoothObjective, x, d, directional_derivative: float,
                beta: float, theta: float, f_x: float,
                max_backtracks: int = MAX_BACKTRACKS) -> ArmijoResult:
    """Backtracking line search along d from x.

    Finds the smallest m >= 0 with

        f((1-theta^m) x + theta^m (x+d)) <= f_x + beta theta^m <f'(x), d>

    and returns the accepted step theta^m, the number of trial evaluations
    (each charged one kf), the accepted objective value, and the accepted
    point. `f_x` is the caller's cached value of f at x; this routine never
    re-evaluates it.

    Raises ValueError when the supplied directional derivative is not
    negative and LineSearchError when m would exceed `max_backtracks`.
    """
    if not (0.0 < beta < 1.0 and 0.0 < theta < 1.0):
        raise ValueError(f"beta and theta must lie in (0,1), got {beta}, {theta}")
    if not directional_derivative < 0.0:
        raise ValueError(
            "armijo_step requires a descent direction: "
            f"<f'(x), d> = {directional_derivative} is not negative")
    x = as_vector(x, f.n)
    d = as_vector(d, f.n)
    z = x + d
    for m in range(max_backtracks + 1):
        lam = theta ** m
        trial = step_point(x, z, lam)
        f_trial = f.value(trial)
        if f_trial <= f_x + beta * lam * directional_derivative:
            return ArmijoResult(lam, m + 1, f_trial, trial)
    raise LineSearchError(
        f"no acceptable step after {max_backtracks + 1} trials "
        f"(directional derivative {directional_derivative})",
        point=x, direction=d,
        directional_derivative=directional_derivative,
        trials=max_backtracks + 1)
