"""Deterministic benchmark problem generators on the scaled simplex.

Four convex families, all built from closed-form trigonometric data so two
builds of the same instance are bit-identical:

  series 1: quadratic form           0.5 <Px, x>
  series 2: series 1 plus barrier    + 1/(<c,x> + d)
  series 3: least squares            0.5 ||Px - q||^2
  series 4: series 3 plus barrier

All index formulas are 1-based and all angles are radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import SimplexSet, SmoothObjective


def build_phi1_matrix(n: int) -> np.ndarray:
    """Symmetric n x n matrix with sin/cos off-diagonals and a diagonal of
    one plus the absolute off-diagonal row sum, which makes it strictly
    diagonally dominant and hence positive definite."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    idx = np.arange(1, n + 1, dtype=np.float64)
    upper = np.triu(np.outer(np.sin(idx), np.cos(idx)), k=1)
    P = upper + upper.T
    P[np.diag_indices(n)] = np.abs(P).sum(axis=1) + 1.0
    return P


def build_phi2_terms(n: int):
    """Barrier data: c_i = 2 + sin(i) (so c_i in [1, 3]) and d = 5."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    c = 2.0 + np.sin(np.arange(1, n + 1, dtype=np.float64))
    return c, 5.0


def build_phi3_data(m: int, n: int, b: float = 10.0):
    """Least-squares data: an m x n matrix with log/sin entries, shifted by
    +2 on the main diagonal, and the right-hand side q = b * row sums of P,
    which makes the residual vanish at the all-b vector."""
    if m < 1 or n < 1:
        raise ValueError(f"dimensions must be >= 1, got m={m}, n={n}")
    if not (math.isfinite(b) and b > 0):
        raise ValueError(f"mass must be a positive finite real, got {b}")
    i = np.arange(1, m + 1, dtype=np.float64)[:, None]
    j = np.arange(1, n + 1, dtype=np.float64)[None, :]
    r = i / j
    P = np.log1p(r) * np.sin(r) / (i + j)
    k = min(m, n)
    P[np.arange(k), np.arange(k)] += 2.0
    q = b * P.sum(axis=1)
    return P, q


@dataclass(frozen=True)
class ProblemSpec:
    """Declarative description of one benchmark instance."""

    series: int
    n: int
    m: Optional[int] = None
    b: float = 10.0

    def __post_init__(self):
        if self.series not in (1, 2, 3, 4):
            raise ValueError(f"series must be 1..4, got {self.series}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.series in (3, 4):
            if self.m is None or self.m < 1:
                raise ValueError(f"series {self.series} needs a row count m >= 1")
        elif self.m is not None:
            raise ValueError(f"series {self.series} takes no row count m")
        if not (math.isfinite(self.b) and self.b > 0):
            raise ValueError(f"mass must be a positive finite real, got {self.b}")

    @property
    def rows(self) -> int:
        """Row dimension of the problem matrix (n itself for series 1-2)."""
        return self.n if self.m is None else self.m


class QuadraticFormObjective(SmoothObjective):
    """0.5 <Px, x> for symmetric P, optionally plus 1/(<c,x> + d).

    Per-point state is the matrix-vector product Px (and <c,x> when the
    barrier is present); gradient components and partials both read it, and
    <f'(x), x> comes out of the same state for free.
    """

    def __init__(self, P: np.ndarray, barrier=None):
        P = np.asarray(P, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError(f"P must be square, got shape {P.shape}")
        super().__init__(P.shape[0])
        self.P = P
        if barrier is None:
            self.c = None
            self.d = None
        else:
            c, d = barrier
            self.c = np.asarray(c, dtype=np.float64)
            if self.c.shape != (self.n,):
                raise ValueError("barrier vector length must match P")
            self.d = float(d)

    def _make_state(self, x):
        state = {"px": self.P @ x}
        if self.c is not None:
            state["u"] = float(np.dot(self.c, x))
        return state

    def _value_impl(self, x, state):
        f = 0.5 * float(np.dot(state["px"], x))
        if self.c is not None:
            f += 1.0 / (state["u"] + self.d)
        return f

    def _partial_impl(self, x, state, i):
        g = state["px"][i]
        if self.c is not None:
            w = (state["u"] + self.d) ** 2
            g = g - self.c[i] / w
        return g

    def _gradient_impl(self, x, state):
        if self.c is None:
            return state["px"].copy()
        w = (state["u"] + self.d) ** 2
        return state["px"] - self.c / w

    def _gradient_dot_point_impl(self, x, state):
        out = float(np.dot(state["px"], x))
        if self.c is not None:
            w = (state["u"] + self.d) ** 2
            out -= state["u"] / w
        return out


class LeastSquaresObjective(SmoothObjective):
    """0.5 ||Px - q||^2, optionally plus 1/(<c,x> + d).

    Per-point state is the residual r = Px - q; the transposed product
    P^T r is materialized lazily on the first derivative request and shared
    by gradient and partials. <f'(x), x> = <r, r> + <r, q> needs only r.
    """

    def __init__(self, P: np.ndarray, q: np.ndarray, barrier=None):
        P = np.asarray(P, dtype=np.float64)
        q = np.asarray(q, dtype=np.float64)
        if P.ndim != 2:
            raise ValueError(f"P must be a matrix, got shape {P.shape}")
        if q.shape != (P.shape[0],):
            raise ValueError("q length must match the row count of P")
        super().__init__(P.shape[1])
        self.P = P
        self.q = q
        if barrier is None:
            self.c = None
            self.d = None
        else:
            c, d = barrier
            self.c = np.asarray(c, dtype=np.float64)
            if self.c.shape != (self.n,):
                raise ValueError("barrier vector length must match the column count of P")
            self.d = float(d)

    def _make_state(self, x):
        state = {"r": self.P @ x - self.q}
        if self.c is not None:
            state["u"] = float(np.dot(self.c, x))
        return state

    def _pt_r(self, state):
        if "t" not in state:
            state["t"] = self.P.T @ state["r"]
        return state["t"]

    def _value_impl(self, x, state):
        r = state["r"]
        f = 0.5 * float(np.dot(r, r))
        if self.c is not None:
            f += 1.0 / (state["u"] + self.d)
        return f

    def _partial_impl(self, x, state, i):
        g = self._pt_r(state)[i]
        if self.c is not None:
            w = (state["u"] + self.d) ** 2
            g = g - self.c[i] / w
        return g

    def _gradient_impl(self, x, state):
        t = self._pt_r(state)
        if self.c is None:
            return t.copy()
        w = (state["u"] + self.d) ** 2
        return t - self.c / w

    def _gradient_dot_point_impl(self, x, state):
        r = state["r"]
        out = float(np.dot(r, r)) + float(np.dot(r, self.q))
        if self.c is not None:
            w = (state["u"] + self.d) ** 2
            out -= state["u"] / w
        return out


def make_objective(spec: ProblemSpec) -> SmoothObjective:
    """Assemble the counted oracle for a benchmark instance."""
    if spec.series in (1, 2):
        P = build_phi1_matrix(spec.n)
        barrier = build_phi2_terms(spec.n) if spec.series == 2 else None
        return QuadraticFormObjective(P, barrier=barrier)
    P, q = build_phi3_data(spec.m, spec.n, spec.b)
    barrier = build_phi2_terms(spec.n) if spec.series == 4 else None
    return LeastSquaresObjective(P, q, barrier=barrier)


def make_feasible_set(spec: ProblemSpec) -> SimplexSet:
    return SimplexSet(spec.n, spec.b)


def build_instance(spec: ProblemSpec):
    """(objective, feasible set, barycenter start) for one instance."""
    D = make_feasible_set(spec)
    return make_objective(spec), D, D.barycenter()


def lipschitz_upper_bound(spec: ProblemSpec, region: SimplexSet) -> float:
    """A valid upper bound on the gradient Lipschitz constant over the region.

    Row-sum (infinity-norm) bounds on the Hessian: for the quadratic form the
    Hessian is P itself, for least squares it is P^T P; the barrier adds at
    most 2||c||^2/d^3 because <c,x> >= 0 on the nonnegative orthant. Cheap,
    deterministic, and only an upper bound is ever needed: a larger constant
    just shrinks the derived fixed step.
    """
    if region.n != spec.n:
        raise ValueError(f"region dimension {region.n} does not match spec n={spec.n}")
    if spec.series in (1, 2):
        H = build_phi1_matrix(spec.n)
    else:
        P, _ = build_phi3_data(spec.m, spec.n, spec.b)
        H = P.T @ P
    L = float(np.abs(H).sum(axis=1).max())
    if spec.series in (2, 4):
        c, d = build_phi2_terms(spec.n)
        L += 2.0 * float(np.dot(c, c)) / d ** 3
    return L
