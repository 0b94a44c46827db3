"""Conditional gradient solvers with a shared termination test and cost model.

Five variants over one skeleton (linearize, pick a vertex, step):

  solve_cgm    exact vertex oracle + Armijo backtracking
  solve_cgms   exact vertex oracle + adaptive step, no line search
  solve_cgmi   inexact cyclic direction search with tolerance restarts + Armijo
  solve_cgmil  inexact directions + fixed step from a gradient Lipschitz bound
  solve_cgmis  inexact directions + adaptive step, no line search

Reported counters measure the per-step oracle cost of a run: the one-time
seed evaluation of f(x0) and the terminal certification that stops the run
are not charged, while the full gradient consumed by the default stage
tolerance rule is. Under this accounting the exact-oracle methods satisfy
kg = n*it and the adaptive-step methods satisfy kf = it, both exactly.
Raw cumulative tallies remain available on the objective itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    ArmijoResult,
    Counters,
    SimplexSet,
    SmoothObjective,
    SolveReport,
    StageRecord,
    Status,
    armijo_step,
    as_vector,
    exact_lmo,
    step_point,
)


class StageLimitError(RuntimeError):
    """A restarted solver ran out of tolerance stages before terminating."""


@dataclass(frozen=True)
class SolverConfig:
    """All tunables shared by the solver family.

    delta0 is the initial stage tolerance for the restarted methods; None
    selects max(eps, nu * gap(x0)), computed with one full gradient at the
    start (charged to kg).
    """

    beta: float = 0.5          # sufficient-decrease slope
    theta: float = 0.5         # backtracking ratio
    sigma: float = 0.9         # step shrink factor on failed acceptance
    nu: float = 0.5            # stage tolerance decrease factor
    eps: float = 0.1           # target gap
    delta0: Optional[float] = None
    tau0: float = 0.9          # initial step ceiling
    max_iterations: int = 1_000_000
    max_stages: int = 60

    def __post_init__(self):
        for name in ("beta", "theta", "sigma", "nu", "tau0"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and 0.0 < v < 1.0):
                raise ValueError(f"{name} must lie in (0,1), got {v!r}")
        if not (isinstance(self.eps, (int, float)) and self.eps > 0.0
                and math.isfinite(self.eps)):
            raise ValueError(f"eps must be a positive real, got {self.eps!r}")
        if self.delta0 is not None and not (self.delta0 > 0.0 and math.isfinite(self.delta0)):
            raise ValueError(f"delta0 must be positive when given, got {self.delta0!r}")
        if self.max_iterations < 0:
            raise ValueError(f"max_iterations must be >= 0, got {self.max_iterations}")
        if self.max_stages < 1:
            raise ValueError(f"max_stages must be >= 1, got {self.max_stages}")


@dataclass(frozen=True)
class StepRecord:
    """One accepted iteration, as recorded in a Trace.

    `delta` and `mu` are NaN where the solver did not know them; `accepted`
    is None for line-search methods, otherwise the outcome of the
    sufficient-decrease test; `tests` is the number of vertices probed by the
    inexact direction search (0 for exact-oracle methods); `point` is the
    pre-step iterate when point collection is on.
    """

    k: int
    stage: int
    delta: float
    lam: float
    trials: int
    f_before: float
    f_after: float
    dir_derivative: float
    vertex: int
    accepted: Optional[bool]
    mu: float
    tests: int
    point: Optional[np.ndarray]


@dataclass
class Trace:
    """Per-iteration recording, opt-in via the solvers' `trace` argument."""

    collect_points: bool = False
    steps: list = field(default_factory=list)


@dataclass
class StageState:
    """Mutable bookkeeping for one tolerance stage of a restarted solver."""

    stage: int              # p >= 1
    delta: float            # nu**p * delta0, exactly
    cursor: int = 0         # next vertex index for the cyclic search
    failures: int = 0       # acceptance failures l within this stage
    tau: float = 1.0        # current step ceiling tau_{l,p}
    lam: float = 1.0        # current step
    iterations: int = 0


@dataclass(frozen=True)
class FoundDirection:
    """A vertex satisfying the descent threshold: <f'(x), x - vertex> = descent."""

    index: int
    vertex: np.ndarray
    descent: float
    tests: int
    kg_cost: int


@dataclass(frozen=True)
class ExhaustedCycle:
    """A full failed cycle; `gap` is the exact gap at x (vertices are the
    extreme points, so the cycle maximum is the true maximum over the set)."""

    gap: float
    tests: int
    kg_cost: int


def inexact_direction(f: SmoothObjective, feasible_set: SimplexSet, x,
                      delta_p: float, cursor: int):
    """Scan vertices cyclically from `cursor` for one with
    <f'(x), x - b e_i> >= delta_p.

    With the <f'(x), x> fast path each probe costs one partial derivative;
    without it the scan falls back to one full gradient (n kg) for the whole
    call. Returns (FoundDirection, cursor advanced past the hit) or, after a
    full failed cycle, (ExhaustedCycle carrying the exact gap, cursor
    unchanged).
    """
    if not delta_p > 0.0:
        raise ValueError(f"delta_p must be positive, got {delta_p}")
    x = as_vector(x, feasible_set.n)
    n = feasible_set.n
    b = feasible_set.b
    gx = f.gradient_dot_point(x)
    if gx is None:
        g = f.gradient(x)
        gx = float(np.dot(g, x))
        probe = lambda i: float(g[i])
        flat_cost = n
    else:
        probe = lambda i: f.partial(x, i)
        flat_cost = None
    best = -math.inf
    for t in range(n):
        i = (cursor + t) % n
        descent = gx - b * probe(i)
        if descent >= delta_p:
            cost = flat_cost if flat_cost is not None else t + 1
            return FoundDirection(i, feasible_set.vertex(i), descent, t + 1, cost), (i + 1) % n
        if descent > best:
            best = descent
    cost = flat_cost if flat_cost is not None else n
    return ExhaustedCycle(best, n, cost), cursor


# ---------------------------------------------------------------------------
# shared pieces

def _start_point(f: SmoothObjective, feasible_set: SimplexSet, x0) -> np.ndarray:
    x = as_vector(x0, feasible_set.n)
    if x.shape[0] != f.n:
        raise ValueError(f"objective dimension {f.n} does not match set dimension {feasible_set.n}")
    if not feasible_set.contains(x):
        raise ValueError("starting point is not feasible")
    return x


def _certified_gap(f: SmoothObjective, feasible_set: SimplexSet, x) -> float:
    """Exact gap from one full gradient; reporting-only, never charged."""
    g = f.gradient(x)
    return float(np.dot(g, x)) - feasible_set.b * float(np.min(g))


def _stage_tolerance(cfg: SolverConfig, p: int, delta0: float) -> float:
    return cfg.nu ** p * delta0


def _init_delta0(f, feasible_set, cfg, x, counters):
    """(delta0, initial gap or None). The default rule spends one full
    gradient at x0 and charges it; an explicit delta0 costs nothing."""
    if cfg.delta0 is not None:
        return cfg.delta0, None
    g = f.gradient(x)
    counters.kg += feasible_set.n
    mu0 = float(np.dot(g, x)) - feasible_set.b * float(np.min(g))
    return max(cfg.eps, cfg.nu * mu0), mu0


def _record(trace, **kw):
    if trace is not None:
        point = kw.pop("point")
        trace.steps.append(StepRecord(
            point=point.copy() if trace.collect_points else None, **kw))


# ---------------------------------------------------------------------------
# exact-oracle methods

def solve_cgm(f: SmoothObjective, feasible_set: SimplexSet, cfg: SolverConfig,
              x0, trace: Optional[Trace] = None) -> SolveReport:
    """Classic conditional gradient with Armijo backtracking.

    Each iteration takes one full gradient, one exact vertex oracle (which
    yields the gap for free), and a backtracking step toward the vertex.
    Stops when the gap falls to cfg.eps or at the iteration cap. Descent is
    monotone by construction of the line search.
    """
    x = _start_point(f, feasible_set, x0)
    counters = Counters()
    fx = f.value(x)  # line-search seed; not part of the per-step cost
    f_history = [fx]
    while True:
        g = f.gradient(x)
        i_star, y = exact_lmo(g, feasible_set)
        mu = float(np.dot(g, x)) - feasible_set.b * float(g[i_star])
        if mu <= cfg.eps:
            status = Status.CONVERGED
            break
        if counters.it >= cfg.max_iterations:
            status = Status.ITERATION_CAP
            break
        counters.kg += feasible_set.n
        res = armijo_step(f, x, y - x, -mu, cfg.beta, cfg.theta, fx)
        counters.kf += res.trials
        _record(trace, k=counters.it, stage=1, delta=math.nan, lam=res.step,
                trials=res.trials, f_before=fx, f_after=res.new_value,
                dir_derivative=-mu, vertex=i_star, accepted=None, mu=mu,
                tests=0, point=x)
        x, fx = res.new_point, res.new_value
        counters.it += 1
        f_history.append(fx)
    return SolveReport(x=x, f=fx, gap=mu, counters=counters, status=status,
                       stages=None, f_history=f_history)


def solve_cgms(f: SmoothObjective, feasible_set: SimplexSet, cfg: SolverConfig,
               x0, trace: Optional[Trace] = None) -> SolveReport:
    """Conditional gradient with the adaptive step rule, no line search.

    The step toward the vertex is always taken; the sufficient-decrease test
    only decides whether the next step keeps the current size or shrinks it
    by sigma. Exactly one new function value and one full gradient per
    iteration, so kf = it and kg = n*it.
    """
    x = _start_point(f, feasible_set, x0)
    counters = Counters()
    fx = f.value(x)  # acceptance-test seed; not part of the per-step cost
    f_history = [fx]
    failures = 0
    lam = cfg.tau0
    while True:
        g = f.gradient(x)
        i_star, y = exact_lmo(g, feasible_set)
        mu = float(np.dot(g, x)) - feasible_set.b * float(g[i_star])
        if mu <= cfg.eps:
            status = Status.CONVERGED
            break
        if counters.it >= cfg.max_iterations:
            status = Status.ITERATION_CAP
            break
        counters.kg += feasible_set.n
        x_new = step_point(x, y, lam)
        f_new = f.value(x_new)
        counters.kf += 1
        accepted = f_new <= fx + cfg.beta * lam * (-mu)
        _record(trace, k=counters.it, stage=1, delta=math.nan, lam=lam,
                trials=1, f_before=fx, f_after=f_new, dir_derivative=-mu,
                vertex=i_star, accepted=accepted, mu=mu, tests=0, point=x)
        x, fx = x_new, f_new
        counters.it += 1
        f_history.append(fx)
        if not accepted:
            failures += 1
            lam = cfg.tau0 * cfg.sigma ** failures
    return SolveReport(x=x, f=fx, gap=mu, counters=counters, status=status,
                       stages=None, f_history=f_history)


# ---------------------------------------------------------------------------
# inexact-direction methods with tolerance restarts

def solve_cgmi(f: SmoothObjective, feasible_set: SimplexSet, cfg: SolverConfig,
               x0, trace: Optional[Trace] = None) -> SolveReport:
    """Inexact direction finding with tolerance restarts, Armijo steps.

    Stage p accepts any vertex whose linearized descent reaches
    delta_p = nu**p * delta0; a full failed cycle certifies the exact gap,
    triggering either convergence (gap <= eps) or a restart with the next
    tolerance. Per-step decrease is at least beta * lam * delta_p.
    """
    x = _start_point(f, feasible_set, x0)
    counters = Counters()
    fx = f.value(x)  # line-search seed; not part of the per-step cost
    f_history = [fx]
    delta0, mu0 = _init_delta0(f, feasible_set, cfg, x, counters)
    if mu0 is not None and mu0 <= cfg.eps:
        return SolveReport(x=x, f=fx, gap=mu0, counters=counters,
                           status=Status.CONVERGED, stages=[], f_history=f_history)
    stages: list = []
    state = StageState(stage=1, delta=_stage_tolerance(cfg, 1, delta0))
    while True:
        if counters.it >= cfg.max_iterations:
            status = Status.ITERATION_CAP
            mu = _certified_gap(f, feasible_set, x)
            stages.append(StageRecord(state.stage, state.delta, state.iterations,
                                      None, x.copy()))
            break
        res, state.cursor = inexact_direction(f, feasible_set, x, state.delta,
                                              state.cursor)
        if isinstance(res, ExhaustedCycle):
            if res.gap <= cfg.eps:
                status = Status.CONVERGED
                mu = res.gap  # terminal certification; not charged
                stages.append(StageRecord(state.stage, state.delta,
                                          state.iterations, res.gap, x.copy()))
                break
            counters.kg += res.kg_cost
            stages.append(StageRecord(state.stage, state.delta,
                                      state.iterations, res.gap, x.copy()))
            counters.restarts += 1
            if state.stage + 1 > cfg.max_stages:
                raise StageLimitError(
                    f"no convergence after {cfg.max_stages} stages "
                    f"(gap {res.gap}, tolerance {state.delta})")
            state = StageState(stage=state.stage + 1,
                               delta=_stage_tolerance(cfg, state.stage + 1, delta0),
                               cursor=state.cursor)
            continue
        counters.kg += res.kg_cost
        step = armijo_step(f, x, res.vertex - x, -res.descent,
                           cfg.beta, cfg.theta, fx)
        counters.kf += step.trials
        _record(trace, k=counters.it, stage=state.stage, delta=state.delta,
                lam=step.step, trials=step.trials, f_before=fx,
                f_after=step.new_value, dir_derivative=-res.descent,
                vertex=res.index, accepted=None, mu=math.nan, tests=res.tests,
                point=x)
        x, fx = step.new_point, step.new_value
        counters.it += 1
        state.iterations += 1
        f_history.append(fx)
    return SolveReport(x=x, f=fx, gap=mu, counters=counters, status=status,
                       stages=stages, f_history=f_history)


def solve_cgmil(f: SmoothObjective, feasible_set: SimplexSet, cfg: SolverConfig,
                x0, lipschitz: float, trace: Optional[Trace] = None,
                check_descent: bool = False) -> SolveReport:
    """Inexact directions with a fixed per-stage step, no function values.

    With a valid gradient Lipschitz upper bound L, the step
    min(1, delta_p * 2(1-beta)/(L rho^2)) satisfies the sufficient-decrease
    inequality analytically, so the method needs no line search and no
    objective evaluations; kf stays 0. `check_descent` re-verifies the
    inequality at every step (debug aid, excluded from the cost counters).
    """
    if not (isinstance(lipschitz, (int, float)) and lipschitz > 0.0
            and math.isfinite(lipschitz)):
        raise ValueError(f"lipschitz must be a positive real, got {lipschitz!r}")
    x = _start_point(f, feasible_set, x0)
    counters = Counters()
    lam_bar = 2.0 * (1.0 - cfg.beta) / (lipschitz * feasible_set.diameter_squared)
    fx = f.value(x) if check_descent else None  # debug only, never charged
    f_history = [fx] if check_descent else None
    delta0, mu0 = _init_delta0(f, feasible_set, cfg, x, counters)
    if mu0 is not None and mu0 <= cfg.eps:
        final_f = fx if fx is not None else f.value(x)
        return SolveReport(x=x, f=final_f, gap=mu0, counters=counters,
                           status=Status.CONVERGED, stages=[], f_history=f_history)
    stages: list = []
    state = StageState(stage=1, delta=_stage_tolerance(cfg, 1, delta0))
    state.lam = min(1.0, lam_bar * state.delta)
    while True:
        if counters.it >= cfg.max_iterations:
            status = Status.ITERATION_CAP
            mu = _certified_gap(f, feasible_set, x)
            stages.append(StageRecord(state.stage, state.delta, state.iterations,
                                      None, x.copy()))
            break
        res, state.cursor = inexact_direction(f, feasible_set, x, state.delta,
                                              state.cursor)
        if isinstance(res, ExhaustedCycle):
            if res.gap <= cfg.eps:
                status = Status.CONVERGED
                mu = res.gap
                stages.append(StageRecord(state.stage, state.delta,
                                          state.iterations, res.gap, x.copy()))
                break
            counters.kg += res.kg_cost
            stages.append(StageRecord(state.stage, state.delta,
                                      state.iterations, res.gap, x.copy()))
            counters.restarts += 1
            if state.stage + 1 > cfg.max_stages:
                raise StageLimitError(
                    f"no convergence after {cfg.max_stages} stages "
                    f"(gap {res.gap}, tolerance {state.delta})")
            state = StageState(stage=state.stage + 1,
                               delta=_stage_tolerance(cfg, state.stage + 1, delta0),
                               cursor=state.cursor)
            state.lam = min(1.0, lam_bar * state.delta)
            continue
        counters.kg += res.kg_cost
        x_new = step_point(x, res.vertex, state.lam)
        f_new = math.nan
        if check_descent:
            f_new = f.value(x_new)
            slack = cfg.beta * state.lam * res.descent
            if f_new > fx - slack + 1e-9 * max(1.0, abs(fx)):
                raise AssertionError(
                    f"sufficient decrease violated at iteration {counters.it}: "
                    f"{f_new} > {fx} - {slack}; the Lipschitz bound is too small")
        _record(trace, k=counters.it, stage=state.stage, delta=state.delta,
                lam=state.lam, trials=0, f_before=fx if fx is not None else math.nan,
                f_after=f_new, dir_derivative=-res.descent, vertex=res.index,
                accepted=None, mu=math.nan, tests=res.tests, point=x)
        x = x_new
        if check_descent:
            fx = f_new
            f_history.append(fx)
        counters.it += 1
        state.iterations += 1
    final_f = fx if fx is not None else f.value(x)  # reporting only
    return SolveReport(x=x, f=final_f, gap=mu, counters=counters, status=status,
                       stages=stages, f_history=f_history)


def solve_cgmis(f: SmoothObjective, feasible_set: SimplexSet, cfg: SolverConfig,
                x0, trace: Optional[Trace] = None) -> SolveReport:
    """Inexact directions plus the adaptive step rule, no line search.

    Within a stage the step control mirrors solve_cgms (always step, shrink
    by sigma on failed acceptance). A restart begins the next stage with
    step ceiling min(tau0, last step / sigma), letting steps recover after a
    successful stage while keeping the ceiling inside (0,1). One function
    value per iteration, so kf = it exactly.
    """
    x = _start_point(f, feasible_set, x0)
    counters = Counters()
    fx = f.value(x)  # acceptance-test seed; not part of the per-step cost
    f_history = [fx]
    delta0, mu0 = _init_delta0(f, feasible_set, cfg, x, counters)
    if mu0 is not None and mu0 <= cfg.eps:
        return SolveReport(x=x, f=fx, gap=mu0, counters=counters,
                           status=Status.CONVERGED, stages=[], f_history=f_history)
    stages: list = []
    state = StageState(stage=1, delta=_stage_tolerance(cfg, 1, delta0),
                       tau=cfg.tau0, lam=cfg.tau0)
    while True:
        if counters.it >= cfg.max_iterations:
            status = Status.ITERATION_CAP
            mu = _certified_gap(f, feasible_set, x)
            stages.append(StageRecord(state.stage, state.delta, state.iterations,
                                      None, x.copy()))
            break
        res, state.cursor = inexact_direction(f, feasible_set, x, state.delta,
                                              state.cursor)
        if isinstance(res, ExhaustedCycle):
            if res.gap <= cfg.eps:
                status = Status.CONVERGED
                mu = res.gap
                stages.append(StageRecord(state.stage, state.delta,
                                          state.iterations, res.gap, x.copy()))
                break
            counters.kg += res.kg_cost
            stages.append(StageRecord(state.stage, state.delta,
                                      state.iterations, res.gap, x.copy()))
            counters.restarts += 1
            if state.stage + 1 > cfg.max_stages:
                raise StageLimitError(
                    f"no convergence after {cfg.max_stages} stages "
                    f"(gap {res.gap}, tolerance {state.delta})")
            ceiling = min(cfg.tau0, state.lam / cfg.sigma)
            state = StageState(stage=state.stage + 1,
                               delta=_stage_tolerance(cfg, state.stage + 1, delta0),
                               cursor=state.cursor, tau=ceiling, lam=ceiling)
            continue
        counters.kg += res.kg_cost
        x_new = step_point(x, res.vertex, state.lam)
        f_new = f.value(x_new)
        counters.kf += 1
        accepted = f_new <= fx + cfg.beta * state.lam * (-res.descent)
        _record(trace, k=counters.it, stage=state.stage, delta=state.delta,
                lam=state.lam, trials=1, f_before=fx, f_after=f_new,
                dir_derivative=-res.descent, vertex=res.index,
                accepted=accepted, mu=math.nan, tests=res.tests, point=x)
        x, fx = x_new, f_new
        counters.it += 1
        state.iterations += 1
        f_history.append(fx)
        if not accepted:
            state.failures += 1
            state.lam = state.tau * cfg.sigma ** state.failures
    return SolveReport(x=x, f=fx, gap=mu, counters=counters, status=status,
                       stages=stages, f_history=f_history)
