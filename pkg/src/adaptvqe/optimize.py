"""Derivative-free parameter optimization.

``cobyla_minimize`` wraps SciPy's COBYLA (Powell's linear-approximation
trust-region method); the energy tolerance is used as the final trust-region
radius.  ``mod_cobyla`` adds a grid pre-scan of the newest parameter over
``[-pi, pi]`` and raises the tolerance to the standard error measured at the
chosen starting point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize


@dataclass(frozen=True)
class OptimizerConfig:
    tol: float = 1e-3
    rhobeg: float = 0.1
    max_evals: int = 1000
    prescan_points: int = 25
    dynamic_tol: bool = True

    def __post_init__(self):
        if self.tol <= 0 or self.rhobeg <= 0:
            raise ValueError("tol and rhobeg must be positive")
        if self.prescan_points < 3:
            raise ValueError("prescan_points must be at least 3")
        if self.max_evals < 1:
            raise ValueError("max_evals must be at least 1")


@dataclass
class OptResult:
    x: np.ndarray
    fun: float
    n_evals: int
    effective_tol: float
    converged: bool
    std_error: float = 0.0
    trace: list = field(default_factory=list)


class _Counted:
    """Objective wrapper: normalizes output to (value, std_error) and logs every call."""

    def __init__(self, objective: Callable):
        self.objective = objective
        self.trace: list[tuple[np.ndarray, float, float]] = []

    def __call__(self, x) -> tuple[float, float]:
        out = self.objective(np.array(x, dtype=float))
        value, err = (out if isinstance(out, tuple) else (out, 0.0))
        value, err = float(value), float(err)
        if not np.isfinite(value):
            raise FloatingPointError(f"objective returned {value} at theta = {np.array2string(np.asarray(x))}")
        self.trace.append((np.array(x, dtype=float), value, err))
        return value, err

    @property
    def n(self):
        return len(self.trace)


def cobyla_minimize(objective: Callable, x0, config: OptimizerConfig = OptimizerConfig(), tol: float | None = None) -> OptResult:
    """Minimize ``objective`` (returning a value or ``(value, std_error)``) with COBYLA."""
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial parameters must be finite")
    tol = config.tol if tol is None else tol
    f = objective if isinstance(objective, _Counted) else _Counted(objective)
    start = f.n
    budget = config.max_evals - start
    if budget < 1:
        raise ValueError("evaluation budget exhausted before optimization")
    res = minimize(
        lambda x: f(x)[0],
        x0,
        method="COBYLA",
        options={"rhobeg": config.rhobeg, "tol": min(tol, config.rhobeg), "maxiter": budget},
    )
    # SciPy may report its final iterate rather than the best point it evaluated
    x, fun, err = min(f.trace[start:], key=lambda t: t[1])
    return OptResult(
        x=x.reshape(x0.shape),
        fun=fun,
        n_evals=f.n,
        effective_tol=tol,
        converged=bool(res.status == 1),
        std_error=err,
        trace=list(f.trace),
    )


def prescan_last_parameter(objective: Callable, theta_prev, config: OptimizerConfig = OptimizerConfig()):
    """Grid-scan the last entry of ``theta_prev`` over ``[-pi, pi]`` with the rest fixed.

    Returns ``(theta_init, value, std_error)`` at the grid argmin; equal
    values are resolved toward the smallest ``|theta|``.
    """
    f = objective if isinstance(objective, _Counted) else _Counted(objective)
    base = np.asarray(theta_prev, dtype=float).copy()
    grid = np.linspace(-np.pi, np.pi, config.prescan_points)
    results = []
    for g in grid:
        base[-1] = g
        results.append(f(base))
    values = np.array([v for v, _ in results])
    vmin = values.min()
    ties = np.flatnonzero(values <= vmin + 1e-12 * max(1.0, abs(vmin)))
    k = ties[np.argmin(np.abs(grid[ties]))]
    out = base.copy()
    out[-1] = grid[k]
    return out, float(values[k]), float(results[k][1])


def mod_cobyla(objective: Callable, theta0, config: OptimizerConfig = OptimizerConfig(), prescan: bool = True) -> OptResult:
    """Pre-scan the newest parameter, set ``tol_eff = max(tol, std_error)``, then run COBYLA."""
    f = _Counted(objective)
    theta0 = np.asarray(theta0, dtype=float)
    if prescan and theta0.size:
        start, _, err = prescan_last_parameter(f, theta0, config)
    else:
        start = theta0
        _, err = f(theta0)
    tol = max(config.tol, err) if config.dynamic_tol else config.tol
    return cobyla_minimize(f, start, config, tol=tol)
