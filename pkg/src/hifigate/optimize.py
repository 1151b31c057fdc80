"""Ancilla coefficient optimization.

The quadratic (small-error) objective is the Rayleigh quotient of the
(n+1)-point second-difference matrix with closed boundaries, so its
minimizer is that matrix's ground state: a half-period sine across the
coefficient index, with eigenvalue 2 (1 - cos(pi / (n + 2))). The exact
uniform-weight single-gate objective is the same quadratic form scaled by
1/6, so the sine profile is exactly optimal there too; the eigensolve is
still exposed separately because it is cheap, certifiable, and seeds the
general-purpose path.

The exact controlled-sign objective is a quartic in the coefficients and
gets a projected gradient descent on the unit sphere (finite-difference
gradient, nonnegativity clip, Armijo backtracking) from several starts.
Nonnegativity costs nothing: any sign flip can only increase every
objective here, and keeping the iterates in the positive orthant makes
results comparable across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .ancilla import CoefficientProfile, custom_profile, profile_linear, profile_sine, profile_uniform
from .fidelity import (
    DEFAULT_QUADRATURE_ORDER,
    InputEnsemble,
    _cz_branch_gain,
    _exact_cz_objective,
    _exact_single_objective,
    _unit_interval_rule,
)

CONVERGENCE_RTOL = 1e-10
CONVERGENCE_WINDOW = 50
MAX_ITERATIONS = 5000
FD_STEP = 1e-6
ARMIJO_SLOPE = 1e-4
INITIAL_STEP = 0.25
_DESCENT_QUADRATURE = 8


@dataclass(frozen=True)
class OptimizationResult:
    """Optimized profile plus bookkeeping.

    objective_kind is one of "second_order", "exact_single", "exact_cz".
    improvement_vs_linear is the relative reduction against the linear-ramp
    profile under the same objective (nan when n < 2, where no ramp exists).
    """

    profile: CoefficientProfile
    objective_value: float
    objective_kind: str
    iterations: int
    converged: bool
    improvement_vs_linear: float


def second_order_matrix(n: int) -> np.ndarray:
    """(n+1) x (n+1) second-difference matrix with closed boundaries.

    Its quadratic form against the coefficient vector equals
    sum_k (f(k) - f(k-1))^2 with zero padding at both ends.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    m = np.zeros((n + 1, n + 1))
    np.fill_diagonal(m, 2.0)
    idx = np.arange(n)
    m[idx, idx + 1] = -1.0
    m[idx + 1, idx] = -1.0
    return m


def _improvement(objective: Callable[[np.ndarray], float], n: int, best: float) -> float:
    if n < 2:
        return float("nan")
    ref = objective(profile_linear(n).as_array())
    return 1.0 - best / ref


def optimize_second_order(n: int) -> OptimizationResult:
    """Closed-form optimum of the quadratic objective via the ground state
    of the second-difference matrix. Exact up to the eigensolver; no
    iteration involved."""
    if n < 1:
        raise ValueError("n must be at least 1")
    diag = np.full(n + 1, 2.0)
    off = np.full(n, -1.0)
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    vec = vecs[:, 0]
    if vec.sum() < 0:
        vec = -vec
    profile = custom_profile(vec, label="optimized")
    objective = float(vals[0]) / 6.0
    return OptimizationResult(
        profile=profile,
        objective_value=objective,
        objective_kind="second_order",
        iterations=0,
        converged=True,
        improvement_vs_linear=_improvement(lambda v: _exact_single_objective(v), n, objective),
    )


def _project(v: np.ndarray) -> np.ndarray:
    v = np.clip(v, 0.0, None)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise RuntimeError("projection collapsed to the zero vector")
    return v / norm


def _fd_gradient(fun: Callable[[np.ndarray], float], v: np.ndarray) -> np.ndarray:
    g = np.empty_like(v)
    for i in range(v.size):
        step = np.zeros_like(v)
        step[i] = FD_STEP
        g[i] = (fun(v + step) - fun(v - step)) / (2.0 * FD_STEP)
    return g


def _projected_gradient_descent(
    fun: Callable[[np.ndarray], float],
    start: np.ndarray,
    max_iterations: int,
) -> tuple[np.ndarray, float, int, bool]:
    v = _project(start.astype(float))
    value = fun(v)
    history = [value]
    for it in range(1, max_iterations + 1):
        g = _fd_gradient(fun, v)
        t = INITIAL_STEP
        moved = False
        while t > 1e-14:
            cand = _project(v - t * g)
            cand_value = fun(cand)
            if cand_value <= value - ARMIJO_SLOPE * t * float(g @ g):
                v, value = cand, cand_value
                moved = True
                break
            t *= 0.5
        history.append(value)
        if len(history) > CONVERGENCE_WINDOW:
            past = history[-CONVERGENCE_WINDOW - 1]
            if past - value <= CONVERGENCE_RTOL * max(abs(past), 1e-30):
                return v, value, it, True
        if not moved:
            return v, value, it, True
    return v, value, max_iterations, False


def _starts(n: int, seed: int) -> list[np.ndarray]:
    starts = [profile_uniform(n).as_array(), profile_sine(n).as_array()]
    if n >= 2:
        starts.append(profile_linear(n).as_array())
    rng = np.random.default_rng(seed)
    base = profile_sine(n).as_array()
    for _ in range(2):
        starts.append(np.abs(base + 0.1 * rng.standard_normal(n + 1)))
    return starts


def optimize_exact(
    n: int,
    ensemble: InputEnsemble | None = None,
    *,
    kind: str = "single",
    seed: int = 0,
    max_iterations: int = MAX_ITERATIONS,
) -> OptimizationResult:
    """Minimize an exact average-error objective over unit-norm nonnegative
    coefficient vectors.

    kind "single" targets the one-teleportation uniform-weight error (whose
    optimum provably matches optimize_second_order; the descent serves as
    an independent check). kind "cz" targets the exact controlled-sign
    error with the same profile on both registers. Deterministic per seed.
    """
    if n < 2:
        raise ValueError("the descent path needs n >= 2")
    ens = ensemble if ensemble is not None else InputEnsemble.uniform_p0()
    if ens.kind != "uniform_p0":
        raise ValueError("only the uniform weight ensemble has an optimizer")
    if kind == "single":
        raw = _exact_single_objective
        descent = raw
        objective_kind = "exact_single"
    elif kind == "cz":
        order = ens.quadrature_order or DEFAULT_QUADRATURE_ORDER
        raw = lambda v: _exact_cz_objective(v, order)
        # the quadrature integrand is a degree-2 polynomial in the input
        # weight, so a low order rule is already exact; the descent uses it
        # and only the reported objective pays for the requested order
        descent = lambda v: _exact_cz_objective(v, min(order, _DESCENT_QUADRATURE))
        objective_kind = "exact_cz"
    else:
        raise ValueError(f"unknown objective kind {kind!r}")
    fun = lambda v: descent(v / np.linalg.norm(v))
    results = []
    for start in _starts(n, seed):
        v, value, iterations, converged = _projected_gradient_descent(
            fun, start, max_iterations
        )
        results.append((value, tuple(v), iterations, converged))
    value, v, iterations, converged = min(results, key=lambda r: (r[0], r[1]))
    arr = np.array(v)
    value = raw(arr / np.linalg.norm(arr))
    profile = custom_profile(arr, label="optimized")
    return OptimizationResult(
        profile=profile,
        objective_value=value,
        objective_kind=objective_kind,
        iterations=iterations,
        converged=converged,
        improvement_vs_linear=_improvement(raw, n, value),
    )


def optimize_cz_independent_registers(
    n: int,
    *,
    seed: int = 0,
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER,
    max_iterations: int = MAX_ITERATIONS,
) -> tuple[OptimizationResult, CoefficientProfile]:
    """Diagnostic: let the two controlled-sign registers carry independent
    profiles instead of one shared f.

    The exact error 1 - g(f) g(f') separates, so the joint optimum is the
    shared one; this run exists to confirm that numerically, not to find
    anything new. Returns the result for the first register's profile plus
    the second profile.
    """
    if n < 2:
        raise ValueError("the descent path needs n >= 2")
    nodes, weights = _unit_interval_rule(min(quadrature_order, _DESCENT_QUADRATURE))
    full_nodes, full_weights = _unit_interval_rule(quadrature_order)

    def joint(w: np.ndarray, rule=(nodes, weights)) -> float:
        v, v2 = w[: n + 1], w[n + 1 :]
        v = v / np.linalg.norm(v)
        v2 = v2 / np.linalg.norm(v2)
        return 1.0 - _cz_branch_gain(v, *rule) * _cz_branch_gain(v2, *rule)

    results = []
    for start in _starts(n, seed):
        w0 = np.concatenate([start, start])
        w, value, iterations, converged = _projected_gradient_descent(
            joint, w0, max_iterations
        )
        results.append((value, tuple(w), iterations, converged))
    value, w, iterations, converged = min(results, key=lambda r: (r[0], r[1]))
    w = np.array(w)
    value = joint(w, rule=(full_nodes, full_weights))
    profile = custom_profile(w[: n + 1] / np.linalg.norm(w[: n + 1]), label="optimized")
    profile2 = custom_profile(w[n + 1 :] / np.linalg.norm(w[n + 1 :]), label="optimized")
    shared = lambda v: _exact_cz_objective(v, quadrature_order)
    result = OptimizationResult(
        profile=profile,
        objective_value=value,
        objective_kind="exact_cz",
        iterations=iterations,
        converged=converged,
        improvement_vs_linear=_improvement(shared, n, value),
    )
    return result, profile2
