"""Gate error rates: exact branch-wise averages and their small-error limits.

For a fixed input with weights (P0, P1) and profile f, branch k succeeds
with fidelity F_k = (P0 f(k) + P1 f(k-1))^2 / Pr(k) where
Pr(k) = P0 f(k)^2 + P1 f(k-1)^2, so its error contribution is exactly
Pr(k) - (P0 f(k) + P1 f(k-1))^2 = P0 P1 (f(k) - f(k-1))^2 and the total
error at fixed input is 2 P0 P1 sum_k (f(k) - f(k-1))^2 / 2 ... written
out: E(P0) = P0 (1 - P0) sum_k (f(k) - f(k-1))^2 with f(-1) = f(n+1) = 0.
Averaging P0 uniformly over [0, 1] gives the factor 1/6, which is why the
exact ensemble average and the quadratic (small-error) form coincide for
this gate. Both are computed independently here; their agreement is a
consistency check, not an assumption.

The two-qubit controlled-sign average does not collapse the same way:
the joint fidelity multiplies across registers while the error does not
add, so the exact average is evaluated by quadrature over the input
weight (Gauss-Legendre, exact for the polynomial integrand) and the
additive two-teleportation estimate is kept as the comparison value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .ancilla import CoefficientProfile
from .protocol import QubitAmplitudes

DEFAULT_QUADRATURE_ORDER = 64


def _p0_of(q: "QubitAmplitudes | float") -> float:
    """Accept a full amplitude pair or the bare |0> weight; the error
    formulas depend on nothing else."""
    p0 = q.p0 if isinstance(q, QubitAmplitudes) else float(q)
    if not 0.0 <= p0 <= 1.0:
        raise ValueError("p0 must lie in [0, 1]")
    return p0


@dataclass(frozen=True)
class InputEnsemble:
    """Input distribution an error rate is averaged over.

    kind "uniform_p0" draws the |0> weight uniformly from [0, 1] (phases
    never enter the error, so this stands in for any phase ensemble with
    uniform weight). kind "fixed" holds one (P0, P1). kind "basis_pair"
    means both qubit inputs are basis states, for which every branch is
    error free.
    """

    kind: str
    p0: float | None = None
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER

    def __post_init__(self) -> None:
        if self.kind not in ("uniform_p0", "fixed", "basis_pair"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.kind == "fixed":
            if self.p0 is None or not 0.0 <= self.p0 <= 1.0:
                raise ValueError("fixed ensembles need p0 in [0, 1]")
        if self.quadrature_order < 2:
            raise ValueError("quadrature order must be at least 2")

    @classmethod
    def uniform_p0(cls, order: int = DEFAULT_QUADRATURE_ORDER) -> "InputEnsemble":
        return cls("uniform_p0", quadrature_order=order)

    @classmethod
    def fixed(cls, q: "QubitAmplitudes | float") -> "InputEnsemble":
        return cls("fixed", p0=_p0_of(q))

    @classmethod
    def basis_pair(cls) -> "InputEnsemble":
        return cls("basis_pair")


def _padded(profile: CoefficientProfile) -> tuple[np.ndarray, np.ndarray]:
    """(f(k), f(k-1)) sampled over k = 0 .. n+1 as aligned arrays."""
    v = profile.as_array()
    fk = np.concatenate([v, [0.0]])
    fkm = np.concatenate([[0.0], v])
    return fk, fkm


def success_probability_exact(
    q: QubitAmplitudes | float, profile: CoefficientProfile, k: int
) -> float:
    """Fidelity of branch k for a fixed input (amplitude pair or |0> weight)."""
    p0 = _p0_of(q)
    fk = profile.f(k)
    fkm = profile.f(k - 1)
    pr = p0 * fk * fk + (1.0 - p0) * fkm * fkm
    if pr <= 0.0:
        raise ValueError(f"branch k={k} has zero probability for this input")
    return (p0 * fk + (1.0 - p0) * fkm) ** 2 / pr


def success_probability_second_order(
    q: QubitAmplitudes | float, profile: CoefficientProfile, k: int
) -> float:
    """Small-error form 1 - P0 P1 eps^2 with eps = (f(k) - f(k-1)) / f(k).

    Falls back to the exact value when f(k) vanishes, where the expansion
    around it is meaningless.
    """
    p0 = _p0_of(q)
    fk = profile.f(k)
    fkm = profile.f(k - 1)
    if fk == 0.0:
        return success_probability_exact(p0, profile, k)
    eps = (fk - fkm) / fk
    return 1.0 - p0 * (1.0 - p0) * eps * eps


def outcome_distribution(
    q: QubitAmplitudes | float, profile: CoefficientProfile
) -> list[tuple[int, float]]:
    """(k, Pr(k)) for every branch k = 0 .. n+1; probabilities sum to one."""
    p0 = _p0_of(q)
    fk, fkm = _padded(profile)
    pr = p0 * fk**2 + (1.0 - p0) * fkm**2
    return [(k, float(pr[k])) for k in range(profile.n + 2)]


def _difference_sum(values: np.ndarray) -> float:
    """sum_k (f(k) - f(k-1))^2 over k = 0 .. n+1 with zero padding."""
    fk = np.concatenate([values, [0.0]])
    fkm = np.concatenate([[0.0], values])
    d = fk - fkm
    return float(d @ d)


def _error_at_p0(p0: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Exact fixed-input error P0 P1 sum_k (f(k) - f(k-1))^2, vectorized."""
    return p0 * (1.0 - p0) * _difference_sum(values)


@lru_cache(maxsize=32)
def _unit_interval_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(order)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def average_error_exact(profile: CoefficientProfile, ensemble: InputEnsemble) -> float:
    """Ensemble-averaged teleportation error, exact branch arithmetic."""
    if ensemble.kind == "basis_pair":
        return 0.0
    if ensemble.kind == "fixed":
        return float(_error_at_p0(np.array([ensemble.p0]), profile.as_array())[0])
    nodes, weights = _unit_interval_rule(ensemble.quadrature_order)
    return float(weights @ _error_at_p0(nodes, profile.as_array()))


def average_error_second_order(profile: CoefficientProfile) -> float:
    """Quadratic error form (1/6) sum_k (f(k) - f(k-1))^2 for the uniform
    weight ensemble."""
    return _difference_sum(profile.as_array()) / 6.0


def _exact_single_objective(values: np.ndarray) -> float:
    """Uniform-weight average error as a function of raw profile values."""
    return _difference_sum(values) / 6.0


def _cz_branch_gain(values: np.ndarray, nodes: np.ndarray, weights: np.ndarray) -> float:
    """g(f) = int_0^1 sum_k (P0 f(k) + P1 f(k-1))^2 dP0 for one register."""
    fk = np.concatenate([values, [0.0]])
    fkm = np.concatenate([[0.0], values])
    p0 = nodes[:, None]
    terms = (p0 * fk[None, :] + (1.0 - p0) * fkm[None, :]) ** 2
    return float(weights @ terms.sum(axis=1))


def cz_average_error_exact(
    p: CoefficientProfile,
    p2: CoefficientProfile,
    *,
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER,
) -> float:
    """Exact controlled-sign error averaged over independent uniform input
    weights on both qubits: 1 - g(f) g(f'), with g the per-register average
    branch fidelity mass. The joint branch probability factorizes and the
    joint fidelity multiplies, so the double sum collapses to a product.
    """
    nodes, weights = _unit_interval_rule(quadrature_order)
    g1 = _cz_branch_gain(p.as_array(), nodes, weights)
    g2 = _cz_branch_gain(p2.as_array(), nodes, weights)
    return 1.0 - g1 * g2


def _exact_cz_objective(values: np.ndarray, order: int = DEFAULT_QUADRATURE_ORDER) -> float:
    """Controlled-sign exact average error with the same profile on both
    registers, as a function of raw values."""
    nodes, weights = _unit_interval_rule(order)
    g = _cz_branch_gain(values, nodes, weights)
    return 1.0 - g * g


def klm_failure_probability(n: int) -> float:
    """Failure rate of the discard-the-degenerate-branches strategy with the
    uniform profile: exactly 1 / (n + 1)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return 1.0 / (n + 1)


def continuum_error(profile_label: str, n: int) -> float:
    """Large-n closed forms for the uniform-weight teleportation error.

    linear: 2 / n^2. sine: pi^2 / (6 n^2). uniform: 1 / (3 (n + 1)),
    which is exact at every n, not just asymptotically. Other labels have
    no closed form here and give nan.
    """
    if profile_label == "linear":
        return 2.0 / n**2
    if profile_label == "sine":
        return math.pi**2 / (6.0 * n**2)
    if profile_label == "uniform":
        return 1.0 / (3.0 * (n + 1))
    return float("nan")


@dataclass(frozen=True)
class ErrorReport:
    """Error figures for one profile at one n.

    scaled is n^2 * exact_error, the natural yardstick for the profiles
    whose error falls off quadratically.
    """

    n: int
    profile_label: str
    exact_error: float
    second_order_error: float
    continuum_error: float
    klm_failure: float
    scaled: float


def build_error_report(
    profile: CoefficientProfile,
    ensemble: InputEnsemble | None = None,
) -> ErrorReport:
    ens = ensemble if ensemble is not None else InputEnsemble.uniform_p0()
    exact = average_error_exact(profile, ens)
    return ErrorReport(
        n=profile.n,
        profile_label=profile.label,
        exact_error=exact,
        second_order_error=average_error_second_order(profile),
        continuum_error=continuum_error(profile.label, profile.n),
        klm_failure=klm_failure_probability(profile.n),
        scaled=profile.n**2 * exact,
    )
