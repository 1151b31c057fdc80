"""Built-in consistency checks pitting the simulator against closed forms.

Each check compares a quantity computed by full Fock-space enumeration
against an independent analytic prediction and reports the worst deviation
seen. They back the command line's oracle-check subcommand and double as
the regression net for the protocol layer: a sign slip in the ancilla, a
misplaced output mode, or a broken compensation phase trips at least one
of them at n as small as 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ancilla import profile_linear, profile_sine, profile_uniform
from .fidelity import klm_failure_probability
from .fock import FockState, apply_mode_unitary, cyclic_shift, dft_unitary, max_amplitude_difference, phase_shift
from .protocol import (
    QubitAmplitudes,
    cz_gate,
    klm_summary,
    output_fidelity_sq,
    teleport_enumerate,
    two_qubit_fidelity_sq,
)

DEFAULT_CHECK_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_deviation: float
    tolerance: float
    passed: bool
    detail: str


def _result(name: str, dev: float, detail: str, tol: float = DEFAULT_CHECK_TOLERANCE) -> CheckResult:
    return CheckResult(name, dev, tol, dev <= tol, detail)


def seeded_qubits(seed: int, count: int) -> list[QubitAmplitudes]:
    """Reproducible generic qubit inputs (complex Gaussian, normalized)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        raw = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        out.append(QubitAmplitudes.normalized(complex(raw[0]), complex(raw[1])))
    return out


def _profiles(n: int):
    ps = [profile_uniform(n), profile_sine(n)]
    if n >= 2:
        ps.append(profile_linear(n))
    return ps


def check_teleport_branch_outputs(seed: int = 7, max_n: int = 4) -> CheckResult:
    """Every branch output must match (a0 f(k), a1 f(k-1)) normalized, up to
    a branch-global phase (checked via squared overlap)."""
    worst = 0.0
    cases = 0
    for n in range(1, max_n + 1):
        for profile in _profiles(n):
            for q in seeded_qubits(seed + n, 2):
                for o in teleport_enumerate(q, profile):
                    a0 = q.a0 * profile.f(o.k)
                    a1 = q.a1 * profile.f(o.k - 1)
                    ideal = QubitAmplitudes.normalized(a0, a1)
                    worst = max(worst, abs(1.0 - output_fidelity_sq(ideal, o.output)))
                    cases += 1
    return _result("teleport_branch_outputs", worst, f"{cases} branches, n <= {max_n}")


def check_teleport_branch_probabilities(seed: int = 7, max_n: int = 4) -> CheckResult:
    """Branch probabilities must equal P0 f(k)^2 + P1 f(k-1)^2 and sum to 1."""
    worst = 0.0
    cases = 0
    for n in range(1, max_n + 1):
        for profile in _profiles(n):
            for q in seeded_qubits(seed + 13 * n, 2):
                outcomes = teleport_enumerate(q, profile)
                total = math.fsum(o.probability for o in outcomes)
                worst = max(worst, abs(total - 1.0))
                by_k: dict[int, float] = {}
                for o in outcomes:
                    by_k[o.k] = by_k.get(o.k, 0.0) + o.probability
                for k, pr in by_k.items():
                    expect = q.p0 * profile.f(k) ** 2 + q.p1 * profile.f(k - 1) ** 2
                    worst = max(worst, abs(pr - expect))
                    cases += 1
    return _result("teleport_branch_probabilities", worst, f"{cases} (k, input) cells")


def check_dft_translation_property(max_n: int = 5) -> CheckResult:
    """Mixing after a one-mode cyclic translation must equal mixing first and
    phasing each mode l by 2 pi l / m afterwards. The identity is exact,
    with no leftover global phase, for the e^{+2 pi i p l / m} kernel."""
    worst = 0.0
    rng = np.random.default_rng(11)
    for m in range(2, max_n + 2):
        u = dft_unitary(m)
        amps = {}
        for _ in range(4):
            occ = tuple(int(x) for x in rng.integers(0, 2, size=m))
            amps[occ] = complex(rng.standard_normal(), rng.standard_normal())
        state = FockState(m, amps).normalized()
        lhs = apply_mode_unitary(cyclic_shift(state, range(m)), u, range(m))
        rhs = apply_mode_unitary(state, u, range(m))
        for l in range(m):
            rhs = phase_shift(rhs, l, 2.0 * math.pi * l / m)
        worst = max(worst, max_amplitude_difference(lhs, rhs, up_to_global_phase=False))
    return _result("dft_translation_property", worst, f"register sizes 2 .. {max_n + 1}")


def check_cz_parity_corrected_outputs(seed: int = 5, max_n: int = 3) -> CheckResult:
    """Every corrected controlled-sign branch must reach the ideal two-qubit
    output reweighted by the profile factors, up to a global phase."""
    worst = 0.0
    cases = 0
    for n in range(2, max_n + 1):
        for p in (profile_sine(n), profile_linear(n)):
            for q, q2 in zip(seeded_qubits(seed + n, 2), seeded_qubits(seed + 50 + n, 2)):
                for o in cz_gate(q, q2, p, p):
                    f = [p.f(o.k), p.f(o.k - 1)]
                    f2 = [p.f(o.k2), p.f(o.k2 - 1)]
                    raw = [
                        q.a0 * q2.a0 * f[0] * f2[0],
                        q.a0 * q2.a1 * f[0] * f2[1],
                        q.a1 * q2.a0 * f[1] * f2[0],
                        -q.a1 * q2.a1 * f[1] * f2[1],
                    ]
                    norm = math.sqrt(math.fsum(abs(a) ** 2 for a in raw))
                    ideal = [a / norm for a in raw]
                    worst = max(worst, abs(1.0 - two_qubit_fidelity_sq(ideal, o.output)))
                    cases += 1
    return _result("cz_parity_corrected_outputs", worst, f"{cases} joint branches")


def check_cz_precorrection_signs(max_n: int = 3) -> CheckResult:
    """With corrections disabled and basis-diagonal real inputs, the raw
    branch amplitudes must show the relative sign pattern
    (+, (-1)^k, (-1)^k', (-1)^(k + k' + 1)) on (00, 01, 10, 11)."""
    worst = 0.0
    q = QubitAmplitudes.normalized(1.0, 1.0)
    for n in range(2, max_n + 1):
        p = profile_sine(n)
        for o in cz_gate(q, q, p, p, parity_corrections=False):
            signs = [1.0, (-1.0) ** o.k, (-1.0) ** o.k2, (-1.0) ** (o.k + o.k2 + 1)]
            f = [p.f(o.k), p.f(o.k - 1)]
            f2 = [p.f(o.k2), p.f(o.k2 - 1)]
            raw = [
                0.5 * signs[0] * f[0] * f2[0],
                0.5 * signs[1] * f[0] * f2[1],
                0.5 * signs[2] * f[1] * f2[0],
                0.5 * signs[3] * f[1] * f2[1],
            ]
            norm = math.sqrt(math.fsum(a * a for a in raw))
            if norm == 0.0:
                continue
            ideal = [a / norm for a in raw]
            worst = max(worst, abs(1.0 - two_qubit_fidelity_sq(ideal, o.output)))
    return _result("cz_precorrection_signs", worst, "basis-diagonal probe input")


def check_cz_truth_table(max_n: int = 3) -> CheckResult:
    """The assembled basis-input action must be diag(1, 1, 1, -1) branch by
    branch.

    A single basis input cannot expose the sign (each branch output is
    normalized and carries a free global phase), so the check reconstructs
    the un-normalized projected amplitude output * sqrt(probability) for
    all four basis inputs on each joint measurement pattern, divides out
    the known profile factors, and requires the four entries to sit at one
    common complex scale times (1, 1, 1, -1) exactly.
    """
    worst = 0.0
    basis = [QubitAmplitudes(1.0, 0.0), QubitAmplitudes(0.0, 1.0)]
    for n in range(2, max_n + 1):
        for p in (profile_uniform(n), profile_sine(n)):
            assembled: dict[tuple, list[complex]] = {}
            for o_in, q in enumerate(basis):
                for o2_in, q2 in enumerate(basis):
                    for o in cz_gate(q, q2, p, p):
                        if o.degenerate[0] or o.degenerate[1]:
                            continue
                        weight = p.f(o.k - o_in) * p.f(o.k2 - o2_in)
                        if weight == 0.0:
                            continue
                        key = (o.pattern, o.pattern2)
                        cell = assembled.setdefault(key, [0j, 0j, 0j, 0j])
                        raw = o.output[2 * o_in + o2_in] * math.sqrt(o.probability)
                        cell[2 * o_in + o2_in] = raw / weight
            for cell in assembled.values():
                ref = cell[0]
                if ref == 0:
                    continue
                target = (1.0, 1.0, 1.0, -1.0)
                for i in range(4):
                    worst = max(worst, abs(cell[i] / ref - target[i]))
    return _result("cz_truth_table", worst, "assembled action on joint patterns")


def check_klm_conditional_fidelity(seed: int = 3, max_n: int = 4) -> CheckResult:
    """Uniform profile, degenerate branches discarded: the kept branches are
    error free and the discard rate is exactly 1 / (n + 1)."""
    worst = 0.0
    for n in range(1, max_n + 1):
        profile = profile_uniform(n)
        for q in seeded_qubits(seed + 17 * n, 2):
            summary = klm_summary(q, teleport_enumerate(q, profile))
            worst = max(worst, abs(summary.conditional_error))
            worst = max(
                worst,
                abs((1.0 - summary.success_probability) - klm_failure_probability(n)),
            )
    return _result("klm_conditional_fidelity", worst, f"uniform profiles, n <= {max_n}")


ALL_CHECKS = (
    check_teleport_branch_outputs,
    check_teleport_branch_probabilities,
    check_dft_translation_property,
    check_cz_parity_corrected_outputs,
    check_cz_precorrection_signs,
    check_cz_truth_table,
    check_klm_conditional_fidelity,
)


def run_all(seed: int = 7, max_n: int = 4) -> list[CheckResult]:
    """Run every check; seed feeds the randomized inputs, max_n bounds the
    single-qubit sweeps (two-qubit checks stay at n <= 3 for speed)."""
    results = []
    for fn in ALL_CHECKS:
        if fn is check_dft_translation_property:
            results.append(fn(max_n=max_n))
        elif fn in (check_cz_parity_corrected_outputs,):
            results.append(fn(seed=seed, max_n=min(max_n, 3)))
        elif fn in (check_cz_precorrection_signs, check_cz_truth_table):
            results.append(fn(max_n=min(max_n, 3)))
        else:
            results.append(fn(seed=seed, max_n=max_n))
    return results
