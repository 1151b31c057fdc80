"""Teleportation-based gate protocols by exhaustive branch enumeration.

Mode layout. The qubit to be teleported occupies mode 0 as a 0/1 photon
occupation. The ancilla's x register sits on modes 1..n and its y register
on modes n+1..2n; for two-qubit gates the second qubit and its primed
registers are appended in the same order (q' on mode 2n+1, x' and y'
after). The measured register is always mode 0..n per qubit (the input
mode plus its x register), mixed by the discrete-Fourier mode unitary
before counting photons.

Branch anatomy. A measurement pattern r with k photons total leaves two
surviving ancilla terms, j = k (input 0) and j = k-1 (input 1), whose y
patterns differ only at register position k-1 (mode n+k). That mode holds
the output qubit; the other y modes carry a shared basis pattern, the
residual. k = 0 and k = n+1 are degenerate: only one term survives and the
output is pinned to |0> or |1> with certainty.

Phase convention. Translating the measured register's input one mode
rightward before the Fourier mixer equals applying, after it, a phase of
2 pi l / m per photon in mode l. Hence the input-0 term (the translate of
the input-1 term) carries an extra branch phase prod_l exp(2 pi i l r_l /
m) relative to the input-1 term. phase_correction returns the conjugate of
that phase; the enumerators multiply the empty-output-mode component by
it, which equals the physical fix (a phase shifter on the occupied output
mode) up to a global phase. Branch outputs therefore match the ideal
teleported amplitudes up to one global phase per branch, and outputs are
reported without any additional phase canonicalization so that
output * sqrt(probability) reconstructs the projected amplitudes.

The controlled-sign gate runs two teleportations off the signed ancilla
and then applies the parity-conditioned sign flips (cz_sign_corrections)
to the extracted two-qubit amplitudes. The direct-CNOT construction is
enumerated the same way but makes no correctness claim: its branches are
reported with the reduced density matrix and purity of the output modes,
since the output there generally stays entangled with the leftover y'
modes and a pure amplitude pair does not exist.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ancilla import CoefficientProfile, cnot_ancilla_state, cz_ancilla_state, single_ancilla_state
from .fock import (
    DEFAULT_BASIS_CAP,
    DensityMatrix,
    FockState,
    Occupation,
    apply_mode_unitary,
    dft_unitary,
    measure_photon_numbers,
    permute_modes,
    reduced_density_matrix,
    tensor,
)

RESIDUAL_ATOL = 1e-9

SIGN_FLIP_Q = "sign_flip_q"
SIGN_FLIP_Q2 = "sign_flip_q2"


class ResidualFactorizationError(RuntimeError):
    """The leftover modes of a branch failed to carry a single basis pattern.

    This cannot happen for the teleportation and controlled-sign ancillas;
    seeing it signals an internal protocol error, not a physical outcome.
    """


@dataclass(frozen=True)
class QubitAmplitudes:
    """Dual-rail qubit amplitudes (a0, a1), normalized within 1e-12."""

    a0: complex
    a1: complex

    def __post_init__(self) -> None:
        a0 = complex(self.a0)
        a1 = complex(self.a1)
        norm_sq = abs(a0) ** 2 + abs(a1) ** 2
        if abs(norm_sq - 1.0) > 1e-12:
            raise ValueError(f"qubit amplitudes are not normalized (norm^2 = {norm_sq:.15g})")
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "a1", a1)

    @classmethod
    def normalized(cls, a0: complex, a1: complex) -> "QubitAmplitudes":
        norm = math.sqrt(abs(a0) ** 2 + abs(a1) ** 2)
        if norm == 0:
            raise ValueError("cannot normalize a zero amplitude pair")
        return cls(a0 / norm, a1 / norm)

    @property
    def p0(self) -> float:
        return abs(self.a0) ** 2

    @property
    def p1(self) -> float:
        return abs(self.a1) ** 2


def output_fidelity_sq(q: QubitAmplitudes, out: QubitAmplitudes) -> float:
    """Squared overlap between the intended qubit and a branch output."""
    return abs(q.a0.conjugate() * out.a0 + q.a1.conjugate() * out.a1) ** 2


def phase_correction(pattern: Sequence[int], m: int) -> complex:
    """Compensating phase for a measurement pattern on the m-mode register.

    The branch phase picked up by the translated component is
    prod_l exp(2 pi i l r_l / m); the conjugate returned here undoes it.
    """
    if m < 1:
        raise ValueError("the register needs at least one mode")
    pattern = tuple(int(r) for r in pattern)
    if len(pattern) != m:
        raise ValueError(f"pattern has {len(pattern)} entries, expected {m}")
    if pattern and min(pattern) < 0:
        raise ValueError("photon counts must be nonnegative")
    angle = 2.0 * math.pi * sum(l * r for l, r in enumerate(pattern)) / m
    return cmath.exp(-1j * angle)


@dataclass(frozen=True)
class TeleportOutcome:
    """One enumerated measurement branch of the teleportation protocol."""

    pattern: Occupation
    k: int
    degenerate: bool
    correction_phase: complex
    output: QubitAmplitudes
    probability: float
    residual: FockState


def _qubit_state(q: QubitAmplitudes) -> FockState:
    return FockState(1, {(0,): q.a0, (1,): q.a1})


def _extract_sectors(
    post: FockState,
    out_positions: Sequence[int],
    fixed_sectors: Sequence[int | None],
) -> tuple[dict[tuple[int, ...], complex], Occupation]:
    """Split a post-measurement state into output-mode sectors.

    out_positions lists the output modes actually present in ``post`` (one
    entry per non-degenerate register); fixed_sectors supplies, per
    register, None when the sector is read from a mode and the pinned 0/1
    value when the register was degenerate. Returns the sector amplitude
    map keyed by the full per-register sector tuple, plus the single shared
    pattern on the remaining modes. Raises ResidualFactorizationError when
    more than RESIDUAL_ATOL of amplitude sits outside one shared pattern.
    """
    live = [i for i in range(post.mode_count) if i not in set(out_positions)]
    grouped: dict[Occupation, dict[tuple[int, ...], complex]] = {}
    masses: dict[Occupation, float] = {}
    for occ, amp in post.amplitudes.items():
        sector: list[int] = []
        mode_iter = iter(out_positions)
        for fixed in fixed_sectors:
            if fixed is None:
                value = occ[next(mode_iter)]
                if value not in (0, 1):
                    raise ResidualFactorizationError(
                        f"output mode holds {value} photons in pattern {occ}"
                    )
                sector.append(value)
            else:
                sector.append(fixed)
        rest = tuple(occ[i] for i in live)
        grouped.setdefault(rest, {})[tuple(sector)] = amp
        masses[rest] = masses.get(rest, 0.0) + abs(amp) ** 2
    shared = max(masses, key=masses.get)
    cross = math.fsum(v for k, v in masses.items() if k != shared)
    if math.sqrt(cross) > RESIDUAL_ATOL:
        raise ResidualFactorizationError(
            f"residual modes fail to factor (stray amplitude {math.sqrt(cross):.3e})"
        )
    return grouped[shared], shared


def teleport_enumerate(
    q: QubitAmplitudes,
    profile: CoefficientProfile,
    *,
    basis_cap: int = DEFAULT_BASIS_CAP,
) -> list[TeleportOutcome]:
    """Enumerate every measurement branch of one teleportation.

    Branches are ordered lexicographically by measurement pattern and their
    probabilities sum to one. Each output already includes the compensating
    phase, so it matches the ideal teleported amplitudes
    (a0 f(k), a1 f(k-1)) / norm up to a branch-global phase.
    """
    n = profile.n
    joint = tensor(_qubit_state(q), single_ancilla_state(profile), basis_cap=basis_cap)
    mixed = apply_mode_unitary(joint, dft_unitary(n + 1), range(n + 1), basis_cap=basis_cap)
    outcomes: list[TeleportOutcome] = []
    for m in measure_photon_numbers(mixed, range(n + 1)):
        k = sum(m.pattern)
        comp = phase_correction(m.pattern, n + 1)
        degenerate = k == 0 or k == n + 1
        if degenerate:
            output = QubitAmplitudes(1.0, 0.0) if k == 0 else QubitAmplitudes(0.0, 1.0)
            residual = m.post_state
        else:
            sectors, rest = _extract_sectors(m.post_state, [k - 1], [None])
            a0 = sectors.get((0,), 0j) * comp
            a1 = sectors.get((1,), 0j)
            output = QubitAmplitudes.normalized(a0, a1)
            residual = FockState(len(rest), {rest: 1.0 + 0j})
        outcomes.append(
            TeleportOutcome(m.pattern, k, degenerate, comp, output, m.probability, residual)
        )
    return outcomes


def teleport_sample(
    q: QubitAmplitudes,
    profile: CoefficientProfile,
    seed: int,
    *,
    shots: int = 1,
    basis_cap: int = DEFAULT_BASIS_CAP,
) -> TeleportOutcome | list[TeleportOutcome]:
    """Draw branches at their exact probabilities (deterministic per seed).

    shots = 1 returns a single outcome; larger values return a list drawn
    from one enumeration, which keeps large-sample statistics cheap.
    """
    outcomes = teleport_enumerate(q, profile, basis_cap=basis_cap)
    probs = np.array([o.probability for o in outcomes])
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(outcomes), size=shots, p=probs)
    if shots == 1:
        return outcomes[int(picks[0])]
    return [outcomes[int(i)] for i in picks]


@dataclass(frozen=True)
class KlmSummary:
    """Post-selected figures for the discard-the-degenerate-branches mode."""

    success_probability: float
    conditional_error: float


def klm_summary(q: QubitAmplitudes, outcomes: Sequence[TeleportOutcome]) -> KlmSummary:
    """Success rate and conditional infidelity when k = 0 and k = n+1 are
    discarded instead of accepted."""
    accepted = [o for o in outcomes if not o.degenerate]
    success = math.fsum(o.probability for o in accepted)
    if success == 0.0:
        return KlmSummary(0.0, float("nan"))
    err = math.fsum(
        o.probability * (1.0 - output_fidelity_sq(q, o.output)) for o in accepted
    )
    return KlmSummary(success, err / success)


def cz_sign_corrections(k: int, k2: int) -> frozenset[str]:
    """Measurement-conditioned sign flips that restore the controlled-sign
    action: even/even needs none, even/odd flips the first qubit's |1>
    components, odd/even flips the second's, odd/odd flips both."""
    if k < 0 or k2 < 0:
        raise ValueError("photon totals must be nonnegative")
    flips: set[str] = set()
    if k % 2 == 0 and k2 % 2 == 1:
        flips.add(SIGN_FLIP_Q)
    elif k % 2 == 1 and k2 % 2 == 0:
        flips.add(SIGN_FLIP_Q2)
    elif k % 2 == 1 and k2 % 2 == 1:
        flips.update((SIGN_FLIP_Q, SIGN_FLIP_Q2))
    return frozenset(flips)


@dataclass(frozen=True)
class GateOutcome:
    """One enumerated joint branch of the two-qubit controlled-sign gate.

    output holds the two-qubit amplitudes in basis order 00, 01, 10, 11,
    normalized but not phase-canonicalized. degenerate flags each register;
    purity (of the reduced output-mode state) is filled only when requested.
    """

    pattern: Occupation
    pattern2: Occupation
    k: int
    k2: int
    degenerate: tuple[bool, bool]
    applied_corrections: frozenset[str]
    output: tuple[complex, complex, complex, complex]
    probability: float
    residuals: tuple[FockState, FockState]
    purity: float | None = None


def ideal_cz_output(q: QubitAmplitudes, q2: QubitAmplitudes) -> tuple[complex, ...]:
    """Two-qubit amplitudes after the ideal controlled sign flip."""
    return (q.a0 * q2.a0, q.a0 * q2.a1, q.a1 * q2.a0, -q.a1 * q2.a1)


def two_qubit_fidelity_sq(ideal: Sequence[complex], out: Sequence[complex]) -> float:
    return abs(sum(i.conjugate() * o for i, o in zip(ideal, out))) ** 2


def _two_qubit_layout(n: int) -> list[int]:
    # tensor order is [q, q', x, y, x', y']; reorder to [q, x, y, q', x', y']
    return (
        [0]
        + list(range(2, 2 + n))
        + list(range(2 + n, 2 + 2 * n))
        + [1]
        + list(range(2 + 2 * n, 2 + 3 * n))
        + list(range(2 + 3 * n, 2 + 4 * n))
    )


def _run_two_qubit_protocol(
    q: QubitAmplitudes,
    q2: QubitAmplitudes,
    ancilla: FockState,
    n: int,
    *,
    basis_cap: int,
):
    """Shared plumbing: build, mix both measured registers, and enumerate.

    Yields (measurement, pattern, pattern2, k, k2, post_state) with the
    post state living on the 2n leftover modes, y first then y'.
    """
    joint = tensor(tensor(_qubit_state(q), _qubit_state(q2)), ancilla, basis_cap=basis_cap)
    joint = permute_modes(joint, _two_qubit_layout(n))
    mixer = dft_unitary(n + 1)
    mixed = apply_mode_unitary(joint, mixer, range(n + 1), basis_cap=basis_cap)
    mixed = apply_mode_unitary(
        mixed, mixer, range(2 * n + 1, 3 * n + 2), basis_cap=basis_cap
    )
    measured = list(range(n + 1)) + list(range(2 * n + 1, 3 * n + 2))
    for m in measure_photon_numbers(mixed, measured):
        r = m.pattern[: n + 1]
        r2 = m.pattern[n + 1 :]
        yield m, r, r2, sum(r), sum(r2), m.post_state


def _output_positions(n: int, k: int, k2: int) -> tuple[list[int], list[int | None]]:
    """Output-mode positions inside the leftover [y, y'] register and the
    per-register fixed sector values for degenerate photon totals."""
    positions: list[int] = []
    fixed: list[int | None] = []
    if 1 <= k <= n:
        positions.append(k - 1)
        fixed.append(None)
    else:
        fixed.append(0 if k == 0 else 1)
    if 1 <= k2 <= n:
        positions.append(n + (k2 - 1))
        fixed.append(None)
    else:
        fixed.append(0 if k2 == 0 else 1)
    return positions, fixed


def cz_gate(
    q: QubitAmplitudes,
    q2: QubitAmplitudes,
    p: CoefficientProfile,
    p2: CoefficientProfile,
    *,
    parity_corrections: bool = True,
    compute_purity: bool = False,
    basis_cap: int = DEFAULT_BASIS_CAP,
) -> list[GateOutcome]:
    """Enumerate the teleported controlled-sign gate branch by branch.

    With parity_corrections on (the default), every branch output matches
    the ideal controlled-sign amplitudes weighted by the profile factors
    f(k - value) f(k' - value') up to one global phase. Turning it off
    exposes the raw post-compensation sign pattern for diagnostics.
    """
    if p.n != p2.n:
        raise ValueError("both profiles must share the same n")
    n = p.n
    ancilla = cz_ancilla_state(p, p2)
    outcomes: list[GateOutcome] = []
    for m, r, r2, k, k2, post in _run_two_qubit_protocol(
        q, q2, ancilla, n, basis_cap=basis_cap
    ):
        comp = phase_correction(r, n + 1)
        comp2 = phase_correction(r2, n + 1)
        positions, fixed = _output_positions(n, k, k2)
        sectors, rest = _extract_sectors(post, positions, fixed)
        amps = [0j, 0j, 0j, 0j]
        for (o, o2), amp in sectors.items():
            if o == 0:
                amp *= comp
            if o2 == 0:
                amp *= comp2
            amps[2 * o + o2] = amp
        corrections = cz_sign_corrections(k, k2) if parity_corrections else frozenset()
        if SIGN_FLIP_Q in corrections:
            amps[2] = -amps[2]
            amps[3] = -amps[3]
        if SIGN_FLIP_Q2 in corrections:
            amps[1] = -amps[1]
            amps[3] = -amps[3]
        norm = math.sqrt(math.fsum(abs(a) ** 2 for a in amps))
        output = tuple(a / norm for a in amps)
        y_rest_count = n - (1 if 1 <= k <= n else 0)
        residuals = (
            FockState(y_rest_count, {rest[:y_rest_count]: 1.0 + 0j}),
            FockState(len(rest) - y_rest_count, {rest[y_rest_count:]: 1.0 + 0j}),
        )
        purity = None
        if compute_purity:
            purity = (
                reduced_density_matrix(post, positions).purity() if positions else 1.0
            )
        outcomes.append(
            GateOutcome(
                pattern=r,
                pattern2=r2,
                k=k,
                k2=k2,
                degenerate=(not 1 <= k <= n, not 1 <= k2 <= n),
                applied_corrections=corrections,
                output=output,
                probability=m.probability,
                residuals=residuals,
                purity=purity,
            )
        )
    return outcomes


@dataclass(frozen=True)
class CnotBranch:
    """One joint branch of the direct-CNOT construction.

    No correctness claim is made for the gate: the output modes generally
    remain entangled with the leftover y' modes, so the branch reports the
    reduced density matrix of the output modes (density, with basis labels
    in output_basis order) and its purity instead of pure amplitudes.
    post_state is the full normalized state on the 2n leftover modes.
    """

    pattern: Occupation
    pattern2: Occupation
    k: int
    k2: int
    degenerate: tuple[bool, bool]
    probability: float
    purity: float
    density: DensityMatrix | None
    post_state: FockState


def cnot_direct(
    q: QubitAmplitudes,
    q2: QubitAmplitudes,
    p: CoefficientProfile,
    p2: CoefficientProfile,
    *,
    pairing: str = "matched",
    basis_cap: int = DEFAULT_BASIS_CAP,
) -> list[CnotBranch]:
    """Enumerate the direct-CNOT attempt (pairwise CNOTs baked into the
    ancilla) and report per-branch output purity.

    The same compensating phases as the other gates are applied implicitly;
    they do not affect occupations, density-matrix spectra, or purity.
    Degenerate registers contribute no output mode; a branch with both
    registers degenerate is a single basis term and is reported pure.
    """
    if p.n != p2.n:
        raise ValueError("both profiles must share the same n")
    if p.n < 2:
        raise ValueError("the direct-CNOT demonstration needs n >= 2")
    n = p.n
    ancilla = cnot_ancilla_state(p, p2, pairing)
    branches: list[CnotBranch] = []
    for m, r, r2, k, k2, post in _run_two_qubit_protocol(
        q, q2, ancilla, n, basis_cap=basis_cap
    ):
        positions, _fixed = _output_positions(n, k, k2)
        if positions:
            density = reduced_density_matrix(post, positions)
            purity = density.purity()
        else:
            density = None
            purity = 1.0
        branches.append(
            CnotBranch(
                pattern=r,
                pattern2=r2,
                k=k,
                k2=k2,
                degenerate=(not 1 <= k <= n, not 1 <= k2 <= n),
                probability=m.probability,
                purity=purity,
                density=density,
                post_state=post,
            )
        )
    return branches
