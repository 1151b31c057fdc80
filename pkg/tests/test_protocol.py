"""Teleportation and two-qubit gate protocol tests.

Branch outputs are checked against the closed-form ideal
(a0 f(k), a1 f(k-1)) and, independently, through raw-amplitude linearity
across basis inputs, which does not assume the closed form.
"""

import cmath
import math

import pytest

from hifigate.ancilla import profile_linear, profile_sine, profile_uniform
from hifigate.fock import BasisSizeError
from hifigate.protocol import (
    SIGN_FLIP_Q,
    SIGN_FLIP_Q2,
    GateOutcome,
    KlmSummary,
    QubitAmplitudes,
    cnot_direct,
    cz_gate,
    cz_sign_corrections,
    ideal_cz_output,
    klm_summary,
    output_fidelity_sq,
    phase_correction,
    teleport_enumerate,
    teleport_sample,
    two_qubit_fidelity_sq,
)

Q_DEFAULT = QubitAmplitudes(0.6, 0.8)
BALANCED = QubitAmplitudes(1 / math.sqrt(2), 1 / math.sqrt(2))


def test_qubit_amplitudes_validation():
    with pytest.raises(ValueError):
        QubitAmplitudes(1.0, 1.0)
    q = QubitAmplitudes.normalized(1.0, 1.0)
    assert q.p0 == pytest.approx(0.5)
    assert q.p1 == pytest.approx(0.5)
    with pytest.raises(ValueError):
        QubitAmplitudes.normalized(0.0, 0.0)


def test_output_fidelity_sq_phase_insensitive():
    out = QubitAmplitudes(0.6 * cmath.exp(0.7j), 0.8 * cmath.exp(0.7j))
    assert output_fidelity_sq(Q_DEFAULT, out) == pytest.approx(1.0)


def test_phase_correction_examples():
    assert phase_correction((5, 0, 0), 3) == pytest.approx(1.0)
    assert phase_correction((0, 1), 2) == pytest.approx(-1.0)
    assert phase_correction((0, 1, 1), 3) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        phase_correction((0, 1), 3)
    with pytest.raises(ValueError):
        phase_correction((0, -1), 2)


def test_teleport_probabilities_sum_to_one():
    for n in (1, 2, 3):
        outcomes = teleport_enumerate(Q_DEFAULT, profile_uniform(n))
        assert math.fsum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-12)
        assert [o.pattern for o in outcomes] == sorted(o.pattern for o in outcomes)


def test_teleport_basis_input_always_lands_on_zero():
    outcomes = teleport_enumerate(QubitAmplitudes(1.0, 0.0), profile_uniform(2))
    for o in outcomes:
        assert o.output.p0 == pytest.approx(1.0)
    # the all-photons branch (k = n+1) needs the |1> component and vanishes
    assert all(o.k <= 2 for o in outcomes)


def test_teleport_uniform_reproduces_input_on_every_branch():
    outcomes = teleport_enumerate(Q_DEFAULT, profile_uniform(3))
    for o in outcomes:
        if o.degenerate:
            continue
        assert output_fidelity_sq(Q_DEFAULT, o.output) == pytest.approx(1.0, abs=1e-12)


def test_teleport_linear_n2_distribution():
    outcomes = teleport_enumerate(Q_DEFAULT, profile_linear(2))
    by_k: dict[int, float] = {}
    for o in outcomes:
        by_k[o.k] = by_k.get(o.k, 0.0) + o.probability
    assert by_k == pytest.approx({1: 0.36, 2: 0.64})


def test_teleport_branch_matches_profile_weights():
    # interior branch output must equal (a0 f(k), a1 f(k-1)) normalized
    q = QubitAmplitudes.normalized(0.6, 0.8j)
    p = profile_sine(3)
    for o in teleport_enumerate(q, p):
        if o.degenerate:
            continue
        ideal = QubitAmplitudes.normalized(q.a0 * p.f(o.k), q.a1 * p.f(o.k - 1))
        assert output_fidelity_sq(ideal, o.output) == pytest.approx(1.0, abs=1e-12)


def test_teleport_degenerate_branches():
    outcomes = teleport_enumerate(Q_DEFAULT, profile_uniform(2))
    lo = [o for o in outcomes if o.k == 0]
    hi = [o for o in outcomes if o.k == 3]
    assert len(lo) == 1 and lo[0].degenerate
    assert lo[0].output.p0 == pytest.approx(1.0)
    assert lo[0].probability == pytest.approx(0.36 / 3)
    assert all(o.degenerate for o in hi)
    assert math.fsum(o.probability for o in hi) == pytest.approx(0.64 / 3)
    for o in hi:
        assert o.output.p1 == pytest.approx(1.0)


def test_teleport_residual_mode_count():
    for o in teleport_enumerate(Q_DEFAULT, profile_uniform(2)):
        assert o.residual.mode_count == (2 if o.degenerate else 1)
        assert o.residual.norm() == pytest.approx(1.0)


def test_teleport_raw_amplitudes_are_linear_in_the_input():
    # output * sqrt(prob) reconstructs the projected raw amplitudes, so for
    # each pattern it must be the same linear combination of the basis runs
    p = profile_sine(2)
    q = QubitAmplitudes.normalized(0.48 + 0.36j, 0.8)
    runs = {
        label: {o.pattern: o for o in teleport_enumerate(state, p)}
        for label, state in (
            ("q", q),
            ("e0", QubitAmplitudes(1.0, 0.0)),
            ("e1", QubitAmplitudes(0.0, 1.0)),
        )
    }

    def raw(outcome):
        s = math.sqrt(outcome.probability)
        return (outcome.output.a0 * s, outcome.output.a1 * s)

    checked = 0
    for pattern, o in runs["q"].items():
        if o.degenerate:
            continue
        r0 = raw(runs["e0"][pattern]) if pattern in runs["e0"] else (0j, 0j)
        r1 = raw(runs["e1"][pattern]) if pattern in runs["e1"] else (0j, 0j)
        expect = tuple(q.a0 * a + q.a1 * b for a, b in zip(r0, r1))
        got = raw(o)
        assert got == pytest.approx(expect, abs=1e-12)
        checked += 1
    assert checked > 0


def test_teleport_sample_deterministic_and_calibrated():
    p = profile_uniform(2)
    one = teleport_sample(Q_DEFAULT, p, seed=42)
    two = teleport_sample(Q_DEFAULT, p, seed=42)
    assert one.pattern == two.pattern
    shots = teleport_sample(Q_DEFAULT, p, seed=123, shots=20000)
    assert len(shots) == 20000
    counts: dict[tuple, int] = {}
    for o in shots:
        counts[o.pattern] = counts.get(o.pattern, 0) + 1
    exact = {o.pattern: o.probability for o in teleport_enumerate(Q_DEFAULT, p)}
    for pattern, prob in exact.items():
        freq = counts.get(pattern, 0) / 20000
        assert abs(freq - prob) < 0.01


def test_klm_summary_uniform():
    outcomes = teleport_enumerate(Q_DEFAULT, profile_uniform(2))
    s = klm_summary(Q_DEFAULT, outcomes)
    assert isinstance(s, KlmSummary)
    assert s.success_probability == pytest.approx(2 / 3)
    assert s.conditional_error == pytest.approx(0.0, abs=1e-12)


def test_klm_summary_linear_pays_in_fidelity():
    outcomes = teleport_enumerate(Q_DEFAULT, profile_linear(2))
    s = klm_summary(Q_DEFAULT, outcomes)
    # end coefficients vanish, so nothing is discarded, but the branches err
    assert s.success_probability == pytest.approx(1.0)
    assert s.conditional_error == pytest.approx(2 * 0.36 * 0.64)


def test_cz_sign_corrections_truth_table():
    assert cz_sign_corrections(0, 0) == frozenset()
    assert cz_sign_corrections(2, 4) == frozenset()
    assert cz_sign_corrections(0, 1) == {SIGN_FLIP_Q}
    assert cz_sign_corrections(1, 0) == {SIGN_FLIP_Q2}
    assert cz_sign_corrections(1, 1) == {SIGN_FLIP_Q, SIGN_FLIP_Q2}
    assert cz_sign_corrections(2, 3) == {SIGN_FLIP_Q}
    with pytest.raises(ValueError):
        cz_sign_corrections(-1, 0)


def test_ideal_cz_output():
    out = ideal_cz_output(BALANCED, BALANCED)
    assert out == pytest.approx((0.5, 0.5, 0.5, -0.5))
    assert two_qubit_fidelity_sq(out, out) == pytest.approx(1.0)


def test_cz_probabilities_sum_to_one():
    outcomes = cz_gate(BALANCED, Q_DEFAULT, profile_uniform(2), profile_uniform(2))
    assert math.fsum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-12)


def test_cz_basis_input_stays_basis():
    zero = QubitAmplitudes(1.0, 0.0)
    for o in cz_gate(zero, zero, profile_uniform(2), profile_uniform(2)):
        assert abs(o.output[0]) == pytest.approx(1.0)


def test_cz_branch_outputs_match_weighted_ideal():
    q = QubitAmplitudes.normalized(0.6, 0.8j)
    q2 = QubitAmplitudes.normalized(1.0, -0.5)
    ideal = ideal_cz_output(q, q2)
    for p in (profile_uniform(2), profile_sine(2)):
        for o in cz_gate(q, q2, p, p):
            expect = [
                ideal[2 * a + b] * p.f(o.k - a) * p.f(o.k2 - b)
                for a in (0, 1)
                for b in (0, 1)
            ]
            norm = math.sqrt(math.fsum(abs(x) ** 2 for x in expect))
            expect = [x / norm for x in expect]
            assert two_qubit_fidelity_sq(expect, o.output) == pytest.approx(1.0, abs=1e-12)


def test_cz_without_parity_corrections_shows_sign_pattern():
    p = profile_sine(2)
    both_one = QubitAmplitudes(0.0, 1.0)
    corrected = {
        (o.k, o.k2): o for o in cz_gate(both_one, both_one, p, p, parity_corrections=True)
    }
    raw = {
        (o.k, o.k2): o for o in cz_gate(both_one, both_one, p, p, parity_corrections=False)
    }
    for key, o in raw.items():
        assert o.applied_corrections == frozenset()
        # on the |11> input only the last component is populated; the parity
        # correction flips it exactly when one total is even and one is odd
        flip = -1.0 if (key[0] + key[1]) % 2 else 1.0
        assert corrected[key].output[3] == pytest.approx(flip * o.output[3])


def test_cz_purity_and_residual_shapes():
    n = 2
    outcomes = cz_gate(
        BALANCED, BALANCED, profile_uniform(n), profile_uniform(n), compute_purity=True
    )
    for o in outcomes:
        assert o.purity == pytest.approx(1.0, abs=1e-10)
        expect_y = n - (0 if o.degenerate[0] else 1)
        expect_y2 = n - (0 if o.degenerate[1] else 1)
        assert o.residuals[0].mode_count == expect_y
        assert o.residuals[1].mode_count == expect_y2
        assert isinstance(o, GateOutcome)


def test_cz_purity_not_computed_by_default():
    outcomes = cz_gate(BALANCED, BALANCED, profile_uniform(2), profile_uniform(2))
    assert all(o.purity is None for o in outcomes)


def test_cnot_direct_needs_n_at_least_two():
    with pytest.raises(ValueError):
        cnot_direct(BALANCED, BALANCED, profile_uniform(1), profile_uniform(1))


def test_cnot_direct_purity_split():
    branches = cnot_direct(BALANCED, BALANCED, profile_uniform(2), profile_uniform(2))
    assert math.fsum(b.probability for b in branches) == pytest.approx(1.0, abs=1e-12)
    diag = [b for b in branches if not any(b.degenerate) and b.k == b.k2]
    off = [b for b in branches if not any(b.degenerate) and b.k != b.k2]
    assert diag and off
    for b in diag:
        assert b.purity == pytest.approx(1.0, abs=1e-10)
    for b in off:
        assert b.purity == pytest.approx(0.5, abs=1e-10)


def test_cnot_direct_basis_state_branch_rule():
    # basis inputs stay pure on every branch; matched pairing acts as a CNOT
    # only when k = k2. For k2 > k the target bit is flipped unconditionally,
    # for k2 < k it is left unconditionally, so off-diagonal branches misfire
    # whenever that disagrees with control XOR target.
    p = profile_uniform(2)
    for u in (0, 1):
        for v in (0, 1):
            q = QubitAmplitudes(1.0 - u, u)
            q2 = QubitAmplitudes(1.0 - v, v)
            for b in cnot_direct(q, q2, p, p):
                if any(b.degenerate):
                    continue
                if b.k == b.k2:
                    target = u ^ v
                elif b.k2 > b.k:
                    target = v ^ 1
                else:
                    target = v
                assert b.density is not None
                assert b.purity == pytest.approx(1.0, abs=1e-10)
                idx = b.density.basis.index((u, target))
                assert abs(b.density.matrix[idx, idx]) == pytest.approx(1.0, abs=1e-10)


def test_basis_cap_propagates():
    with pytest.raises(BasisSizeError):
        teleport_enumerate(Q_DEFAULT, profile_uniform(2), basis_cap=4)
    with pytest.raises(BasisSizeError):
        cz_gate(BALANCED, BALANCED, profile_uniform(2), profile_uniform(2), basis_cap=8)
