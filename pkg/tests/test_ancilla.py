"""Coefficient profiles and entangled ancilla state builders."""

import json
import math

import numpy as np
import pytest

from hifigate.ancilla import (
    CoefficientProfile,
    cnot_ancilla_state,
    custom_profile,
    cz_ancilla_state,
    load_profile,
    profile_linear,
    profile_sine,
    profile_uniform,
    save_profile,
    single_ancilla_state,
)


def test_profile_validation():
    with pytest.raises(ValueError):
        CoefficientProfile(0, (1.0,), "uniform")
    with pytest.raises(ValueError):
        CoefficientProfile(2, (1.0, 0.0), "uniform")  # wrong length
    with pytest.raises(ValueError):
        CoefficientProfile(1, (1.0, 1.0), "uniform")  # not normalized


def test_profile_f_outside_range_is_zero():
    p = profile_uniform(2)
    assert p.f(-1) == 0.0
    assert p.f(3) == 0.0
    assert p.f(0) == pytest.approx(1 / math.sqrt(3))


def test_uniform_values():
    p = profile_uniform(3)
    assert p.values == pytest.approx((0.5, 0.5, 0.5, 0.5))
    assert p.label == "uniform"


def test_linear_small_cases():
    assert profile_linear(2).values == pytest.approx((0.0, 1.0, 0.0))
    v4 = np.asarray(profile_linear(4).values)
    assert v4 * math.sqrt(6) == pytest.approx([0.0, 1.0, 2.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        profile_linear(1)


def test_linear_odd_plateau():
    # odd n: the tent has a flat two-sample top
    v5 = profile_linear(5).values
    assert v5[2] == pytest.approx(v5[3])
    assert v5[1] < v5[2]


def test_sine_values():
    p = profile_sine(2)
    assert p.values == pytest.approx((0.5, 1 / math.sqrt(2), 0.5))
    # n = 1 sine and uniform coincide
    assert profile_sine(1).values == pytest.approx(profile_uniform(1).values)


def test_profiles_are_normalized_and_symmetric():
    for n in (1, 2, 5, 8):
        for p in (profile_uniform(n), profile_sine(n)):
            assert math.fsum(v * v for v in p.values) == pytest.approx(1.0)
            assert p.values == pytest.approx(tuple(reversed(p.values)))


def test_as_array_is_detached():
    p = profile_uniform(1)
    arr = p.as_array()
    arr[0] = 99.0
    assert p.f(0) == pytest.approx(1 / math.sqrt(2))


def test_custom_profile_normalizes_with_warning():
    with pytest.warns(UserWarning):
        p = custom_profile([1.0, 1.0, 1.0])
    assert p.n == 2
    assert math.fsum(v * v for v in p.values) == pytest.approx(1.0)
    assert p.label == "custom"


def test_custom_profile_quiet_when_close():
    vals = [0.5, 0.5, 0.5, 0.5 + 1e-9]
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        custom_profile(vals)


def test_save_load_roundtrip(tmp_path):
    path = tmp_path / "p.json"
    p = profile_sine(4)
    save_profile(p, path)
    q = load_profile(path)
    assert q.n == 4
    assert q.values == pytest.approx(p.values)
    payload = json.loads(path.read_text())
    assert isinstance(payload, list)


def test_single_ancilla_state_structure():
    n = 3
    state = single_ancilla_state(profile_uniform(n))
    assert state.mode_count == 2 * n
    assert len(state) == n + 1
    assert all(sum(occ) == n for occ in state.amplitudes)
    assert state.norm() == pytest.approx(1.0)


def test_single_ancilla_term_patterns():
    # j = 2, n = 5: first j x-modes filled, last n-j y-modes filled
    state = single_ancilla_state(profile_uniform(5))
    amp = state.amplitude((1, 1, 0, 0, 0, 0, 0, 1, 1, 1))
    assert amp == pytest.approx(1 / math.sqrt(6))
    # y block is the bit-flip of the x block
    for occ in state.amplitudes:
        x, y = occ[:5], occ[5:]
        assert all(a + b == 1 for a, b in zip(x, y))


def test_cz_ancilla_signs_n1():
    state = cz_ancilla_state(profile_uniform(1), profile_uniform(1))
    assert state.mode_count == 4
    assert len(state) == 4
    # (j, j2) = (1, 1) carries the lone minus sign
    assert state.amplitude((1, 0, 1, 0)) == pytest.approx(-0.5)
    assert state.amplitude((0, 1, 0, 1)) == pytest.approx(0.5)
    assert state.amplitude((1, 0, 0, 1)) == pytest.approx(0.5)
    assert state.amplitude((0, 1, 1, 0)) == pytest.approx(0.5)


def test_cz_ancilla_is_signed_tensor_product():
    p, p2 = profile_sine(2), profile_linear(2)
    state = cz_ancilla_state(p, p2)
    assert all(sum(occ) == 4 for occ in state.amplitudes)
    single = single_ancilla_state(p)
    single2 = single_ancilla_state(p2)
    for occ, amp in state.amplitudes.items():
        left, right = occ[:4], occ[4:]
        j = sum(left[:2])
        j2 = sum(right[:2])
        sign = -1.0 if (j * j2) % 2 else 1.0
        expect = sign * single.amplitude(left) * single2.amplitude(right)
        assert amp == pytest.approx(expect)


def test_cnot_ancilla_matched_pairing():
    p = profile_uniform(2)
    state = cnot_ancilla_state(p, p, pairing="matched")
    assert state.mode_count == 8
    assert len(state) == 9
    # an empty y register (j = n) leaves the target side untouched
    assert state.amplitude((1, 1, 0, 0, 0, 0, 1, 1)) == pytest.approx(1 / 3)
    # every term's y' block is the paired XOR of the two y patterns
    base = single_ancilla_state(p)
    for occ in state.amplitudes:
        x, y = occ[:2], occ[2:4]
        x2, y2 = occ[4:6], occ[6:8]
        assert base.amplitude(x + y) != 0
        flipped = tuple(b ^ (a & 1) for a, b in zip(y, y2))
        assert base.amplitude(x2 + flipped) != 0


def test_cnot_pairings_differ():
    p = profile_uniform(2)
    matched = cnot_ancilla_state(p, p, pairing="matched")
    all_pairs = cnot_ancilla_state(p, p, pairing="all_pairs")
    assert set(matched.amplitudes) != set(all_pairs.amplitudes)
    with pytest.raises(ValueError):
        cnot_ancilla_state(p, p, pairing="bogus")
