"""Closed-form error rates cross-checked against full branch enumeration."""

import math

import numpy as np
import pytest

from hifigate.ancilla import custom_profile, profile_linear, profile_sine, profile_uniform
from hifigate.fidelity import (
    InputEnsemble,
    average_error_exact,
    average_error_second_order,
    build_error_report,
    continuum_error,
    cz_average_error_exact,
    klm_failure_probability,
    outcome_distribution,
    success_probability_exact,
    success_probability_second_order,
)
from hifigate.protocol import (
    QubitAmplitudes,
    cz_gate,
    ideal_cz_output,
    output_fidelity_sq,
    teleport_enumerate,
    two_qubit_fidelity_sq,
)

Q = QubitAmplitudes(0.6, 0.8)


def test_ensemble_validation():
    with pytest.raises(ValueError):
        InputEnsemble("weird")
    with pytest.raises(ValueError):
        InputEnsemble("fixed")
    with pytest.raises(ValueError):
        InputEnsemble("fixed", p0=1.5)
    with pytest.raises(ValueError):
        InputEnsemble.uniform_p0(order=1)
    assert InputEnsemble.fixed(Q).p0 == pytest.approx(0.36)
    assert InputEnsemble.fixed(0.25).p0 == pytest.approx(0.25)


def test_success_probability_exact_values():
    uni = profile_uniform(3)
    for k in range(1, 4):
        assert success_probability_exact(Q, uni, k) == pytest.approx(1.0)
    # all-photons branch teleports only the |1> part
    assert success_probability_exact(Q, uni, 4) == pytest.approx(0.64)
    ratio_two = custom_profile([1 / math.sqrt(5), 2 / math.sqrt(5)])
    assert success_probability_exact(0.5, ratio_two, 1) == pytest.approx(0.9)
    with pytest.raises(ValueError):
        success_probability_exact(Q, profile_linear(2), 0)
    with pytest.raises(ValueError):
        success_probability_exact(1.5, uni, 1)


def test_success_probability_second_order():
    uni = profile_uniform(4)
    assert success_probability_second_order(Q, uni, 2) == pytest.approx(1.0)
    assert success_probability_second_order(1.0, profile_sine(4), 2) == pytest.approx(1.0)
    # f(k) = 0 falls back to the exact value
    assert success_probability_second_order(Q, uni, 5) == pytest.approx(0.64)


def test_second_order_tracks_exact_to_cubic_order():
    for n in (20, 30, 40):
        p = profile_sine(n)
        for k in range(n + 2):
            if p.f(k) == 0.0:
                continue
            eps = (p.f(k) - p.f(k - 1)) / p.f(k)
            for p0 in (0.3, 0.5, 0.7):
                gap = abs(
                    success_probability_exact(p0, p, k)
                    - success_probability_second_order(p0, p, k)
                )
                assert gap <= 2.0 * abs(eps) ** 3 + 1e-15


def test_outcome_distribution():
    for p in (profile_uniform(3), profile_sine(5), profile_linear(4)):
        dist = outcome_distribution(Q, p)
        assert [k for k, _ in dist] == list(range(p.n + 2))
        assert math.fsum(pr for _, pr in dist) == pytest.approx(1.0)
    dist = outcome_distribution(QubitAmplitudes(1.0, 0.0), profile_sine(3))
    for k, pr in dist:
        assert pr == pytest.approx(profile_sine(3).f(k) ** 2)
    uni = outcome_distribution(0.37, profile_uniform(4))
    assert all(pr == pytest.approx(1 / 5) for k, pr in uni[1:-1])
    lin = outcome_distribution(Q, profile_linear(2))
    assert lin == [(0, pytest.approx(0.0)), (1, pytest.approx(0.36)),
                   (2, pytest.approx(0.64)), (3, pytest.approx(0.0))]


def test_outcome_distribution_matches_enumeration():
    for p in (profile_sine(3), profile_uniform(2)):
        by_k: dict[int, float] = {}
        for o in teleport_enumerate(Q, p):
            by_k[o.k] = by_k.get(o.k, 0.0) + o.probability
        for k, pr in outcome_distribution(Q, p):
            assert by_k.get(k, 0.0) == pytest.approx(pr, abs=1e-12)


def test_average_error_exact_uniform_closed_form():
    for n in (1, 4, 9, 30):
        p = profile_uniform(n)
        err = average_error_exact(p, InputEnsemble.uniform_p0())
        assert err == pytest.approx(1.0 / (3 * (n + 1)), abs=1e-15)
        assert err == pytest.approx(continuum_error("uniform", n))


def test_average_error_fixed_and_basis():
    assert average_error_exact(profile_linear(2), InputEnsemble.fixed(0.36)) == pytest.approx(
        2 * 0.36 * 0.64
    )
    assert average_error_exact(profile_sine(6), InputEnsemble.basis_pair()) == 0.0


def test_average_error_matches_branch_simulation():
    # closed form against the full protocol, branch by branch
    for p in (profile_sine(3), profile_linear(4), profile_uniform(2)):
        simulated = math.fsum(
            o.probability * (1.0 - output_fidelity_sq(Q, o.output))
            for o in teleport_enumerate(Q, p)
        )
        closed = average_error_exact(p, InputEnsemble.fixed(Q))
        assert simulated == pytest.approx(closed, abs=1e-9)


def test_exact_equals_second_order_for_uniform_weight():
    # the integrand is quadratic in P0, so any rule of order >= 2 is exact
    # and the average collapses to the second-order form identically
    for p in (profile_uniform(5), profile_sine(7), profile_linear(6)):
        exact = average_error_exact(p, InputEnsemble.uniform_p0())
        assert exact == pytest.approx(average_error_second_order(p), abs=1e-15)
    low = average_error_exact(profile_sine(7), InputEnsemble.uniform_p0(order=2))
    high = average_error_exact(profile_sine(7), InputEnsemble.uniform_p0(order=64))
    assert low == pytest.approx(high, abs=1e-15)


def test_second_order_closed_forms():
    for n in (2, 10, 25):
        expect = (1.0 - math.cos(math.pi / (n + 2))) / 3.0
        assert average_error_second_order(profile_sine(n)) == pytest.approx(expect)
    lin = average_error_second_order(profile_linear(40))
    assert lin == pytest.approx(2.0 / 40**2, rel=0.05)


def test_klm_failure_probability():
    assert klm_failure_probability(1) == pytest.approx(0.5)
    assert klm_failure_probability(9) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        klm_failure_probability(0)
    for n in (1, 7, 50, 200):
        dist = outcome_distribution(0.37, profile_uniform(n))
        discarded = dist[0][1] + dist[n + 1][1]
        assert discarded == pytest.approx(klm_failure_probability(n), abs=1e-12)


def test_cz_error_is_product_of_gains():
    p = profile_sine(5)
    p2 = profile_linear(5)
    e1 = average_error_exact(p, InputEnsemble.uniform_p0())
    e2 = average_error_exact(p2, InputEnsemble.uniform_p0())
    combined = cz_average_error_exact(p, p2)
    assert combined == pytest.approx(1.0 - (1.0 - e1) * (1.0 - e2), abs=1e-14)
    assert combined == pytest.approx(e1 + e2 - e1 * e2, abs=1e-14)


def test_cz_quadrature_order_is_overkill_by_design():
    p = profile_sine(9)
    assert cz_average_error_exact(p, p, quadrature_order=8) == pytest.approx(
        cz_average_error_exact(p, p, quadrature_order=64), abs=1e-15
    )


def test_cz_error_matches_gate_simulation():
    q = QubitAmplitudes.normalized(0.6, 0.8j)
    q2 = QubitAmplitudes.normalized(1.0, -0.5)
    p = profile_sine(2)
    ideal = ideal_cz_output(q, q2)
    fidelity_mass = math.fsum(
        o.probability * two_qubit_fidelity_sq(ideal, o.output)
        for o in cz_gate(q, q2, p, p)
    )
    e1 = average_error_exact(p, InputEnsemble.fixed(q))
    e2 = average_error_exact(p, InputEnsemble.fixed(q2))
    assert 1.0 - fidelity_mass == pytest.approx(e1 + e2 - e1 * e2, abs=1e-12)


def test_cz_error_scaling_at_n40():
    p = profile_linear(40)
    err = cz_average_error_exact(p, p)
    assert 40**2 * err == pytest.approx(4.0, rel=0.1)
    single = average_error_exact(p, InputEnsemble.uniform_p0())
    assert err == pytest.approx(2 * single, rel=0.01)


def test_build_error_report():
    rep = build_error_report(profile_sine(10))
    assert rep.n == 10
    assert rep.profile_label == "sine"
    assert rep.scaled == pytest.approx(100 * rep.exact_error)
    assert rep.klm_failure == pytest.approx(1 / 11)
    assert rep.continuum_error == pytest.approx(math.pi**2 / 600)
    assert rep.exact_error == pytest.approx(rep.second_order_error, abs=1e-15)
    custom = build_error_report(custom_profile([0.6, 0.8]))
    assert math.isnan(custom.continuum_error)


def test_continuum_error_linear_form():
    assert continuum_error("linear", 10) == pytest.approx(0.02)
    assert np.isnan(continuum_error("optimized", 10))
