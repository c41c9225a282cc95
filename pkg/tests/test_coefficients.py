import math

import numpy as np
import pytest

from stableheat.coefficients import (
    CoefficientPair,
    ParameterSet,
    builtin_stable_branching,
    holder_exponent_targets,
    make_pair,
    p1_closed_form_bound,
    uniqueness_gate,
)
from stableheat.kernel import DomainError
from stableheat.noise import rng_for


def test_builtin_stable_branching_values():
    pair = builtin_stable_branching(2.0 / 3.0)
    assert pair.H(np.array([0.0]))[0] == 0.0
    assert pair.H(np.array([1.0]))[0] == 1.0
    assert pair.H(np.array([8.0]))[0] == pytest.approx(4.0, rel=1e-12)
    assert pair.G(np.array([3.0]))[0] == 0.0
    with pytest.raises(DomainError):
        builtin_stable_branching(1.0)


def test_power_holder_constant_is_one():
    # sup |x^b - y^b| / |x-y|^b over random pairs <= 1 (subadditivity)
    pair = builtin_stable_branching(0.6)
    rng = rng_for(12, 0)
    x = rng.uniform(0, 100, 100_000)
    y = rng.uniform(0, 100, 100_000)
    ratio = np.abs(pair.H(x) - pair.H(y)) / np.abs(x - y) ** 0.6
    assert np.nanmax(ratio) <= 1.0 + 1e-12


def test_validate_passes_builtin_and_catches_bad_constant():
    builtin_stable_branching(0.5).validate(seed=1)
    make_pair("lipschitz_demo", "lipschitz_demo", beta=0.5).validate(seed=1)
    bad = CoefficientPair(
        G=lambda x: 10.0 * np.asarray(x, float), H=lambda x: np.zeros_like(np.asarray(x, float)),
        C_G=1.0, C_H=1.0, beta=0.5,
    )
    with pytest.raises(DomainError):
        bad.validate(seed=1)
    not_monotone = CoefficientPair(
        G=lambda x: np.zeros_like(np.asarray(x, float)), H=lambda x: -np.asarray(x, float) / 50.0,
        C_G=0.0, C_H=1.0, beta=0.5, monotone=True,
    )
    with pytest.raises(DomainError):
        not_monotone.validate(seed=1)


def test_make_pair_registry():
    assert make_pair("zero", "power:0.75").beta == 0.75
    assert make_pair("linear:-0.5", "power:0.5").C_G == 0.5
    with pytest.raises(DomainError):
        make_pair("unknown", "power:0.5")
    with pytest.raises(DomainError):
        make_pair("zero", "wat:0.5")


def test_parameter_set_validation():
    ParameterSet(alpha=1.5, beta=2.0 / 3.0)  # p = 1, q not needed
    with pytest.raises(DomainError):
        ParameterSet(alpha=2.5, beta=0.5)
    with pytest.raises(DomainError):
        ParameterSet(alpha=1.5, beta=0.9, q=2.0)  # p = 1.35 needs q > 3p/(3-a) = 2.7


def test_holder_exponent_targets():
    eta, eta_bar = holder_exponent_targets(1.2)
    assert eta == pytest.approx(2.0 / 1.2 - 1.0, rel=1e-12)
    assert holder_exponent_targets(1.5)[1] == pytest.approx(1.0)
    assert holder_exponent_targets(1.999)[0] == pytest.approx(2.0 / 1.999 - 1.0)
    with pytest.raises(DomainError):
        holder_exponent_targets(2.0)


def test_gate_examples_from_theorem():
    # alpha = 1.15 < 4 - 2 sqrt(2): admissible with a witness
    res = uniqueness_gate(ParameterSet(alpha=1.15, beta=1.0 / 1.15))
    assert res.admissible and res.delta is not None and res.delta > 0
    # alpha = 1.25: inadmissible
    res = uniqueness_gate(ParameterSet(alpha=1.25, beta=1.0 / 1.25))
    assert not res.admissible
    # alpha = 1.1, beta = 1/1.1: delta = 3 is a valid witness
    res = uniqueness_gate(ParameterSet(alpha=1.1, beta=1.0 / 1.1))
    lo, hi = res.interval
    assert lo < 3.0 < hi
    eta = 2.0 / 1.1 - 1.0
    assert 2.0 * (1.0 / 1.1) * eta > 1.0 + 1.0 / 3.0
    assert 1.1 * (1.0 / 1.1) / 0.1 > 4.0
    forced = uniqueness_gate(ParameterSet(alpha=1.1, beta=1.0 / 1.1, delta=3.0))
    assert forced.admissible and forced.delta == 3.0


def test_gate_sweep_matches_closed_form_and_monotone():
    crit = p1_closed_form_bound()
    assert crit == pytest.approx(4.0 - 2.0 * math.sqrt(2.0), rel=1e-15)
    admissible = []
    for k in range(101, 131):
        alpha = k / 100.0
        res = uniqueness_gate(ParameterSet(alpha=alpha, beta=1.0 / alpha))
        assert res.admissible == (alpha < crit)
        assert not res.disagreement
        admissible.append(res.admissible)
    # down-set in alpha: once inadmissible, stays inadmissible
    flips = sum(1 for a, b in zip(admissible, admissible[1:]) if b and not a)
    assert flips == 0


def test_gate_p_above_one_requires_q():
    params = ParameterSet(alpha=1.2, beta=0.9)  # p = 1.08 > 1
    res = uniqueness_gate(params)
    assert not res.admissible and "q" in res.reason
    with_q = ParameterSet(alpha=1.2, beta=0.9, q=2.0)
    res2 = uniqueness_gate(with_q)
    # side conditions checked before the delta search
    assert res2.reason != res.reason or res2.admissible


def test_gate_side_condition_p_cap():
    # p >= 1 + alpha(alpha-1)/2 is rejected outright
    res = uniqueness_gate(ParameterSet(alpha=1.9, beta=0.99, q=50.0))
    assert not res.admissible and "1 + alpha(alpha-1)/2" in res.reason
