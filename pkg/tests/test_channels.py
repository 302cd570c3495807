import numpy as np
import pytest

from seqeffect.channels import (
    DiscretePOVM,
    KrausChannel,
    apply_channel,
    check_proba_identity,
    instrument_from_povm,
    outcome_probabilities,
    outcome_update,
    random_povm,
    sample_outcome,
    simulate_measurements,
)
from seqeffect.effects import ZeroOutcome, basis_projection, plus_projection, standard_seq_product
from seqeffect.errors import DimMismatch, IndexOutOfRange, NotAnEffect, NotAResolution, NotTracePreserving
from seqeffect.matcore import ToleranceConfig, identity, op_norm, random_density, random_effect
from seqeffect.rng import SplitMix64

TOL = ToleranceConfig()
P0 = basis_projection(0, 2)
P1 = basis_projection(1, 2)
PPLUS = plus_projection(2)
DEPHASE = KrausChannel((P0, P1))


def test_channel_requires_completeness():
    with pytest.raises(NotTracePreserving):
        KrausChannel((P0,))
    with pytest.raises(ValueError):
        KrausChannel(())
    with pytest.raises(DimMismatch):
        KrausChannel((identity(2), identity(3)))


def test_identity_channel():
    rho = random_density(3, 0)
    np.testing.assert_allclose(apply_channel(KrausChannel((identity(3),)), rho), rho, atol=1e-15)


def test_full_dephasing_by_hand():
    # P0 |+><+| P0 + P1 |+><+| P1 = diag(1/2, 1/2)
    np.testing.assert_allclose(apply_channel(DEPHASE, PPLUS), 0.5 * identity(2), atol=1e-15)


def test_trivial_instrument_is_identity():
    ch = instrument_from_povm(DiscretePOVM((identity(3),)))
    rho = random_density(3, 1)
    np.testing.assert_allclose(apply_channel(ch, rho), rho, atol=1e-14)


def test_apply_channel_dim_mismatch():
    with pytest.raises(DimMismatch):
        apply_channel(DEPHASE, random_density(3, 0))


def test_outcome_update_examples():
    rho = random_density(2, 2)
    np.testing.assert_allclose(outcome_update(KrausChannel((identity(2),)), 0, rho), rho, atol=1e-14)
    np.testing.assert_allclose(outcome_update(DEPHASE, 0, PPLUS), P0, atol=1e-15)
    assert outcome_update(DEPHASE, 0, P1) is ZeroOutcome
    with pytest.raises(IndexOutOfRange):
        outcome_update(DEPHASE, 2, PPLUS)
    with pytest.raises(IndexError):
        outcome_update(DEPHASE, -1, PPLUS)


def test_povm_validation():
    with pytest.raises(NotAResolution):
        DiscretePOVM((P0,))
    with pytest.raises(NotAnEffect):
        DiscretePOVM((np.diag([1.5, 0.0]), np.diag([-0.5, 1.0])))


def test_instrument_examples():
    assert np.allclose(instrument_from_povm(DiscretePOVM((identity(2),))).elements[0], identity(2))
    ch = instrument_from_povm(DiscretePOVM((P0, P1)))
    np.testing.assert_allclose(ch.elements[0], P0, atol=1e-15)
    np.testing.assert_allclose(ch.elements[1], P1, atol=1e-15)
    ch = instrument_from_povm(DiscretePOVM((0.5 * identity(2), 0.5 * identity(2))))
    for a in ch.elements:
        np.testing.assert_allclose(a, identity(2) / np.sqrt(2), atol=1e-15)


def test_proba_identity_examples():
    rho = random_density(2, 3)
    assert check_proba_identity(DiscretePOVM((identity(2),)), 0, rho) <= 1e-12
    povm = DiscretePOVM((P0, P1))
    assert check_proba_identity(povm, 0, PPLUS) <= TOL.eq_tol
    # both sides equal |0><0| / 2
    np.testing.assert_allclose(standard_seq_product(P0, PPLUS), 0.5 * P0, atol=1e-15)
    assert check_proba_identity(povm, 0, P1) <= TOL.eq_tol


def test_random_povm_resolves_identity():
    for seed in range(200):
        dim = 2 + seed % 3
        k = 1 + seed % 5
        povm = random_povm(dim, k, seed)
        assert len(povm) == k
        assert op_norm(sum(povm.effects) - identity(dim)) <= TOL.eq_tol
        ch = instrument_from_povm(povm)
        assert op_norm(ch.completeness() - identity(dim)) <= TOL.eq_tol


def test_total_probability():
    root = SplitMix64(4)
    for t in range(300):
        rng = root.spawn(t)
        dim = 2 + t % 3
        ch = instrument_from_povm(random_povm(dim, 1 + t % 5, rng))
        rho = random_density(dim, rng)
        assert abs(outcome_probabilities(ch, rho).sum() - 1) <= 1e-9
        out = apply_channel(ch, rho)
        assert abs(np.trace(out) - 1) <= 1e-9
        assert np.linalg.eigvalsh(out)[0] >= -TOL.psd_tol


def test_instrument_conjugation_equals_sequential_product():
    # E^{1/2} F E^{1/2} for an effect F is the standard product E o F
    root = SplitMix64(9)
    for t in range(200):
        rng = root.spawn(t)
        dim = 2 + t % 3
        povm = random_povm(dim, 3, rng)
        F = random_effect(dim, rng)
        ch = instrument_from_povm(povm)
        for a, E in zip(ch.elements, povm.effects):
            assert op_norm(a @ F @ a.conj().T - standard_seq_product(E, F)) <= TOL.eq_tol


def test_sample_outcome_inverse_cdf():
    probs = [0.2, 0.0, 0.8]
    assert sample_outcome(probs, 0.0) == 0
    assert sample_outcome(probs, 0.1999) == 0
    assert sample_outcome(probs, 0.2) == 2
    assert sample_outcome(probs, 0.999999) == 2


def test_simulate_trivial_povm_keeps_state():
    rho = random_density(2, 5)
    traj = simulate_measurements(DiscretePOVM((identity(2),)), rho, 5, seed=1)
    assert [r["outcome"] for r in traj] == [0] * 5
    for r in traj:
        np.testing.assert_allclose(r["state"], rho, atol=1e-14)


def test_simulate_eigenstate_is_stable():
    traj = simulate_measurements(DiscretePOVM((P0, P1)), P0, 10, seed=3)
    assert all(r["outcome"] == 0 for r in traj)
    np.testing.assert_allclose(traj[-1]["state"], P0, atol=1e-15)


def test_simulate_frequencies_converge():
    povm = DiscretePOVM((P0, P1))
    root = SplitMix64(17)
    hits = sum(simulate_measurements(povm, PPLUS, 1, root.spawn(r))[0]["outcome"] == 0 for r in range(10_000))
    assert abs(hits / 10_000 - 0.5) <= 0.02


def test_repeated_projective_measurement_repeats_outcome():
    traj = simulate_measurements(DiscretePOVM((P0, P1)), PPLUS, 6, seed=21)
    assert len({r["outcome"] for r in traj}) == 1
