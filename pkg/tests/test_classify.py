import numpy as np
import pytest

from seqeffect.axioms import JORDAN, STANDARD, TRANSPOSE_TWISTED, CandidateProduct, unitary_twisted
from seqeffect.classify import (
    DavisForm,
    Superoperator,
    classify_pure_positive,
    rebuild_map,
    regularize_invertible,
    standard_superoperator,
    superoperator_from_kraus,
    superoperator_from_map,
    superoperator_from_product,
    trace_theorem_steps,
)
from seqeffect.errors import NotAffine, NotInvertible, UnclassifiedMap
from seqeffect.effects import basis_projection, standard_seq_product
from seqeffect.matcore import (
    ToleranceConfig,
    identity,
    op_norm,
    random_effect,
    random_unitary,
    random_unit_vector,
    sqrt_psd,
    zero,
)
from seqeffect.rng import SplitMix64

TOL = ToleranceConfig()


def _unit(j, k, d):
    e = np.zeros((d, d), dtype=complex)
    e[j, k] = 1
    return e


def _choi_oracle(fn, d):
    # entrywise definition: J[a d + j, b d + k] = Phi(e_jk)[a, b]
    J = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for k in range(d):
            img = fn(_unit(j, k, d))
            for a in range(d):
                for b in range(d):
                    J[a * d + j, b * d + k] = img[a, b]
    return J


# --- Choi matrices ---------------------------------------------------------------------------


def test_identity_map_choi():
    d = 3
    expected = sum(np.kron(_unit(j, k, d), _unit(j, k, d)) for j in range(d) for k in range(d))
    np.testing.assert_array_equal(superoperator_from_map(lambda X: X, d).choi, expected)
    np.testing.assert_allclose(superoperator_from_product(STANDARD, identity(d)).choi, expected, atol=1e-12)


def test_choi_matches_entrywise_oracle():
    K = random_unitary(3, 1) @ np.diag([0.3, 0.5, 0.9])
    fn = lambda X: K @ X @ K.conj().T
    np.testing.assert_allclose(superoperator_from_map(fn, 3).choi, _choi_oracle(fn, 3), atol=1e-15)
    np.testing.assert_allclose(superoperator_from_kraus(K).choi, _choi_oracle(fn, 3), atol=1e-15)


def test_projection_choi_is_rank_one():
    P0 = basis_projection(0, 2)
    v = P0.reshape(-1)
    S = superoperator_from_product(STANDARD, P0)
    np.testing.assert_allclose(S.choi, np.outer(v, v.conj()), atol=1e-12)


def test_zero_effect_choi_vanishes():
    S = superoperator_from_product(STANDARD, zero(2))
    assert op_norm(S.choi) <= 1e-15


def test_superoperator_call_and_image():
    A = random_effect(3, 2)
    S = standard_superoperator(A)
    B = random_effect(3, 3)
    np.testing.assert_allclose(S(B), standard_seq_product(A, B), atol=1e-13)
    np.testing.assert_allclose(S.image(0, 2), sqrt_psd(A) @ _unit(0, 2, 3) @ sqrt_psd(A), atol=1e-13)


def test_compose_transpose_matches_oracle():
    K = random_unitary(2, 4)
    S = superoperator_from_kraus(K).compose_transpose()
    np.testing.assert_allclose(S.choi, _choi_oracle(lambda X: K @ X.T @ K.conj().T, 2), atol=1e-15)


def test_product_route_agrees_with_direct_route():
    for seed in range(30):
        d = 2 + seed % 4
        A = random_effect(d, seed)
        via_product = superoperator_from_product(STANDARD, A)
        direct = standard_superoperator(A)
        assert op_norm(via_product.choi - direct.choi) <= 1e-12


def test_non_affine_candidate_rejected():
    squared = CandidateProduct("sq", lambda A, B: standard_seq_product(A, B @ B))
    with pytest.raises(NotAffine):
        superoperator_from_product(squared, random_effect(2, 0))
    shifted = CandidateProduct("shift", lambda A, B: standard_seq_product(A, B) + 0.01 * identity(2))
    with pytest.raises(NotAffine):
        superoperator_from_product(shifted, random_effect(2, 0))


# --- classification ------------------------------------------------------------------------------


def test_standard_is_conjugation():
    root = SplitMix64(3)
    for t in range(50):
        rng = root.spawn(t)
        d = 2 + t % 3
        A = regularize_invertible(random_effect(d, rng), 10)
        cls = classify_pure_positive(superoperator_from_product(STANDARD, A))
        assert cls.form is DavisForm.CONJUGATION
        assert op_norm(cls.C.conj().T @ cls.C - A) <= TOL.eq_tol
        assert cls.residual <= TOL.eq_tol


def test_transpose_is_anti_conjugation():
    for seed in range(20):
        A = regularize_invertible(random_effect(3, seed), 10)
        cls = classify_pure_positive(superoperator_from_product(TRANSPOSE_TWISTED, A))
        assert cls.form is DavisForm.ANTI_CONJUGATION
        B = random_effect(3, seed + 100)
        np.testing.assert_allclose(cls.C.conj().T @ B.T @ cls.C, TRANSPOSE_TWISTED(A, B), atol=1e-10)


def test_rank_one_output_example():
    d = 2
    S = superoperator_from_map(lambda X: np.trace(X) * basis_projection(0, d), d)
    cls = classify_pure_positive(S)
    assert cls.form is DavisForm.RANK_ONE_OUTPUT
    np.testing.assert_allclose(cls.B_op, identity(d), atol=1e-14)
    assert abs(abs(cls.psi[0]) - 1) <= 1e-14


def test_rank_one_output_general():
    for seed in range(10):
        psi = random_unit_vector(3, seed)
        Bop = random_effect(3, seed + 20)
        fn = lambda X: np.trace(X @ Bop) * np.outer(psi, psi.conj())
        cls = classify_pure_positive(superoperator_from_map(fn, 3))
        assert cls.form is DavisForm.RANK_ONE_OUTPUT
        assert op_norm(cls.rebuild(3).choi - superoperator_from_map(fn, 3).choi) <= TOL.eq_tol


def test_zero_and_projection_are_conjugations():
    for A in (zero(2), basis_projection(0, 2)):
        cls = classify_pure_positive(superoperator_from_product(STANDARD, A))
        assert cls.form is DavisForm.CONJUGATION
        assert op_norm(cls.C.conj().T @ cls.C - A) <= TOL.eq_tol


def test_mixed_map_is_unclassified():
    sym = CandidateProduct("sym", lambda A, B: standard_seq_product(A, 0.5 * (B + B.T)))
    A = regularize_invertible(random_effect(2, 1), 5)
    cls = classify_pure_positive(superoperator_from_product(sym, A))
    assert cls.form is DavisForm.UNCLASSIFIED
    with pytest.raises(UnclassifiedMap):
        trace_theorem_steps(sym, A)


def test_jordan_map_is_unclassified():
    A = np.diag([0.3, 0.8]).astype(complex) + 0.1 * np.array([[0, 1], [1, 0]])
    cls = classify_pure_positive(superoperator_from_product(JORDAN, A))
    assert cls.form is DavisForm.UNCLASSIFIED


def test_non_hermiticity_preserving_is_unclassified():
    S = superoperator_from_map(lambda X: 1j * X, 2)
    assert classify_pure_positive(S).form is DavisForm.UNCLASSIFIED


def test_every_classification_rebuilds_its_map():
    maps = [
        superoperator_from_kraus(random_unitary(3, 0) @ np.diag([0.2, 0.6, 1.0])),
        superoperator_from_kraus(random_unitary(3, 1)).compose_transpose(),
        superoperator_from_map(lambda X: np.trace(X) * basis_projection(2, 3), 3),
    ]
    for S, form in zip(maps, [DavisForm.CONJUGATION, DavisForm.ANTI_CONJUGATION, DavisForm.RANK_ONE_OUTPUT]):
        cls = classify_pure_positive(S)
        assert cls.form is form
        rebuilt = rebuild_map(cls.form, 3, C=cls.C, B_op=cls.B_op, psi=cls.psi)
        assert op_norm(rebuilt.choi - S.choi) <= TOL.eq_tol


def test_superoperator_is_frozen():
    S = Superoperator(2, np.zeros((4, 4), dtype=complex))
    with pytest.raises(AttributeError):
        S.dim = 3


# --- regularization ----------------------------------------------------------------------------


def test_regularize_examples():
    np.testing.assert_allclose(regularize_invertible(zero(2), 1), 0.5 * identity(2), atol=1e-15)
    np.testing.assert_allclose(regularize_invertible(identity(3), 7), identity(3), atol=1e-15)
    np.testing.assert_allclose(regularize_invertible(np.diag([1.0, 0.0]), 4), np.diag([1.0, 0.2]), atol=1e-15)


def test_regularize_rejects_bad_index():
    for bad in (0, -2, 1.5):
        with pytest.raises(ValueError):
            regularize_invertible(identity(2), bad)


def test_regularized_effects_converge():
    for seed in range(50):
        A = random_effect(3, seed)
        for i in (1, 10, 1000, 10**6):
            Ai = regularize_invertible(A, i)
            assert op_norm(Ai - A) <= 2 / i
            w = np.linalg.eigvalsh(Ai)
            assert w[0] >= (1 / i) / (1 + 1 / i) - 1e-15 and w[-1] <= 1 + 1e-15


def test_regularization_residual_at_one_million():
    for seed in range(20):
        A = random_effect(4, seed)
        assert op_norm(regularize_invertible(A, 10**6) - A) < 1e-5


def test_regularized_standard_product_converges():
    # ||X^{1/2} - Y^{1/2}|| <= ||X - Y||^{1/2}, so the product moves by at most 2 ||A_i - A||^{1/2}
    A = basis_projection(0, 2)
    B = random_effect(2, 5)
    target = standard_seq_product(A, B)
    for i in (10, 10**3, 10**6):
        Ai = regularize_invertible(A, i)
        assert op_norm(standard_seq_product(Ai, B) - target) <= 2 * np.sqrt(op_norm(Ai - A))


# --- proof trace ---------------------------------------------------------------------------------


def test_trace_standard_diag():
    rep = trace_theorem_steps(STANDARD, np.diag([0.5, 0.9]))
    assert rep.passed and rep.form is DavisForm.CONJUGATION
    assert abs(abs(rep.mu) - 1) <= 1e-8
    assert rep.step("final").residual <= 1e-8
    names = [s.name for s in rep.steps]
    assert names[:3] == ["unit_probe", "duality_probe", "classification"]
    assert names[-2:] == ["weak_assoc", "final"]


def test_trace_identity_effect():
    rep = trace_theorem_steps(STANDARD, identity(3))
    assert rep.passed
    assert op_norm(rep.U @ rep.U - rep.mu * identity(3)) <= 1e-8


def test_trace_random_effects():
    for seed in range(10):
        A = regularize_invertible(random_effect(2 + seed % 3, seed), 20)
        rep = trace_theorem_steps(STANDARD, A, samples=30, seed=seed)
        assert rep.passed, rep.first_failure()


def test_trace_unitary_twist_fails():
    U = np.diag([1, 1j])
    rep = trace_theorem_steps(unitary_twisted(U), np.diag([0.5, 0.9]))
    assert not rep.passed
    failed = {s.name for s in rep.steps if not s.passed}
    assert "U_squared_scalar" in failed
    assert rep.step("final").residual > 1e-8


def test_trace_transpose_reports_form():
    rep = trace_theorem_steps(TRANSPOSE_TWISTED, regularize_invertible(random_effect(2, 3), 10))
    assert rep.form is DavisForm.ANTI_CONJUGATION
    assert rep.first_failure() is not None


def test_trace_requires_invertible():
    with pytest.raises(NotInvertible):
        trace_theorem_steps(STANDARD, basis_projection(0, 2))
    with pytest.raises(NotInvertible):
        trace_theorem_steps(STANDARD, zero(2))
    rep = trace_theorem_steps(STANDARD, regularize_invertible(zero(2), 4))
    np.testing.assert_allclose(rep.C.conj().T @ rep.C, 0.2 * identity(2), atol=1e-12)


def test_trace_report_serializes():
    d = trace_theorem_steps(STANDARD, np.diag([0.5, 0.9]), samples=5).to_dict()
    assert d["passed"] and d["first_failure"] is None and d["form"] == "CONJUGATION"
    assert len(d["steps"]) == 14


def test_trace_rank_one_output_candidate_is_eliminated():
    psi = np.array([1.0, 0.0], dtype=complex)
    collapse = CandidateProduct("collapse", lambda A, B: np.trace(A @ B) * np.outer(psi, psi.conj()))
    rep = trace_theorem_steps(collapse, np.diag([0.5, 0.9]), samples=10)
    assert rep.form is DavisForm.RANK_ONE_OUTPUT
    step = rep.step("rank_one_unit")
    assert not step.passed and step.residual > 0.1
