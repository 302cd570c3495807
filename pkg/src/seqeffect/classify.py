"""Superoperator view of ``B -> A o B`` and its pure-positive-map classification.

Choi convention: ``J(Phi) = sum_{j,k} Phi(e_jk) (x) e_jk`` with ``np.kron``
ordering, so ``J[a*d + j, b*d + k] = Phi(e_jk)[a, b]``.  A conjugation
``Phi(X) = K X K*`` has ``J = vec(K) vec(K)*`` where ``vec`` stacks the rows of
``K`` (``vec(K) = K.reshape(-1)``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .effects import standard_seq_product
from .errors import NotAffine, NotInvertible, SeqEffectError, UnclassifiedMap
from .matcore import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_cmatrix,
    dagger,
    hermitian_eig,
    hermitian_part,
    hermiticity_error,
    identity,
    op_norm,
    polar_decompose,
    random_density,
    random_effect,
    sqrt_psd,
)
from .rng import SplitMix64


class DavisForm(str, enum.Enum):
    CONJUGATION = "CONJUGATION"
    ANTI_CONJUGATION = "ANTI_CONJUGATION"
    RANK_ONE_OUTPUT = "RANK_ONE_OUTPUT"
    UNCLASSIFIED = "UNCLASSIFIED"


@dataclass(frozen=True)
class Superoperator:
    dim: int
    choi: np.ndarray

    @property
    def blocks(self) -> np.ndarray:
        """``blocks[:, j, :, k] = Phi(e_jk)``."""
        d = self.dim
        return self.choi.reshape(d, d, d, d)

    def image(self, j: int, k: int) -> np.ndarray:
        return self.blocks[:, j, :, k]

    def __call__(self, X) -> np.ndarray:
        return np.einsum("ajbk,jk->ab", self.blocks, np.asarray(X))

    def compose_transpose(self) -> "Superoperator":
        """``X -> Phi(X^T)``; its Choi matrix is the partial transpose on the second factor."""
        d = self.dim
        swapped = self.blocks.transpose(0, 3, 2, 1).reshape(d * d, d * d)
        return Superoperator(d, swapped)

    def is_hermiticity_preserving(self, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        return hermiticity_error(self.choi) <= tol.hermit_tol


def superoperator_from_map(fn, dim: int) -> Superoperator:
    """Choi matrix of a map known to be linear, evaluated on matrix units."""
    d = dim
    J = np.zeros((d * d, d * d), dtype=np.complex128)
    for j in range(d):
        for k in range(d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[j, k] = 1.0
            J += np.kron(np.asarray(fn(e), dtype=np.complex128), e)
    return Superoperator(d, J)


def superoperator_from_kraus(K) -> Superoperator:
    K = as_cmatrix(K)
    v = K.reshape(-1)
    return Superoperator(K.shape[0], np.outer(v, v.conj()))


def _probe_effects(dim: int):
    """Rank-one projections spanning all matrices, with the recipe for each matrix unit.

    For ``j < k`` the projections onto ``(e_j + e_k)/sqrt 2`` and
    ``(e_j + i e_k)/sqrt 2`` give ``e_jk + e_kj = 2X - D`` and
    ``e_jk - e_kj = i (2Y - D)`` with ``D = e_jj + e_kk``.
    """
    probes = {}
    for j in range(dim):
        P = np.zeros((dim, dim), dtype=np.complex128)
        P[j, j] = 1.0
        probes[("d", j)] = P
    s = 1 / np.sqrt(2)
    for j in range(dim):
        for k in range(j + 1, dim):
            x = np.zeros(dim, dtype=np.complex128)
            x[j], x[k] = s, s
            y = np.zeros(dim, dtype=np.complex128)
            y[j], y[k] = s, 1j * s
            probes[("x", j, k)] = np.outer(x, x.conj())
            probes[("y", j, k)] = np.outer(y, y.conj())
    return probes


def _assemble(images: dict, dim: int) -> Superoperator:
    d = dim
    J = np.zeros((d * d, d * d), dtype=np.complex128)

    def unit(j, k):
        e = np.zeros((d, d), dtype=np.complex128)
        e[j, k] = 1.0
        return e

    for j in range(d):
        J += np.kron(images[("d", j)], unit(j, j))
        for k in range(j + 1, d):
            D = images[("d", j)] + images[("d", k)]
            sym = 2 * images[("x", j, k)] - D  # Phi(e_jk + e_kj)
            anti = 1j * (2 * images[("y", j, k)] - D)  # Phi(e_jk - e_kj)
            J += np.kron(0.5 * (sym + anti), unit(j, k))
            J += np.kron(0.5 * (sym - anti), unit(k, j))
    return Superoperator(d, J)


def superoperator_from_product(prod, A, tol: ToleranceConfig = DEFAULT_TOL, probes: int = 8, seed: int = 0) -> Superoperator:
    """Linear extension of ``B -> prod(A, B)`` as a Choi matrix.

    ``prod(A, .)`` is evaluated on ``d^2`` rank-one projections that span all
    matrices, and the images of the matrix units are solved from them.  The
    extension is then validated: on ``probes`` random effect triples the map
    must be affine, send ``0`` to ``0``, and agree with the extension.

    Raises
    ------
    NotAffine
        If any validation residual exceeds ``eq_tol``.
    """
    A = as_cmatrix(A)
    d = A.shape[0]
    images = {key: np.asarray(prod(A, P), dtype=np.complex128) for key, P in _probe_effects(d).items()}
    S = _assemble(images, d)

    zero_image = op_norm(np.asarray(prod(A, np.zeros((d, d), dtype=np.complex128))))
    if zero_image > tol.eq_tol:
        raise NotAffine(f"A o 0 has norm {zero_image:.3e}; the map has no linear extension")
    root = SplitMix64(seed)
    for t in range(probes):
        rng = root.spawn(t)
        B, C = random_effect(d, rng), random_effect(d, rng)
        lam = float(rng.uniform(1)[0])
        fB = np.asarray(prod(A, B))
        fC = np.asarray(prod(A, C))
        affine = op_norm(np.asarray(prod(A, lam * B + (1 - lam) * C)) - lam * fB - (1 - lam) * fC)
        extension = max(op_norm(S(B) - fB), op_norm(S(C) - fC))
        worst = max(affine, extension)
        if worst > tol.eq_tol:
            raise NotAffine(f"affinity/extension residual {worst:.3e} exceeds eq_tol on probe {t}")
    return S


@dataclass
class DavisClassification:
    form: DavisForm
    residual: float
    C: np.ndarray | None = None
    B_op: np.ndarray | None = None
    psi: np.ndarray | None = None
    choi_spectrum: np.ndarray | None = field(default=None, repr=False)

    def rebuild(self, dim: int) -> Superoperator | None:
        """Superoperator described by the returned parameters."""
        return rebuild_map(self.form, dim, C=self.C, B_op=self.B_op, psi=self.psi)


def rebuild_map(form, dim, C=None, B_op=None, psi=None) -> Superoperator | None:
    if form == DavisForm.CONJUGATION:
        # Phi(X) = C* X C
        return superoperator_from_kraus(dagger(C))
    if form == DavisForm.ANTI_CONJUGATION:
        # Phi(X) = C* X^T C
        return superoperator_from_kraus(dagger(C)).compose_transpose()
    if form == DavisForm.RANK_ONE_OUTPUT:
        P = np.outer(psi, psi.conj())
        return superoperator_from_map(lambda X: np.trace(X @ B_op) * P, dim)
    return None


def _rank_one_vector(S: Superoperator, tol: ToleranceConfig):
    """Return ``(status, vector, spectrum)`` for the rank-one PSD test on ``J(S)``.

    status is ``"rank1"`` (vector set; zero vector for rank 0), ``"no"`` or
    ``"borderline"`` when the second eigenvalue sits within a factor 10 of
    ``rank_tol``.
    """
    w, v = hermitian_eig(S.choi, tol)
    w_desc = w[::-1]
    if w[0] < -max(tol.psd_tol, tol.rank_tol):
        return "no", None, w_desc
    second = w_desc[1] if w_desc.size > 1 else 0.0
    top = w_desc[0]
    if top <= tol.rank_tol:
        if top >= tol.rank_tol / 10:
            return "borderline", None, w_desc
        return "rank1", np.zeros(v.shape[0], dtype=np.complex128), w_desc
    if second > 10 * tol.rank_tol:
        return "no", None, w_desc
    if second >= tol.rank_tol / 10:
        return "borderline", None, w_desc
    return "rank1", np.sqrt(top) * v[:, -1], w_desc


def _reconstruction_residual(S: Superoperator, R: Superoperator) -> float:
    d = S.dim
    return max(op_norm(S.image(j, k) - R.image(j, k)) for j in range(d) for k in range(d))


def classify_pure_positive(S: Superoperator, tol: ToleranceConfig = DEFAULT_TOL) -> DavisClassification:
    """Decide which of the three pure-positive forms ``S`` has.

    1. ``J(S)`` PSD of rank <= 1: conjugation ``X -> C* X C``.
    2. ``J(S o T)`` PSD of rank <= 1: ``X -> C* X^T C``.
    3. Every image of a matrix unit proportional to one rank-one projection
       ``P_psi``: ``X -> Tr(X B) P_psi``.

    Whatever form is found, the map rebuilt from its parameters must match
    ``S`` on all matrix units within ``eq_tol``; otherwise the result is
    ``UNCLASSIFIED``.
    """
    d = S.dim
    if not S.is_hermiticity_preserving(tol):
        return DavisClassification(DavisForm.UNCLASSIFIED, float("inf"))
    status, vec, spectrum = _rank_one_vector(S, tol)
    if status == "rank1":
        K = vec.reshape(d, d)
        C = dagger(K)
        return _validated(S, DavisForm.CONJUGATION, tol, spectrum, C=C)
    if status == "borderline":
        return DavisClassification(DavisForm.UNCLASSIFIED, float("inf"), choi_spectrum=spectrum)

    status_t, vec_t, _ = _rank_one_vector(S.compose_transpose(), tol)
    if status_t == "rank1":
        K = vec_t.reshape(d, d)
        return _validated(S, DavisForm.ANTI_CONJUGATION, tol, spectrum, C=dagger(K))
    if status_t == "borderline":
        return DavisClassification(DavisForm.UNCLASSIFIED, float("inf"), choi_spectrum=spectrum)

    images = [S.image(j, k) for j in range(d) for k in range(d)]
    biggest = max(images, key=op_norm)
    if op_norm(biggest) > tol.eq_tol:
        w, v = hermitian_eig(hermitian_part(biggest), tol)
        idx = int(np.argmax(np.abs(w)))
        psi = v[:, idx]
        P = np.outer(psi, psi.conj())
        # Tr(e_jk B) = B[k, j] is the coefficient of P_psi in Phi(e_jk)
        B_op = np.zeros((d, d), dtype=np.complex128)
        for j in range(d):
            for k in range(d):
                B_op[k, j] = np.trace(S.image(j, k) @ P)
        return _validated(S, DavisForm.RANK_ONE_OUTPUT, tol, spectrum, B_op=B_op, psi=psi)
    return DavisClassification(DavisForm.UNCLASSIFIED, float("inf"), choi_spectrum=spectrum)


def _validated(S, form, tol, spectrum, **params) -> DavisClassification:
    rebuilt = rebuild_map(form, S.dim, **params)
    residual = _reconstruction_residual(S, rebuilt)
    if residual > tol.eq_tol:
        return DavisClassification(DavisForm.UNCLASSIFIED, residual, choi_spectrum=spectrum)
    return DavisClassification(form, residual, choi_spectrum=spectrum, **params)


def regularize_invertible(A, i: int) -> np.ndarray:
    """``A_i = (1 + 1/i)^{-1} (A + I/i)``, an invertible effect within ``2/i`` of ``A``."""
    if int(i) != i or i < 1:
        raise ValueError(f"regularization index must be a positive integer, got {i!r}")
    A = as_cmatrix(A)
    return (A + identity(A.shape[0]) / i) / (1.0 + 1.0 / i)


# --- proof trace ----------------------------------------------------------------


@dataclass
class ProofStep:
    name: str
    residual: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class ProofTraceReport:
    candidate: str
    dim: int
    form: DavisForm
    steps: list
    mu: complex | None = None
    U: np.ndarray | None = None
    sqrt_A: np.ndarray | None = None
    C: np.ndarray | None = None

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps)

    def first_failure(self) -> ProofStep | None:
        return next((s for s in self.steps if not s.passed), None)

    def step(self, name: str) -> ProofStep:
        return next(s for s in self.steps if s.name == name)

    def to_dict(self) -> dict:
        first = self.first_failure()
        return {
            "candidate": self.candidate,
            "dim": self.dim,
            "form": self.form.value,
            "passed": self.passed,
            "first_failure": first.name if first else None,
            "mu": self.mu,
            "steps": [
                {"name": s.name, "residual": s.residual, "tolerance": s.tolerance, "passed": s.passed, "note": s.note}
                for s in self.steps
            ],
            "C": self.C,
            "U": self.U,
            "sqrt_A": self.sqrt_A,
        }


def _step(name, residual, bound, note=""):
    residual = float(residual)
    return ProofStep(name, residual, bound, bool(residual <= bound), note)


def trace_theorem_steps(
    prod, A, tol: ToleranceConfig = DEFAULT_TOL, samples: int = 100, seed: int = 0
) -> ProofTraceReport:
    """Replay the uniqueness argument for one invertible effect ``A``.

    Steps, each with a residual:

    * ``unit_probe`` / ``duality_probe``: the hypotheses on random inputs.
    * ``classification``: reconstruction residual of the Davis form.
    * ``A_equals_CstarC``: ``A = A o I = C* C``.
    * ``polar_modulus``: ``|C| = A^{1/2}`` where ``C = U |C|``.
    * ``sandwich``: ``A = A^{1/2} U* U A^{1/2}``; ``isometry``: ``U* U = I``.
    * ``twisted_commutation``: ``A^{1/2} U* B U A^{1/2} = U A^{1/2} B A^{1/2} U*`` on random ``B``.
    * ``unitary``: ``U U* = I``.
    * ``U_squared_scalar``: ``U^2 = mu I`` with ``mu = Tr(U^2)/d``; ``mu_modulus``: ``|mu| = 1``.
    * ``weak_assoc``: ``A o (A o B) = A B A``.
    * ``final``: ``A o B = A^{1/2} B A^{1/2}`` on random ``B``.

    Raises
    ------
    NotInvertible
        If the smallest eigenvalue of ``A`` is at most ``10 psd_tol``.
    UnclassifiedMap
        If ``B -> A o B`` matches none of the three forms.
    """
    A = as_cmatrix(A)
    d = A.shape[0]
    w, _ = hermitian_eig(A, tol)
    if w[0] <= 10 * tol.psd_tol:
        raise NotInvertible(f"smallest eigenvalue {w[0]:.3e} <= 10 psd_tol; regularize first")
    name = getattr(prod, "name", "anonymous")
    eq = tol.eq_tol
    I = identity(d)
    root = SplitMix64(seed)
    Bs = []
    rhos = []
    for t in range(samples):
        rng = root.spawn(t)
        Bs.append(random_effect(d, rng))
        rhos.append(random_density(d, rng))

    def call(X, Y):
        return np.asarray(prod(X, Y), dtype=np.complex128)

    steps = []
    unit_res = max(op_norm(call(A, I) - A), op_norm(call(I, A) - A))
    steps.append(_step("unit_probe", unit_res, eq))
    dual_res = max(
        abs(np.trace(call(A, rho) @ B) - np.trace(rho @ call(A, B))) for B, rho in zip(Bs[:20], rhos[:20])
    )
    steps.append(_step("duality_probe", dual_res, eq))

    try:
        S = superoperator_from_product(prod, A, tol)
    except NotAffine as exc:
        steps.append(ProofStep("classification", float("inf"), eq, False, str(exc)))
        raise UnclassifiedMap(str(exc)) from exc
    cls = classify_pure_positive(S, tol)
    if cls.form == DavisForm.UNCLASSIFIED:
        raise UnclassifiedMap("B -> A o B is not of any pure-positive form")
    steps.append(_step("classification", cls.residual, eq, cls.form.value))

    report = ProofTraceReport(name, d, cls.form, steps)
    sqrt_A = sqrt_psd(A, tol)
    report.sqrt_A = sqrt_A
    if cls.form == DavisForm.CONJUGATION:
        C = cls.C
        report.C = C
        U, modulus = polar_decompose(C, tol)
        report.U = U
        Ud = dagger(U)
        steps.append(_step("A_equals_CstarC", op_norm(dagger(C) @ C - A), eq))
        steps.append(_step("polar_modulus", op_norm(modulus - sqrt_A), eq))
        steps.append(_step("polar_reconstruction", op_norm(U @ modulus - C), eq))
        steps.append(_step("sandwich", op_norm(sqrt_A @ Ud @ U @ sqrt_A - A), eq))
        steps.append(_step("isometry", op_norm(Ud @ U - I), eq))
        twisted = max(op_norm(sqrt_A @ Ud @ B @ U @ sqrt_A - U @ sqrt_A @ B @ sqrt_A @ Ud) for B in Bs)
        steps.append(_step("twisted_commutation", twisted, eq))
        steps.append(_step("unitary", op_norm(U @ Ud - I), eq))
        U2 = U @ U
        mu = complex(np.trace(U2) / d)
        report.mu = mu
        steps.append(_step("U_squared_scalar", op_norm(U2 - mu * I), eq))
        steps.append(_step("mu_modulus", abs(abs(mu) - 1.0), eq))
    elif cls.form == DavisForm.RANK_ONE_OUTPUT:
        # A = A o I = Tr(B_op) P_psi; compared on the basis states, this cannot hold for invertible A when d >= 2
        implied = np.trace(cls.B_op) * np.outer(cls.psi, cls.psi.conj())
        basis_gap = max(abs(implied[j, j] - A[j, j]) for j in range(d))
        steps.append(
            _step("rank_one_unit", max(basis_gap, op_norm(implied - A)), eq, "A o I is rank one, A is invertible")
        )
    else:
        steps.append(
            ProofStep("conjugation_form", float("inf"), eq, False, f"form {cls.form.value}; polar steps not applicable")
        )

    try:
        assoc = max(op_norm(call(A, call(A, B)) - A @ B @ A) for B in Bs)
    except (SeqEffectError, ValueError, np.linalg.LinAlgError):
        assoc = float("inf")
    steps.append(_step("weak_assoc", assoc, eq))
    final = max(op_norm(call(A, B) - sqrt_A @ B @ sqrt_A) for B in Bs)
    steps.append(_step("final", final, eq))
    return report


def standard_superoperator(A, tol: ToleranceConfig = DEFAULT_TOL) -> Superoperator:
    """Choi matrix of ``B -> A^{1/2} B A^{1/2}`` built directly from the root."""
    return superoperator_from_kraus(sqrt_psd(A, tol))


__all__ = [
    "DavisClassification",
    "DavisForm",
    "ProofStep",
    "ProofTraceReport",
    "Superoperator",
    "classify_pure_positive",
    "rebuild_map",
    "regularize_invertible",
    "standard_superoperator",
    "standard_seq_product",
    "superoperator_from_kraus",
    "superoperator_from_map",
    "superoperator_from_product",
    "trace_theorem_steps",
]
