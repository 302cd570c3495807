"""Effects, states, the standard sequential product and Lüders conditioning."""

from __future__ import annotations

import numpy as np

from .errors import DimMismatch, NotADensity, NotAnEffect
from .matcore import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_cmatrix,
    dagger,
    hermitian_eig,
    hermitian_part,
    hermiticity_error,
    op_norm,
    sqrt_psd,
)


class _ZeroOutcome:
    """Marker returned when the conditioning outcome has probability zero."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ZeroOutcome"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_ZeroOutcome, ())


ZeroOutcome = _ZeroOutcome()


def same_dim(*mats) -> int:
    dims = {np.shape(m)[0] for m in mats}
    if len(dims) != 1:
        raise DimMismatch(f"operands have different dimensions: {sorted(dims)}")
    return dims.pop()


def spectrum_bounds(M, tol: ToleranceConfig = DEFAULT_TOL):
    w, _ = hermitian_eig(M, tol)
    return float(w[0]), float(w[-1])


def effect_violation(M, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """How far ``M`` is from the effect interval ``0 <= M <= I``.

    Returns the largest of the anti-Hermitian norm, ``-lambda_min`` and
    ``lambda_max - 1`` (zero for a genuine effect).
    """
    M = np.asarray(M, dtype=np.complex128)
    if not np.all(np.isfinite(M)):
        return float("inf")
    herr = hermiticity_error(M)
    w = np.linalg.eigvalsh(hermitian_part(M))
    return float(max(herr, -w[0], w[-1] - 1.0, 0.0))


def is_effect(M, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    M = np.asarray(M)
    if hermiticity_error(M) > tol.hermit_tol:
        return False
    w = np.linalg.eigvalsh(hermitian_part(M))
    return bool(w[0] >= -tol.psd_tol and w[-1] <= 1.0 + tol.psd_tol)


def as_effect(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Validate an effect and return its Hermitian part.

    Raises
    ------
    NotAnEffect
        If ``M`` is not Hermitian or its spectrum leaves
        ``[-psd_tol, 1 + psd_tol]``.
    """
    M = as_cmatrix(M)
    herr = hermiticity_error(M)
    if herr > tol.hermit_tol:
        raise NotAnEffect(f"not Hermitian: ||M - M*|| = {herr:.3e}")
    lo, hi = spectrum_bounds(M, tol)
    if lo < -tol.psd_tol or hi > 1.0 + tol.psd_tol:
        raise NotAnEffect(f"spectrum [{lo:.3e}, {hi:.3e}] outside [0, 1]")
    return hermitian_part(M)


def clamped_spectrum(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Eigenvalues of an effect clamped into ``[0, 1]`` (the reported view)."""
    w, _ = hermitian_eig(as_effect(M, tol), tol)
    return np.clip(w, 0.0, 1.0)


def as_density(M, tol: ToleranceConfig = DEFAULT_TOL, sub_normalized: bool = False) -> np.ndarray:
    """Validate a density operator.

    With ``sub_normalized=True`` the trace may lie anywhere in ``[0, 1]``.
    """
    M = as_cmatrix(M)
    herr = hermiticity_error(M)
    if herr > tol.hermit_tol:
        raise NotADensity(f"not Hermitian: ||M - M*|| = {herr:.3e}")
    lo, _ = spectrum_bounds(M, tol)
    if lo < -tol.psd_tol:
        raise NotADensity(f"not PSD: smallest eigenvalue {lo:.3e}")
    tr = np.trace(M).real
    if sub_normalized:
        if tr < -1e-10 or tr > 1.0 + 1e-10:
            raise NotADensity(f"trace {tr!r} outside [0, 1]")
    elif abs(tr - 1.0) > 1e-10:
        raise NotADensity(f"trace {tr!r} differs from 1")
    return hermitian_part(M)


def is_projection(P, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    P = np.asarray(P, dtype=np.complex128)
    return hermiticity_error(P) <= tol.hermit_tol and op_norm(P @ P - P) <= tol.eq_tol


def standard_seq_product(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``A o B = A^{1/2} B A^{1/2}``: measure ``A`` first, then ``B``."""
    A = as_cmatrix(A)
    B = as_cmatrix(B)
    same_dim(A, B)
    root = sqrt_psd(A, tol)
    return hermitian_part(root @ B @ root)


def probability(rho, A, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``Tr(rho A)``, clamped into ``[0, 1]`` when within ``psd_tol`` of it."""
    same_dim(rho, A)
    p = float(np.real(np.trace(np.asarray(rho) @ np.asarray(A))))
    if -tol.psd_tol <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + tol.psd_tol:
        return 1.0
    return p


def luders_condition(rho, A, tol: ToleranceConfig = DEFAULT_TOL):
    """State after observing ``A``: ``A^{1/2} rho A^{1/2} / Tr(rho A)``.

    Returns :data:`ZeroOutcome` when ``Tr(rho A) <= psd_tol``.
    """
    same_dim(rho, A)
    p = probability(rho, A, tol)
    if p <= tol.psd_tol:
        return ZeroOutcome
    post = standard_seq_product(A, rho, tol)
    return post / np.trace(post).real


def commutator(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    return A @ B - B @ A


def commutes(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    same_dim(A, B)
    return op_norm(commutator(A, B)) <= tol.eq_tol


def basis_projection(index: int, dim: int) -> np.ndarray:
    P = np.zeros((dim, dim), dtype=np.complex128)
    P[index, index] = 1.0
    return P


def plus_projection(dim: int = 2) -> np.ndarray:
    """``|+><+|`` on the first two basis vectors."""
    v = np.zeros(dim, dtype=np.complex128)
    v[0] = v[1] = 1 / np.sqrt(2)
    return np.outer(v, v.conj())


def functional_effect(H, coeffs, reflect: bool = False, tol: ToleranceConfig = DEFAULT_TOL):
    """``f(H)`` for an effect ``H`` and ``f(x) = sum_k c_k x^k`` (or ``(1-x)^k``).

    With non-negative ``coeffs`` summing to at most one, ``f`` maps ``[0, 1]``
    into ``[0, 1]`` so the result is an effect commuting with ``H``.
    """
    w, v = hermitian_eig(H, tol)
    x = np.clip(w, 0.0, 1.0)
    if reflect:
        x = 1.0 - x
    fx = np.polynomial.polynomial.polyval(x, np.asarray(coeffs, dtype=float))
    return hermitian_part((v * fx) @ dagger(v))
