"""Dense complex-matrix kernel.

Matrices are plain ``numpy`` complex arrays of shape ``(d, d)`` with
``2 <= d <= 16``.  Every function is pure; random generators take an explicit
seed or :class:`~seqeffect.rng.SplitMix64` instance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotHermitian, NotPSD, UnsupportedDim
from .rng import SplitMix64, as_rng

MIN_DIM = 2
MAX_DIM = 16


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds shared by every check in the package.

    Attributes
    ----------
    hermit_tol : float
        Bound on ``||M - M*||`` for a matrix to count as Hermitian.
    psd_tol : float
        Eigenvalue floor; eigenvalues in ``[-psd_tol, 0)`` are clamped to zero.
    eq_tol : float
        Operator-norm bound under which two matrices are considered equal.
    rank_tol : float
        Eigenvalue threshold used for numerical rank.
    """

    hermit_tol: float = 1e-10
    psd_tol: float = 1e-9
    eq_tol: float = 1e-8
    rank_tol: float = 1e-7

    def __post_init__(self):
        for name in ("hermit_tol", "psd_tol", "eq_tol", "rank_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value}")
        if self.psd_tol >= self.eq_tol:
            warnings.warn(
                f"psd_tol ({self.psd_tol}) >= eq_tol ({self.eq_tol}); "
                "clamping may hide differences the equality checks look for",
                stacklevel=3,
            )

    def to_dict(self) -> dict:
        return {
            "hermit_tol": self.hermit_tol,
            "psd_tol": self.psd_tol,
            "eq_tol": self.eq_tol,
            "rank_tol": self.rank_tol,
        }


DEFAULT_TOL = ToleranceConfig()


def check_dim(dim: int) -> int:
    if not isinstance(dim, (int, np.integer)) or not MIN_DIM <= dim <= MAX_DIM:
        raise UnsupportedDim(f"dimension must be an integer in [{MIN_DIM}, {MAX_DIM}], got {dim!r}")
    return int(dim)


def as_cmatrix(M) -> np.ndarray:
    """Coerce to a finite square complex matrix."""
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + dagger(M))


def hermiticity_error(M: np.ndarray) -> float:
    return op_norm(M - dagger(M))


def op_norm(M) -> float:
    """Largest singular value."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


def _require_hermitian(M: np.ndarray, tol: ToleranceConfig) -> np.ndarray:
    skew = M - dagger(M)
    # Frobenius norm bounds the operator norm, so the SVD is only needed near the threshold
    if np.sqrt(np.sum(skew.real**2 + skew.imag**2)) > tol.hermit_tol and (err := op_norm(skew)) > tol.hermit_tol:
        raise NotHermitian(f"||M - M*|| = {err:.3e} exceeds hermit_tol = {tol.hermit_tol:.1e}")
    return hermitian_part(M)


def _off_diagonal(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigh(M, max_sweeps: int = 100, eps: float = 1e-15):
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Each rotation zeroes one off-diagonal pair ``(p, q)`` using the complex
    Givens rotation built from ``|M[p, q]|`` and its phase.  Sweeps stop when
    the off-diagonal Frobenius mass drops below ``eps`` times the total norm.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Eigenvalues ascending; eigenvector columns matching.

    Raises
    ------
    NoConvergence
        If ``max_sweeps`` sweeps are not enough.
    """
    a = hermitian_part(as_cmatrix(M)).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for sweep in range(1, max_sweeps + 1):
        if _off_diagonal(a) <= eps * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= eps * scale * 1e-3:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2.0 * mag, aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                # columns p, q of the rotation J: J[p,p]=c, J[q,p]=-s*conj(phase), J[p,q]=s*phase, J[q,q]=c
                jp = np.zeros(n, dtype=np.complex128)
                jq = np.zeros(n, dtype=np.complex128)
                jp[p], jp[q] = c, -s * np.conj(phase)
                jq[p], jq[q] = s * phase, c
                colp = a @ jp
                colq = a @ jq
                a[:, p], a[:, q] = colp, colq
                rowp = jp.conj() @ a
                rowq = jq.conj() @ a
                a[p, :], a[q, :] = rowp, rowq
                a[p, q] = a[q, p] = 0.0
                vp = v @ jp
                vq = v @ jq
                v[:, p], v[:, q] = vp, vq
    else:
        if _off_diagonal(a) > eps * scale * 10:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps", iterations=max_sweeps)
    w = np.diag(a).real
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eig(M, tol: ToleranceConfig = DEFAULT_TOL, method: str = "lapack"):
    """Eigendecomposition ``M = V diag(w) V*`` with ``w`` ascending.

    ``method="lapack"`` (default) calls ``numpy.linalg.eigh``;
    ``method="jacobi"`` uses :func:`jacobi_eigh`.
    """
    H = _require_hermitian(as_cmatrix(M), tol)
    if method == "jacobi":
        return jacobi_eigh(H)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    try:
        w, v = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigh failed: {exc}") from exc
    return w, v


def _clamped_spectrum(M, tol: ToleranceConfig):
    w, v = hermitian_eig(M, tol)
    if w[0] < -tol.psd_tol:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} below -psd_tol = {-tol.psd_tol:.1e}")
    return np.clip(w, 0.0, None), v


def apply_function(M, f, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Spectral calculus ``f(M)`` for Hermitian ``M``."""
    w, v = hermitian_eig(M, tol)
    return (v * f(w)) @ dagger(v)


def sqrt_psd(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Unique positive semidefinite square root.

    Eigenvalues in ``[-psd_tol, 0)`` are treated as rounding and clamped to 0,
    as are positive eigenvalues below the rounding floor ``d * eps * max|w|``
    (their square roots would otherwise inject ``sqrt(eps)``-sized noise).

    Raises
    ------
    NotHermitian, NotPSD
    """
    w, v = _clamped_spectrum(M, tol)
    floor = w.size * np.finfo(float).eps * (np.max(np.abs(w)) if w.size else 0.0)
    w = np.where(w <= floor, 0.0, w)
    root = (v * np.sqrt(w)) @ dagger(v)
    return hermitian_part(root)


def polar_decompose(C, tol: ToleranceConfig = DEFAULT_TOL):
    """Right polar decomposition ``C = U P`` with ``P = (C* C)^{1/2}``.

    ``U`` is built from the SVD ``C = W S V*`` as ``W V*``; on ``ker P`` it is
    an arbitrary (here unitary) completion, only its action on ``range P`` is
    determined by ``C``.
    """
    C = as_cmatrix(C)
    try:
        W, s, Vh = np.linalg.svd(C)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"svd failed: {exc}") from exc
    U = W @ Vh
    P = hermitian_part((dagger(Vh) * s) @ Vh)
    return U, P


def numerical_rank(M, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Number of eigenvalues of a PSD matrix above ``rank_tol``."""
    w, _ = hermitian_eig(M, tol)
    if w[0] < -tol.psd_tol:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} below -psd_tol")
    return int(np.sum(w > tol.rank_tol))


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def zero(dim: int) -> np.ndarray:
    return np.zeros((dim, dim), dtype=np.complex128)


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def projector(vec) -> np.ndarray:
    """Rank-one projection onto ``span(vec)``."""
    vec = np.asarray(vec, dtype=np.complex128)
    vec = vec / np.linalg.norm(vec)
    return np.outer(vec, vec.conj())


# --- random generation -------------------------------------------------------


def ginibre(dim: int, seed) -> np.ndarray:
    return as_rng(seed).complex_normal((dim, dim))


def random_unitary(dim: int, seed) -> np.ndarray:
    """Haar unitary: QR of a Ginibre matrix with the phases of ``diag(R)`` divided out."""
    dim = check_dim(dim)
    Q, R = np.linalg.qr(ginibre(dim, seed))
    d = np.diag(R)
    phases = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return Q * phases


def random_unit_vector(dim: int, seed) -> np.ndarray:
    dim = check_dim(dim)
    v = as_rng(seed).complex_normal(dim)
    return v / np.linalg.norm(v)


def random_effect(dim: int, seed) -> np.ndarray:
    """``V diag(u) V*`` with ``u_i ~ U[0, 1]`` and Haar ``V``."""
    dim = check_dim(dim)
    rng = as_rng(seed)
    V = random_unitary(dim, rng)
    u = rng.uniform(dim)
    return hermitian_part((V * u) @ dagger(V))


def random_density(dim: int, seed) -> np.ndarray:
    """``G G* / Tr(G G*)`` for Ginibre ``G``."""
    dim = check_dim(dim)
    G = ginibre(dim, seed)
    rho = G @ dagger(G)
    return hermitian_part(rho / np.trace(rho).real)


def random_rank1_projection(dim: int, seed) -> np.ndarray:
    return projector(random_unit_vector(dim, seed))


def random_hermitian(dim: int, seed) -> np.ndarray:
    dim = check_dim(dim)
    return hermitian_part(ginibre(dim, seed))


__all__ = [
    "DEFAULT_TOL",
    "MAX_DIM",
    "MIN_DIM",
    "SplitMix64",
    "ToleranceConfig",
    "apply_function",
    "as_cmatrix",
    "check_dim",
    "dagger",
    "hermitian_eig",
    "hermitian_part",
    "hermiticity_error",
    "identity",
    "jacobi_eigh",
    "ket",
    "numerical_rank",
    "op_norm",
    "polar_decompose",
    "projector",
    "random_density",
    "random_effect",
    "random_hermitian",
    "random_rank1_projection",
    "random_unit_vector",
    "random_unitary",
    "sqrt_psd",
    "zero",
]
