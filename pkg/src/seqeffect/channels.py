"""Kraus channels, discrete POVMs and their Lüders instruments."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .effects import ZeroOutcome, as_effect, probability, same_dim, standard_seq_product
from .errors import DimMismatch, IndexOutOfRange, NotAResolution, NotTracePreserving
from .matcore import (
    DEFAULT_TOL,
    ToleranceConfig,
    apply_function,
    as_cmatrix,
    check_dim,
    dagger,
    ginibre,
    hermitian_part,
    identity,
    op_norm,
    sqrt_psd,
)
from .rng import as_rng


@dataclass(frozen=True)
class KrausChannel:
    """Trace-preserving operation ``rho -> sum_i A_i rho A_i*``."""

    elements: tuple
    tol: ToleranceConfig = field(default=DEFAULT_TOL, compare=False, repr=False)

    def __post_init__(self):
        elements = tuple(as_cmatrix(a) for a in self.elements)
        if not elements:
            raise ValueError("a channel needs at least one operational element")
        same_dim(*elements)
        object.__setattr__(self, "elements", elements)
        defect = op_norm(self.completeness() - identity(self.dim))
        if defect > self.tol.eq_tol:
            raise NotTracePreserving(f"||sum A_i* A_i - I|| = {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def completeness(self) -> np.ndarray:
        return sum(dagger(a) @ a for a in self.elements)


@dataclass(frozen=True)
class DiscretePOVM:
    """Finite family of effects resolving the identity."""

    effects: tuple
    tol: ToleranceConfig = field(default=DEFAULT_TOL, compare=False, repr=False)

    def __post_init__(self):
        if not len(self.effects):
            raise ValueError("a POVM needs at least one effect")
        effects = tuple(as_effect(e, self.tol) for e in self.effects)
        same_dim(*effects)
        object.__setattr__(self, "effects", effects)
        defect = op_norm(sum(effects) - identity(self.dim))
        if defect > self.tol.eq_tol:
            raise NotAResolution(f"||sum E_i - I|| = {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self):
        return len(self.effects)


def apply_channel(ch: KrausChannel, rho) -> np.ndarray:
    rho = as_cmatrix(rho)
    if rho.shape[0] != ch.dim:
        raise DimMismatch(f"state has dim {rho.shape[0]}, channel has dim {ch.dim}")
    return hermitian_part(sum(a @ rho @ dagger(a) for a in ch.elements))


def outcome_weight(ch: KrausChannel, i: int, rho) -> np.ndarray:
    """Unnormalized post-measurement operator ``A_i rho A_i*``."""
    if not 0 <= i < len(ch):
        raise IndexOutOfRange(f"outcome {i} not in [0, {len(ch)})")
    rho = as_cmatrix(rho)
    if rho.shape[0] != ch.dim:
        raise DimMismatch(f"state has dim {rho.shape[0]}, channel has dim {ch.dim}")
    a = ch.elements[i]
    return hermitian_part(a @ rho @ dagger(a))


def outcome_probabilities(ch: KrausChannel, rho) -> np.ndarray:
    return np.array([np.trace(outcome_weight(ch, i, rho)).real for i in range(len(ch))])


def outcome_update(ch: KrausChannel, i: int, rho, tol: ToleranceConfig = DEFAULT_TOL):
    """Normalized post-measurement state for outcome ``i``, or :data:`ZeroOutcome`."""
    w = outcome_weight(ch, i, rho)
    p = np.trace(w).real
    if p <= tol.psd_tol:
        return ZeroOutcome
    return w / p


def instrument_from_povm(povm: DiscretePOVM) -> KrausChannel:
    """Lüders instrument with operational elements ``E_i^{1/2}``."""
    try:
        roots = tuple(sqrt_psd(e, povm.tol) for e in povm.effects)
        return KrausChannel(roots, tol=povm.tol)
    except NotTracePreserving as exc:
        raise NotAResolution(str(exc)) from exc


def check_proba_identity(povm: DiscretePOVM, i: int, rho, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Residual of ``E_i^{1/2} rho E_i^{1/2} = P_rho(E_i) (rho | E_i)``.

    When the outcome has probability zero the right side is taken as zero and
    the residual is the norm of the unnormalized left side.
    """
    if not 0 <= i < len(povm):
        raise IndexOutOfRange(f"outcome {i} not in [0, {len(povm)})")
    E = povm.effects[i]
    lhs = standard_seq_product(E, rho, tol)
    p = probability(rho, E, tol)
    if p <= tol.psd_tol:
        return op_norm(lhs)
    conditioned = lhs / np.trace(lhs).real
    return op_norm(lhs - p * conditioned)


def random_povm(dim: int, outcomes: int, seed, tol: ToleranceConfig = DEFAULT_TOL) -> DiscretePOVM:
    """``E_j = S^{-1/2} G_j S^{-1/2}`` for Ginibre-Wishart blocks ``G_j`` and ``S = sum G_j``."""
    dim = check_dim(dim)
    if outcomes < 1:
        raise ValueError("need at least one outcome")
    rng = as_rng(seed)
    blocks = []
    for _ in range(outcomes):
        g = ginibre(dim, rng)
        blocks.append(hermitian_part(g @ dagger(g)))
    S = sum(blocks)
    if np.linalg.eigvalsh(S)[0] <= tol.psd_tol:
        S = S + tol.psd_tol * identity(dim)
    inv_root = apply_function(S, lambda w: 1.0 / np.sqrt(w), tol)
    effects = [hermitian_part(inv_root @ g @ inv_root) for g in blocks]
    # push the rounding residue into the last effect so the family sums to I exactly
    effects[-1] = hermitian_part(identity(dim) - sum(effects[:-1]))
    return DiscretePOVM(tuple(effects), tol=tol)


def sample_outcome(probs, u: float) -> int:
    """Inverse-CDF sampling of an outcome index from a uniform ``u`` in ``[0, 1)``."""
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(cdf) - 1))


def simulate_measurements(povm: DiscretePOVM, rho, steps: int, seed, tol: ToleranceConfig = DEFAULT_TOL):
    """Repeatedly measure ``povm`` on a state, updating by the Lüders rule.

    Returns a list of per-step records ``{"outcome", "probabilities", "state"}``.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    instrument = instrument_from_povm(povm)
    rng = as_rng(seed)
    state = as_cmatrix(rho)
    out = []
    for _ in range(steps):
        probs = outcome_probabilities(instrument, state)
        k = sample_outcome(probs, float(rng.uniform(1)[0]))
        post = outcome_update(instrument, k, state, tol)
        if post is ZeroOutcome:  # only reachable through rounding at a zero-probability outcome
            post = state
        out.append({"outcome": k, "probabilities": probs, "state": post})
        state = post
    return out
