"""Numerical checks of the sequential-product conditions for arbitrary candidates.

A candidate is any callable ``(A, B) -> matrix`` on effects.  Each condition
is a pair of a sampler, which draws the random inputs of one trial from a
per-trial RNG stream, and a residual function, which evaluates the candidate on
those inputs.  A trial whose residual exceeds the condition's tolerance is a
violation; the worst violation is kept as a :class:`ViolationWitness` holding
the exact inputs, so :func:`replay_witness` reproduces it bit for bit.

Per-trial streams are derived from ``(seed, trial index)`` only, which makes
every report independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .effects import effect_violation, functional_effect, is_effect, standard_seq_product
from .errors import SeqEffectError
from .matcore import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_cmatrix,
    check_dim,
    identity,
    op_norm,
    random_density,
    random_effect,
    random_rank1_projection,
    sqrt_psd,
)
from .rng import SplitMix64

CLOSURE = "CLOSURE"
DUALITY = "DUALITY"
UNIT = "UNIT"
WEAK_ASSOC = "WEAK_ASSOC"
CONTINUITY = "CONTINUITY"
PURITY = "PURITY"
AFFINITY = "AFFINITY"
HALF_DUALITY = "HALF_DUALITY"
HALF_ASSOC = "HALF_ASSOC"
COMMUTING_PRODUCT = "COMMUTING_PRODUCT"

FIVE_CONDITIONS = (DUALITY, UNIT, WEAK_ASSOC, CONTINUITY, PURITY)
FUZZ_ORDER = (CLOSURE, DUALITY, UNIT, WEAK_ASSOC, CONTINUITY, PURITY, AFFINITY, HALF_DUALITY, HALF_ASSOC)

CONTINUITY_L = 100.0
CONTINUITY_EXPONENTS = (2, 3, 4, 5, 6)
THEOREM_TENSION = "THEOREM_TENSION"


# --- candidates ----------------------------------------------------------------


@dataclass(frozen=True)
class CandidateProduct:
    """A named binary operation on effects submitted for checking."""

    name: str
    op: Callable = field(compare=False)
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, A, B) -> np.ndarray:
        return np.asarray(self.op(A, B), dtype=np.complex128)


def _transpose_twisted(A, B):
    root = sqrt_psd(A)
    return root @ np.asarray(B).T @ root


def _jordan(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    return 0.5 * (A @ B + B @ A)


STANDARD = CandidateProduct("standard", standard_seq_product)
TRANSPOSE_TWISTED = CandidateProduct("transpose", _transpose_twisted)
JORDAN = CandidateProduct("jordan", _jordan)
ZERO_PRODUCT = CandidateProduct("zero", lambda A, B: np.zeros_like(np.asarray(A, dtype=np.complex128)))


def unitary_twisted(U) -> CandidateProduct:
    """``U A^{1/2} B A^{1/2} U*`` for a fixed unitary ``U``."""
    U = as_cmatrix(U)
    Ud = U.conj().T

    def op(A, B):
        if np.shape(A)[0] != U.shape[0]:
            raise SeqEffectError(f"twist unitary has dim {U.shape[0]}, operands have dim {np.shape(A)[0]}")
        return U @ standard_seq_product(A, B) @ Ud

    return CandidateProduct("unitary", op, {"U": U})


BUILTIN_CANDIDATES = {c.name: c for c in (STANDARD, TRANSPOSE_TWISTED, JORDAN)}


# --- reports --------------------------------------------------------------------


@dataclass
class ViolationWitness:
    condition_id: str
    inputs: dict
    residual: float
    dim: int
    trial: int

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "residual": self.residual,
            "dim": self.dim,
            "trial": self.trial,
            "inputs": dict(self.inputs),
        }


@dataclass
class ConditionReport:
    condition_id: str
    passed: bool
    max_residual: float
    trials: int
    witness: ViolationWitness | None = None
    tolerance: float = 0.0
    dim: int = 0
    candidate: str = ""
    evaluated: int = 0
    skipped: int = 0
    closure_failures: int = 0
    argmax_trial: int | None = None
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "dim": self.dim,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "trials": self.trials,
            "evaluated": self.evaluated,
            "skipped": self.skipped,
            "closure_failures": self.closure_failures,
            "argmax_trial": self.argmax_trial,
            "witness": self.witness.to_dict() if self.witness is not None else None,
        }


@dataclass
class FuzzReport:
    candidate: str
    dims: list
    trials: int
    seed: int
    tol: ToleranceConfig
    reports: list
    flags: list
    max_deviation: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def failed_conditions(self) -> set:
        return {r.condition_id for r in self.reports if not r.passed}

    def witnesses(self):
        return [r.witness for r in self.reports if r.witness is not None]

    def to_dict(self) -> dict:
        return {
            "candidate": self.candidate,
            "dims": list(self.dims),
            "trials": self.trials,
            "seed": self.seed,
            "tolerances": self.tol.to_dict(),
            "passed": self.passed,
            "failed_conditions": sorted(self.failed_conditions),
            "flags": list(self.flags),
            "max_deviation_from_standard": self.max_deviation,
            "reports": [r.to_dict() for r in self.reports],
        }


class _Skip(Exception):
    def __init__(self, closure=False):
        self.closure = closure


def _product(prod, A, B):
    try:
        out = prod(A, B)
    except (SeqEffectError, ValueError, np.linalg.LinAlgError, ArithmeticError) as exc:
        raise _Skip(closure=True) from exc
    if out.shape != np.shape(A) or not np.all(np.isfinite(out)):
        raise _Skip(closure=True)
    return out


def _effect_product(prod, A, B, tol):
    """Product that must land in the effects to be fed back into ``prod``."""
    out = _product(prod, A, B)
    if not is_effect(out, tol):
        raise _Skip(closure=True)
    return out


def _trace(M) -> complex:
    return complex(np.trace(M))


# --- samplers -------------------------------------------------------------------


def _sample_pair(rng, dim):
    return {"A": random_effect(dim, rng), "B": random_effect(dim, rng)}


def _sample_triple(rng, dim):
    return {"A": random_effect(dim, rng), "B": random_effect(dim, rng), "rho": random_density(dim, rng)}


def _sample_single(rng, dim):
    return {"A": random_effect(dim, rng)}


def _sample_continuity(rng, dim):
    # every other trial starts at a rank-one projection, where A -> A^{1/2} is least regular
    coin = rng.uniform(1)[0]
    A = random_rank1_projection(dim, rng) if coin < 0.5 else random_effect(dim, rng)
    return {"A": A, "B": random_effect(dim, rng), "D": random_effect(dim, rng)}


def _sample_purity(rng, dim):
    return {"A": random_effect(dim, rng), "p": random_rank1_projection(dim, rng)}


def _sample_affinity(rng, dim):
    inputs = {"A": random_effect(dim, rng), "B": random_effect(dim, rng), "C": random_effect(dim, rng)}
    inputs["lam"] = np.array(rng.uniform(1)[0])
    return inputs


def _commuting_pair(rng, dim):
    H = random_effect(dim, rng)
    cf = rng.uniform(4)
    cg = rng.uniform(4)
    flips = rng.uniform(2) < 0.5
    A = functional_effect(H, cf / cf.sum(), reflect=bool(flips[0]))
    B = functional_effect(H, cg / cg.sum(), reflect=bool(flips[1]))
    return A, B


def _sample_commuting(rng, dim):
    A, B = _commuting_pair(rng, dim)
    return {"A": A, "B": B, "C": random_effect(dim, rng)}


def _sample_commuting_pair(rng, dim):
    A, B = _commuting_pair(rng, dim)
    return {"A": A, "B": B}


# --- residuals ------------------------------------------------------------------


def _res_closure(prod, x, tol):
    try:
        out = prod(x["A"], x["B"])
    except (SeqEffectError, ValueError, np.linalg.LinAlgError, ArithmeticError):
        return math.inf
    if out.shape != np.shape(x["A"]):
        return math.inf
    return effect_violation(out, tol)


def _res_duality(prod, x, tol):
    A, B, rho = x["A"], x["B"], x["rho"]
    lhs = _trace(_product(prod, A, rho) @ B)
    rhs = _trace(rho @ _product(prod, A, B))
    return abs(lhs - rhs)


def _res_unit(prod, x, tol):
    A = x["A"]
    I = identity(A.shape[0])
    return max(op_norm(_product(prod, A, I) - A), op_norm(_product(prod, I, A) - A))


def _res_weak_assoc(prod, x, tol):
    A, B = x["A"], x["B"]
    AB = _effect_product(prod, A, B, tol)
    AA = _effect_product(prod, A, A, tol)
    A2 = A @ A
    lhs = _product(prod, A, AB)
    return max(
        op_norm(lhs - _product(prod, AA, B)),
        op_norm(AA - A2),
        op_norm(lhs - _product(prod, A2, B)),
    )


def continuity_profile(prod, A, B, D, exponents=CONTINUITY_EXPONENTS):
    """Perturb ``A`` toward the effect ``D`` with ``||H_k|| = 10^-k``.

    ``A + H_k = (1 - t) A + t D`` stays an effect by convexity.  Returns a list
    of ``(||H_k||, ||(A + H_k) o B - A o B||)``.
    """
    base = _product(prod, A, B)
    direction = np.asarray(D) - np.asarray(A)
    dnorm = op_norm(direction)
    out = []
    for k in exponents:
        if dnorm <= 10.0 ** (-k):
            out.append((0.0, 0.0))
            continue
        H = (10.0 ** (-k) / dnorm) * direction
        out.append((op_norm(H), op_norm(_product(prod, A + H, B) - base)))
    return out


def _res_continuity(prod, x, tol):
    profile = continuity_profile(prod, x["A"], x["B"], x["D"])
    return max(max(0.0, delta - CONTINUITY_L * math.sqrt(h)) for h, delta in profile)


def _res_purity(prod, x, tol):
    out = _product(prod, x["A"], x["p"])
    s = np.linalg.svd(out, compute_uv=False)
    return float(s[1]) if s.size > 1 else 0.0


def _purity_leaves_effects(prod, x, tol):
    # non-effect outputs are counted, but the rank statement is still checked on them
    return effect_violation(_product(prod, x["A"], x["p"]), tol) > tol.psd_tol


def _res_affinity(prod, x, tol):
    A, B, C = x["A"], x["B"], x["C"]
    lam = float(x["lam"])
    mix = lam * B + (1.0 - lam) * C
    return op_norm(_product(prod, A, mix) - lam * _product(prod, A, B) - (1.0 - lam) * _product(prod, A, C))


def _res_half_duality(prod, x, tol):
    A, B, rho = x["A"], x["B"], x["rho"]
    eta = _product(prod, A, rho)
    if np.trace(eta).real <= tol.psd_tol:
        raise _Skip()
    # eta is a sub-normalized state, hence itself an effect
    if not is_effect(eta, tol):
        raise _Skip(closure=True)
    return abs(_trace(eta @ B) - _trace(_product(prod, B, eta)))


def _res_half_assoc(prod, x, tol):
    A, B, C = x["A"], x["B"], x["C"]
    AB = _effect_product(prod, A, B, tol)
    BC = _effect_product(prod, B, C, tol)
    return op_norm(_product(prod, AB, C) - _product(prod, A, BC))


def _res_commuting_product(prod, x, tol):
    A, B = x["A"], x["B"]
    return op_norm(_product(prod, A, B) - A @ B)


@dataclass(frozen=True)
class Condition:
    condition_id: str
    sampler: Callable
    residual: Callable
    tolerance: Callable
    closure_probe: Callable | None = None


_EQ = lambda tol: tol.eq_tol  # noqa: E731

CONDITIONS = {
    c.condition_id: c
    for c in (
        Condition(CLOSURE, _sample_pair, _res_closure, lambda tol: tol.psd_tol),
        Condition(DUALITY, _sample_triple, _res_duality, _EQ),
        Condition(UNIT, _sample_single, _res_unit, _EQ),
        Condition(WEAK_ASSOC, _sample_pair, _res_weak_assoc, _EQ),
        Condition(CONTINUITY, _sample_continuity, _res_continuity, _EQ),
        Condition(PURITY, _sample_purity, _res_purity, lambda tol: tol.rank_tol, _purity_leaves_effects),
        Condition(AFFINITY, _sample_affinity, _res_affinity, _EQ),
        Condition(HALF_DUALITY, _sample_triple, _res_half_duality, _EQ),
        Condition(HALF_ASSOC, _sample_commuting, _res_half_assoc, _EQ),
        Condition(COMMUTING_PRODUCT, _sample_commuting_pair, _res_commuting_product, _EQ),
    )
}


def trial_rng(seed: int, trial: int) -> SplitMix64:
    return SplitMix64(seed).spawn(trial)


def trial_inputs(condition_id: str, dim: int, seed: int, trial: int) -> dict:
    """Inputs of one trial, regenerated from ``(seed, trial)``."""
    return CONDITIONS[condition_id].sampler(trial_rng(seed, trial), dim)


def evaluate_trial(prod, condition_id: str, inputs: dict, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Residual of one trial; raises ``_Skip`` for inadmissible inputs."""
    return float(CONDITIONS[condition_id].residual(prod, inputs, tol))


def replay_witness(prod, witness: ViolationWitness, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    return evaluate_trial(prod, witness.condition_id, witness.inputs, tol)


def run_condition(
    prod,
    condition_id: str,
    dim: int,
    trials: int,
    seed: int,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> ConditionReport:
    """Run ``trials`` random trials of one condition and summarize them."""
    dim = check_dim(dim)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cond = CONDITIONS[condition_id]
    bound = cond.tolerance(tol)
    root = SplitMix64(seed)
    max_res = 0.0
    argmax = None
    worst_violation = None
    evaluated = skipped = closure_failures = 0
    for t in range(trials):
        inputs = cond.sampler(root.spawn(t), dim)
        try:
            res = float(cond.residual(prod, inputs, tol))
        except _Skip as skip:
            skipped += 1
            closure_failures += skip.closure
            continue
        evaluated += 1
        if cond.closure_probe is not None and cond.closure_probe(prod, inputs, tol):
            closure_failures += 1
        if math.isnan(res):
            res = math.inf
        if argmax is None or res > max_res:
            max_res, argmax = res, t
        if res > bound and (worst_violation is None or res > worst_violation[0]):
            worst_violation = (res, t, inputs)
    witness = None
    if worst_violation is not None:
        res, t, inputs = worst_violation
        witness = ViolationWitness(condition_id, inputs, res, dim, t)
    name = getattr(prod, "name", getattr(prod, "__name__", "anonymous"))
    return ConditionReport(
        condition_id=condition_id,
        passed=witness is None and max_res <= bound,
        max_residual=max_res,
        trials=trials,
        witness=witness,
        tolerance=bound,
        dim=dim,
        candidate=name,
        evaluated=evaluated,
        skipped=skipped,
        closure_failures=closure_failures,
        argmax_trial=argmax,
    )


def check_closure(prod, dim, trials, seed, tol=DEFAULT_TOL):
    """Outputs on random effect pairs must be effects."""
    return run_condition(prod, CLOSURE, dim, trials, seed, tol)


def check_duality(prod, dim, trials, seed, tol=DEFAULT_TOL):
    """``|Tr((A o rho) B) - Tr(rho (A o B))|`` with the state used as an effect."""
    return run_condition(prod, DUALITY, dim, trials, seed, tol)


def check_unit(prod, dim, trials, seed, tol=DEFAULT_TOL):
    return run_condition(prod, UNIT, dim, trials, seed, tol)


def check_weak_assoc(prod, dim, trials, seed, tol=DEFAULT_TOL):
    """``A o (A o B) = (A o A) o B = A^2 o B``, plus ``A o A = A^2``.

    Trials where ``A o B`` or ``A o A`` is not an effect are skipped and
    counted in ``closure_failures``.
    """
    return run_condition(prod, WEAK_ASSOC, dim, trials, seed, tol)


def check_continuity(prod, dim, trials, seed, tol=DEFAULT_TOL):
    """Hölder-1/2 probe in the first argument.

    The residual is the excess ``max(0, ||(A+H_k) o B - A o B|| - L ||H_k||^{1/2})``
    over ``k = 2..6`` with ``L = 100``; a continuous candidate scores 0.  This is
    a necessary-condition heuristic, not a proof of continuity.
    """
    return run_condition(prod, CONTINUITY, dim, trials, seed, tol)


def check_purity(prod, dim, trials, seed, tol=DEFAULT_TOL):
    """``A o p`` must have rank at most one for rank-one projections ``p``.

    The residual is the second singular value of ``A o p``.
    """
    return run_condition(prod, PURITY, dim, trials, seed, tol)


def check_lemma_affinity(prod, dim, trials, seed, tol=DEFAULT_TOL):
    return run_condition(prod, AFFINITY, dim, trials, seed, tol)


def check_half_duality(prod, dim, trials, seed, tol=DEFAULT_TOL):
    """``Tr((A o rho) B) = Tr(B o (A o rho))`` with ``A o rho`` taken as a sub-normalized state."""
    return run_condition(prod, HALF_DUALITY, dim, trials, seed, tol)


def check_commuting_assoc(prod, dim, trials, seed, tol=DEFAULT_TOL):
    """``(A o B) o C = A o (B o C)`` for commuting ``A = f(H)``, ``B = g(H)``."""
    return run_condition(prod, HALF_ASSOC, dim, trials, seed, tol)


def check_commuting_product(prod, dim, trials, seed, tol=DEFAULT_TOL):
    """``A o B = AB`` for commuting pairs (a property of the standard product)."""
    return run_condition(prod, COMMUTING_PRODUCT, dim, trials, seed, tol)


CHECKERS = {
    CLOSURE: check_closure,
    DUALITY: check_duality,
    UNIT: check_unit,
    WEAK_ASSOC: check_weak_assoc,
    CONTINUITY: check_continuity,
    PURITY: check_purity,
    AFFINITY: check_lemma_affinity,
    HALF_DUALITY: check_half_duality,
    HALF_ASSOC: check_commuting_assoc,
    COMMUTING_PRODUCT: check_commuting_product,
}


def max_deviation_from_standard(prod, dim, trials, seed, tol=DEFAULT_TOL) -> float:
    """Largest ``||prod(A, B) - A^{1/2} B A^{1/2}||`` over sampled pairs."""
    root = SplitMix64(seed).spawn(0x5EED)
    worst = 0.0
    for t in range(trials):
        x = _sample_pair(root.spawn(t), dim)
        try:
            out = _product(prod, x["A"], x["B"])
        except _Skip:
            return math.inf
        worst = max(worst, op_norm(out - standard_seq_product(x["A"], x["B"], tol)))
    return worst


def fuzz_candidate(prod, dims, trials_per_condition, seed, tol=DEFAULT_TOL, conditions=FUZZ_ORDER) -> FuzzReport:
    """Run every condition at every dimension.

    A candidate that differs from the standard product on some sampled pair
    by more than ``eq_tol`` while passing all five defining conditions gets a
    ``THEOREM_TENSION`` flag; that points to a checker bug or too few trials.
    """
    dims = [check_dim(d) for d in dims]
    reports = [
        run_condition(prod, cid, d, trials_per_condition, seed, tol) for d in dims for cid in conditions
    ]
    deviation = max(max_deviation_from_standard(prod, d, trials_per_condition, seed, tol) for d in dims)
    flags = []
    five_pass = all(r.passed for r in reports if r.condition_id in FIVE_CONDITIONS)
    if deviation > tol.eq_tol and five_pass:
        flags.append(THEOREM_TENSION)
    name = getattr(prod, "name", "anonymous")
    return FuzzReport(name, dims, trials_per_condition, seed, tol, reports, flags, deviation)
