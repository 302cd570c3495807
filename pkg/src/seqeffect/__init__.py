"""Sequential product of quantum effects: checks, witnesses and proof replay."""

__version__ = "0.1.0"

from .axioms import (
    JORDAN,
    STANDARD,
    TRANSPOSE_TWISTED,
    CandidateProduct,
    ConditionReport,
    FuzzReport,
    ViolationWitness,
    fuzz_candidate,
    replay_witness,
    unitary_twisted,
)
from .channels import DiscretePOVM, KrausChannel, apply_channel, instrument_from_povm, outcome_update
from .classify import (
    DavisForm,
    classify_pure_positive,
    regularize_invertible,
    superoperator_from_product,
    trace_theorem_steps,
)
from .effects import ZeroOutcome, luders_condition, probability, standard_seq_product
from .matcore import ToleranceConfig, polar_decompose, sqrt_psd
