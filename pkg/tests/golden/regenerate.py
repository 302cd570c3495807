"""Rebuild the golden fuzz summaries for the built-in candidates.

Run from the repository root:  python tests/golden/regenerate.py
"""

import json
import pathlib

import numpy as np

from seqeffect.axioms import JORDAN, TRANSPOSE_TWISTED, fuzz_candidate, unitary_twisted

HERE = pathlib.Path(__file__).parent
CANDIDATES = {
    "transpose": TRANSPOSE_TWISTED,
    "unitary_diag_1_i": unitary_twisted(np.diag([1, 1j])),
    "jordan": JORDAN,
}


def summarize(report):
    return {
        "failed_conditions": sorted(report.failed_conditions),
        "witnesses": {
            r.condition_id: {"trial": r.witness.trial, "residual": r.witness.residual}
            for r in report.reports
            if r.witness is not None
        },
    }


def main():
    out = {name: summarize(fuzz_candidate(c, [2], 2000, 42)) for name, c in CANDIDATES.items()}
    out["_config"] = {"dims": [2], "trials": 2000, "seed": 42}
    (HERE / "builtin_dim2_seed42.json").write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
