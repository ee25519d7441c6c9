"""Turn a random forall-exists QBF into a plan security question and compare answers.

    python demos/qbf_reduction.py [seed]
"""

from __future__ import annotations

import random
import sys

from kplan import check_secure
from kplan.reductions import all_true_satisfies, oracle_qbf, qbf2_to_security, random_qbf


def main(seed: int = 0) -> None:
    rng = random.Random(seed)
    while True:
        qbf = random_qbf(rng, [("forall", "x", 2), ("exists", "y", 2)], 4)
        if all_true_satisfies(qbf.matrix):
            break
    print("prefix:", qbf.prefix, qbf.blocks)
    print("clauses:", [[("" if l > 0 else "-") + qbf.matrix.variables[abs(l) - 1] for l in c]
                       for c in qbf.matrix.clauses])
    inst = qbf2_to_security(qbf)
    print("\n" + inst.text)
    verdict = check_secure(inst.domain, inst.candidate_plan())
    print("QBF true (brute force):", oracle_qbf(qbf))
    print(f"plan {inst.candidate_plan()} secure:", verdict.secure)
    if verdict.counterexample:
        print("counterexample:", verdict.counterexample)


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
