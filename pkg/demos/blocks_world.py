"""Plan the Sussman anomaly, then the blocks world with an unknown block position.

    python demos/blocks_world.py
"""

from __future__ import annotations

from kplan import Plan, Query, check_secure, load, optimistic_plans, secure_plans
from kplan.corpus import DATA_DIR
from kplan.transition import format_state, legal_initial_states


def read(name: str) -> str:
    return (DATA_DIR / name).read_text()


def main() -> None:
    gd = load(read("bw-sussman.k"), read("bw.bg"))
    print("Sussman anomaly")
    for plan, witness in optimistic_plans(gd):
        print(" plan:", plan)
        print(" trajectory:", witness)
        print(" secure:", check_secure(gd, plan).secure)

    gd = load(read("bw-incomplete.k"), read("bwi.bg"))
    print("\nIncomplete blocks world")
    for s in legal_initial_states(gd):
        print(" initial state:", format_state(s))
    for plan in secure_plans(gd, limit=3):
        print(" secure plan:", plan)

    short = Plan.from_names(gd, [["move(c,d)"], ["move(a,c)"]])
    verdict = check_secure(gd, short, Query(gd.query.goal_pos, gd.query.goal_neg, 2))
    print(f" {short} secure? {verdict.secure}")
    print(" ", verdict.counterexample)


if __name__ == "__main__":
    main()
