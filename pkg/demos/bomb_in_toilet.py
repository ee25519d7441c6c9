"""Minimal secure plan lengths for the bomb-in-the-toilet family.

For each variant and instance size the shortest plan length with a secure
plan is found by iterative deepening, next to the number of such plans.

    python demos/bomb_in_toilet.py [max_packages]
"""

from __future__ import annotations

import sys

from kplan import CONCURRENT, SEQUENTIAL, load, secure_plans
from kplan.corpus import DATA_DIR

VARIANTS = [("bt", SEQUENTIAL), ("bt", CONCURRENT), ("btc", SEQUENTIAL), ("btuc", SEQUENTIAL),
            ("bmtc", CONCURRENT), ("bmtuc", CONCURRENT)]


def background(p: int, t: int) -> str:
    return " ".join([f"package({i})." for i in range(1, p + 1)] + [f"toilet({i})." for i in range(1, t + 1)])


def shortest(gd, mode: str, horizon: int = 12) -> tuple[int, int] | None:
    for n in range(horizon + 1):
        plans = list(secure_plans(gd, mode=mode, plan_length=n))
        if plans:
            return n, len(plans)
    return None


def main(max_packages: int = 3) -> None:
    print(f"{'variant':8} {'mode':11} {'p':>2} {'t':>2}  {'length':>6} {'plans':>6}")
    for name, mode in VARIANTS:
        text = (DATA_DIR / f"{name}.k").read_text()
        for p in range(1, max_packages + 1):
            for t in (1, 2):
                found = shortest(load(text, background(p, t)), mode)
                n, count = found if found else ("-", "-")
                print(f"{name:8} {mode:11} {p:>2} {t:>2}  {n:>6} {count:>6}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 3)
