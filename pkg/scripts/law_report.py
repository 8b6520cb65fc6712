#!/usr/bin/env python3
"""Run the Galois-connection and compatibility law suites on random instances
of all three case studies and print one report block per law.

Usage: python3 scripts/law_report.py [SEED] [SAMPLES_PER_INSTANCE]
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from fixwit.bisim import BisimInstance, Diamond, HmlTrue, Not  # noqa: E402
from fixwit.fixpoint import LawReport, check_compatibility, check_galois_laws  # noqa: E402
from fixwit.metric import LabelInd, MetricInstance, Next  # noqa: E402
from fixwit.termination import TerminationInstance, enumerate_trees  # noqa: E402
from helpers import random_lmc, random_mc, random_ts  # noqa: E402


def main() -> int:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 7
    per_instance = int(sys.argv[2]) if len(sys.argv) > 2 else 8
    rng = random.Random(seed)

    galois = LawReport()
    compat = LawReport()

    for _ in range(10):
        ts = random_ts(rng, max_n=5)
        inst = BisimInstance(ts)
        base = Diamond(HmlTrue())
        pool = [base, Diamond(base), Diamond(Not(base))]
        samples = [frozenset(rng.sample(pool, rng.randint(0, 3))) for _ in range(per_instance)]
        behaviours = [inst.behaviour.sample(rng) for _ in range(per_instance)]
        galois.merge(check_galois_laws(inst, samples, behaviours))
        compat.merge(check_compatibility(inst, samples))

    for _ in range(10):
        lmc = random_lmc(rng, max_n=4)
        inst = MetricInstance(lmc, max_iter=8)
        pool = [LabelInd("a"), LabelInd("b"), Next(LabelInd("a"))]
        samples = [frozenset(rng.sample(pool, rng.randint(0, 2))) for _ in range(per_instance)]
        behaviours = [inst.behaviour.sample(rng) for _ in range(per_instance)]
        galois.merge(check_galois_laws(inst, samples, behaviours))
        compat.merge(check_compatibility(inst, samples))

    for _ in range(10):
        mc = random_mc(rng, max_n=4)
        inst = TerminationInstance(mc, max_iter=16)
        trees = enumerate_trees(mc, max_height=3, limit=50)
        samples = [
            frozenset(rng.sample(trees, min(len(trees), rng.randint(0, 3))))
            for _ in range(per_instance)
        ]
        behaviours = [inst.behaviour.sample(rng) for _ in range(per_instance)]
        galois.merge(check_galois_laws(inst, samples, behaviours))
        compat.merge(check_compatibility(inst, samples))

    print("Galois connection laws (l <= gamma(alpha(l)); alpha(gamma(d)) <= d):")
    print(galois)
    print("\nCompatibility law (alpha . l = b . alpha):")
    print(compat)
    return 0 if galois.ok and compat.ok else 1


if __name__ == "__main__":
    sys.exit(main())
