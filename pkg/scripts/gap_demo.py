#!/usr/bin/env python3
"""Strategy cost versus certificate cost on the harmonic disjunction family.

Unit costs, Prob[x_i = 1] = 1/(i+2): the expected cost of the cheapest
certificate inside a random input stays below 2 for every size, while the
optimal testing strategy costs the n-th harmonic number. Certificate cost is
therefore a loose yardstick for strategies on this family.

Usage: python3 scripts/gap_demo.py [n ...]   (default sizes 4 8 16 32)
"""
import sys
from fractions import Fraction

from sbfe.core import expected_cost, optimal_expected_cost
from sbfe.policies import cp_ratio_policy
from sbfe.problems import expected_certificate_cost_disjunction, harmonic_gap_instance


def main(argv):
    sizes = [int(a) for a in argv] or [4, 8, 16, 32]
    print(f"{'n':>4} {'strategy':>12} {'harmonic':>12} {'certificate':>12} {'gap':>8}")
    for n in sizes:
        f, d, c = harmonic_gap_instance(n)
        strategy = expected_cost(cp_ratio_policy(d, c, "or"), d, c)
        if n <= 10:
            # cross-check the ordering policy against the exhaustive optimum
            opt, _ = optimal_expected_cost(f, d, c)
            assert abs(opt - strategy) < 1e-9, (n, opt, strategy)
        harmonic = float(sum(Fraction(1, t) for t in range(1, n + 1)))
        cert = expected_certificate_cost_disjunction(d, c)
        print(f"{n:>4} {strategy:>12.6f} {harmonic:>12.6f} {cert:>12.6f} {strategy / cert:>8.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
