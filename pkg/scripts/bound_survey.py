#!/usr/bin/env python3
"""Survey observed cost/optimum ratios against the proven bounds.

Runs seeded instance batteries through every engine, compares exact expected
costs with the exhaustive optimum, and prints the worst observed ratio next
to the bound it must respect.  Exits nonzero if any bound is violated.

Usage: python3 scripts/bound_survey.py [--seed S] [--count K] [--max-n N]
"""
import argparse
import sys

from sbfe.instances import (
    cdnf_battery,
    disjunction_battery,
    threshold_battery,
    threshold_set_battery,
)
from sbfe.policies import cost_order_policy, cp_ratio_policy
from sbfe.utility import cdnf_utility, threshold_utility
from sbfe.verify import (
    make_adg_driver,
    make_greedy_driver,
    make_policy_driver,
    ratio_vs_opt,
)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--max-n", type=int, default=9, dest="max_n")
    args = ap.parse_args(argv)
    k, s, hi = args.count, args.seed, args.max_n

    surveys = [
        (
            "greedy on CNF/DNF pairs vs ln(goal)+1",
            make_greedy_driver(cdnf_utility, "goal"),
            cdnf_battery(k, s, n_lo=3, n_hi=hi),
        ),
        (
            "greedy on CNF/DNF pairs vs 2(ln P + 1)",
            make_greedy_driver(cdnf_utility, "single"),
            cdnf_battery(k, s, n_lo=3, n_hi=hi),
        ),
        (
            "dual greedy on thresholds vs 3",
            make_adg_driver(threshold_utility, lambda case, g: 3.0),
            threshold_battery(k, s + 1, n_lo=3, n_hi=hi),
        ),
        (
            "cost/probability ordering on disjunctions vs 1",
            make_policy_driver(
                lambda case: cp_ratio_policy(case.dist, case.costs, "or"), lambda case: 1.0
            ),
            disjunction_battery(k, s + 2, n_lo=2, n_hi=hi),
        ),
        (
            "increasing-cost baseline vs n",
            make_policy_driver(
                lambda case: cost_order_policy(case.costs, case.f),
                lambda case: float(case.f.arity),
            ),
            cdnf_battery(k, s + 3, n_lo=3, n_hi=hi),
        ),
        (
            "simultaneous thresholds, greedy vs ln(total goal)+1",
            make_greedy_driver(lambda fs: fs.utility(), "goal"),
            threshold_set_battery(max(4, k // 2), s + 4, m_hi=3, n_lo=3, n_hi=hi),
        ),
        (
            "simultaneous thresholds, dual greedy vs max coefficient mass",
            make_adg_driver(lambda fs: fs.utility(), lambda case, g: float(case.f.d_max)),
            threshold_set_battery(max(4, k // 2), s + 4, m_hi=3, n_lo=3, n_hi=hi),
        ),
    ]

    failures = 0
    for name, driver, battery in surveys:
        rep = ratio_vs_opt(driver, battery)
        flag = "ok " if rep.ok else "VIOLATED"
        print(f"{flag}  worst {rep.worst_ratio:7.3f}  ({len(rep.rows)} instances)  {name}")
        failures += 0 if rep.ok else 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
