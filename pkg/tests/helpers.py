"""Independent oracles shared by the test modules.

Everything here deliberately avoids the code paths it is used to check:
expected costs come from per-input simulation instead of tree recursion,
certificates from extension enumeration instead of formula shortcuts, and
extrema from brute force instead of the closed forms.
"""
from __future__ import annotations

from sbfe.core import all_assignments, extensions, prob_of
from sbfe.policies import run_policy
from sbfe.utility import CdnfFormula


def enumeration_expected_cost(policy, d, c, n: int) -> float:
    """Simulate the policy on every input and weight by that input's mass."""
    total = 0.0
    for x in all_assignments(n):
        trace = run_policy(policy, x, n, c)
        total += prob_of(x, d) * trace.total_cost
    return total


def brute_certificate(f, b):
    """Forced output of f on every extension of b, scanning all of them."""
    values = {f.evaluate(x) for x in extensions(b)}
    return values.pop() if len(values) == 1 else None


def brute_diff_extrema(coeffs, b):
    """(min, max) of sum(coeffs_i * x_i) over extensions of b, by enumeration."""
    vals = [sum(a * v for a, v in zip(coeffs, x)) for x in extensions(b)]
    return min(vals), max(vals)


def conjunction_formula(n: int) -> CdnfFormula:
    """x_1 and ... and x_n as a CNF/DNF pair (n singleton clauses, one term)."""
    clauses = tuple(frozenset((i,)) for i in range(1, n + 1))
    return CdnfFormula(n, clauses, (frozenset(range(1, n + 1)),))
