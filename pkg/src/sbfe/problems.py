"""End-to-end drivers: single-formula evaluation, simultaneous evaluation,
ranking of linear functions, and min-knapsack via the dual greedy."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .core import (
    Assignment,
    LimitError,
    Partial,
    ProductDistribution,
    RunTrace,
    as_costs,
    as_probabilities,
)
from .policies import adaptive_dual_greedy, adaptive_greedy
from .utility import (
    CdnfFormula,
    LinearSystem,
    ThresholdFormula,
    UtilityFunction,
    cdnf_utility,
    combine_and_all,
    constant_zero_utility,
    ranking_pair_utility,
    threshold_utility,
)

_EMPTY = RunTrace((), (), 0.0)


def _engine(name: str):
    if name == "greedy":
        return adaptive_greedy
    if name == "adg":
        return adaptive_dual_greedy
    raise ValueError(f"unknown engine {name!r}")


# ---------------------------------------------------------------------------
# single-formula evaluation


def evaluate_cdnf(f: CdnfFormula, d, c, outcomes) -> tuple:
    """Evaluate a CNF/DNF pair with the greedy policy.

    The answer is read off whichever counter hit its goal: all clauses
    satisfied means 1, all terms falsified means 0.  Constant formulas are
    answered immediately at zero cost.
    """
    cv = f.constant_value()
    if cv is not None:
        return cv, _EMPTY
    trace = adaptive_greedy(cdnf_utility(f), d, c, outcomes)
    value = f.certificate(trace.final(f.arity))
    if value is None:
        raise RuntimeError("greedy stopped before certifying; utility broken")
    return value, trace


def evaluate_threshold_greedy(f: ThresholdFormula, d, c, outcomes) -> tuple:
    """Evaluate a linear threshold formula with the greedy policy."""
    cv = f.constant_value()
    if cv is not None:
        return cv, _EMPTY
    trace = adaptive_greedy(threshold_utility(f), d, c, outcomes)
    value = f.certificate(trace.final(f.arity))
    if value is None:
        raise RuntimeError("greedy stopped before certifying; utility broken")
    return value, trace


def evaluate_threshold_adg(f: ThresholdFormula, d, c, outcomes) -> tuple:
    """Evaluate a linear threshold formula with the dual greedy policy; the
    observed per-prefix ratios in the trace stay below 3."""
    cv = f.constant_value()
    if cv is not None:
        return cv, _EMPTY
    trace = adaptive_dual_greedy(threshold_utility(f), d, c, outcomes)
    value = f.certificate(trace.final(f.arity))
    if value is None:
        raise RuntimeError("dual greedy stopped before certifying; utility broken")
    return value, trace


# ---------------------------------------------------------------------------
# simultaneous evaluation


@dataclass(frozen=True)
class ThresholdSet:
    """Several threshold formulas over the same variables, evaluated together."""

    formulas: tuple

    def __post_init__(self):
        object.__setattr__(self, "formulas", tuple(self.formulas))
        if not self.formulas:
            raise ValueError("need at least one formula")
        n = self.formulas[0].arity
        if any(f.arity != n for f in self.formulas):
            raise ValueError("all formulas need the same arity")

    @property
    def m(self) -> int:
        return len(self.formulas)

    @property
    def arity(self) -> int:
        return self.formulas[0].arity

    @property
    def d_max(self) -> int:
        return max(f.total_magnitude for f in self.formulas)

    @property
    def d_avg(self) -> float:
        return sum(f.total_magnitude for f in self.formulas) / self.m

    def evaluate(self, x: Assignment) -> tuple:
        return tuple(f.evaluate(x) for f in self.formulas)

    def certificate(self, b: Partial) -> Optional[tuple]:
        out = []
        for f in self.formulas:
            v = f.certificate(b)
            if v is None:
                return None
            out.append(v)
        return tuple(out)

    def utility(self) -> UtilityFunction:
        """Sum of the per-formula utilities; covered when every formula is
        certified.  Constant formulas contribute an already-covered goal 0."""
        parts = []
        for f in self.formulas:
            if f.constant_value() is not None:
                parts.append(constant_zero_utility(self.arity))
            else:
                parts.append(threshold_utility(f))
        return combine_and_all(parts)


def simultaneous_thresholds(fs, d, c, outcomes, engine: str = "greedy") -> tuple:
    """Evaluate every formula on the same hidden input with one policy run."""
    inst = fs if isinstance(fs, ThresholdSet) else ThresholdSet(tuple(fs))
    g = inst.utility()
    if g.goal == 0:
        trace = _EMPTY
    else:
        trace = _engine(engine)(g, d, c, outcomes)
    bits = inst.certificate(trace.final(inst.arity))
    if bits is None:
        raise RuntimeError("policy stopped before certifying every formula")
    return bits, trace


def or_threshold(n: int, members: Sequence[int]) -> ThresholdFormula:
    """Disjunction of the given 0-based variables, as a threshold formula."""
    coeffs = [0] * n
    for i in members:
        coeffs[i] = 1
    return ThresholdFormula(tuple(coeffs), 1)


# ---------------------------------------------------------------------------
# ranking linear functions


@dataclass(frozen=True)
class RankingResult:
    """A valid ordering of function indices plus the tie classes that were
    collapsed while extracting it."""

    permutation: tuple
    equality_classes: tuple


@dataclass(frozen=True)
class RankingInstance:
    """Wrapper giving a linear system the instance interface: the output is
    determined once every pairwise order is decided."""

    sys: LinearSystem

    @property
    def arity(self) -> int:
        return self.sys.arity

    def evaluate(self, x: Assignment) -> tuple:
        return self.certificate(x)

    def certificate(self, b: Partial) -> Optional[tuple]:
        out = []
        for i in range(self.sys.m):
            for j in range(i + 1, self.sys.m):
                le = self.sys.known_le(i, j, b)
                ge = self.sys.known_ge(i, j, b)
                if not (le or ge):
                    return None
                out.append((le, ge))
        return tuple(out)


def ranking_utility(sys: LinearSystem) -> UtilityFunction:
    return combine_and_all(
        ranking_pair_utility(sys, i, j)
        for i in range(sys.m)
        for j in range(i + 1, sys.m)
    )


def _extract_ranking(sys: LinearSystem, b: Partial) -> RankingResult:
    m = sys.m
    le = [[True if i == j else sys.known_le(i, j, b) for j in range(m)] for i in range(m)]
    members = {i: [i] for i in range(m)}
    remaining = list(range(m))
    classes = []
    while remaining:
        emit = None
        for i in remaining:
            if all(le[i][j] for j in remaining if j != i):
                emit = i
                break
        if emit is not None:
            # anything mutually <= with the minimum is forced equal to it
            group = [emit] + [j for j in remaining if j != emit and le[j][emit]]
            cls = []
            for i in group:
                cls.extend(members.pop(i))
                remaining.remove(i)
            classes.append(tuple(sorted(cls)))
            continue
        # No known minimum: follow blocking witnesses until a cycle closes.
        # Around the cycle each step j -> k has f_k <= f_j known, so all the
        # cycle's functions are equal; collapse them into one class.
        pos = {}
        path = []
        cur = remaining[0]
        while cur not in pos:
            pos[cur] = len(path)
            path.append(cur)
            cur = next(j for j in remaining if j != cur and not le[cur][j])
        cycle = path[pos[cur] :]
        rep = min(cycle)
        for other in cycle:
            if other == rep:
                continue
            members[rep].extend(members.pop(other))
            remaining.remove(other)
            for k in range(m):
                le[rep][k] = le[rep][k] or le[other][k]
                le[k][rep] = le[k][rep] or le[k][other]
    permutation = tuple(i for cls in classes for i in cls)
    return RankingResult(permutation, tuple(classes))


def rank_linear_functions(sys: LinearSystem, d, c, outcomes) -> tuple:
    """Buy bits until the sorted order of all function values is certain.

    Runs the greedy policy on the sum of all pairwise order utilities, then
    reads a permutation (and any forced tie classes) out of the final
    assignment.
    """
    if sys.m < 2:
        raise ValueError("ranking needs at least two functions")
    g = ranking_utility(sys)
    if g.goal == 0:
        trace = _EMPTY
    else:
        trace = _engine("greedy")(g, d, c, outcomes)
    return _extract_ranking(sys, trace.final(sys.arity)), trace


# ---------------------------------------------------------------------------
# min-knapsack


@dataclass(frozen=True)
class KnapsackInstance:
    """Pick items whose values reach the threshold at minimum total weight."""

    values: tuple
    weights: tuple
    threshold: int

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "threshold", int(self.threshold))
        if len(self.values) != len(self.weights):
            raise ValueError("one weight per value required")
        if any(v < 0 for v in self.values):
            raise ValueError("values must be nonnegative")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if sum(self.values) < self.threshold:
            raise ValueError("infeasible: total value below the threshold")

    @property
    def n(self) -> int:
        return len(self.values)


def min_knapsack_adg(kp: KnapsackInstance) -> tuple:
    """2-approximate min-knapsack: run the dual greedy on the covering
    utility of "sum of selected values >= threshold" with every test
    deterministically answering 1."""
    f = ThresholdFormula(kp.values, kp.threshold)
    if f.constant_value() == 1:
        return (), 0.0
    g = threshold_utility(f)
    d = ProductDistribution.certain_ones(kp.n)
    trace = adaptive_dual_greedy(g, d, kp.weights, (1,) * kp.n)
    return trace.tested, trace.total_cost


def min_knapsack_bruteforce(kp: KnapsackInstance, *, limit: int = 20) -> tuple:
    """Exact optimum by subset enumeration; ties go to the smallest bitmask."""
    n = kp.n
    if n > limit:
        raise LimitError(f"knapsack enumeration limited to n <= {limit}, got {n}")
    size = 1 << n
    value = [0] * size
    weight = [0.0] * size
    best_mask = None
    best_w = None
    for mask in range(size):
        if mask:
            low = mask & -mask
            i = low.bit_length() - 1
            prev = mask ^ low
            value[mask] = value[prev] + kp.values[i]
            weight[mask] = weight[prev] + kp.weights[i]
        if value[mask] >= kp.threshold and (best_w is None or weight[mask] < best_w):
            best_mask = mask
            best_w = weight[mask]
    items = tuple(i for i in range(n) if best_mask >> i & 1)
    return items, best_w


# ---------------------------------------------------------------------------
# the disjunction gap family


def disjunction_formula(n: int) -> CdnfFormula:
    """x_1 or ... or x_n as a CNF/DNF pair (one clause, n singleton terms)."""
    clause = frozenset(range(1, n + 1))
    terms = tuple(frozenset((i,)) for i in range(1, n + 1))
    return CdnfFormula(n, (clause,), terms)


def harmonic_gap_instance(n: int) -> tuple:
    """Unit costs with Prob[x_i = 1] = 1/(i+2) for 0-based i.

    The optimal expected evaluation cost for the disjunction is the n-th
    harmonic number, while the expected cheapest-certificate cost stays
    below 2: certificates here are nearly free, strategies are not.
    """
    d = ProductDistribution(tuple(1.0 / (i + 2) for i in range(n)))
    c = (1.0,) * n
    return disjunction_formula(n), d, c


def expected_certificate_cost_disjunction(d, c) -> float:
    """Expected cost of the cheapest certificate inside a random input, for a
    plain disjunction: the cheapest 1-bit if any, else every position."""
    p = as_probabilities(d)
    cc = as_costs(c)
    order = sorted(range(len(cc)), key=lambda i: (cc[i], i))
    total = 0.0
    prob_all_cheaper_zero = 1.0
    for i in order:
        total += cc[i] * p[i] * prob_all_cheaper_zero
        prob_all_cheaper_zero *= 1.0 - p[i]
    total += sum(cc) * prob_all_cheaper_zero
    return total
