"""Instance bundles, the "sbfe-1" file format, and seeded generators.

Files are JSON with sorted keys so that identical generator spec and seed
produce byte-identical fixtures.  All randomness comes from
``random.Random(seed)`` (the stdlib Mersenne Twister), seeded with a 64-bit
integer, so fixtures never drift across runs.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .core import Branch, ConstantFunctionError, Leaf, ProductDistribution
from .problems import KnapsackInstance, ThresholdSet, disjunction_formula
from .utility import CdnfFormula, LinearSystem, ThresholdFormula, TruthTable, decision_tree_to_cdnf
from .verify import EvalCase

FORMAT = "sbfe-1"
KINDS = (
    "threshold",
    "thresholds",
    "cdnf",
    "truthtable",
    "linear-system",
    "knapsack",
    "disjunction",
)


class InstanceFormatError(ValueError):
    """A file or payload does not follow the sbfe-1 schema."""


@dataclass(frozen=True)
class Instance:
    """A problem description bundled with its probabilities and costs."""

    id: str
    kind: str
    f: object
    dist: ProductDistribution
    costs: tuple

    @property
    def n(self) -> int:
        return self.f.arity if hasattr(self.f, "arity") else self.f.n

    def case(self) -> EvalCase:
        return EvalCase(self.id, self.kind, self.f, self.dist, self.costs)


# ---------------------------------------------------------------------------
# serialization


def instance_to_dict(inst: Instance) -> dict:
    out = {
        "format": FORMAT,
        "id": inst.id,
        "kind": inst.kind,
        "n": inst.n,
        "p": list(inst.dist.p),
        "c": list(inst.costs),
    }
    f = inst.f
    if inst.kind == "threshold":
        out["coefficients"] = list(f.coeffs)
        out["theta"] = f.theta
    elif inst.kind == "thresholds":
        out["m"] = f.m
        out["formulas"] = [
            {"coefficients": list(sub.coeffs), "theta": sub.theta} for sub in f.formulas
        ]
    elif inst.kind == "cdnf":
        out["clauses"] = [sorted(cl) for cl in f.clauses]
        out["terms"] = [sorted(t) for t in f.terms]
    elif inst.kind == "truthtable":
        out["table"] = list(f.table)
    elif inst.kind == "linear-system":
        out["m"] = f.m
        out["functions"] = [list(row) for row in f.coeffs]
    elif inst.kind == "knapsack":
        out["values"] = list(f.values)
        out["weights"] = list(f.weights)
        out["theta"] = f.threshold
    elif inst.kind == "disjunction":
        pass  # fully described by n, p, c
    else:
        raise InstanceFormatError(f"unknown kind {inst.kind!r}")
    return out


def instance_from_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise InstanceFormatError("instance payload must be a JSON object")
    if data.get("format") != FORMAT:
        raise InstanceFormatError(f"expected format {FORMAT!r}, got {data.get('format')!r}")
    try:
        kind = data["kind"]
        n = int(data["n"])
        p = tuple(float(v) for v in data["p"])
        c = tuple(float(v) for v in data["c"])
        ident = str(data.get("id", f"{kind}-n{n}"))
        if kind == "threshold":
            f = ThresholdFormula(tuple(data["coefficients"]), data["theta"])
        elif kind == "thresholds":
            f = ThresholdSet(
                tuple(
                    ThresholdFormula(tuple(sub["coefficients"]), sub["theta"])
                    for sub in data["formulas"]
                )
            )
        elif kind == "cdnf":
            f = CdnfFormula(
                n,
                tuple(frozenset(cl) for cl in data["clauses"]),
                tuple(frozenset(t) for t in data["terms"]),
            )
        elif kind == "truthtable":
            f = TruthTable(n, tuple(data["table"]))
        elif kind == "linear-system":
            f = LinearSystem(tuple(tuple(row) for row in data["functions"]))
        elif kind == "knapsack":
            f = KnapsackInstance(tuple(data["values"]), tuple(data["weights"]), data["theta"])
        elif kind == "disjunction":
            f = disjunction_formula(n)
        else:
            raise InstanceFormatError(f"unknown kind {kind!r}")
    except InstanceFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"bad instance payload: {exc}") from exc
    mode = "sssc" if kind == "knapsack" else "sbfe"
    dist = ProductDistribution(p, mode=mode)
    if getattr(f, "arity", n) != n and kind != "knapsack":
        raise InstanceFormatError("declared n disagrees with the formula arity")
    return Instance(ident, kind, f, dist, c)


def dumps(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2, sort_keys=True) + "\n"


def loads(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"not valid JSON: {exc}") from exc
    return instance_from_dict(data)


def save(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(inst))


def load(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


# ---------------------------------------------------------------------------
# generators


def gen_probabilities(rng: random.Random, n: int, lo: float = 0.1, hi: float = 0.9) -> tuple:
    return tuple(rng.uniform(lo, hi) for _ in range(n))


def gen_costs(rng: random.Random, n: int, hi: int = 5) -> tuple:
    return tuple(float(rng.randint(1, hi)) for _ in range(n))


def gen_threshold(rng: random.Random, n: int, max_coeff: int = 5) -> ThresholdFormula:
    """Nonzero coefficients in [-max_coeff, max_coeff]; theta chosen so the
    formula is never constant."""
    coeffs = tuple(rng.choice((-1, 1)) * rng.randint(1, max_coeff) for _ in range(n))
    neg = sum(a for a in coeffs if a < 0)
    pos = sum(a for a in coeffs if a > 0)
    theta = rng.randint(neg + 1, pos)
    return ThresholdFormula(coeffs, theta)


def _random_tree(rng: random.Random, avail: list, budget: int):
    if budget == 0 or not avail or rng.random() < 0.3:
        return Leaf(rng.randrange(2))
    i = rng.choice(avail)
    rest = [j for j in avail if j != i]
    return Branch(i, _random_tree(rng, rest, budget - 1), _random_tree(rng, rest, budget - 1))


def gen_cdnf(
    rng: random.Random, n: int, max_clauses: int = 4, max_terms: int = 4
) -> CdnfFormula:
    """Consistent CNF/DNF pair obtained from a random decision tree (its
    0-paths and 1-paths), capped at the given clause and term counts."""
    for _ in range(1000):
        tree = _random_tree(rng, list(range(n)), rng.randint(1, 3))
        try:
            f = decision_tree_to_cdnf(tree, n)
        except ConstantFunctionError:
            continue
        if f.k <= max_clauses and f.d <= max_terms:
            return f
    raise RuntimeError("could not generate a CDNF within the caps")


def gen_truth_table(rng: random.Random, n: int) -> TruthTable:
    while True:
        table = tuple(rng.randrange(2) for _ in range(1 << n))
        if 0 < sum(table) < len(table):
            return TruthTable(n, table)


def gen_linear_system(
    rng: random.Random, m: int, n: int, max_coeff: int = 3, duplicate_prob: float = 0.0
) -> LinearSystem:
    rows = []
    for j in range(m):
        if rows and rng.random() < duplicate_prob:
            rows.append(rng.choice(rows))
        else:
            rows.append(tuple(rng.randint(-max_coeff, max_coeff) for _ in range(n)))
    return LinearSystem(tuple(rows))


def gen_threshold_set(rng: random.Random, m: int, n: int, max_coeff: int = 3) -> ThresholdSet:
    return ThresholdSet(tuple(gen_threshold(rng, n, max_coeff) for _ in range(m)))


def gen_knapsack(rng: random.Random, n: int, max_value: int = 8, max_weight: int = 5) -> KnapsackInstance:
    values = tuple(rng.randint(0, max_value) for _ in range(n))
    weights = tuple(float(rng.randint(1, max_weight)) for _ in range(n))
    theta = rng.randint(0, sum(values))
    return KnapsackInstance(values, weights, theta)


def generate_instance(kind: str, n: int, seed: int, *, m: int = 2) -> Instance:
    """One self-contained instance for the CLI; deterministic in (spec, seed)."""
    if n < 1:
        raise InstanceFormatError("n must be at least 1")
    if m < 1:
        raise InstanceFormatError("m must be at least 1")
    rng = random.Random(seed)
    ident = f"{kind}-n{n}-s{seed}"
    if kind == "threshold":
        f = gen_threshold(rng, n)
    elif kind == "thresholds":
        f = gen_threshold_set(rng, m, n)
        ident = f"{kind}-m{m}-n{n}-s{seed}"
    elif kind == "cdnf":
        f = gen_cdnf(rng, n)
    elif kind == "truthtable":
        if n > 12:
            raise InstanceFormatError("truth tables limited to n <= 12")
        f = gen_truth_table(rng, n)
    elif kind == "linear-system":
        f = gen_linear_system(rng, m, n, duplicate_prob=0.15)
        ident = f"{kind}-m{m}-n{n}-s{seed}"
    elif kind == "knapsack":
        f = gen_knapsack(rng, n)
    elif kind == "disjunction":
        f = disjunction_formula(n)
    else:
        raise InstanceFormatError(f"unknown kind {kind!r}; expected one of {KINDS}")
    p = gen_probabilities(rng, n) if kind != "knapsack" else (1.0,) * n
    c = gen_costs(rng, n) if kind != "knapsack" else f.weights
    mode = "sssc" if kind == "knapsack" else "sbfe"
    return Instance(ident, kind, f, ProductDistribution(p, mode=mode), tuple(c))


# ---------------------------------------------------------------------------
# seeded batteries


def _sizes(count: int, lo: int, hi: int, rng: random.Random) -> list:
    """Mixed sizes biased small but always touching the top of the range."""
    sizes = [lo + i % (hi - lo + 1) for i in range(count)]
    rng.shuffle(sizes)
    if hi not in sizes:
        sizes[0] = hi
    return sizes


def threshold_battery(
    count: int, seed: int, n_lo: int = 3, n_hi: int = 10, max_coeff: int = 5
) -> list:
    rng = random.Random(seed)
    cases = []
    for idx, n in enumerate(_sizes(count, n_lo, n_hi, rng)):
        f = gen_threshold(rng, n, max_coeff)
        d = ProductDistribution(gen_probabilities(rng, n))
        cases.append(EvalCase(f"threshold-{seed}-{idx:03d}", "threshold", f, d, gen_costs(rng, n)))
    return cases


def cdnf_battery(count: int, seed: int, n_lo: int = 3, n_hi: int = 10) -> list:
    rng = random.Random(seed)
    cases = []
    for idx, n in enumerate(_sizes(count, n_lo, n_hi, rng)):
        f = gen_cdnf(rng, n)
        d = ProductDistribution(gen_probabilities(rng, n))
        cases.append(EvalCase(f"cdnf-{seed}-{idx:03d}", "cdnf", f, d, gen_costs(rng, n)))
    return cases


def disjunction_battery(count: int, seed: int, n_lo: int = 2, n_hi: int = 10) -> list:
    rng = random.Random(seed)
    cases = []
    for idx, n in enumerate(_sizes(count, n_lo, n_hi, rng)):
        f = disjunction_formula(n)
        d = ProductDistribution(gen_probabilities(rng, n))
        cases.append(
            EvalCase(f"disjunction-{seed}-{idx:03d}", "disjunction", f, d, gen_costs(rng, n))
        )
    return cases


def threshold_set_battery(
    count: int, seed: int, m_hi: int = 3, n_lo: int = 4, n_hi: int = 10
) -> list:
    rng = random.Random(seed)
    cases = []
    for idx, n in enumerate(_sizes(count, n_lo, n_hi, rng)):
        m = rng.randint(1, m_hi)
        f = gen_threshold_set(rng, m, n)
        d = ProductDistribution(gen_probabilities(rng, n))
        cases.append(
            EvalCase(f"thresholds-{seed}-{idx:03d}", "thresholds", f, d, gen_costs(rng, n))
        )
    return cases


def truth_table_battery(count: int, seed: int, n_lo: int = 2, n_hi: int = 6) -> list:
    rng = random.Random(seed)
    cases = []
    for idx, n in enumerate(_sizes(count, n_lo, n_hi, rng)):
        f = gen_truth_table(rng, n)
        d = ProductDistribution(gen_probabilities(rng, n))
        cases.append(
            EvalCase(f"truthtable-{seed}-{idx:03d}", "truthtable", f, d, gen_costs(rng, n))
        )
    return cases


def knapsack_battery(count: int, seed: int, n_lo: int = 3, n_hi: int = 15) -> list:
    rng = random.Random(seed)
    out = []
    for idx, n in enumerate(_sizes(count, n_lo, n_hi, rng)):
        out.append((f"knapsack-{seed}-{idx:03d}", gen_knapsack(rng, n)))
    return out


def linear_system_battery(
    count: int, seed: int, m_hi: int = 4, n_lo: int = 2, n_hi: int = 8
) -> list:
    rng = random.Random(seed)
    out = []
    for idx, n in enumerate(_sizes(count, n_lo, n_hi, rng)):
        m = rng.randint(2, m_hi)
        sys = gen_linear_system(rng, m, n, duplicate_prob=0.25)
        d = ProductDistribution(gen_probabilities(rng, n))
        out.append(
            EvalCase(f"linear-system-{seed}-{idx:03d}", "linear-system", sys, d, gen_costs(rng, n))
        )
    return out
