"""Partial assignments, product distributions, and exact policy evaluation.

A partial assignment is a plain tuple over {0, 1, STAR} recording which
positions have been tested and with what outcome.  Positions are 0-based
everywhere in this package.  All functions here are pure; values are
immutable and safe to share across threads.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence, Union

STAR = 2  # "not yet tested" marker; 0/1/STAR all fit in two bits

Partial = tuple
Assignment = tuple


class SbfeError(Exception):
    """Base class for errors raised by this package."""


class ConstantFunctionError(SbfeError):
    """A construction was given an identically-constant function.

    Callers should skip testing entirely and output ``value``.
    """

    def __init__(self, value):
        super().__init__(f"function is identically {value}; no testing is needed")
        self.value = value


class InvalidUtilityError(SbfeError):
    """A utility function violated monotonicity or cannot reach its goal."""


class PolicyError(SbfeError):
    """A policy requested an illegal, repeated, or post-termination test."""


class LimitError(SbfeError):
    """An exhaustive oracle was asked to exceed its configured size limit."""


# ---------------------------------------------------------------------------
# partial assignments


def stars(n: int) -> Partial:
    """The empty partial assignment on n positions."""
    if n < 1:
        raise ValueError("need at least one position")
    return (STAR,) * n


def dom(b: Partial) -> tuple:
    """Indices already tested in b."""
    return tuple(i for i, v in enumerate(b) if v != STAR)


def num_stars(b: Partial) -> int:
    return sum(1 for v in b if v == STAR)


def is_full(b: Partial) -> bool:
    return all(v != STAR for v in b)


def extend(b: Partial, i: int, l: int) -> Partial:
    """Copy of b with position i set to outcome l.  Requires b[i] untested."""
    if not 0 <= i < len(b):
        raise IndexError(f"position {i} out of range for arity {len(b)}")
    if b[i] != STAR:
        raise ValueError(f"position {i} is already set to {b[i]}")
    if l not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {l}")
    return b[:i] + (l,) + b[i + 1 :]


def clear(b: Partial, i: int) -> Partial:
    """Copy of b with position i reset to untested."""
    return b[:i] + (STAR,) + b[i + 1 :]


def restrict(b: Partial, keep: Sequence[int]) -> Partial:
    """Keep only the positions in ``keep``; star out everything else."""
    kept = set(keep)
    return tuple(v if i in kept else STAR for i, v in enumerate(b))


def extends(a: Partial, b: Partial) -> bool:
    """True when a agrees with b on every tested position of b."""
    return all(bv == STAR or av == bv for av, bv in zip(a, b))


def extensions(b: Partial) -> Iterator[Assignment]:
    """All full assignments extending b."""
    star_pos = [i for i, v in enumerate(b) if v == STAR]
    base = list(b)
    for pattern in itertools.product((0, 1), repeat=len(star_pos)):
        for i, v in zip(star_pos, pattern):
            base[i] = v
        yield tuple(base)


def all_partials(n: int) -> Iterator[Partial]:
    return itertools.product((0, 1, STAR), repeat=n)


def all_assignments(n: int) -> Iterator[Assignment]:
    return itertools.product((0, 1), repeat=n)


def encode(b: Partial) -> int:
    """Canonical integer key for b, two bits per position."""
    key = 0
    for i, v in enumerate(b):
        key |= v << (2 * i)
    return key


def from_string(s: str) -> Partial:
    """Parse a partial assignment written like '01*1'."""
    table = {"0": 0, "1": 1, "*": STAR}
    try:
        return tuple(table[ch] for ch in s)
    except KeyError as exc:
        raise ValueError(f"bad symbol {exc.args[0]!r} in partial assignment") from None


def to_string(b: Partial) -> str:
    return "".join("*" if v == STAR else str(v) for v in b)


# ---------------------------------------------------------------------------
# distributions and costs


@dataclass(frozen=True)
class ProductDistribution:
    """Independent bits with Prob[x_i = 1] = p[i].

    Mode "sbfe" requires every p_i strictly inside (0, 1) so that every
    branch of a strategy is realized.  Mode "sssc" (pure covering) allows
    the degenerate endpoints, including the deterministic all-ones case.
    """

    p: tuple
    mode: str = "sbfe"

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        if self.mode not in ("sbfe", "sssc"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.p:
            raise ValueError("need at least one probability")
        for i, v in enumerate(self.p):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"p[{i}] = {v} outside [0, 1]")
            if self.mode == "sbfe" and (v == 0.0 or v == 1.0):
                raise ValueError(f"p[{i}] = {v} not allowed: must be strictly in (0, 1)")

    @property
    def n(self) -> int:
        return len(self.p)

    @classmethod
    def uniform(cls, n: int, p: float = 0.5) -> "ProductDistribution":
        return cls((p,) * n)

    @classmethod
    def certain_ones(cls, n: int) -> "ProductDistribution":
        """Deterministic all-ones outcomes (covering mode)."""
        return cls((1.0,) * n, mode="sssc")


@dataclass(frozen=True)
class CostVector:
    """Nonnegative per-test costs."""

    c: tuple

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        for i, v in enumerate(self.c):
            if v < 0:
                raise ValueError(f"c[{i}] = {v} is negative")

    @property
    def n(self) -> int:
        return len(self.c)

    @classmethod
    def unit(cls, n: int) -> "CostVector":
        return cls((1.0,) * n)


def as_probabilities(d) -> tuple:
    if isinstance(d, ProductDistribution):
        return d.p
    return ProductDistribution(tuple(d)).p


def as_costs(c) -> tuple:
    if isinstance(c, CostVector):
        return c.c
    return CostVector(tuple(c)).c


def prob_of(b: Partial, d) -> float:
    """Probability mass of the event "outcomes agree with b"; empty product is 1."""
    p = as_probabilities(d)
    if len(p) != len(b):
        raise ValueError("arity mismatch between assignment and distribution")
    out = 1.0
    for v, pi in zip(b, p):
        if v == 1:
            out *= pi
        elif v == 0:
            out *= 1.0 - pi
    return out


def sample_input(d, seed: int) -> Assignment:
    """Draw one full assignment; deterministic for a fixed seed (Mersenne Twister)."""
    p = as_probabilities(d)
    rng = random.Random(seed)
    return tuple(1 if rng.random() < pi else 0 for pi in p)


# ---------------------------------------------------------------------------
# decision trees


@dataclass(frozen=True)
class Leaf:
    label: object


@dataclass(frozen=True)
class Branch:
    index: int
    if0: "DecisionTree"
    if1: "DecisionTree"


DecisionTree = Union[Leaf, Branch]


def tree_decide(t: DecisionTree, x: Assignment):
    while isinstance(t, Branch):
        t = t.if1 if x[t.index] == 1 else t.if0
    return t.label


def tree_tests_on(t: DecisionTree, x: Assignment) -> tuple:
    """Indices tested on input x, in order."""
    out = []
    while isinstance(t, Branch):
        out.append(t.index)
        t = t.if1 if x[t.index] == 1 else t.if0
    return tuple(out)


def tree_expected_cost(t: DecisionTree, d, c) -> float:
    p = as_probabilities(d)
    cc = as_costs(c)

    def rec(node):
        if isinstance(node, Leaf):
            return 0.0
        i = node.index
        return cc[i] + p[i] * rec(node.if1) + (1.0 - p[i]) * rec(node.if0)

    return rec(t)


def tree_leaf_paths(t: DecisionTree) -> Iterator[tuple]:
    """Yield (path, label) pairs; a path is a tuple of (index, outcome) steps."""
    stack = [(t, ())]
    while stack:
        node, path = stack.pop()
        if isinstance(node, Leaf):
            yield path, node.label
        else:
            stack.append((node.if1, path + ((node.index, 1),)))
            stack.append((node.if0, path + ((node.index, 0),)))


def tree_depth_ok(t: DecisionTree, n: int) -> bool:
    """No index repeats on any root-to-leaf path."""
    for path, _ in tree_leaf_paths(t):
        seen = [i for i, _ in path]
        if len(seen) != len(set(seen)) or any(not 0 <= i < n for i in seen):
            return False
    return True


def neighbor_property_holds(t: DecisionTree, n: int, *, limit: int = 16) -> bool:
    """Check that flipping one bit of the input never changes whether that
    bit gets tested.  Exhaustive over all 2^n inputs."""
    if n > limit:
        raise LimitError(f"neighbor check limited to n <= {limit}, got {n}")
    tested = {x: set(tree_tests_on(t, x)) for x in all_assignments(n)}
    for x, tset in tested.items():
        for j in range(n):
            y = x[:j] + (1 - x[j],) + x[j + 1 :]
            if (j in tset) != (j in tested[y]):
                return False
    return True


# ---------------------------------------------------------------------------
# certificates

# An instance is any object with an integer ``arity`` and an
# ``evaluate(x) -> label`` method on full assignments.  Instances may also
# provide a fast ``certificate(b) -> label | None``; formula classes do.


def certificate_by_enumeration(f, b: Partial, *, limit: int = 20) -> Optional[object]:
    """Label forced by b on every extension, or None.  Brute force over 2^stars."""
    s = num_stars(b)
    if s > limit:
        raise LimitError(f"enumeration limited to {limit} untested positions, got {s}")
    it = extensions(b)
    first = f.evaluate(next(it))
    for x in it:
        if f.evaluate(x) != first:
            return None
    return first


def certificate_check(f, b: Partial) -> Optional[object]:
    """Instance-specific shortcut when available, else exhaustive enumeration."""
    fast = getattr(f, "certificate", None)
    if fast is not None:
        return fast(b)
    return certificate_by_enumeration(f, b)


# ---------------------------------------------------------------------------
# exact policy evaluation

# A policy exposes three methods:
#   initial_state() -> state
#   next_test(b, state) -> index or None (None means stop)
#   advance(b, state, i, outcome) -> state after observing outcome of test i
# State must be an immutable value so branches of the evaluation can share it.


def expected_cost(policy, d, c) -> float:
    """Exact expected testing cost of a policy under a product distribution.

    Recursively traverses the induced decision tree, weighting the two
    outcomes of each test by p_i and (1 - p_i).  Equals the sum over all x
    of p(x) times the cost the policy incurs on x.
    """
    p = as_probabilities(d)
    cc = as_costs(c)
    n = len(p)
    if len(cc) != n:
        raise ValueError("arity mismatch between costs and distribution")

    def rec(b, state, depth):
        i = policy.next_test(b, state)
        if i is None:
            return 0.0
        if not 0 <= i < n or b[i] != STAR:
            raise PolicyError(f"policy requested illegal test {i} at {to_string(b)}")
        if depth >= n:
            raise PolicyError("policy did not terminate within n tests")
        hi = rec(extend(b, i, 1), policy.advance(b, state, i, 1), depth + 1)
        lo = rec(extend(b, i, 0), policy.advance(b, state, i, 0), depth + 1)
        return cc[i] + p[i] * hi + (1.0 - p[i]) * lo

    return rec(stars(n), policy.initial_state(), 0)


def policy_tree(policy, n: int, label_fn: Callable[[Partial], object]) -> DecisionTree:
    """Materialize a policy as an explicit decision tree; leaves are labelled
    by ``label_fn`` applied to the final partial assignment."""

    def rec(b, state, depth):
        i = policy.next_test(b, state)
        if i is None:
            return Leaf(label_fn(b))
        if not 0 <= i < n or b[i] != STAR or depth >= n:
            raise PolicyError(f"policy requested illegal test {i} at {to_string(b)}")
        return Branch(
            i,
            rec(extend(b, i, 0), policy.advance(b, state, i, 0), depth + 1),
            rec(extend(b, i, 1), policy.advance(b, state, i, 1), depth + 1),
        )

    return rec(stars(n), policy.initial_state(), 0)


# ---------------------------------------------------------------------------
# exhaustive optimal oracle


def optimal_expected_cost(f, d, c, *, limit: int = 14):
    """Minimum expected evaluation cost and an optimal strategy tree.

    Memoized recursion over partial assignments: a state costs nothing once
    it certifies the instance's output; otherwise it costs
    min_i c_i + p_i * OPT(b with i=1) + (1-p_i) * OPT(b with i=0) over the
    untested i, ties broken toward the lowest index.
    """
    n = f.arity
    p = as_probabilities(d)
    cc = as_costs(c)
    if n > limit:
        raise LimitError(f"exhaustive optimum limited to n <= {limit}, got {n}")
    if len(p) != n or len(cc) != n:
        raise ValueError("arity mismatch")
    for i, v in enumerate(p):
        if v in (0.0, 1.0):
            raise ValueError(f"p[{i}] = {v}: optimum oracle needs 0 < p_i < 1")

    pow4 = [1 << (2 * i) for i in range(n)]
    memo = {}  # key -> (value, ("leaf", label) | ("test", index))

    def solve(b, key):
        hit = memo.get(key)
        if hit is not None:
            return hit[0]
        label = certificate_check(f, b)
        if label is not None:
            memo[key] = (0.0, ("leaf", label))
            return 0.0
        best = None
        best_i = -1
        for i in range(n):
            if b[i] != STAR:
                continue
            shift = pow4[i]
            v = (
                cc[i]
                + p[i] * solve(extend(b, i, 1), key - shift)
                + (1.0 - p[i]) * solve(extend(b, i, 0), key - 2 * shift)
            )
            if best is None or v < best:
                best = v
                best_i = i
        memo[key] = (best, ("test", best_i))
        return best

    root = stars(n)
    value = solve(root, encode(root))

    nodes = {}

    def build(b, key):
        node = nodes.get(key)
        if node is not None:
            return node
        _, action = memo[key]
        if action[0] == "leaf":
            node = Leaf(action[1])
        else:
            i = action[1]
            shift = pow4[i]
            node = Branch(
                i,
                build(extend(b, i, 0), key - 2 * shift),
                build(extend(b, i, 1), key - shift),
            )
        nodes[key] = node
        return node

    return value, build(root, encode(root))


def certificate_table(f, *, limit: int = 14) -> dict:
    """Forced label for every partial assignment, keyed by encode(b).

    Bottom-up over the first untested position: b forces a label iff both
    one-step extensions force the same label.
    """
    n = f.arity
    if n > limit:
        raise LimitError(f"certificate table limited to n <= {limit}, got {n}")
    pow4 = [1 << (2 * i) for i in range(n)]
    memo = {}

    def status(b, key):
        if key in memo:
            return memo[key]
        star = next((i for i, v in enumerate(b) if v == STAR), None)
        if star is None:
            out = f.evaluate(b)
        else:
            shift = pow4[star]
            s1 = status(extend(b, star, 1), key - shift)
            s0 = status(extend(b, star, 0), key - 2 * shift)
            out = s1 if (s1 is not None and s1 == s0) else None
        memo[key] = out
        return out

    for b in all_partials(n):
        status(b, encode(b))
    return memo


def expected_certificate_cost(f, d, c, *, limit: int = 10) -> float:
    """Expected cost of the cheapest certificate contained in a random input.

    This lower-bounds the cost of any testing strategy but is not in general
    attainable by one.
    """
    n = f.arity
    if n > limit:
        raise LimitError(f"certificate-cost oracle limited to n <= {limit}, got {n}")
    p = as_probabilities(d)
    cc = as_costs(c)
    table = certificate_table(f, limit=limit)

    full_masks = 1 << n
    total = 0.0
    key_arr = [0] * full_masks
    cost_arr = [0.0] * full_masks
    star_key = encode(stars(n))
    for x in all_assignments(n):
        contrib = [(x[i] - STAR) << (2 * i) for i in range(n)]
        key_arr[0] = star_key
        cost_arr[0] = 0.0
        best = None
        for mask in range(1, full_masks):
            low = mask & -mask
            i = low.bit_length() - 1
            prev = mask ^ low
            key_arr[mask] = key_arr[prev] + contrib[i]
            cost_arr[mask] = cost_arr[prev] + cc[i]
            if table[key_arr[mask]] is not None:
                if best is None or cost_arr[mask] < best:
                    best = cost_arr[mask]
        if table[star_key] is not None:
            best = 0.0
        if best is None:
            raise InvalidUtilityError("input admits no certificate")
        total += prob_of(x, p) * best
    return total


# ---------------------------------------------------------------------------
# run records


@dataclass(frozen=True)
class RunTrace:
    """Record of one adaptive run: tests in order, observed outcomes, cost,
    and (for dual-greedy runs) the dual value attached to each prefix."""

    tested: tuple
    outcomes: tuple
    total_cost: float
    dual_values: tuple = ()
    alpha_samples: tuple = ()

    def __post_init__(self):
        if len(self.tested) != len(set(self.tested)):
            raise ValueError("trace repeats a test")
        if len(self.tested) != len(self.outcomes):
            raise ValueError("one outcome per test required")

    def __len__(self) -> int:
        return len(self.tested)

    def final(self, n: int) -> Partial:
        b = list(stars(n))
        for i, v in zip(self.tested, self.outcomes):
            b[i] = v
        return tuple(b)

    def prefixes(self, n: int) -> tuple:
        """Partial assignments after 0, 1, ..., T tests."""
        out = [stars(n)]
        b = out[0]
        for i, v in zip(self.tested, self.outcomes):
            b = extend(b, i, v)
            out.append(b)
        return tuple(out)
