"""Brute-force ground truth: exact optimal policies and property checkers.

The optimal adaptive policy is computed by memoized recursion over version
spaces (as hypothesis bitmasks): a terminal space costs nothing, otherwise
pick the test minimizing its cost plus the outcome-weighted optimum of the
split spaces.  Tests that do not split the space are pruned; with positive
costs they can never appear in an optimal tree.

The checkers exhaustively enumerate consistent partial realizations and
verify the two structural properties the greedy guarantee rests on: marginal
benefits never grow as observations accumulate, and observed outcomes never
reduce the conditional expected objective.  Both accept a pluggable benefit
so that deliberately broken objectives can be shown to fail.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .instance import EcdInstance, PartialRealization, posterior
from .objectives import delta_ec_naive, f_ec

MEMO_LIMIT = 2**20


class OracleSizeError(RuntimeError):
    """The exact-optimum recursion outgrew its memo budget."""


@dataclass(frozen=True)
class OptResult:
    """Optimal expected cost plus the optimal first test per version space."""

    cost: float
    root_test: int | None
    choices: dict  # version-space bitmask -> optimal test index (None if terminal)


@dataclass(frozen=True)
class PropertyReport:
    name: str
    passed: bool
    violations: tuple

    def to_dict(self) -> dict:
        return {
            "property": self.name,
            "passed": self.passed,
            "violations": [list(v) for v in self.violations],
        }


def optimal_expected_cost(
    instance: EcdInstance,
    mode: str = "ecd",
    memo_limit: int = MEMO_LIMIT,
) -> OptResult:
    """Exact minimum expected cost over all feasible adaptive policies.

    Raises :class:`OracleSizeError` once more than ``memo_limit`` distinct
    version spaces have been expanded; at that size a sampling-based
    comparison is the better tool.  Instances with at most 20 hypotheses can
    never hit the default limit.
    """
    if mode not in ("odt", "ecd"):
        raise ValueError(f"unknown mode {mode!r}")
    n, m = instance.n_hypotheses, instance.n_tests
    w = instance.prior
    uniform = bool(np.all(w == w[0]))
    unit = float(w[0])

    # per test: list of (outcome, bitmask of hypotheses producing it)
    splits: list[list[int]] = []
    for t in range(m):
        col = instance.outcomes[:, t]
        masks = []
        for y in np.unique(col):
            bits = 0
            for h in np.flatnonzero(col == y):
                bits |= 1 << int(h)
            masks.append(bits)
        splits.append(masks)

    class_bits = []
    for block in instance.classes:
        bits = 0
        for h in block:
            bits |= 1 << h
        class_bits.append(bits)

    hyp_class = instance.class_of
    # not_class[h]: complement of the class block containing hypothesis h
    all_bits = (1 << n) - 1
    not_class = [all_bits & ~class_bits[hyp_class[h]] for h in range(n)]
    weights = [float(x) for x in w]
    odt = mode == "odt"

    def mass_of(v: int) -> float:
        if uniform:
            return unit * v.bit_count()
        total = 0.0
        x = v
        while x:
            low = x & -x
            total += weights[low.bit_length() - 1]
            x ^= low
        return total

    def terminal(v: int) -> bool:
        if odt:
            return v.bit_count() == 1
        return v & not_class[(v & -v).bit_length() - 1] == 0

    memo: dict[int, tuple[float, int | None]] = {}
    test_costs = [float(c) for c in instance.costs]
    inf = float("inf")

    def solve(v: int, mass_v: float) -> float:
        # callers guarantee v is non-terminal
        hit = memo.get(v)
        if hit is not None:
            return hit[0]
        if len(memo) >= memo_limit:
            raise OracleSizeError(
                f"optimal-cost memo exceeded {memo_limit} version spaces; "
                "use a sampling-based comparison for instances this large"
            )
        best = inf
        best_t = None
        for t in range(m):
            children = []
            degenerate = False
            for bits in splits[t]:
                child = v & bits
                if child == v:
                    degenerate = True  # test does not split this space
                    break
                if child:
                    children.append(child)
            if degenerate:
                continue
            total = test_costs[t]
            for child in children:
                if terminal(child):
                    continue
                mass_c = mass_of(child)
                total += (mass_c / mass_v) * solve(child, mass_c)
                if total >= best:
                    break
            if total < best:
                best = total
                best_t = t
        if best_t is None:
            raise RuntimeError("no test splits a non-terminal version space")
        memo[v] = (best, best_t)
        return best

    root = 0
    for h in np.flatnonzero(w > 0):
        root |= 1 << int(h)
    if terminal(root):
        return OptResult(cost=0.0, root_test=None, choices={root: None})
    cost = solve(root, mass_of(root))
    return OptResult(cost=cost, root_test=memo[root][1], choices={k: v[1] for k, v in memo.items()})


def enumerate_consistent_partials(instance: EcdInstance) -> list[PartialRealization]:
    """Every consistent partial realization, via restrictions of live rows."""
    live = np.flatnonzero(instance.prior > 0)
    partials = []
    for r in range(instance.n_tests + 1):
        for subset in itertools.combinations(range(instance.n_tests), r):
            seen = set()
            for h in live:
                obs = tuple((t, int(instance.outcomes[h, t])) for t in subset)
                if obs not in seen:
                    seen.add(obs)
                    partials.append(PartialRealization(obs))
    return partials


def _is_subvector(a: PartialRealization, b: PartialRealization) -> bool:
    if not a.tests <= b.tests:
        return False
    lookup = dict(b.observations)
    return all(lookup[t] == y for t, y in a.observations)


def check_adaptive_submodularity(
    instance: EcdInstance,
    delta_fn: Callable | None = None,
    tol: float = 1e-12,
) -> PropertyReport:
    """Exhaustively verify diminishing marginal benefits.

    For every pair of consistent partials x_A refined by x_B and every test
    outside B, the benefit at x_B must not exceed the benefit at x_A.
    Violations are reported, not raised.  Intended for small instances; the
    enumeration is exponential in the number of tests.
    """
    delta = delta_fn if delta_fn is not None else delta_ec_naive
    partials = enumerate_consistent_partials(instance)
    cache: dict[tuple, float] = {}

    def benefit(p: PartialRealization, t: int) -> float:
        key = (tuple(sorted(p.observations)), t)
        if key not in cache:
            cache[key] = delta(instance, p, t)
        return cache[key]

    violations = []
    for pb in partials:
        refiners = [pa for pa in partials if len(pa) < len(pb) and _is_subvector(pa, pb)]
        for t in range(instance.n_tests):
            if t in pb.tests:
                continue
            val_b = benefit(pb, t)
            for pa in refiners:
                val_a = benefit(pa, t)
                if val_b > val_a + tol:
                    violations.append(
                        (pa.observations, pb.observations, t, val_a, val_b)
                    )
    return PropertyReport("adaptive_submodularity", not violations, tuple(violations))


def check_strong_monotonicity(
    instance: EcdInstance,
    objective: Callable | None = None,
    tol: float = 1e-12,
) -> PropertyReport:
    """Exhaustively verify that observed outcomes never hurt the objective.

    For every consistent x_A, unobserved test t, and outcome y of positive
    probability: E[f(A) | x_A] <= E[f(A + t) | x_A, y].
    """
    f = objective if objective is not None else f_ec
    cache: dict[tuple, float] = {}

    def value(tests: tuple, h: int) -> float:
        key = (tests, h)
        if key not in cache:
            cache[key] = f(instance, tests, h)
        return cache[key]

    violations = []
    for pa in enumerate_consistent_partials(instance):
        post = posterior(instance, pa)
        tests_a = tuple(sorted(pa.tests))
        lhs = sum(post[h] * value(tests_a, h) for h in np.flatnonzero(post > 0))
        for t in range(instance.n_tests):
            if t in pa.tests:
                continue
            tests_b = tuple(sorted(tests_a + (t,)))
            col = instance.outcomes[:, t]
            for y in np.unique(col[post > 0]):
                pb = pa.extend(t, int(y))
                post_b = posterior(instance, pb)
                rhs = sum(
                    post_b[h] * value(tests_b, h) for h in np.flatnonzero(post_b > 0)
                )
                if lhs > rhs + tol:
                    violations.append((pa.observations, t, int(y), lhs, rhs))
    return PropertyReport("strong_adaptive_monotonicity", not violations, tuple(violations))
