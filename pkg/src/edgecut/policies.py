"""Greedy test-selection policies and exact expected-cost evaluation.

A policy repeatedly picks the unobserved test maximizing benefit per unit
cost under its criterion, reveals the truth's outcome, and stops once the
observations are terminal for the requested mode (unique hypothesis, or
version space inside one class).  Expected cost is computed exactly by
running once per hypothesis and weighting by the prior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import EcdInstance, PartialRealization, class_posterior, is_terminal, version_space
from .objectives import CRITERIA, score_tests

POLICY_CRITERIA = CRITERIA + ("random",)
TIE_BREAKS = ("lowest_test_index", "seeded_random")


class PolicyStalledError(RuntimeError):
    """A run failed to terminate with the whole test pool available."""


@dataclass(frozen=True)
class PolicySpec:
    """What to maximize, when to stop, and how to break ties."""

    criterion: str
    mode: str = "ecd"
    budget: int | None = None  # None: capped at the number of tests
    tie_break: str = "lowest_test_index"
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.criterion not in POLICY_CRITERIA:
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.mode not in ("odt", "ecd"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be >= 1 when set")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"unknown tie_break {self.tie_break!r}")

    def needs_rng(self) -> bool:
        return self.criterion == "random" or self.tie_break == "seeded_random"


@dataclass(frozen=True)
class PolicyTrace:
    """One run: tests chosen, outcomes seen, incurred cost, and final state."""

    steps: tuple[tuple[int, int], ...]
    cost: float
    terminal: bool
    final_members: tuple[int, ...]
    final_class_posterior: tuple[float, ...]

    def partial(self) -> PartialRealization:
        return PartialRealization(self.steps)

    def to_dict(self, instance: EcdInstance) -> dict:
        return {
            "steps": [
                {"test": instance.test_ids[t], "outcome": int(y)} for t, y in self.steps
            ],
            "cost": self.cost,
            "terminal": self.terminal,
            "final_version_space": [instance.hypothesis_ids[i] for i in self.final_members],
            "final_class_posterior": list(self.final_class_posterior),
        }


def select_next(
    spec: PolicySpec,
    instance: EcdInstance,
    partial: PartialRealization,
    rng: np.random.Generator | None = None,
) -> int | None:
    """The next test to run, or None when the observations are terminal."""
    if is_terminal(instance, partial, spec.mode):
        return None
    unobserved = np.array(
        [t for t in range(instance.n_tests) if t not in partial.tests], dtype=int
    )
    if unobserved.size == 0:
        return None
    if spec.criterion == "random":
        if rng is None:
            raise ValueError("random criterion requires an rng")
        return int(rng.choice(unobserved))
    scores = score_tests(instance, partial, spec.criterion)
    ratio = scores[unobserved] / instance.costs[unobserved]
    best = ratio.max()
    ties = unobserved[ratio == best]
    if spec.tie_break == "lowest_test_index" or ties.size == 1:
        return int(ties[0])
    if rng is None:
        raise ValueError("seeded_random tie break requires an rng")
    return int(rng.choice(ties))


def _finish(instance: EcdInstance, partial: PartialRealization, mode: str) -> PolicyTrace:
    vs = version_space(instance, partial)
    return PolicyTrace(
        steps=partial.observations,
        cost=float(sum(instance.costs[t] for t, _ in partial.observations)),
        terminal=is_terminal(instance, partial, mode),
        final_members=vs.members,
        final_class_posterior=tuple(float(x) for x in class_posterior(instance, partial)),
    )


def run_policy(
    spec: PolicySpec,
    instance: EcdInstance,
    truth: int | str,
    seed: int | np.random.SeedSequence | None = None,
) -> PolicyTrace:
    """Run the greedy policy against one realized hypothesis.

    Deterministic given (spec, seed); a binding budget yields a trace flagged
    non-terminal rather than an error.
    """
    if isinstance(truth, str):
        truth = instance.hyp_index(truth)
    truth = int(truth)
    rng = None
    if spec.needs_rng():
        if seed is None and spec.seed is None:
            raise ValueError(f"criterion {spec.criterion!r} requires a seed")
        rng = np.random.default_rng(seed if seed is not None else spec.seed)
    budget = spec.budget if spec.budget is not None else instance.n_tests
    partial = PartialRealization()
    while len(partial) < budget:
        t = select_next(spec, instance, partial, rng)
        if t is None:
            break
        partial = partial.extend(t, int(instance.outcomes[truth, t]))
    return _finish(instance, partial, spec.mode)


def run_fixed_sequence(
    instance: EcdInstance,
    truth: int | str,
    tests: list[int | str],
    mode: str = "ecd",
) -> PolicyTrace:
    """Run a fixed, non-adaptive test order until terminal or exhausted."""
    if isinstance(truth, str):
        truth = instance.hyp_index(truth)
    partial = PartialRealization()
    for t in tests:
        if is_terminal(instance, partial, mode):
            break
        idx = instance.test_index(t) if isinstance(t, str) else int(t)
        partial = partial.extend(idx, int(instance.outcomes[truth, idx]))
    return _finish(instance, partial, mode)


def expected_cost(
    spec: PolicySpec,
    instance: EcdInstance,
    seed: int | None = None,
) -> float:
    """Exact expected cost: one run per positive-prior hypothesis.

    With the default (full) budget every valid instance terminates; a
    non-terminal run then signals an uninformative test pool and raises
    :class:`PolicyStalledError`.
    """
    root = seed if seed is not None else spec.seed
    if spec.needs_rng() and root is None:
        raise ValueError(f"criterion {spec.criterion!r} requires a seed")
    total = 0.0
    for h in np.flatnonzero(instance.prior > 0):
        sub = np.random.SeedSequence(root, spawn_key=(int(h),)) if root is not None else None
        trace = run_policy(spec, instance, int(h), seed=sub)
        if not trace.terminal and spec.budget is None:
            raise PolicyStalledError(
                f"policy stalled on hypothesis {instance.hypothesis_ids[h]!r}"
            )
        total += float(instance.prior[h]) * trace.cost
    return total
