"""Deterministic test-selection problems: hypotheses, priors, tests, outcome
tables, and a partition of the hypotheses into target classes.

An :class:`EcdInstance` bundles everything a selection policy needs: a prior
over hypotheses, a pool of tests with positive costs, the deterministic
outcome each hypothesis produces on each test, and the class partition whose
blocks the policy must separate.  A :class:`PartialRealization` is the ordered
record of observations made so far; the hypotheses still consistent with it
form the version space.

All values are immutable after construction (arrays are marked read-only), so
instances can be shared freely across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

PRIOR_TOL = 1e-9

MODES = ("odt", "ecd")


class InstanceError(ValueError):
    """The instance data violates a structural invariant."""


class InconsistentObservationsError(ValueError):
    """Observations rule out every hypothesis (empty version space)."""


@dataclass(frozen=True)
class Prior:
    """Normalized weights over hypotheses.

    ``kosaraju_modified`` records whether the weights went through the
    unit-cost perturbation of :func:`kosaraju_prior`.
    """

    weights: np.ndarray
    kosaraju_modified: bool = False

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InstanceError("prior must be a nonempty vector")
        if np.any(w < 0):
            raise InstanceError("prior weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > PRIOR_TOL:
            raise InstanceError(f"prior must sum to 1, got {w.sum()!r}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return int(self.weights.size)


def normalize_prior(weights: Sequence[float]) -> Prior:
    """Scale nonnegative weights to sum to one.

    Raises on negative entries and on an all-zero vector (degenerate prior).
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise InstanceError("prior must be a nonempty vector")
    if np.any(w < 0):
        raise InstanceError("prior weights must be nonnegative")
    total = float(w.sum())
    if total <= 0:
        raise InstanceError("degenerate prior: all weights are zero")
    return Prior(w / total)


def kosaraju_prior(prior: Prior, n: int) -> Prior:
    """Lift every weight to at least 1/n**2, then renormalize.

    The perturbation improves the greedy approximation factor on unit-cost
    instances; callers assert unit costs themselves.  Uniform priors with
    n >= 1 are fixed points.
    """
    if n < 1:
        raise InstanceError("n must be positive")
    floor = 1.0 / (n * n)
    lifted = np.maximum(prior.weights, floor)
    return Prior(lifted / lifted.sum(), kosaraju_modified=True)


@dataclass(frozen=True)
class PartialRealization:
    """Ordered (test index, outcome) observations; no test appears twice."""

    observations: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        obs = tuple((int(t), int(y)) for t, y in self.observations)
        tests = [t for t, _ in obs]
        if len(set(tests)) != len(tests):
            raise InstanceError("a test may be observed at most once")
        object.__setattr__(self, "observations", obs)

    @property
    def tests(self) -> frozenset[int]:
        return frozenset(t for t, _ in self.observations)

    def extend(self, test: int, outcome: int) -> "PartialRealization":
        return PartialRealization(self.observations + ((int(test), int(outcome)),))

    def __len__(self) -> int:
        return len(self.observations)


EMPTY = PartialRealization()


@dataclass(frozen=True)
class VersionSpace:
    """Hypotheses with positive posterior, plus their total prior mass."""

    members: tuple[int, ...]
    mask: np.ndarray
    mass: float

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class EcdInstance:
    """A class-determination problem over deterministic tests.

    ``outcomes[h, t]`` is the label hypothesis ``h`` produces on test ``t``.
    ``classes`` lists hypothesis indices per block; ``class_of[h]`` inverts it.
    """

    hypothesis_ids: tuple[str, ...]
    prior: np.ndarray
    test_ids: tuple[str, ...]
    costs: np.ndarray
    outcomes: np.ndarray
    classes: tuple[tuple[int, ...], ...]
    class_of: np.ndarray
    _hyp_index: dict = field(repr=False, compare=False, default_factory=dict)
    _test_index: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def n_hypotheses(self) -> int:
        return len(self.hypothesis_ids)

    @property
    def n_tests(self) -> int:
        return len(self.test_ids)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def hyp_index(self, hid: str) -> int:
        return self._hyp_index[hid]

    def test_index(self, tid: str) -> int:
        return self._test_index[tid]

    def observe(self, pairs: Iterable[tuple[object, int]]) -> PartialRealization:
        """Build a partial realization, accepting test ids or indices."""
        obs = []
        for t, y in pairs:
            idx = self._test_index[t] if isinstance(t, str) else int(t)
            obs.append((idx, int(y)))
        return PartialRealization(tuple(obs))


def make_instance(
    hypothesis_ids: Sequence[str],
    weights: Sequence[float],
    test_ids: Sequence[str],
    costs: Sequence[float],
    outcomes: Sequence[Sequence[int]],
    classes: Sequence[Sequence[str]],
) -> EcdInstance:
    """Validate and assemble an :class:`EcdInstance`.

    The first violated invariant is reported with the offending indices.
    """
    hids = tuple(str(h) for h in hypothesis_ids)
    tids = tuple(str(t) for t in test_ids)
    n, m = len(hids), len(tids)
    if n == 0 or m == 0:
        raise InstanceError("need at least one hypothesis and one test")
    if len(set(hids)) != n:
        raise InstanceError("hypothesis ids must be unique")
    if len(set(tids)) != m:
        raise InstanceError("test ids must be unique")

    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise InstanceError(f"prior has {w.size} entries for {n} hypotheses")
    neg = np.flatnonzero(w < 0)
    if neg.size:
        raise InstanceError(f"prior weight at index {neg[0]} is negative")
    if abs(float(w.sum()) - 1.0) > PRIOR_TOL:
        raise InstanceError(f"prior sums to {w.sum()!r}, expected 1")

    c = np.asarray(costs, dtype=float)
    if c.shape != (m,):
        raise InstanceError(f"costs has {c.size} entries for {m} tests")
    bad = np.flatnonzero(c <= 0)
    if bad.size:
        raise InstanceError(f"cost of test index {bad[0]} is not positive")

    out = np.asarray(outcomes, dtype=int)
    if out.shape != (n, m):
        raise InstanceError(f"outcome table has shape {out.shape}, expected {(n, m)}")
    if np.any(out < 0):
        i, j = np.argwhere(out < 0)[0]
        raise InstanceError(f"outcome at hypothesis {i}, test {j} is negative")

    seen_rows: dict[bytes, int] = {}
    for i in range(n):
        key = out[i].tobytes()
        if key in seen_rows:
            raise InstanceError(
                f"hypotheses {seen_rows[key]} and {i} share an identical outcome row"
            )
        seen_rows[key] = i

    hyp_index = {h: i for i, h in enumerate(hids)}
    class_of = np.full(n, -1, dtype=int)
    blocks: list[tuple[int, ...]] = []
    for k, block in enumerate(classes):
        idxs = []
        for hid in block:
            if hid not in hyp_index:
                raise InstanceError(f"class {k} references unknown hypothesis {hid!r}")
            i = hyp_index[hid]
            if class_of[i] != -1:
                raise InstanceError(f"hypothesis {hid!r} appears in two classes")
            class_of[i] = k
            idxs.append(i)
        if not idxs:
            raise InstanceError(f"class {k} is empty")
        blocks.append(tuple(idxs))
    missing = np.flatnonzero(class_of == -1)
    if missing.size:
        raise InstanceError(
            f"hypothesis {hids[missing[0]]!r} is not covered by any class"
        )

    for arr in (w, c, out, class_of):
        arr.setflags(write=False)
    return EcdInstance(
        hypothesis_ids=hids,
        prior=w,
        test_ids=tids,
        costs=c,
        outcomes=out,
        classes=tuple(blocks),
        class_of=class_of,
        _hyp_index=hyp_index,
        _test_index={t: j for j, t in enumerate(tids)},
    )


def _consistent_mask(instance: EcdInstance, partial: PartialRealization) -> np.ndarray:
    mask = instance.prior > 0
    for t, y in partial.observations:
        mask &= instance.outcomes[:, t] == y
    return mask


def version_space(instance: EcdInstance, partial: PartialRealization) -> VersionSpace:
    """Hypotheses whose rows match every observation (and have positive prior)."""
    mask = _consistent_mask(instance, partial)
    members = tuple(int(i) for i in np.flatnonzero(mask))
    if not members:
        raise InconsistentObservationsError("empty version space")
    mask = mask.copy()
    mask.setflags(write=False)
    return VersionSpace(members=members, mask=mask, mass=float(instance.prior[list(members)].sum()))


def posterior(instance: EcdInstance, partial: PartialRealization) -> np.ndarray:
    """Exact posterior over hypotheses given the observations."""
    vs = version_space(instance, partial)
    post = np.where(vs.mask, instance.prior, 0.0)
    return post / vs.mass


def class_posterior(instance: EcdInstance, partial: PartialRealization) -> np.ndarray:
    """Posterior marginalized over the class partition."""
    post = posterior(instance, partial)
    return np.bincount(instance.class_of, weights=post, minlength=instance.n_classes)


def class_masses(instance: EcdInstance, mask: np.ndarray) -> np.ndarray:
    """Unnormalized prior mass of each class restricted to ``mask``."""
    w = np.where(mask, instance.prior, 0.0)
    return np.bincount(instance.class_of, weights=w, minlength=instance.n_classes)


def is_terminal(instance: EcdInstance, partial: PartialRealization, mode: str = "ecd") -> bool:
    """Whether the observations already pin down the target.

    ``odt``: the version space is a singleton.  ``ecd``: the version space
    lies inside one class block.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    vs = version_space(instance, partial)
    if mode == "odt":
        return len(vs) == 1
    labels = instance.class_of[list(vs.members)]
    return bool(np.all(labels == labels[0]))


def instance_to_dict(instance: EcdInstance) -> dict:
    return {
        "hypotheses": [
            {"id": h, "weight": float(w)}
            for h, w in zip(instance.hypothesis_ids, instance.prior)
        ],
        "tests": [
            {"id": t, "cost": float(c)} for t, c in zip(instance.test_ids, instance.costs)
        ],
        "outcomes": instance.outcomes.tolist(),
        "classes": [
            [instance.hypothesis_ids[i] for i in block] for block in instance.classes
        ],
    }


def instance_from_dict(doc: dict) -> EcdInstance:
    try:
        hyps = doc["hypotheses"]
        tests = doc["tests"]
        outcomes = doc["outcomes"]
        classes = doc["classes"]
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"missing instance field: {exc}") from exc
    return make_instance(
        hypothesis_ids=[h["id"] for h in hyps],
        weights=[h["weight"] for h in hyps],
        test_ids=[t["id"] for t in tests],
        costs=[t["cost"] for t in tests],
        outcomes=outcomes,
        classes=classes,
    )


def save_instance(instance: EcdInstance, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2)
        fh.write("\n")


def load_instance(path: str) -> EcdInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))
