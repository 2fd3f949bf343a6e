"""Noisy observation models and their reduction to class determination.

Noise enters through an auxiliary variable: the full outcome vector is a
deterministic function of (hypothesis, noise value).  Enumerating the joint
support turns the noisy identification problem into a noiseless one whose
"hypotheses" are outcome vectors; the class partition then encodes what we
actually need to decide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .instance import PRIOR_TOL, EcdInstance, InstanceError, make_instance


@dataclass(frozen=True)
class NoisyModel:
    """Finite-support noisy model.

    ``outcomes[h, s, t]`` is the outcome of test ``t`` when hypothesis ``h``
    co-occurs with noise value ``s``; ``noise_given_hyp[h, s]`` is the
    conditional noise prior.  ``loss[d, h]`` is the loss of decision ``d``
    under hypothesis ``h`` (defaults to 0-1 loss with one decision per
    hypothesis).
    """

    hypothesis_ids: tuple[str, ...]
    prior: np.ndarray
    noise_ids: tuple[str, ...]
    noise_given_hyp: np.ndarray
    test_ids: tuple[str, ...]
    costs: np.ndarray
    outcomes: np.ndarray
    decision_ids: tuple[str, ...]
    loss: np.ndarray

    @property
    def joint(self) -> np.ndarray:
        """P(hypothesis, noise value), shape (n, s)."""
        return self.prior[:, None] * self.noise_given_hyp


def make_noisy_model(
    hypothesis_ids: Sequence[str],
    prior: Sequence[float],
    noise_ids: Sequence[str],
    noise_given_hyp: Sequence[Sequence[float]],
    test_ids: Sequence[str],
    costs: Sequence[float],
    outcomes: Sequence[Sequence[Sequence[int]]],
    decision_ids: Sequence[str] | None = None,
    loss: Sequence[Sequence[float]] | None = None,
) -> NoisyModel:
    hids = tuple(str(h) for h in hypothesis_ids)
    nids = tuple(str(s) for s in noise_ids)
    tids = tuple(str(t) for t in test_ids)
    n, s, m = len(hids), len(nids), len(tids)
    p = np.asarray(prior, dtype=float)
    cond = np.asarray(noise_given_hyp, dtype=float)
    out = np.asarray(outcomes, dtype=int)
    c = np.asarray(costs, dtype=float)
    if p.shape != (n,) or np.any(p < 0):
        raise InstanceError("hypothesis prior must be nonnegative with one entry per hypothesis")
    if cond.shape != (n, s) or np.any(cond < 0):
        raise InstanceError("noise_given_hyp must be a nonnegative (n, s) table")
    joint = p[:, None] * cond
    if abs(float(joint.sum()) - 1.0) > PRIOR_TOL:
        raise InstanceError(f"joint prior sums to {joint.sum()!r}, expected 1")
    if out.shape != (n, s, m):
        raise InstanceError(f"outcome function has shape {out.shape}, expected {(n, s, m)}")
    if np.any(c <= 0) or c.shape != (m,):
        raise InstanceError("costs must be positive, one per test")
    if decision_ids is None:
        decision_ids = hids
        loss = 1.0 - np.eye(n)
    dids = tuple(str(d) for d in decision_ids)
    lo = np.asarray(loss, dtype=float)
    if lo.shape != (len(dids), n):
        raise InstanceError(f"loss has shape {lo.shape}, expected {(len(dids), n)}")
    for arr in (p, cond, out, c, lo):
        arr.setflags(write=False)
    return NoisyModel(hids, p, nids, cond, tids, c, out, dids, lo)


def one_flip_model(
    hypothesis_ids: Sequence[str],
    prior: Sequence[float],
    test_ids: Sequence[str],
    costs: Sequence[float],
    base_outcomes: Sequence[Sequence[int]],
) -> NoisyModel:
    """Binary-test model where exactly one outcome, uniformly chosen, is flipped.

    Each hypothesis gets one noisy copy per test; copy ``j`` flips test ``j``
    of the base row.  The noise value is independent of the hypothesis.
    """
    base = np.asarray(base_outcomes, dtype=int)
    n, m = base.shape
    if not np.isin(base, (0, 1)).all():
        raise InstanceError("one-flip noise requires binary base outcomes")
    out = np.repeat(base[:, None, :], m, axis=1)
    for j in range(m):
        out[:, j, j] = 1 - out[:, j, j]
    return make_noisy_model(
        hypothesis_ids=hypothesis_ids,
        prior=prior,
        noise_ids=[f"flip{j + 1}" for j in range(m)],
        noise_given_hyp=np.full((n, m), 1.0 / m),
        test_ids=test_ids,
        costs=costs,
        outcomes=out,
    )


def reduce_noisy(model: NoisyModel, classes: str = "hypothesis") -> EcdInstance:
    """Reduce a noisy model to a noiseless class-determination instance.

    One reduced hypothesis per distinct outcome vector in the joint support,
    with the support point's probability.  ``classes="hypothesis"`` groups
    vectors by the originating hypothesis and requires that no vector arise
    from two different hypotheses; ``classes="decision"`` groups vectors by
    their risk-minimizing decision (lowest decision index on ties).
    """
    if classes not in ("hypothesis", "decision"):
        raise ValueError(f"unknown class mode {classes!r}")
    joint = model.joint
    n, s = joint.shape

    # vector key -> [reduced id, mass, per-hypothesis mass]
    reduced: dict[bytes, list] = {}
    order: list[bytes] = []
    for h in range(n):
        for q in range(s):
            mass = float(joint[h, q])
            if mass <= 0:
                continue
            vec = model.outcomes[h, q]
            key = vec.tobytes()
            if key not in reduced:
                rid = f"{model.hypothesis_ids[h]}|{model.noise_ids[q]}"
                reduced[key] = [rid, 0.0, np.zeros(n), vec]
                order.append(key)
            entry = reduced[key]
            if classes == "hypothesis" and np.any(entry[2] > 0) and entry[2][h] == 0:
                prev = int(np.flatnonzero(entry[2] > 0)[0])
                raise InstanceError(
                    "outcome vectors collide across hypotheses "
                    f"{model.hypothesis_ids[prev]!r} and {model.hypothesis_ids[h]!r}: "
                    "the hypothesis is not identifiable from all tests"
                )
            entry[1] += mass
            entry[2][h] += mass

    ids = [reduced[k][0] for k in order]
    weights = [reduced[k][1] for k in order]
    rows = [reduced[k][3] for k in order]

    if classes == "hypothesis":
        block_of = {}
        for k in order:
            h = int(np.flatnonzero(reduced[k][2] > 0)[0])
            block_of.setdefault(h, []).append(reduced[k][0])
        blocks = [block_of[h] for h in sorted(block_of)]
    else:
        n_dec = len(model.decision_ids)
        block_of = {}
        for k in order:
            hyp_post = reduced[k][2] / reduced[k][1]
            risks = model.loss @ hyp_post
            best = int(np.argmin(risks))  # argmin takes the lowest index on ties
            block_of.setdefault(best, []).append(reduced[k][0])
        blocks = [block_of[d] for d in sorted(block_of)]

    return make_instance(
        hypothesis_ids=ids,
        weights=weights,
        test_ids=model.test_ids,
        costs=model.costs,
        outcomes=rows,
        classes=blocks,
    )
