"""Per-test marginal benefit functions.

The edge-cutting objective places a weight P(h)P(h') on every unordered pair
of hypotheses from distinct classes; observing an outcome cuts every edge
with an endpoint that disagrees.  ``delta_ec_naive`` scores a test by
explicit edge enumeration and is kept permanently as the testing oracle;
``delta_ec_fast`` computes the identical value from class-outcome mass
accumulators in time linear in the version space.

The competitors (version-space mass reduction, information gain at the
hypothesis or class level, predictive-entropy uncertainty sampling, value of
information, and the Gini-weight reduction) share the same query shape:
an instance, the observations so far, and one unobserved candidate test.
All expectations are exact enumerations over outcomes; benefits are not
divided by cost here (policies do that).

``score_tests`` evaluates one criterion for every test at once; the scalar
functions remain the reference implementations it is checked against.
"""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .instance import (
    EcdInstance,
    InconsistentObservationsError,
    PartialRealization,
    _consistent_mask,
    class_masses,
    version_space,
)

CRITERIA = ("ec2", "effecxtive", "gbs", "ig_class", "ig_hyp", "us", "voi")


def _xlog2x(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log2(p[pos])
    return out


def entropy_bits(p: np.ndarray) -> float:
    """Shannon entropy in bits with 0 log 0 := 0."""
    return float(-_xlog2x(np.asarray(p, dtype=float)).sum())


def pairwise_inter_class_weight(instance: EcdInstance) -> float:
    """Total edge weight summed over ordered pairs from distinct classes."""
    w = instance.prior
    diff = instance.class_of[:, None] != instance.class_of[None, :]
    return float((w[:, None] * w[None, :] * diff).sum())


def inter_class_weight(instance: EcdInstance) -> float:
    """Class-mass form of the total edge weight: 1 - sum_i P(H_i)^2."""
    beta = class_masses(instance, np.ones(instance.n_hypotheses, dtype=bool))
    return float(1.0 - (beta**2).sum())


def _check_query(instance: EcdInstance, partial: PartialRealization, test: int) -> int:
    test = int(test)
    if not 0 <= test < instance.n_tests:
        raise ValueError(f"test index {test} out of range")
    if test in partial.tests:
        raise ValueError(f"test {instance.test_ids[test]} was already observed")
    return test


def f_ec(instance: EcdInstance, tests_run: Iterable[int], truth: int) -> float:
    """Weight of inter-class edges cut by running ``tests_run`` under ``truth``.

    An unordered edge {h, h'} is cut once either endpoint disagrees with the
    realized outcome of some test in the set.
    """
    tests = sorted(set(int(t) for t in tests_run))
    w = instance.prior
    n = instance.n_hypotheses
    if tests:
        sub = instance.outcomes[:, tests]
        disagree = (sub != instance.outcomes[truth, tests]).any(axis=1)
    else:
        disagree = np.zeros(n, dtype=bool)
    inter = instance.class_of[:, None] != instance.class_of[None, :]
    cut = disagree[:, None] | disagree[None, :]
    weight = w[:, None] * w[None, :] * (inter & cut)
    return float(np.triu(weight, k=1).sum())


def f_gbs(instance: EcdInstance, tests_run: Iterable[int], truth: int) -> float:
    """1 - P(V(x_S(truth))) + P(truth): the mass-elimination set objective."""
    tests = sorted(set(int(t) for t in tests_run))
    obs = PartialRealization(tuple((t, int(instance.outcomes[truth, t])) for t in tests))
    vs = version_space(instance, obs)
    return 1.0 - vs.mass + float(instance.prior[truth])


def _query_mask(instance: EcdInstance, partial: PartialRealization) -> np.ndarray:
    mask = _consistent_mask(instance, partial)
    if not mask.any():
        raise InconsistentObservationsError("empty version space")
    return mask


def delta_ec_naive(instance: EcdInstance, partial: PartialRealization, test: int) -> float:
    """Expected newly cut edge weight, by explicit pair enumeration."""
    test = _check_query(instance, partial, test)
    members = np.flatnonzero(_query_mask(instance, partial))
    if members.size == 1:
        return 0.0
    w = instance.prior[members]
    mass = float(w.sum())
    cls = instance.class_of[members]
    col = instance.outcomes[members, test]
    inter = cls[:, None] != cls[None, :]
    pair_w = w[:, None] * w[None, :]
    total = 0.0
    for y in np.unique(col):
        p_y = float(w[col == y].sum()) / mass
        leaves = col != y
        cut = leaves[:, None] | leaves[None, :]
        cut_weight = float(np.triu(pair_w * (inter & cut), k=1).sum())
        total += p_y * cut_weight
    return total


def delta_ec_fast(instance: EcdInstance, partial: PartialRealization, test: int) -> float:
    """Same value as :func:`delta_ec_naive` via class-outcome accumulators.

    With alpha(i, y) the prior mass of class i surviving outcome y and
    beta(i) its mass in the current version space, the newly cut weight under
    y is half of (sum beta)^2 - sum beta^2 - (sum alpha)^2 + sum alpha^2.
    One pass over the version space, plus class-by-outcome bookkeeping.
    """
    test = int(test)
    if not 0 <= test < instance.n_tests:
        raise ValueError(f"test index {test} out of range")
    for t, _ in partial.observations:
        if t == test:
            raise ValueError(f"test {instance.test_ids[test]} was already observed")
    mask = _query_mask(instance, partial)
    K = instance.n_classes
    w = instance.prior * mask
    mass = float(w.sum())
    beta = np.bincount(instance.class_of, weights=w, minlength=K)
    beta_sq = float((beta * beta).sum())
    col = instance.outcomes[:, test]
    top = int(col.max()) + 1
    if top <= 64:
        codes = col
        n_vals = top
    else:  # sparse outcome labels: compress before binning
        values, codes = np.unique(col, return_inverse=True)
        n_vals = values.size
    alpha = np.bincount(
        instance.class_of * n_vals + codes, weights=w, minlength=K * n_vals
    ).reshape(K, n_vals)
    mass_y = alpha.sum(axis=0)
    cut = (mass * mass - beta_sq) - (mass_y * mass_y - (alpha * alpha).sum(axis=0))
    return float(0.5 / mass * (mass_y @ cut))


def delta_gbs(instance: EcdInstance, partial: PartialRealization, test: int) -> float:
    """Expected reduction in version-space prior mass."""
    test = _check_query(instance, partial, test)
    vs = version_space(instance, partial)
    members = np.array(vs.members)
    w = instance.prior[members]
    col = instance.outcomes[members, test]
    reduction = vs.mass
    for y in np.unique(col):
        mass_y = float(w[col == y].sum())
        reduction -= (mass_y / vs.mass) * mass_y
    return reduction


def delta_ig(
    instance: EcdInstance,
    partial: PartialRealization,
    test: int,
    level: str = "class",
) -> float:
    """Expected Shannon-entropy drop of the hypothesis or class distribution."""
    if level not in ("hypothesis", "class"):
        raise ValueError(f"unknown level {level!r}")
    test = _check_query(instance, partial, test)
    vs = version_space(instance, partial)
    members = np.array(vs.members)
    w = instance.prior[members]
    cls = instance.class_of[members]
    col = instance.outcomes[members, test]

    def dist(sel: np.ndarray) -> np.ndarray:
        ww = w[sel]
        if level == "hypothesis":
            return ww / ww.sum()
        return np.bincount(cls[sel], weights=ww, minlength=instance.n_classes) / ww.sum()

    everyone = np.ones(members.size, dtype=bool)
    gain = entropy_bits(dist(everyone))
    for y in np.unique(col):
        sel = col == y
        p_y = float(w[sel].sum()) / vs.mass
        gain -= p_y * entropy_bits(dist(sel))
    return gain


def delta_us(instance: EcdInstance, partial: PartialRealization, test: int) -> float:
    """Entropy of the predictive outcome distribution (not a gain)."""
    test = _check_query(instance, partial, test)
    vs = version_space(instance, partial)
    members = np.array(vs.members)
    w = instance.prior[members]
    col = instance.outcomes[members, test]
    probs = [float(w[col == y].sum()) / vs.mass for y in np.unique(col)]
    return entropy_bits(np.array(probs))


def _default_class_loss(instance: EcdInstance) -> np.ndarray:
    # decision d = "declare class d"; 0-1 loss on class membership
    K = instance.n_classes
    return 1.0 - (np.arange(K)[:, None] == instance.class_of[None, :]).astype(float)


def delta_voi(
    instance: EcdInstance,
    partial: PartialRealization,
    test: int,
    loss: np.ndarray | None = None,
) -> float:
    """Expected drop of the minimum-risk decision's expected loss.

    ``loss[d, h]`` defaults to 0-1 loss over classes, in which case this is
    E_y[max_i P(H_i | x, y)] - max_i P(H_i | x).
    """
    test = _check_query(instance, partial, test)
    L = _default_class_loss(instance) if loss is None else np.asarray(loss, dtype=float)
    vs = version_space(instance, partial)
    members = np.array(vs.members)
    w = instance.prior[members]
    col = instance.outcomes[members, test]
    Lsub = L[:, members]

    def risk(sel: np.ndarray) -> float:
        ww = w[sel]
        post = ww / ww.sum()
        return float((Lsub[:, sel] @ post).min())

    everyone = np.ones(members.size, dtype=bool)
    value = risk(everyone)
    for y in np.unique(col):
        sel = col == y
        p_y = float(w[sel].sum()) / vs.mass
        value -= p_y * risk(sel)
    return value


def delta_eff(instance: EcdInstance, partial: PartialRealization, test: int) -> float:
    """Expected increase of sum_i P(H_i)^2, i.e. the Gini-weight reduction."""
    test = _check_query(instance, partial, test)
    vs = version_space(instance, partial)
    members = np.array(vs.members)
    w = instance.prior[members]
    cls = instance.class_of[members]
    if np.all(cls == cls[0]):
        return 0.0  # one class left: exactly nothing to gain
    col = instance.outcomes[members, test]

    def sumsq(sel: np.ndarray) -> float:
        ww = w[sel]
        q = np.bincount(cls[sel], weights=ww, minlength=instance.n_classes) / ww.sum()
        return float((q**2).sum())

    everyone = np.ones(members.size, dtype=bool)
    value = -sumsq(everyone)
    for y in np.unique(col):
        sel = col == y
        p_y = float(w[sel].sum()) / vs.mass
        value += p_y * sumsq(sel)
    return value


# ---------------------------------------------------------------------------
# Vectorized scoring across the whole test pool.


def score_tests(
    instance: EcdInstance,
    partial: PartialRealization,
    criterion: str,
    loss: np.ndarray | None = None,
) -> np.ndarray:
    """Benefit of every test under one criterion, as a length-m vector.

    Values agree with the scalar delta functions; already-observed tests
    score 0 (they no longer split the version space).  Policies divide by
    costs and mask observed tests themselves.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    vs = version_space(instance, partial)
    mask = vs.mask
    n, m, K = instance.n_hypotheses, instance.n_tests, instance.n_classes
    w = np.where(mask, instance.prior, 0.0)
    mass = vs.mass
    members = np.flatnonzero(mask)
    values = np.unique(instance.outcomes[members])

    onehot = np.zeros((K, n))
    onehot[instance.class_of, np.arange(n)] = 1.0

    beta = onehot @ w
    mass_y = np.zeros((values.size, m))
    alpha = np.zeros((values.size, K, m))
    wlog_y = np.zeros((values.size, m))
    wlog = _xlog2x(w)
    for yi, y in enumerate(values):
        ind = (instance.outcomes == y) & mask[:, None]
        Wy = w[:, None] * ind
        mass_y[yi] = Wy.sum(axis=0)
        alpha[yi] = onehot @ Wy
        wlog_y[yi] = wlog @ ind

    p_y = mass_y / mass

    if criterion == "gbs":
        return mass - (mass_y**2).sum(axis=0) / mass

    if criterion == "us":
        return -_xlog2x(p_y).sum(axis=0)

    if criterion == "ec2":
        beta_sq = float((beta**2).sum())
        cut = (mass * mass - beta_sq) - (mass_y**2 - (alpha**2).sum(axis=1))
        return 0.5 * (p_y * cut).sum(axis=0)

    if criterion == "effecxtive":
        if int((beta > 0).sum()) <= 1:
            return np.zeros(m)  # one class left: exactly nothing to gain
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(mass_y[:, None, :] > 0, alpha / mass_y[:, None, :], 0.0)
        now = float(((beta / mass) ** 2).sum())
        return (p_y * (q**2).sum(axis=1)).sum(axis=0) - now

    if criterion == "ig_class":
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(mass_y[:, None, :] > 0, alpha / mass_y[:, None, :], 0.0)
        h_now = entropy_bits(beta / mass)
        h_post = -_xlog2x(q).sum(axis=1)
        return h_now - (p_y * h_post).sum(axis=0)

    if criterion == "ig_hyp":
        h_now = np.log2(mass) - float(wlog.sum()) / mass
        with np.errstate(divide="ignore", invalid="ignore"):
            h_post = np.where(mass_y > 0, np.log2(np.where(mass_y > 0, mass_y, 1.0)) - wlog_y / np.where(mass_y > 0, mass_y, 1.0), 0.0)
        return h_now - (p_y * h_post).sum(axis=0)

    # voi
    L = _default_class_loss(instance) if loss is None else np.asarray(loss, dtype=float)
    risk_now = float((L @ (w / mass)).min())
    risks = np.zeros((values.size, m))
    for yi, y in enumerate(values):
        ind = (instance.outcomes == y) & mask[:, None]
        Wy = w[:, None] * ind
        with np.errstate(divide="ignore", invalid="ignore"):
            post = np.where(mass_y[yi] > 0, Wy / np.where(mass_y[yi] > 0, mass_y[yi], 1.0), 0.0)
        risks[yi] = (L @ post).min(axis=0)
        risks[yi][mass_y[yi] == 0] = 0.0
    return risk_now - (p_y * risks).sum(axis=0)


SCALAR_DELTAS: dict[str, Callable] = {
    "ec2": delta_ec_fast,
    "effecxtive": delta_eff,
    "gbs": delta_gbs,
    "ig_class": lambda inst, partial, t: delta_ig(inst, partial, t, level="class"),
    "ig_hyp": lambda inst, partial, t: delta_ig(inst, partial, t, level="hypothesis"),
    "us": delta_us,
    "voi": delta_voi,
}
