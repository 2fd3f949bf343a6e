"""Choice-under-risk elicitation: lotteries, utility theories, grid inference.

Payoffs are fixed at (-10, 0, 10) dollars.  A lottery is a probability triple
over them; the test pool pairs every distinct lottery with every other.  Four
utility theories (expected value, prospect theory, mean-variance-skewness,
constant relative risk aversion) predict which of two lotteries a subject
prefers, and a softmax response model turns the utility gap into a choice
probability.  Inference is an exact grid posterior over (theory, parameters).

The probability grid follows the elicitation protocol: the first two payoff
probabilities range over {0.01, 0.1, ..., 0.9, 0.99} and the third is the
remainder when nonnegative, which yields 66 lotteries and 2145 unordered
pairs.

CRRA utilities are evaluated on shifted wealth (default shift 20) because
power/log utility is undefined at the -10 payoff; the shift is configurable
and recorded in session configs.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import exp, log

import numpy as np

PAYOFFS = (-10.0, 0.0, 10.0)
PROB_GRID = (0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99)
THEORIES = ("EV", "PT", "MVS", "CRRA")
ECON_CRITERIA = ("eff", "ig", "us", "vs", "random")

# utility gaps beyond this are clamped so the softmax stays strictly inside
# (0, 1) in double precision and no observed choice ever has likelihood 0
_SOFTMAX_CLIP = 36.0


class PosteriorCollapseError(RuntimeError):
    """Total posterior mass underflowed (softmax likelihoods make this unreachable)."""


@dataclass(frozen=True)
class Lottery:
    """A probability triple over the fixed payoffs (-10, 0, 10)."""

    probs: tuple[float, float, float]

    def __post_init__(self) -> None:
        p = tuple(float(x) for x in self.probs)
        if len(p) != 3 or any(x < 0 for x in p):
            raise ValueError("lottery needs three nonnegative probabilities")
        if abs(sum(p) - 1.0) > 1e-9:
            raise ValueError(f"lottery probabilities sum to {sum(p)!r}, expected 1")
        object.__setattr__(self, "probs", p)

    @property
    def payoffs(self) -> tuple[float, float, float]:
        return PAYOFFS


@dataclass(frozen=True)
class LotteryPair:
    """One test: choose between two distinct lotteries."""

    index: int
    first: Lottery
    second: Lottery


def enumerate_lotteries() -> tuple[Lottery, ...]:
    """All 66 grid lotteries, in (p1, p2) grid order."""
    out = []
    for p1 in PROB_GRID:
        for p2 in PROB_GRID:
            p3 = round(1.0 - p1 - p2, 10)
            if p3 >= 0.0:
                out.append(Lottery((p1, p2, p3)))
    return tuple(out)


def enumerate_tests() -> tuple[LotteryPair, ...]:
    """All 2145 unordered non-identical lottery pairs, lexicographic order."""
    lots = enumerate_lotteries()
    return tuple(
        LotteryPair(k, lots[i], lots[j])
        for k, (i, j) in enumerate(itertools.combinations(range(len(lots)), 2))
    )


def write_test_pool_csv(path: str) -> None:
    """Export the pair pool: pair index plus the six probabilities."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair_index", "p1_1", "p1_2", "p1_3", "p2_1", "p2_2", "p2_3"])
        for pair in enumerate_tests():
            writer.writerow([pair.index, *pair.first.probs, *pair.second.probs])


@dataclass(frozen=True)
class TheoryPoint:
    """A theory plus its parameter values (empty tuple for EV)."""

    theory: str
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.theory not in THEORIES:
            raise ValueError(f"unknown theory {self.theory!r}")
        want = {"EV": 0, "PT": 3, "MVS": 3, "CRRA": 1}[self.theory]
        if len(self.params) != want:
            raise ValueError(f"{self.theory} takes {want} parameters")
        object.__setattr__(self, "params", tuple(float(x) for x in self.params))

    def label(self) -> str:
        if not self.params:
            return self.theory
        return self.theory + "(" + ", ".join(f"{p:g}" for p in self.params) + ")"


@dataclass(frozen=True)
class EconConfig:
    """Canonical parameter points, per-theory grids, and the CRRA wealth shift."""

    crra_wealth_shift: float = 20.0
    pt_canonical: tuple[float, float, float] = (0.9, 2.2, 0.9)
    mvs_canonical: tuple[float, float, float] = (0.8, 0.25, 0.25)
    crra_canonical: float = 1.0
    pt_grid: tuple[tuple[float, ...], ...] = (
        (0.85, 0.9, 0.95),
        (2.1, 2.2, 2.3),
        (0.9, 0.95, 1.0),
    )
    mvs_grid: tuple[tuple[float, ...], ...] = (
        (0.8, 0.9, 1.0),
        (0.2, 0.25, 0.3),
        (0.2, 0.25, 0.3),
    )
    crra_grid: tuple[float, ...] = (0.9, 0.95, 1.0)

    def to_dict(self) -> dict:
        return {
            "crra_wealth_shift": self.crra_wealth_shift,
            "pt_canonical": list(self.pt_canonical),
            "mvs_canonical": list(self.mvs_canonical),
            "crra_canonical": self.crra_canonical,
            "pt_grid": [list(g) for g in self.pt_grid],
            "mvs_grid": [list(g) for g in self.mvs_grid],
            "crra_grid": list(self.crra_grid),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EconConfig":
        base = cls()
        return cls(
            crra_wealth_shift=float(doc.get("crra_wealth_shift", base.crra_wealth_shift)),
            pt_canonical=tuple(doc.get("pt_canonical", base.pt_canonical)),
            mvs_canonical=tuple(doc.get("mvs_canonical", base.mvs_canonical)),
            crra_canonical=float(doc.get("crra_canonical", base.crra_canonical)),
            pt_grid=tuple(tuple(g) for g in doc.get("pt_grid", base.pt_grid)),
            mvs_grid=tuple(tuple(g) for g in doc.get("mvs_grid", base.mvs_grid)),
            crra_grid=tuple(doc.get("crra_grid", base.crra_grid)),
        )


def save_econ_config(config: EconConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")


def load_econ_config(path: str) -> EconConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return EconConfig.from_dict(json.load(fh))


def canonical_points(config: EconConfig = EconConfig()) -> tuple[TheoryPoint, ...]:
    """The four fixed-parameter models, one per theory."""
    return (
        TheoryPoint("EV"),
        TheoryPoint("PT", config.pt_canonical),
        TheoryPoint("MVS", config.mvs_canonical),
        TheoryPoint("CRRA", (config.crra_canonical,)),
    )


def grid_points(config: EconConfig = EconConfig()) -> tuple[TheoryPoint, ...]:
    """The 58-point parameter grid: EV, 27 PT, 27 MVS, 3 CRRA."""
    pts = [TheoryPoint("EV")]
    pts += [TheoryPoint("PT", combo) for combo in itertools.product(*config.pt_grid)]
    pts += [TheoryPoint("MVS", combo) for combo in itertools.product(*config.mvs_grid)]
    pts += [TheoryPoint("CRRA", (a,)) for a in config.crra_grid]
    return tuple(pts)


@lru_cache(maxsize=None)
def utility(point: TheoryPoint, lottery: Lottery, wealth_shift: float = 20.0) -> float:
    """The theory's utility for a lottery.

    PT skips zero-probability outcomes (the Prelec weight is undefined at 0);
    MVS defines standardized skewness as 0 for degenerate lotteries; CRRA is
    evaluated on shifted wealth and raises if any shifted payoff is
    nonpositive.
    """
    p = lottery.probs
    pay = PAYOFFS
    if point.theory == "EV":
        return sum(pi * li for pi, li in zip(p, pay))
    if point.theory == "PT":
        rho, lam, alpha = point.params
        total = 0.0
        for pi, li in zip(p, pay):
            if pi <= 0:
                continue
            f = li**rho if li >= 0 else -lam * (-li) ** rho
            total += f * exp(-((log(1.0 / pi)) ** alpha))
        return total
    if point.theory == "MVS":
        w_mu, w_sigma, w_nu = point.params
        mu = sum(pi * li for pi, li in zip(p, pay))
        var = sum(pi * (li - mu) ** 2 for pi, li in zip(p, pay))
        sigma = var**0.5
        nu = 0.0 if sigma == 0 else sum(pi * (li - mu) ** 3 for pi, li in zip(p, pay)) / sigma**3
        return w_mu * mu - w_sigma * sigma + w_nu * nu
    # CRRA
    (a,) = point.params
    shifted = [wealth_shift + li for li in pay]
    if any(s <= 0 for s in shifted):
        raise ValueError(
            f"CRRA needs positive shifted wealth; shift {wealth_shift} leaves {min(shifted)}"
        )
    if a == 1.0:
        return sum(pi * log(s) for pi, s in zip(p, shifted))
    return sum(pi * s ** (1.0 - a) / (1.0 - a) for pi, s in zip(p, shifted))


def response_likelihood(u1: float, u2: float) -> float:
    """P(choose the first lottery) = 1 / (1 + exp(u2 - u1)), clipped gap."""
    gap = min(max(u2 - u1, -_SOFTMAX_CLIP), _SOFTMAX_CLIP)
    return 1.0 / (1.0 + exp(gap))


def choice_prob_matrix(
    points: tuple[TheoryPoint, ...],
    pairs: tuple[LotteryPair, ...] | None = None,
    wealth_shift: float = 20.0,
) -> np.ndarray:
    """P(choice = 1) for every (point, pair); shape (n_points, n_pairs)."""
    if pairs is None:
        pairs = enumerate_tests()
    out = np.empty((len(points), len(pairs)))
    for i, pt in enumerate(points):
        for j, pair in enumerate(pairs):
            out[i, j] = response_likelihood(
                utility(pt, pair.first, wealth_shift), utility(pt, pair.second, wealth_shift)
            )
    return out


def theory_indices(points: tuple[TheoryPoint, ...]) -> np.ndarray:
    return np.array([THEORIES.index(pt.theory) for pt in points], dtype=int)


@dataclass(frozen=True)
class GridPosterior:
    """A normalized distribution over theory points."""

    points: tuple[TheoryPoint, ...]
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.points),):
            raise ValueError("one weight per point required")
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("posterior weights must be nonnegative and sum to 1")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def theory_marginals(self) -> np.ndarray:
        idx = theory_indices(self.points)
        return np.bincount(idx, weights=self.weights, minlength=len(THEORIES))

    def map_theory(self) -> str | None:
        """MAP theory, or None on an exact tie."""
        marg = self.theory_marginals()
        top = marg.max()
        if int((marg == top).sum()) > 1:
            return None
        return THEORIES[int(np.argmax(marg))]

    def top_points(self, k: int = 5) -> list[tuple[TheoryPoint, float]]:
        order = np.argsort(-self.weights, kind="stable")[:k]
        return [(self.points[i], float(self.weights[i])) for i in order]


def uniform_over_points(points: tuple[TheoryPoint, ...]) -> GridPosterior:
    n = len(points)
    return GridPosterior(points, np.full(n, 1.0 / n))


def uniform_over_theories(points: tuple[TheoryPoint, ...]) -> GridPosterior:
    """Equal mass per theory, split evenly within each theory's points."""
    idx = theory_indices(points)
    present = np.unique(idx)
    counts = np.bincount(idx, minlength=len(THEORIES))
    w = np.array([1.0 / (present.size * counts[i]) for i in idx])
    return GridPosterior(points, w)


def bayes_update(
    posterior: GridPosterior,
    test: LotteryPair,
    choice: int,
    wealth_shift: float = 20.0,
    likelihoods: np.ndarray | None = None,
) -> GridPosterior:
    """Multiply in the softmax likelihood of the observed choice, renormalize.

    ``likelihoods`` may supply the per-point P(choice = 1) column to avoid
    recomputing utilities.
    """
    if choice not in (1, 2):
        raise ValueError("choice must be 1 or 2")
    if likelihoods is None:
        likelihoods = np.array(
            [
                response_likelihood(
                    utility(pt, test.first, wealth_shift), utility(pt, test.second, wealth_shift)
                )
                for pt in posterior.points
            ]
        )
    lik = likelihoods if choice == 1 else 1.0 - likelihoods
    w = posterior.weights * lik
    total = float(w.sum())
    if total < 1e-300:
        raise PosteriorCollapseError("posterior mass underflowed")
    return GridPosterior(posterior.points, w / total)


def score_econ_tests(
    weights: np.ndarray,
    theory_idx: np.ndarray,
    prob1: np.ndarray,
    criterion: str,
) -> np.ndarray:
    """Score every pair under one soft-model criterion; shape (n_pairs,).

    ``eff``: expected rise of the theory-marginal sum of squares.
    ``ig``: expected Shannon-entropy drop of the theory marginals (bits).
    ``us``: predictive choice entropy.
    ``vs``: expected version-space mass reduction under the soft posterior,
    which ranks tests by the predictive Gini 2 p (1 - p) (the current-mass
    factor is test-independent and omitted).
    """
    if criterion not in ("eff", "ig", "us", "vs"):
        raise ValueError(f"unknown econ criterion {criterion!r}")
    p1 = weights @ prob1
    p2 = 1.0 - p1
    if criterion == "us":
        def h(p):
            out = np.zeros_like(p)
            pos = p > 0
            out[pos] = -p[pos] * np.log2(p[pos])
            return out

        return h(p1) + h(p2)
    if criterion == "vs":
        return 2.0 * p1 * p2

    K = len(THEORIES)
    onehot = np.zeros((K, weights.size))
    onehot[theory_idx, np.arange(weights.size)] = 1.0
    wc = onehot @ weights
    m1 = onehot @ (weights[:, None] * prob1)
    m2 = wc[:, None] - m1
    if criterion == "eff":
        with np.errstate(divide="ignore", invalid="ignore"):
            s1 = np.where(p1 > 0, (m1**2).sum(axis=0) / p1, 0.0)
            s2 = np.where(p2 > 0, (m2**2).sum(axis=0) / p2, 0.0)
        return s1 + s2 - float((wc**2).sum())
    # ig
    def ent(m, p):
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(p > 0, m / np.where(p > 0, p, 1.0), 0.0)
            t = np.where(q > 0, -q * np.log2(np.where(q > 0, q, 1.0)), 0.0)
        return t.sum(axis=0)

    h_now = float(sum(-w * np.log2(w) for w in wc if w > 0))
    return h_now - (p1 * ent(m1, p1) + p2 * ent(m2, p2))


def select_econ_test(
    weights: np.ndarray,
    theory_idx: np.ndarray,
    prob1: np.ndarray,
    presented: np.ndarray,
    criterion: str,
    rng: np.random.Generator | None = None,
) -> int:
    """Pick the best unpresented pair; lowest index on ties."""
    open_idx = np.flatnonzero(~presented)
    if open_idx.size == 0:
        raise ValueError("no tests remain")
    if criterion == "random":
        if rng is None:
            raise ValueError("random criterion requires an rng")
        return int(rng.choice(open_idx))
    scores = score_econ_tests(weights, theory_idx, prob1, criterion)
    return int(open_idx[np.argmax(scores[open_idx])])


def select_test_eff(
    posterior: GridPosterior,
    prob1: np.ndarray,
    remaining: np.ndarray | None = None,
) -> int:
    """The pair maximizing the expected theory-Gini reduction.

    ``remaining`` is a boolean availability mask over the pool (default all).
    """
    if remaining is None:
        remaining = np.ones(prob1.shape[1], dtype=bool)
    return select_econ_test(
        posterior.weights,
        theory_indices(posterior.points),
        prob1,
        ~np.asarray(remaining, dtype=bool),
        "eff",
    )
