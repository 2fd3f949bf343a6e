"""Desk-scale simulation experiments and cost-ratio reports.

Accuracy scenarios replay the elicitation protocol on simulated subjects: a
true model is drawn from the scenario prior, choices are sampled from its
softmax response model, and each selection policy sees the same subject
through a shared per-replicate random stream (common random numbers).  A
replicate counts as correct after k tests when the MAP theory equals the
truth; exact ties count as incorrect.

Cost scenarios evaluate policies on the adversarial families (and random
instances) exactly, with the brute-force optimum attached where the oracle's
size guard allows.

All randomness flows from one master seed through named substreams, so CSV
outputs are byte-identical across reruns.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .adversarial import gen_gbs_bad, gen_posterior_bad
from .econ import (
    THEORIES,
    EconConfig,
    canonical_points,
    choice_prob_matrix,
    grid_points,
    select_econ_test,
    theory_indices,
    uniform_over_theories,
)
from .instance import EcdInstance, make_instance
from .oracle import OracleSizeError, optimal_expected_cost
from .policies import POLICY_CRITERIA, PolicySpec, expected_cost

ACCURACY_SCENARIOS = ("fixed_params", "param_grid")
COST_SCENARIOS = ("gbs_bad", "posterior_bad", "random_ecd")
SCENARIOS = ACCURACY_SCENARIOS + COST_SCENARIOS

ACCURACY_POLICIES = ("effecxtive", "infogain", "us", "vs", "random")
_ECON_CRITERION = {
    "effecxtive": "eff",
    "infogain": "ig",
    "us": "us",
    "vs": "vs",
    "random": "random",
}

_DEFAULT_CHECKS = {
    "fixed_params": (
        ("effecxtive", "infogain"),
        ("infogain", "random"),
        ("random", "us"),
        ("random", "vs"),
    ),
    "param_grid": (("effecxtive", "random"), ("infogain", "random")),
}

# substream tags for SeedSequence spawn keys
_TRUTH, _RESPONSES, _POLICY, _INSTANCES = 0, 1, 2, 3


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: scenario, policies, replicate count, seed, outputs."""

    scenario: str
    policies: tuple[str, ...] = ()
    replicates: int = 1000
    budget: int = 30
    seed: int = 0
    sizes: tuple[int, ...] = ()
    include_opt: bool = True
    sigma: float = 3.0
    ordinal_checks: tuple[tuple[str, str], ...] | None = None
    econ: EconConfig = field(default_factory=EconConfig)
    n_hypotheses: int = 5
    n_tests: int = 5
    n_outcomes: int = 2
    n_classes: int = 2

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.replicates < 1 or self.budget < 1:
            raise ValueError("replicates and budget must be >= 1")
        if not self.policies:
            default = ACCURACY_POLICIES if self.scenario in ACCURACY_SCENARIOS else ("ec2", "gbs")
            object.__setattr__(self, "policies", default)
        names = ACCURACY_POLICIES if self.scenario in ACCURACY_SCENARIOS else POLICY_CRITERIA
        for p in self.policies:
            if p not in names:
                raise ValueError(f"policy {p!r} not valid for scenario {self.scenario!r}")

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "policies": list(self.policies),
            "replicates": self.replicates,
            "budget": self.budget,
            "seed": self.seed,
            "sizes": list(self.sizes),
            "include_opt": self.include_opt,
            "sigma": self.sigma,
            "ordinal_checks": None
            if self.ordinal_checks is None
            else [list(c) for c in self.ordinal_checks],
            "econ": self.econ.to_dict(),
            "n_hypotheses": self.n_hypotheses,
            "n_tests": self.n_tests,
            "n_outcomes": self.n_outcomes,
            "n_classes": self.n_classes,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SimConfig":
        kwargs = dict(doc)
        if "econ" in kwargs:
            kwargs["econ"] = EconConfig.from_dict(kwargs["econ"])
        for key in ("policies", "sizes"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(kwargs[key])
        if kwargs.get("ordinal_checks") is not None:
            kwargs["ordinal_checks"] = tuple(tuple(c) for c in kwargs["ordinal_checks"])
        return cls(**kwargs)


@dataclass(frozen=True)
class AccuracyCurve:
    """Per-k fraction of replicates whose MAP theory matched the truth."""

    policy: str
    accuracy: np.ndarray
    stderr: np.ndarray


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    curves: dict
    checks: tuple
    passed: bool
    files: tuple[str, ...]


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def random_dyadic_prior(rng: np.random.Generator, n: int) -> np.ndarray:
    """A positive prior with dyadic entries k/2^m (exactly representable)."""
    denom = 1 << (int(n - 1).bit_length() + 3)
    cuts = rng.choice(np.arange(1, denom), size=n - 1, replace=False)
    cuts = np.sort(cuts)
    parts = np.diff(np.concatenate(([0], cuts, [denom])))
    return parts / denom


def random_instance(
    rng: np.random.Generator,
    n: int = 5,
    m: int = 5,
    n_outcomes: int = 2,
    n_classes: int = 2,
    dyadic: bool = True,
) -> EcdInstance:
    """A random instance with distinct rows and a random class partition."""
    if n_outcomes**m < n:
        raise ValueError("outcome table too small to keep rows distinct")
    for _ in range(1000):
        outcomes = rng.integers(0, n_outcomes, size=(n, m))
        if len({row.tobytes() for row in outcomes}) == n:
            break
    else:
        raise RuntimeError("failed to sample distinct outcome rows")
    weights = random_dyadic_prior(rng, n) if dyadic else np.full(n, 1.0 / n)
    order = rng.permutation(n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=n_classes - 1, replace=False))
    blocks = np.split(order, cuts)
    hids = [f"h{i + 1}" for i in range(n)]
    return make_instance(
        hypothesis_ids=hids,
        weights=weights,
        test_ids=[f"t{j + 1}" for j in range(m)],
        costs=np.ones(m),
        outcomes=outcomes,
        classes=[[hids[i] for i in block] for block in blocks],
    )


def _accuracy_run(config: SimConfig) -> dict[str, AccuracyCurve]:
    econ = config.econ
    if config.scenario == "fixed_params":
        points = canonical_points(econ)
    else:
        points = grid_points(econ)
    prior = uniform_over_theories(points).weights
    theory_idx = theory_indices(points)
    prob1 = choice_prob_matrix(points, wealth_shift=econ.crra_wealth_shift)
    n_tests = prob1.shape[1]
    theories_present = np.unique(theory_idx)

    R, B = config.replicates, config.budget
    correct = np.zeros((len(config.policies), R, B), dtype=bool)
    for r in range(R):
        truth_rng = _rng(config.seed, _TRUTH, r)
        theory = int(theories_present[truth_rng.integers(theories_present.size)])
        members = np.flatnonzero(theory_idx == theory)
        truth = int(members[truth_rng.integers(members.size)])
        u = _rng(config.seed, _RESPONSES, r).random(B)
        for ip, policy in enumerate(config.policies):
            crit = _ECON_CRITERION[policy]
            pol_rng = _rng(config.seed, _POLICY, r, ip) if crit == "random" else None
            w = prior.copy()
            presented = np.zeros(n_tests, dtype=bool)
            for k in range(B):
                t = select_econ_test(w, theory_idx, prob1, presented, crit, pol_rng)
                presented[t] = True
                choice = 1 if u[k] < prob1[truth, t] else 2
                lik = prob1[:, t] if choice == 1 else 1.0 - prob1[:, t]
                w = w * lik
                w = w / w.sum()
                marg = np.bincount(theory_idx, weights=w, minlength=len(THEORIES))
                top = marg.max()
                correct[ip, r, k] = (
                    int((marg == top).sum()) == 1 and int(np.argmax(marg)) == theory
                )
    curves = {}
    for ip, policy in enumerate(config.policies):
        acc = correct[ip].mean(axis=0)
        se = np.sqrt(acc * (1.0 - acc) / R)
        curves[policy] = AccuracyCurve(policy, acc, se)
    return curves


def _ordinal_checks(config: SimConfig, curves: dict[str, AccuracyCurve]) -> tuple:
    pairs = config.ordinal_checks
    if pairs is None:
        pairs = tuple(
            (a, b)
            for a, b in _DEFAULT_CHECKS.get(config.scenario, ())
            if a in curves and b in curves
        )
    checks = []
    k = config.budget - 1
    for better, worse in pairs:
        ca, cb = curves[better], curves[worse]
        gap = float(ca.accuracy[k] - cb.accuracy[k])
        pooled = float(np.hypot(ca.stderr[k], cb.stderr[k]))
        checks.append(
            {
                "better": better,
                "worse": worse,
                "gap": gap,
                "pooled_se": pooled,
                "required": config.sigma * pooled,
                # the ordering is strict; a tie fails even when both SEs vanish
                "passed": gap > 0 and gap >= config.sigma * pooled,
            }
        )
    return tuple(checks)


def _cost_rows(config: SimConfig) -> list[dict]:
    rows = []
    if config.scenario == "gbs_bad":
        cases = [(str(n), gen_gbs_bad(n)) for n in (config.sizes or (10, 50, 100))]
    elif config.scenario == "posterior_bad":
        cases = [(str(q), gen_posterior_bad(q)) for q in (config.sizes or (2, 3))]
    else:
        cases = [
            (
                str(i),
                random_instance(
                    _rng(config.seed, _INSTANCES, i),
                    n=config.n_hypotheses,
                    m=config.n_tests,
                    n_outcomes=config.n_outcomes,
                    n_classes=config.n_classes,
                ),
            )
            for i in range(config.replicates)
        ]
    for size, inst in cases:
        opt = None
        note = ""
        if config.include_opt:
            try:
                opt = optimal_expected_cost(inst).cost
            except OracleSizeError as exc:
                note = str(exc)
        for policy in config.policies:
            spec = PolicySpec(criterion=policy, mode="ecd")
            cost = expected_cost(spec, inst, seed=config.seed)
            rows.append(
                {
                    "family": config.scenario,
                    "size": size,
                    "policy": policy,
                    "expected_cost": cost,
                    "opt": opt,
                    "ratio": None if opt in (None, 0.0) else cost / opt,
                    "note": note,
                }
            )
    return rows


def simulate(config: SimConfig, out_dir: str) -> SimResult:
    """Run one scenario and write its CSV plus a summary JSON."""
    os.makedirs(out_dir, exist_ok=True)
    files = []
    if config.scenario in ACCURACY_SCENARIOS:
        curves = _accuracy_run(config)
        checks = _ordinal_checks(config, curves)
        passed = all(c["passed"] for c in checks)
        curve_path = os.path.join(out_dir, "curves.csv")
        with open(curve_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["policy", "k", "accuracy", "stderr"])
            for policy in config.policies:
                c = curves[policy]
                for k in range(config.budget):
                    writer.writerow([policy, k + 1, float(c.accuracy[k]), float(c.stderr[k])])
        files.append(curve_path)
        summary = {
            "config": config.to_dict(),
            "final_accuracy": {p: float(curves[p].accuracy[-1]) for p in config.policies},
            "checks": list(checks),
            "passed": passed,
        }
    else:
        rows = _cost_rows(config)
        curves = {}
        checks = ()
        passed = True
        ratio_path = os.path.join(out_dir, "ratios.csv")
        with open(ratio_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["family", "size", "policy", "expected_cost", "opt", "ratio"])
            for row in rows:
                writer.writerow(
                    [
                        row["family"],
                        row["size"],
                        row["policy"],
                        row["expected_cost"],
                        "" if row["opt"] is None else row["opt"],
                        "" if row["ratio"] is None else row["ratio"],
                    ]
                )
        files.append(ratio_path)
        summary = {
            "config": config.to_dict(),
            "rows": rows,
            "passed": passed,
        }
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files.append(summary_path)
    return SimResult(config=config, curves=curves, checks=checks, passed=passed, files=tuple(files))


def cost_ratio_report(
    family: str,
    sizes: tuple[int, ...],
    policies: tuple[str, ...],
    include_opt: bool = True,
    seed: int = 0,
) -> list[dict]:
    """Expected cost of each policy per instance size, with OPT where computable."""
    config = SimConfig(
        scenario=family,
        policies=tuple(policies),
        sizes=tuple(sizes),
        include_opt=include_opt,
        seed=seed,
        replicates=max(1, len(sizes)),
    )
    return _cost_rows(config)
