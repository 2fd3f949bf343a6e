"""Hard instance families where popular greedy criteria blow up.

``gen_gbs_bad``: uniform prior, indicator tests, and a partition that puts
all but the last hypothesis in one block.  Mass-reduction greedy walks the
tests in order and pays about n/2 while a single test suffices.

``gen_posterior_bad``: 2^q two-hypothesis classes plus four test types
(a parity-key test, q keyed-bit tests, 2^q sequential-probe tests, and
optional constant dummies).  Any policy that scores tests only through the
induced posterior class distribution sees zero value in the key and bit
tests until the key is known, and is forced into sequential search.
"""

from __future__ import annotations

import numpy as np

from .instance import EcdInstance, make_instance


def gen_gbs_bad(n: int) -> EcdInstance:
    """Indicator-test family with classes {h_1..h_{n-1}} and {h_n}."""
    if n < 2:
        raise ValueError("n must be >= 2")
    outcomes = np.eye(n, dtype=int)
    hids = [f"h{i + 1}" for i in range(n)]
    return make_instance(
        hypothesis_ids=hids,
        weights=np.full(n, 1.0 / n),
        test_ids=[f"t{j + 1}" for j in range(n)],
        costs=np.ones(n),
        outcomes=outcomes,
        classes=[hids[:-1], hids[-1:]],
    )


def bit_of(k: int, a: int) -> int:
    """Bit k (1-indexed, least significant first) of a - 1."""
    return (a - 1) >> (k - 1) & 1


def gen_posterior_bad(q: int, dummy_count: int = 0) -> EcdInstance:
    """Posterior-blind family with 2^q classes of two hypotheses each.

    Hypotheses h_{a,v} (class index a in 1..2^q, key bit v in {0,1}) under a
    uniform prior.  Unit-cost binary tests, in index order:

    - ``t0``: reveals v.
    - ``t1..tq``: test k reveals whether bit k of the class index matches v.
    - ``tseq1..tseq{2^q}``: probe k reveals whether a = k.
    - ``tdumb*``: constant 0, no information.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if dummy_count < 0:
        raise ValueError("dummy_count must be >= 0")
    n_classes = 2**q
    hids = []
    rows = []
    for a in range(1, n_classes + 1):
        for v in (0, 1):
            hids.append(f"h{a},{v}")
            row = [v]
            row += [1 if bit_of(k, a) == v else 0 for k in range(1, q + 1)]
            row += [1 if a == k else 0 for k in range(1, n_classes + 1)]
            row += [0] * dummy_count
            rows.append(row)
    tids = (
        ["t0"]
        + [f"t{k}" for k in range(1, q + 1)]
        + [f"tseq{k}" for k in range(1, n_classes + 1)]
        + [f"tdumb{k}" for k in range(1, dummy_count + 1)]
    )
    n = len(hids)
    return make_instance(
        hypothesis_ids=hids,
        weights=np.full(n, 1.0 / n),
        test_ids=tids,
        costs=np.ones(len(tids)),
        outcomes=rows,
        classes=[[f"h{a},0", f"h{a},1"] for a in range(1, n_classes + 1)],
    )
