"""Adaptive Bayesian test selection via equivalence-class edge cutting."""

from .instance import (
    EcdInstance,
    InconsistentObservationsError,
    InstanceError,
    PartialRealization,
    Prior,
    VersionSpace,
    class_posterior,
    instance_from_dict,
    instance_to_dict,
    is_terminal,
    kosaraju_prior,
    load_instance,
    make_instance,
    normalize_prior,
    posterior,
    save_instance,
    version_space,
)
from .noise import NoisyModel, make_noisy_model, one_flip_model, reduce_noisy
from .objectives import (
    delta_ec_fast,
    delta_ec_naive,
    delta_eff,
    delta_gbs,
    delta_ig,
    delta_us,
    delta_voi,
    f_ec,
    f_gbs,
    inter_class_weight,
    pairwise_inter_class_weight,
    score_tests,
)
from .policies import (
    PolicySpec,
    PolicyStalledError,
    PolicyTrace,
    expected_cost,
    run_fixed_sequence,
    run_policy,
    select_next,
)
from .adversarial import gen_gbs_bad, gen_posterior_bad
from .oracle import (
    OptResult,
    OracleSizeError,
    PropertyReport,
    check_adaptive_submodularity,
    check_strong_monotonicity,
    optimal_expected_cost,
)

__version__ = "0.1.0"
