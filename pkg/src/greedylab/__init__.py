"""greedylab: greedy sparse approximation over finite normalized dictionaries,
with exhaustive-search oracles, exact restricted-isometry constants, and
numerical certification of recovery guarantees."""

from .analysis import (
    CheckReport,
    DecaySchedule,
    SweepRow,
    TheoremConstants,
    batch_instance_optimality,
    batch_lemma_decay,
    batch_postprocessing,
    batch_prop_iterate,
    check_claim_sequence,
    check_instance_optimality,
    check_lemma_decay,
    check_livschitz,
    check_postprocessing,
    check_prop_iterate,
    check_tropp_recovery,
    merge_reports,
    postprocess_constant,
    recovery_phase_sweep,
    sweep_to_csv,
    theorem_constants,
)
from .dictionary import (
    Dictionary,
    SparseVector,
    coherence,
    gen_gaussian,
    gen_perturbed_identity,
    gen_union_of_bases,
    gram_submatrix,
    load_dictionary,
    load_dictionary_csv,
    load_sparse_vector,
    load_vector_csv,
    normalize_columns,
    save_dictionary,
    save_dictionary_csv,
    save_sparse_vector,
    save_vector_csv,
    synthesize,
)
from .greedy import (
    GreedyConfig,
    GreedyTrace,
    postprocess_top_n,
    project_on_support,
    run_omp,
    run_pga,
    run_womp,
)
from .oracle import OracleResult, best_n_term, sigma_profile
from .rip import (
    DEFAULT_ENUMERATION_BUDGET,
    RipEstimate,
    rip_coherence_bound,
    rip_exact,
    rip_sampled,
    support_distortion,
)
from .report import render_sweep_figures

__version__ = "0.1.0"

__all__ = [
    "CheckReport",
    "DecaySchedule",
    "DEFAULT_ENUMERATION_BUDGET",
    "Dictionary",
    "GreedyConfig",
    "GreedyTrace",
    "OracleResult",
    "RipEstimate",
    "SparseVector",
    "SweepRow",
    "TheoremConstants",
    "batch_instance_optimality",
    "batch_lemma_decay",
    "batch_postprocessing",
    "batch_prop_iterate",
    "best_n_term",
    "check_claim_sequence",
    "check_instance_optimality",
    "check_lemma_decay",
    "check_livschitz",
    "check_postprocessing",
    "check_prop_iterate",
    "check_tropp_recovery",
    "coherence",
    "gen_gaussian",
    "gen_perturbed_identity",
    "gen_union_of_bases",
    "gram_submatrix",
    "load_dictionary",
    "load_dictionary_csv",
    "load_sparse_vector",
    "load_vector_csv",
    "merge_reports",
    "normalize_columns",
    "postprocess_constant",
    "postprocess_top_n",
    "project_on_support",
    "recovery_phase_sweep",
    "render_sweep_figures",
    "rip_coherence_bound",
    "rip_exact",
    "rip_sampled",
    "run_omp",
    "run_pga",
    "run_womp",
    "save_dictionary",
    "save_dictionary_csv",
    "save_sparse_vector",
    "save_vector_csv",
    "sigma_profile",
    "support_distortion",
    "sweep_to_csv",
    "synthesize",
    "theorem_constants",
]
