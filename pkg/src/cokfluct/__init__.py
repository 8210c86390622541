"""Exact and Monte Carlo laboratory for cokernel fluctuations of random
block lower triangular integer matrices."""

from .exact_linalg import (
    BlockStructureError,
    CokernelPartition,
    DivisorValuations,
    IntMatrix,
    PadicMatrix,
    cokernel_partition,
    padic_valuations,
    reduce_matrix,
    snf_diagonal,
    streaming_block_eliminate,
)
from .ensembles import (
    ConfigError,
    EnsembleSpec,
    EntryDistribution,
    KSchedule,
    build_bidiagonal_embedding,
    build_bidiagonal_embedding_int,
    default_precision,
    product_factors,
    product_factors_int,
    sample_block_matrix,
    sample_block_matrix_int,
    sample_product,
    sample_product_int,
)
from .experiments import (
    ComparisonSummary,
    ExperimentReport,
    MomentEstimate,
    TrialRecord,
    compare_ensembles,
    hom_moment_of_trial,
    run_experiment,
    run_trial,
    total_variation,
)
from .oracles import (
    FiniteSupportMatrixLaw,
    verify_balanced_sums,
    verify_chain_claim,
    verify_cok_identity,
    verify_moment_identity,
    verify_residual_bound,
    verify_w0_decomposition,
    w0_chain_counts,
    wt_statistics,
)
from .pgroups import (
    AbelianPGroup,
    LatticeGuardError,
    SubgroupLattice,
    as_partition,
    chain_count,
    conjugate,
    ell,
    enumerate_subgroups,
    hom_count,
    subgroup_closure,
)
from .theory import (
    ExcludedTrialError,
    FluctuationParams,
    LMomentValue,
    L_moment,
    centered_rank_vector,
    centering,
    limit_rescaled_hom_moment,
)

__version__ = "0.1.0"
