"""Majorization theory for step functions, densities and bipartite pure states."""
from .classical import (
    StochasticMap,
    birkhoff_decomposition,
    check_majorization,
    check_submajorization,
    ds_extension_exists,
    hockey_stick_dominates,
    synthesize_ds,
    synthesize_dss,
    t_transform_chain,
)
from .errors import (
    BirkhoffResidual,
    DomainError,
    InputError,
    MajorizationError,
    MalformedProtocol,
    NotConvertible,
    NotExtendable,
    NotMajorized,
    NotSubmajorized,
    NumericalError,
    PreconditionError,
)
from .itpfi import (
    ExperimentConfig,
    PowersModel,
    chsh_seesaw,
    chsh_seesaw_pure,
    distill_target_scale,
    powers_marginal_scale,
    powers_state,
    trivialization_trend,
)
from .locc import (
    BipartitePureState,
    LoccProtocol,
    Round,
    bell_state,
    canonical_purification,
    locc_conversion_fidelity,
    locc_convertible,
    monotones,
    optimal_conversion_fidelity,
    powers_pair,
    product_state,
    purification_estimate,
    schmidt_decompose,
    simulate_protocol,
    slocc_convertible,
    slocc_fidelity,
    synthesize_nielsen_protocol,
)
from .quantum import (
    Density,
    FactorModel,
    KrausChannel,
    orbit_fidelity,
    orbit_l1_distance,
    q_majorizes,
    q_submajorizes,
    renyi_entropy,
    spectral_scale,
    synthesize_ds_channel,
    synthesize_dss_channel,
    uhlmann_fidelity,
)
from .stepfn import (
    DiscreteMeasureSpace,
    LorenzCurve,
    StepFunction,
    WeightedVector,
    coarse_grain,
    distribution,
    dominates,
    lorenz,
    rearrange,
    tensor,
    weighted,
)
