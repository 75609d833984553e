"""Tomography of 1-D qubit chains from local measurements.

Matrix product state/operator arithmetic, simulated block-Pauli (and
optional global phase-sensitive) measurements, and a maximum-likelihood
fixed-point reconstruction that stays in compressed tensor form
throughout.
"""
from .basis import OperatorBasis, get_basis
from .errors import (
    BasisMismatchError,
    CapabilityError,
    CompressionAbort,
    DegenerateStateError,
    DimensionMismatchError,
    MpstomoError,
    ParameterError,
    StateValidityError,
)
from .network import (
    MatrixProductOperator,
    MatrixProductState,
    add,
    apply_mpo_to_mps,
    completely_mixed,
    dagger,
    expectation,
    expectation_mps,
    hs_inner,
    hs_norm_sq,
    identity_mpo,
    mps_inner,
    mps_norm_sq,
    mps_to_mpo,
    multiply,
    normalize,
    normalize_mps,
    product_mpo,
    product_trace,
    scale,
    trace,
)
from .canonical import CanonicalForm, canonicalize, canonicalize_mps, svd_truncate, svd_truncate_mps
from .compress import (
    CompressOptions,
    CompressionReport,
    compress,
    compress_mps,
    compress_two_site,
)
from .povm import (
    GlobalGhzPovm,
    LocalBlockPovm,
    MeasurementRecord,
    PovmSet,
    ROperatorBuild,
    Setting,
    SettingRecord,
    dilute,
    exact_record,
    r_operator,
    setting_probabilities,
)
from .sim import SettingDistribution, exact_distributions, measure, sample_record, total_shots
from .mle import (
    IterationTrace,
    ReconstructionConfig,
    ReconstructionResult,
    StepReport,
    log_likelihood,
    mixed_step,
    pure_step,
    random_product_state,
    reconstruct,
)
from .metrics import ComparisonResult, compare, fidelity_pure_mixed, fidelity_pure_pure, hs_distance
from .states import (
    GroundSearchResult,
    NearestNeighbourHamiltonian,
    ghz_mps,
    ground_state_search,
    random_hamiltonian,
    thermal_state_dense,
)

__version__ = "0.1.0"
