"""Entanglement in block-scaled two-qubit state transfer through
uniform XX spin chains."""

from .coherence import CoherenceDecomposition, apply_block_scaling, decompose, recompose
from .concurrence import (
    XStateParams,
    case1_concurrence,
    case1_eigenvalues,
    critical_value,
    wootters_concurrence,
)
from .errors import (
    BlockscaleError,
    CapacityError,
    OutOfDomainError,
    StateValidationError,
    UnknownFamilyError,
    UnsupportedCaseError,
)
from .evolve_ed import (
    ScalingReport,
    TransferSupermatrix,
    build_hamiltonian,
    evolve_receiver,
    transfer_supermatrix,
    verify_block_scaling,
)
from .evolve_ff import FermionHopping, single_particle_propagator, transfer_supermatrix_ff
from .family import (
    ScalableFamily,
    domain_boundary,
    grid_sweep,
    load_family,
    receiver_state,
    sender_state,
)
from .perturb import (
    MCStudyConfig,
    PerturbationSample,
    extrema_scan,
    mc_mean_concurrence,
    perturbed_receiver,
    perturbed_sender,
    sample_perturbation,
)
from .qmat import (
    ChainSpec,
    DensityMatrix,
    hermitian_eigensystem,
    partial_trace,
    tensor_product,
    thermal_state,
)

__version__ = "0.1.0"
