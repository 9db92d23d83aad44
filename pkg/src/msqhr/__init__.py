"""Morris-Shore reduction and coupled quantum Householder reflections."""

from .errors import (
    ConsistencyError,
    DomainError,
    FarOffValidityWarning,
    IntegrationError,
    NoSolutionError,
    UnsupportedModeError,
    ValidationError,
)
from .linalg_core import complex_gamma, hermitian_eig, is_unitary, log_gamma, wrap_phase
from .morris_shore import (
    InteractionMatrix,
    MSDecomposition,
    decompose,
    gram_matrices,
    m2_decompose,
    m2_theta_sigma,
)
from .two_state import (
    CayleyKlein,
    DetuningSpec,
    PulseSpec,
    Realization,
    design_realization,
    far_off_phase,
    far_off_validity,
    pulse_area,
    resonant_ck,
    rosen_zener_ck,
    rz_phase,
)
from .mirrors import (
    BlockPropagator,
    HouseholderOp,
    assemble_full,
    coupled_mirrors,
    eigenstructure_check,
    householder,
    reflection_condition,
)
from .linkages import (
    ExplicitLinkage,
    LadderLinkage,
    PolarizationAmplitudes,
    TwoLevelLinkage,
    build_linkage,
    clebsch_gordan,
    coupled_blocks,
)
from .dynamics import SimulationProblem, Trajectory, build_hamiltonian, compare_analytic, integrate, propagator

__version__ = "0.1.0"
