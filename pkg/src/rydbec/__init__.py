"""Two impurity qubits coupled to a single Kerr condensate mode.

Closed-form and master-equation dynamics of micro-micro (qubit-qubit) and
micro-macro (qubit pair vs. mode) entanglement.
"""
from .dynamics import (
    branch_overlap,
    complementarity_residual,
    concurrence_mima_closed,
    concurrence_mima_general,
    concurrence_mimi_closed,
    concurrence_mimi_general,
    eigen_energy,
    evolve_branch,
    reduced_impurity_rho,
    running_phase,
    xi_coherent,
)
from .errors import (
    DimensionError,
    IntegrationDiverged,
    NumericalError,
    RydbecError,
    TruncationError,
    ValidationError,
)
from .hilbert import (
    BecState,
    CompositeState,
    DensityOp,
    FockSpec,
    SystemParams,
    coherent_amplitudes,
    density_from_pure,
    partial_trace,
    partial_transpose,
    product_state,
)
from .kernels import BACKEND
from .lindblad import IntegratorConfig, TrajectoryRecord, evolve, hamiltonian_matrix, liouvillian_apply
from .measures import TwoComponentDecomposition, negativity, two_component_concurrence, wootters_concurrence, x_form_concurrence

__version__ = "0.1.0"
