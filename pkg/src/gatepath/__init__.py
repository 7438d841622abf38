"""Statevector simulation, target-parameter regression and kernel-PCA pathway recovery."""

from .circuit import (
    GateSequence,
    GateSpec,
    MeasurementSample,
    PauliString,
    apply_pauli_rotation,
    build_state,
    estimate_objective,
    measure,
    objective_value,
    zero_state,
)
from .errors import (
    ConfigError,
    DecodeError,
    DegenerateFitError,
    DegenerateTrainingSetError,
    DenominatorCollapseError,
    GatepathError,
    NumericalError,
    ProjectionZeroError,
    SingularityError,
    StructuralError,
)
from .kernel import (
    KernelFunction,
    KernelModel,
    center_kernel_matrix,
    eigendecompose,
    fit_kernel_model,
    kernel_matrix,
    project_coefficients,
    projection_residual,
)
from .pathway import (
    ConnectivityGraph,
    ObjectiveSpec,
    PathwayElement,
    decode_element,
    decompose_objective,
    encode_element,
)
from .preimage import PreImageConfig, PreImageResult, extremum_check, iterate_once, solve_preimage
from .regression import RegressionModel, decompose_theta, fit_chi, target_theta, vector_pseudoinverse

__version__ = "0.1.0"
