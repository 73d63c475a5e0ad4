"""Truncated quantum Fisher information for low-rank approximations of a probe state."""

from .channels import KrausChannel, TraceClass, apply, projector_channel, random_cptni, random_cptp
from .errors import (
    DegenerateCut,
    DeltaTooLarge,
    DimensionMismatch,
    InputError,
    InstanceSchemaError,
    InvalidRank,
    NonConvergent,
    NonHermitianInput,
    NotAProjector,
    NotPSD,
    NumericalError,
    TQFIError,
    TraceExceedsOne,
    TruncationNotStrict,
)
from .fidelity import (
    angular_distance,
    bures,
    bures_sq,
    generalized_fidelity,
    generalized_fidelity_truncated,
    purified_distance,
    t_operator,
)
from .fisher import (
    FisherResult,
    Method,
    SLDOperator,
    qfi,
    sld,
    tqfi,
    tqfi_closed,
    tqfi_fd,
    tqfi_tsld,
    tsld,
)
from .states import (
    DensityMatrix,
    SubNormalizedState,
    TruncatedPair,
    UnitaryFamily,
    evolve,
    load_instance,
    random_density,
    random_family,
    random_generator,
    random_unitary,
    save_instance,
    truncate_pair,
)
from .verify import PropertyReport, SuiteConfig, run_suite

__version__ = "0.1.0"
