"""Compatibility checks for marginal distributions of bits and reduced
states of qubits: exact-rational classical criteria with an independent LP
oracle, quantum Bell-Wigner operator conditions, a sufficiency probe, and
one-party spectral criteria."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402,F401
    EquimarginalityError,
    IncompatibleFamilyError,
    InputError,
    MargcheckError,
    NumericError,
    ResourceError,
)
from .classical import (  # noqa: E402,F401
    ClassicalVerdict,
    JointTable,
    MarginalFamily,
    MarginalTable,
    SigmaCoefficients,
    check_equimarginal,
    check_theorem2,
    check_theorem3,
    check_wigner,
    coefficients_from_family,
    coefficients_from_joint,
    marginalize,
    reconstruct_joint,
)
from .lp import build_system, oracle_verdict, solve_feasibility  # noqa: E402,F401
from .qlinalg import (  # noqa: E402,F401
    PauliCoefficients,
    conjugate_by_tau,
    embed,
    hermitian_eigen,
    partial_trace,
    pauli_assemble,
    pauli_expand,
    tensor,
    universal_not,
)
from .qcompat import (  # noqa: E402,F401
    ProbeReport,
    QuantumVerdict,
    ReducedFamily3,
    check_bell_wigner,
    check_q_equimarginal,
    counterexample_n4,
    delta_operator,
    gen_delta,
    probe_sufficiency,
    sample_density,
    sample_separable,
)
from .spectra import (  # noqa: E402,F401
    CriterionVerdict,
    NecessityVerdict,
    check_bravyi,
    check_coleman,
    check_higuchi,
    check_hzg,
    check_polygon,
)
