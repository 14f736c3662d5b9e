"""Spectral models of Hilbert spaces with a bounded normal operator.

Models are direct sums of eigenspaces; types are projections plus spectral
measures of residuals; independence, equivalence and limit theories are
computed from that spectral data.
"""

from .calculus import functional_calculus, polynomial_approx_check, separated_projection
from .closure import Subspace, acl_span, dcl_span, project
from .equivalence import (
    aue_align,
    axiom_residuals,
    hausdorff,
    limit_theory,
    perturbation_distance,
    spectrally_equivalent,
)
from .independence import canonical_base_estimate, free_extension, indep, morley_sequence
from .linalg import SpectralDecomposition, decompose_normal, hermitian_eigen
from .measure import (
    AtomicMeasure,
    abs_continuous,
    hellinger_sq,
    partition_sup_oracle,
    total_variation,
    weakstar_converged,
)
from .model import (
    INF,
    Block,
    ModelVector,
    Region,
    SpectralModel,
    adjoint_predicate,
    allocate_fresh,
    apply_T,
    apply_Tstar,
    ball,
    build_model,
    direct_sum,
    integrate_pvm,
    pseudocompact_witness,
    scalar_measure,
    spectral_projection,
)
from .theory import TheoryAtom, TheoryDescriptor
from .typespace import (
    NetIndex,
    TypeDescriptor,
    epsilon_net,
    is_principal,
    nearest_in_net,
    omega_categorical,
    phi1,
    same_type,
    type_distance,
    type_of,
)

__version__ = "0.1.0"
