"""Toolkit for measurements beyond the PSD cone and their realization by
post-selected POVMs on restricted state domains."""

__version__ = "0.1.0"

from .hermitian import (  # noqa: F401
    as_density,
    as_hermitian,
    canonical_basis,
    eig_extrema,
    hs_inner,
    is_psd,
    partial_transpose,
)
from .measurement import (  # noqa: F401
    Measurement,
    classify,
    in_quantum_domain,
    outcome_probabilities,
    sample_domain_states,
    simulate_postselected,
)
from .supermap import (  # noqa: F401
    Subspace,
    SuperMap,
    common_fixed_subspace,
    compose,
    identity_map,
    is_trace_preserving,
    partial_transpose_map,
    transpose_map,
    unitary_conjugation_map,
)
from .bridge import (  # noqa: F401
    Decomposition,
    ImplementationDomain,
    PostSelectedPOVM,
    acceptance_bound_check,
    canonical_implementation,
    check_domain_conditions,
    check_inversion_condition,
    construct_povm,
    implementation_domain,
    invert_postselection,
    verify_implementation,
)
from .asd import (  # noqa: F401
    BlockGroupRep,
    CommutativeGroupRep,
    DualBasis,
    PureStateFamily,
    asd_measurement,
    asd_to_npovm,
    covariant_family,
    dual_basis,
    max_uniform_c,
)
