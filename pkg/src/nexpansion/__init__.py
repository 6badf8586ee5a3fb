"""N-expansions with a finite digit set: matching, natural extensions, entropy."""

from .core import (
    DigitError,
    DigitRange,
    DomainError,
    NExpParams,
    OrbitStep,
    branch_inverse,
    cylinder,
    derivative_bound,
    digit,
    digit_range,
    fixed_point,
    gauss_step,
    iterate,
    orbit,
)
from .gaps import IntervalUnion, NonConvergenceError, attractor_iterate, detect_gaps
from .matching import (
    AlphaClass,
    MatchingPair,
    PairEnumeration,
    PlateauHeights,
    PreconditionError,
    alternative_B,
    chain_residuals,
    classify_alpha,
    endpoint_identities,
    enumerate_matching_pairs,
    k_subintervals,
    matching_residual,
    plateau_heights,
    sigma0,
    verify_matching,
)
from .measure import (
    EntropyResult,
    PiecewiseLogDensity,
    SweepRow,
    density_1d,
    dilog,
    entropy,
    entropy_birkhoff,
    entropy_closed_form,
    entropy_sweep,
    normalizing_constant,
    transfer_residual,
)
from .natext import (
    ClassificationError,
    InvalidBranchError,
    NatExtDomain,
    OutOfDomainError,
    QuiltingMap,
    Rect,
    build_domain,
    check_lamination,
    natext_inverse,
    natext_step,
    quilting_map,
    quilting_mass_check,
    quilting_regions,
    rect_mass,
    verify_quilting,
)

__version__ = "0.1.0"
