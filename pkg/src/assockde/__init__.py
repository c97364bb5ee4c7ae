"""Associated-kernel density estimation on the unit square with beta-Sarmanov kernels."""

from .bandwidth import LscvResult, SearchGrid, lscv_objective, select, select_diagonal, select_full, select_scott
from .errors import (
    AssocKDEError,
    EmptyCandidateSetError,
    InadmissibleBandwidthError,
    NumericalError,
    SupportError,
    UndefinedModeError,
    ZeroMassError,
)
from .estimator import (
    DensityGrid,
    DiagnosticsInput,
    Sample2,
    amise_diagnostic,
    bias_diagnostic,
    bs_norm_squared,
    estimate_grid,
    estimate_modified,
    estimate_standard,
    normalize,
    scott_reference,
    total_mass,
    variance_diagnostic,
)
from .kernels import (
    BandwidthMatrix2,
    BetaParams,
    BetaSarmanovShape,
    Family,
    KernelMoments2,
    RegionLabel,
    beta_moments,
    beta_pdf,
    boundary_region_count,
    bs_h12_bounds,
    bs_kernel_eval,
    bs_kernel_moments,
    bs_shape_from_target,
    classical_gaussian_kernel,
    classify_region,
    modified_bs_eval,
    modified_bs_moments,
    modified_bs_shape,
    modified_continuity_jump,
    multiple_kernel_eval,
    sarmanov_correlation_bounds,
    sarmanov_pdf,
)
from .simulation import IseSummary, dirichlet_correlation, ise_hat, run_study, target_pdf, target_sample

__version__ = "0.1.0"
