"""Gaussian-period computation, verification, and layered rendering."""

from .errors import (
    ArityMismatch,
    GaussianPeriodsError,
    NotCoprime,
    NotDivisor,
    PaletteTooSmall,
    TooLarge,
    ValidationError,
)
from .fillout import (
    ApplicabilityReport,
    CoverageReport,
    LaurentMap,
    applicability_check,
    coverage,
    coverage_stats,
    laurent_eval,
    laurent_map,
    sample_image,
)
from .numtheory import (
    ExponentMatrix,
    IntPolynomial,
    cyclotomic,
    euler_totient,
    exponent_matrix,
    gcd,
    multiplicative_order,
)
from .periods import (
    ColoringMode,
    ColorClassing,
    DihedralReport,
    OrbitRecord,
    PeriodParams,
    PeriodSet,
    RescaleCheck,
    color_classes,
    compute_period_set,
    dihedral_order,
    period_value,
    rescale_identity_check,
    subplot_containment_check,
    verify_dihedral,
)
from .render import (
    RenderSpec,
    auto_palette,
    export_layers,
    map_to_canvas,
    rasterize,
    render_to_file,
)

__all__ = [name for name in dir() if not name.startswith("_")]
