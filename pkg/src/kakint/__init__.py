"""KAK-reduced integration on reductive matrix groups.

Build a family, its Cartan frame and restricted root system, factor group
elements through the positive chamber, evaluate the sinh-product reduction
Jacobian, and verify the reduced integration formula against a direct
Monte Carlo oracle:

    >>> import kakint
    >>> fam = kakint.make_family("SL-real", 2)
    >>> frame, roots = kakint.cartan_frame(fam)
    >>> roots.weyl_order
    2
"""

from .density import (
    PsiMatrix,
    ad_action_coefficients,
    jacobian,
    log_jacobian,
    psi_det_check,
    psi_matrix,
    transversality_condition,
)
from .exceptions import (
    CalibrationError,
    ConfigurationError,
    DegeneracyError,
    DomainError,
    InternalError,
    KakintError,
    RangeError,
    SingularityError,
)
from .kak import (
    KAKFactors,
    chamber_reduce,
    kak_decompose,
    random_group_element,
    recompose,
    regularity,
)
from .liecore import (
    FAMILY_TAGS,
    CartanFrame,
    GroupFamily,
    RootSystem,
    algebra_element,
    algebra_residual,
    bilinear_form,
    cartan_frame,
    cartan_involution,
    cartan_split,
    centralizer_m,
    compact_residual,
    exp_a,
    group_residual,
    make_family,
    maximal_abelian,
    restricted_roots,
    root_space_split,
    roots_to_json,
    structure_checks,
    weyl_group,
)
from .measure import (
    ChamberQuadrature,
    MCEstimate,
    chamber_cone_quadrature,
    chamber_quadrature,
    cone_coordinate_map,
    chart,
    chart_volume_density,
    default_truncation,
    haar_sample_compact,
    mc_direct_integral,
    polar_density,
    polar_point,
)
from .reduction import (
    CalibrationResult,
    DirectConfig,
    ReducedConfig,
    TestFunction,
    VerificationReport,
    VerifyConfig,
    calibrate,
    corrupted_log_jacobian,
    default_suite,
    orbit_average,
    reduced_integral,
    verify,
)

__version__ = "0.1.0"
