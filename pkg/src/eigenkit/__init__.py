"""eigenkit: exact p-adic computation toolkit.

Capped-precision arithmetic in ramified extensions of Q_p, weight-space
characters, locally analytic Iwahori induction with BGG/theta operators and
the slope classicity criterion, a compact U-operator model, Coleman spectral
theory over affinoid weight disks, and Banach-module/Cech machinery.
"""

from . import _backend
from .padic import (
    NewtonPolygon,
    PadicContext,
    PadicScalar,
    exp_small,
    log_one_unit,
    newton_polygon,
    one_unit_pow,
    teichmuller,
)
from .series import TruncatedSeries
from .weight import (
    Character,
    UniversalCharacterChart,
    analyticity_radius,
    eval_character,
    involution,
    specialize_universal,
    universal_character_eval,
)
from .laind import (
    InducedFunction,
    RootDatum,
    algebraic_subspace,
    bgg_check,
    classicity_filter,
    compact_u_matrix,
    delta_i,
    lowering_field,
    theta_alpha,
    torus_act,
)
from .spectral import (
    BanachModuleModel,
    CompactOperatorModel,
    FredholmSeries,
    SlopeFactorization,
    eigen_family_lift,
    fiber_eigendata,
    fredholm_series,
    joint_eigensystems,
    newton_slopes,
    riesz_projector,
    slope_factor,
)
from .cech import (
    AffinoidModel,
    LocalizedModule,
    cech_check,
    completed_localization,
    kiehl_glue,
    laurent_split,
)

__version__ = "0.1.0"


def kernel_name() -> str:
    """Which arithmetic kernel new contexts will prefer."""
    return "c" if _backend.compiled_available() else "python"
