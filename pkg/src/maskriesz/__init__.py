"""Riesz bases of exponentials with restricted supports, via masked Fourier matrices."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .grid import (  # noqa: F401
    CosetSystem,
    GridSupport,
    RationalInterval,
    check_necessary_conditions,
    normalize_supports,
)
from .masked import (  # noqa: F401
    Classification,
    MaskedMatrix,
    build_masked_matrix,
    classify_matrix,
    classify_system,
    dual_basis,
    verify_biorthogonality,
)
from .permsearch import (  # noqa: F401
    PermutationAssignment,
    corollary_construct,
    lemma_search,
    theorem1_construct,
)
