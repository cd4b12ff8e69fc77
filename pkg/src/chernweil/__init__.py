"""Traced Chern-Weil calculus on flat tori.

Exact trigonometric-polynomial differential forms with coefficients in traced
*-algebras (matrix algebras, crossed products by Z, Haar Monte-Carlo function
algebras, truncated free products), flat connections and holonomy, Chern
character and Chern-Simons transgressions, odd characters, alpha invariants,
and the operator-algebra witness construction reproducing alpha over the
circle.
"""

from .algebras import SCALARS, MatrixBackend, haar_unitary
from .characters import (
    AlphaResult,
    PathOfConnections,
    UnitaryPath,
    alpha_invariant,
    chern_character,
    chern_simons_flat,
    chern_simons_path,
    even_chern_simons,
    linear_path,
    odd_chern_character,
)
from .connections import (
    Bundle,
    Connection,
    curvature,
    direct_sum_connection,
    flat_from_holonomies,
    gauge_transform,
    holonomy,
    isometry_form_check,
    tensor_connection,
    trivial_connection,
    unitarity_check,
)
from .crossed import CrossedProductAlgebra, RotationAlgebra, TrigPolyAlgebra, build_crossed_product
from .errors import ContractError, ScenarioError, StructureError, SupportCapError, TruncationError
from .forms import GradedForm, dx, scalar_monomial, tensor_form, direct_sum_form
from .fourier import TrigPoly, set_support_cap
from .freewords import FreeWordAlgebra
from .haar import HaarFunctionAlgebra
from .suites import run_verify
from .witness import (
    WitnessData,
    build_freeproduct_witness,
    build_haar_witness,
    build_rotation_witness,
    haar_witness_check,
    main_prop_check,
    trace_invariance_suite,
)

__version__ = "0.1.0"
