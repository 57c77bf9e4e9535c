"""Checks and constructions for module maps over block C*-algebras.

The package decides, certifies, and constructs: complete positivity of maps
on block-diagonal matrix algebras (Choi, Kraus, Stinespring views), exact and
semi compatibility of module maps with a CP map, the extension of a semi
compatible map from a submodule to the whole module, the obstruction to
exactly compatible extensions, and corner-structured operator-system maps.
"""

from .algebra import (
    AlgebraElement,
    BlockAlgebra,
    contains,
    is_positive_element,
    off_block_mass,
    pinch,
)
from .cpmaps import (
    CPMap,
    NotCompletelyPositiveError,
    StinespringDilation,
    choi,
    compose,
    from_kraus,
    identity_cp_map,
    is_completely_positive,
    kraus,
    pinch_cp_map,
    stinespring,
    trace_cp_map,
    transpose_map,
)
from .extension import (
    ExtensionInputError,
    ExtensionResult,
    GramPair,
    KsgnsResult,
    ModuleMap,
    ObstructionReport,
    PhiMapReport,
    PreconditionError,
    SemiPhiReport,
    SemiPhiWitness,
    canonical_compacts_extension,
    compare_extensions,
    extend_semi_phi,
    gram_pair,
    is_completely_semi_phi,
    is_nondegenerate,
    is_phi_map,
    ksgns,
    phi_extension_obstruction,
    semiphi_witness,
    zero_module_map,
)
from .modules import (
    BlockEmbedding,
    ConcreteModule,
    MembershipError,
    ModuleElement,
    ModuleIntegrityError,
    ModuleValidation,
    direct_sum,
    embed_module,
    inner_product,
    inner_product_matrix,
    is_contained_pair,
    is_full,
    is_submodule,
    orthogonal_complement,
    validate_module,
)
from .numerics import (
    DEFAULT_TOL,
    HermiticityError,
    PsdReport,
    ShapeError,
    ToleranceProfile,
    column_span_onb,
    is_psd,
    least_squares_operator,
    loewner_leq,
    nullspace_onb,
)
from .paulsen import (
    CornerReport,
    PaulsenSystem,
    SystemDecompositionError,
    SystemMap,
    block_map,
    build_system,
    decompose_system_element,
    example_3_4_map,
    injectivity_demo,
    is_corner_preserving,
    is_cp_system_map,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "BlockAlgebra",
    "BlockEmbedding",
    "CPMap",
    "ConcreteModule",
    "CornerReport",
    "DEFAULT_TOL",
    "ExtensionInputError",
    "ExtensionResult",
    "GramPair",
    "HermiticityError",
    "KsgnsResult",
    "MembershipError",
    "ModuleElement",
    "ModuleIntegrityError",
    "ModuleMap",
    "ModuleValidation",
    "NotCompletelyPositiveError",
    "ObstructionReport",
    "PaulsenSystem",
    "PhiMapReport",
    "PreconditionError",
    "PsdReport",
    "SemiPhiReport",
    "SemiPhiWitness",
    "ShapeError",
    "StinespringDilation",
    "SystemDecompositionError",
    "SystemMap",
    "ToleranceProfile",
    "block_map",
    "build_system",
    "canonical_compacts_extension",
    "choi",
    "column_span_onb",
    "compare_extensions",
    "compose",
    "contains",
    "decompose_system_element",
    "direct_sum",
    "embed_module",
    "example_3_4_map",
    "extend_semi_phi",
    "from_kraus",
    "gram_pair",
    "identity_cp_map",
    "injectivity_demo",
    "inner_product",
    "inner_product_matrix",
    "is_completely_positive",
    "is_completely_semi_phi",
    "is_contained_pair",
    "is_corner_preserving",
    "is_cp_system_map",
    "is_full",
    "is_nondegenerate",
    "is_phi_map",
    "is_positive_element",
    "is_psd",
    "is_submodule",
    "kraus",
    "ksgns",
    "least_squares_operator",
    "loewner_leq",
    "nullspace_onb",
    "off_block_mass",
    "orthogonal_complement",
    "phi_extension_obstruction",
    "pinch",
    "pinch_cp_map",
    "semiphi_witness",
    "stinespring",
    "trace_cp_map",
    "transpose_map",
    "validate_module",
    "zero_module_map",
]
