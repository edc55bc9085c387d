"""Exact finite conditional type structures: CPSs, belief hierarchies, refinement, extension."""

from .analysis import (
    CompletenessReport,
    InclusionResult,
    MorphismResult,
    RedundancyResult,
    Refinement,
    check_hierarchy_morphism,
    check_type_morphism,
    completeness_report,
    hierarchies_included,
    is_non_redundant,
    refine,
    same_hierarchies,
    unique_hierarchy_frame,
)
from .cps import (
    ConditioningFamily,
    Cps,
    CpsError,
    FiniteSpace,
    InvalidCps,
    Measure,
    ValidationReport,
    Violation,
    conditional_of_measure,
    cylinder_family,
    marginal_cps,
    product,
    pushforward_cps,
    validate_cps,
)
from .extension import canonical_base_cps, coherent_extend, lift_cps, right_inverse
from .hierarchy import (
    HierarchyPrefix,
    Partition,
    PrefixError,
    check_prefix_coherence,
    pushforward_under_partition,
    truncate,
    unfold,
)
from .io import (
    DocumentError,
    derive_conditioning_from_signals,
    load_fixture,
    parse_prefix,
    parse_structure,
    serialize_prefix,
    serialize_structure,
)
from .structure import Frame, InvalidStructure, StructureError, TypeStructure, disjoint_union, validate_structure

__version__ = "0.1.0"

__all__ = [
    "CompletenessReport",
    "ConditioningFamily",
    "Cps",
    "CpsError",
    "DocumentError",
    "FiniteSpace",
    "Frame",
    "HierarchyPrefix",
    "InclusionResult",
    "InvalidCps",
    "InvalidStructure",
    "Measure",
    "MorphismResult",
    "Partition",
    "PrefixError",
    "RedundancyResult",
    "Refinement",
    "StructureError",
    "TypeStructure",
    "ValidationReport",
    "Violation",
    "canonical_base_cps",
    "check_hierarchy_morphism",
    "check_prefix_coherence",
    "check_type_morphism",
    "coherent_extend",
    "completeness_report",
    "conditional_of_measure",
    "cylinder_family",
    "derive_conditioning_from_signals",
    "disjoint_union",
    "hierarchies_included",
    "is_non_redundant",
    "lift_cps",
    "load_fixture",
    "marginal_cps",
    "parse_prefix",
    "parse_structure",
    "product",
    "pushforward_cps",
    "pushforward_under_partition",
    "refine",
    "right_inverse",
    "same_hierarchies",
    "serialize_prefix",
    "serialize_structure",
    "truncate",
    "unfold",
    "unique_hierarchy_frame",
    "validate_cps",
    "validate_structure",
]
