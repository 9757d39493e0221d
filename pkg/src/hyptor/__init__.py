"""Free dihedral actions on complex tori: construction, certification,
classification.

The package builds three-dimensional complex tori as quotients of a
product of elliptic curves by a finite translation subgroup, equips
them with an order-8 dihedral group of affine automorphisms, proves
freeness of the action by integer certificates, and sweeps the whole
parameter grid to classify which tuples give free actions.
"""

from .affine_actions import (
    AffineAut,
    FreenessCertificate,
    FreenessWitness,
    GeneratedGroup,
    GroupElement,
    GroupGenerationError,
    TranslationCheck,
    check_relations,
    contains_no_translations,
    evaluate_word,
    generate_group,
    is_free_action,
)
from .certificates import (
    SCHEMA_VERSION,
    CertificateFormatError,
    VerificationResult,
    build_certificate,
    verify_certificate,
)
from .classify import (
    AgreementReport,
    CensusReport,
    SearchSpace,
    Survivor,
    cross_validate,
    enumerate_case1,
    enumerate_case2,
    is_expected_survivor,
    subgroup_family,
)
from .d4_family import (
    BuildRejection,
    CaseTag,
    D4Action,
    D4Parameters,
    FreenessConditionReport,
    StructureReport,
    build_general,
    build_normal_form,
    case_matrices,
    check_freeness_conditions,
    lattice_inclusion_check,
    normal_form_parameters,
    structure_report,
)
from .exact_linear import (
    DimensionError,
    IntegerMatrix,
    RationalMatrix,
    SmithDecomposition,
    hnf,
    snf,
    solve_affine_mod_lattice,
)
from .torus import (
    ComplexTorus,
    EllipticCurveParam,
    FiniteSubgroup,
    TorsionPoint,
    coordinate_change,
    elliptic_curve,
    product,
    quotient_by_finite_subgroup,
)

__all__ = [
    "AffineAut",
    "AgreementReport",
    "BuildRejection",
    "CaseTag",
    "CensusReport",
    "CertificateFormatError",
    "ComplexTorus",
    "D4Action",
    "D4Parameters",
    "DimensionError",
    "EllipticCurveParam",
    "FiniteSubgroup",
    "FreenessCertificate",
    "FreenessConditionReport",
    "FreenessWitness",
    "GeneratedGroup",
    "GroupElement",
    "GroupGenerationError",
    "IntegerMatrix",
    "RationalMatrix",
    "SCHEMA_VERSION",
    "SearchSpace",
    "SmithDecomposition",
    "StructureReport",
    "Survivor",
    "TorsionPoint",
    "TranslationCheck",
    "VerificationResult",
    "build_certificate",
    "build_general",
    "build_normal_form",
    "case_matrices",
    "check_freeness_conditions",
    "check_relations",
    "contains_no_translations",
    "coordinate_change",
    "cross_validate",
    "elliptic_curve",
    "enumerate_case1",
    "enumerate_case2",
    "evaluate_word",
    "generate_group",
    "hnf",
    "is_expected_survivor",
    "is_free_action",
    "lattice_inclusion_check",
    "normal_form_parameters",
    "product",
    "quotient_by_finite_subgroup",
    "snf",
    "solve_affine_mod_lattice",
    "structure_report",
    "subgroup_family",
    "verify_certificate",
]

__version__ = "0.1.0"
