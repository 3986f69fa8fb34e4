"""Secure partial repair for MDS-coded caching networks.

Exact linear algebra over prime fields, construction and verification
of (n,k)-coded caching systems, broadcast-budget planning for partial
node repair, functional and exact repair execution, and
information-theoretic audits of what a broadcast-channel eavesdropper
learns.
"""

from .caching import (
    CachingSystem,
    SystemConfig,
    build_system,
    collect,
    encode_payload,
    system_from_json,
    system_to_json,
    verify_caching_mds,
)
from .errors import (
    BoundOverflowError,
    ConstructionError,
    FieldTooSmallError,
    InfeasiblePatternError,
    RepairError,
    SchemaError,
    SearchExhaustedError,
    SearchSpaceError,
    SecurePairError,
    SingularMatrixError,
)
from .exact import (
    ExactRepairCode,
    audit_exact,
    build_exact,
    code_from_json,
    code_to_json,
    erase_uv,
    repair_exact,
    verify_construction,
)
from .fields import FieldMatrix, PrimeField, random_invertible, vandermonde
from .repair import (
    ErasurePattern,
    RepairPlan,
    allocate_transmissions,
    check_feasible,
    functional_repair,
    min_broadcasts_bruteforce,
    min_broadcasts_formula,
    pattern_from_json,
    pattern_to_json,
    plan_from_json,
    plan_to_json,
)
from .secrecy import (
    CapacityReport,
    EavesdropperView,
    Precoder,
    SecretPartition,
    SecrecyAudit,
    audit,
    capacity_report,
    capacity_strong,
    capacity_weak,
    construct_precoder,
    eavesdropper_view,
    entropy_bruteforce,
    field_bound_strong,
    field_bound_weak,
    strong_leakage,
    weak_flags,
)

__version__ = "0.1.0"

__all__ = [
    "BoundOverflowError",
    "CachingSystem",
    "CapacityReport",
    "ConstructionError",
    "EavesdropperView",
    "ErasurePattern",
    "ExactRepairCode",
    "FieldMatrix",
    "FieldTooSmallError",
    "InfeasiblePatternError",
    "Precoder",
    "PrimeField",
    "RepairError",
    "RepairPlan",
    "SchemaError",
    "SearchExhaustedError",
    "SearchSpaceError",
    "SecrecyAudit",
    "SecretPartition",
    "SecurePairError",
    "SingularMatrixError",
    "SystemConfig",
    "allocate_transmissions",
    "audit",
    "audit_exact",
    "build_exact",
    "build_system",
    "capacity_report",
    "capacity_strong",
    "capacity_weak",
    "check_feasible",
    "code_from_json",
    "code_to_json",
    "collect",
    "construct_precoder",
    "eavesdropper_view",
    "encode_payload",
    "entropy_bruteforce",
    "erase_uv",
    "field_bound_strong",
    "field_bound_weak",
    "functional_repair",
    "min_broadcasts_bruteforce",
    "min_broadcasts_formula",
    "pattern_from_json",
    "pattern_to_json",
    "plan_from_json",
    "plan_to_json",
    "random_invertible",
    "repair_exact",
    "strong_leakage",
    "system_from_json",
    "system_to_json",
    "vandermonde",
    "verify_caching_mds",
    "verify_construction",
    "weak_flags",
]
