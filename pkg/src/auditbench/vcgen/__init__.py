"""Deterministic Vehicle Claims generator."""
from .catalog import (
    DEFAULT_CATALOG, DEFAULT_COMPLEXITY, LABOR_RATE, ComplexityTable, IssueCatalog, IssueEntry,
    complexity_of, compute_repair_cost, compute_repair_hours,
)
from .generator import (
    BASE_COLUMNS, OUTPUT_COLUMNS, SENTINELS, AnomalyConfig, BaseSourceError, BaseVehicle,
    ClaimRecord, SynthSpec, acquire_base, assign_issue, assign_issues, generate_dataset,
    inject_anomalies, iter_records, read_dataset, sentinel_mask, substitute_missing,
    synthesize_base, write_dataset,
)

__all__ = [
    "DEFAULT_CATALOG", "DEFAULT_COMPLEXITY", "LABOR_RATE", "ComplexityTable", "IssueCatalog",
    "IssueEntry", "complexity_of", "compute_repair_cost", "compute_repair_hours",
    "BASE_COLUMNS", "OUTPUT_COLUMNS", "SENTINELS", "AnomalyConfig", "BaseSourceError",
    "BaseVehicle", "ClaimRecord", "SynthSpec", "acquire_base", "assign_issue", "assign_issues",
    "generate_dataset", "inject_anomalies", "iter_records", "read_dataset", "sentinel_mask",
    "substitute_missing", "synthesize_base", "write_dataset",
]
