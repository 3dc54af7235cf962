"""Cross-lingual transfer analysis over experiment ledgers."""

from ._core import (
    Ledger,
    LedgerError,
    MetricError,
    UsageError,
    build_all_reports,
    improvement_flags,
    load_ledger,
    pattern_counts,
    project_bilingual,
    project_trilingual,
    rank_languages,
    report_all,
    spearman,
    synth_ledger,
    transfer_score,
    variance_profile,
)

__all__ = [
    "Ledger",
    "LedgerError",
    "MetricError",
    "UsageError",
    "build_all_reports",
    "improvement_flags",
    "load_ledger",
    "pattern_counts",
    "project_bilingual",
    "project_trilingual",
    "rank_languages",
    "report_all",
    "spearman",
    "synth_ledger",
    "transfer_score",
    "variance_profile",
]
