from .classify import Classification, EigenPair, classify, classify_spectrum, killing_number
from .context import ManifoldContext, Thresholds
from .report import DEFAULT_SUITE, SuiteReport, full_report, run_checks
from .theorems import (
    THEOREM_IDS,
    TheoremReport,
    check_corollary,
    check_lemma,
    check_S3_signs,
    check_T2,
    check_T3,
    check_T4,
    check_T5,
    check_T6,
    lemma_gaps,
    pointwise_trace_defect,
)

__all__ = [
    "Classification",
    "EigenPair",
    "classify",
    "classify_spectrum",
    "killing_number",
    "ManifoldContext",
    "Thresholds",
    "DEFAULT_SUITE",
    "SuiteReport",
    "full_report",
    "run_checks",
    "THEOREM_IDS",
    "TheoremReport",
    "check_corollary",
    "check_lemma",
    "check_S3_signs",
    "check_T2",
    "check_T3",
    "check_T4",
    "check_T5",
    "check_T6",
    "lemma_gaps",
    "pointwise_trace_defect",
]
