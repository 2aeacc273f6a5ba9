"""Run the theorem suite over a set of manifolds and aggregate the results."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..discretization.dec import AssemblyError
from ..discretization.mesh import IntrinsicMesh, MeshError
from ..models.meshgen import MeshRecipe
from ..spectral import SolverError
from .context import ManifoldContext, Thresholds
from .theorems import (
    THEOREM_IDS,
    TheoremReport,
    _plain,
    check_corollary,
    check_lemma,
    check_S3_signs,
    check_T2,
    check_T3,
    check_T4,
    check_T5,
    check_T6,
)

DEFAULT_SUITE = ("torus-grid:64", "icosphere:4", "hyperbolic-genus2:4")

# checks run per manifold, with the ids each one produces
_PER_MANIFOLD = (
    (check_lemma, ("LEMMA",)),
    (check_T2, ("T2.1", "T2.2", "T2.3", "EQ41")),
    (check_T3, ("T3",)),
    (check_T4, ("T4.1", "T4.2")),
    (check_T5, ("T5",)),
    (check_corollary, ("COR",)),
    (check_T6, ("T6",)),
)

NUMERICAL_ERRORS = (SolverError, AssemblyError, MeshError, ArithmeticError, RuntimeError, ValueError)


def run_checks(ctx: ManifoldContext) -> list[TheoremReport]:
    """All per-manifold checks; a numerical failure becomes status ``error``."""
    out = []
    for fn, ids in _PER_MANIFOLD:
        try:
            res = fn(ctx)
            out.extend(res if isinstance(res, list) else [res])
        except NUMERICAL_ERRORS as exc:
            out.extend(TheoremReport(i, "error", {}, {}, ctx.name, [f"{type(exc).__name__}: {exc}"]) for i in ids)
    return out


def aggregate(reports: list[TheoremReport]) -> list[TheoremReport]:
    """One entry per check id; the worst status wins (error > fail > pass > skipped)."""
    rank = {"error": 3, "fail": 2, "pass": 1, "skipped": 0}
    out = []
    for cid in THEOREM_IDS:
        group = [r for r in reports if r.id == cid]
        if not group:
            continue
        status = max((r.status for r in group), key=rank.__getitem__)
        out.append(
            TheoremReport(
                cid,
                status,
                {r.manifold: {"status": r.status, **r.measured} for r in group},
                {r.manifold: r.tolerance for r in group if r.tolerance},
                ",".join(r.manifold for r in group),
                [f"{r.manifold}: {n}" for r in group for n in r.notes],
            )
        )
    return out


@dataclass
class SuiteReport:
    checks: list[TheoremReport]
    details: list[TheoremReport] = field(default_factory=list)
    contexts: list[ManifoldContext] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if self.errors or any(c.status == "error" for c in self.checks):
            return 2
        return 1 if any(c.status == "fail" for c in self.checks) else 0

    def document(self, config: dict | None = None) -> dict:
        spectra = []
        for ctx in self.contexts:
            try:
                spec = ctx.yano_spectrum
            except NUMERICAL_ERRORS:
                continue
            spectra.append(
                {
                    "manifold": ctx.name,
                    "operator": "yano",
                    "lambda": spec.values,
                    "residual": spec.residuals,
                    "clusters": spec.clusters,
                }
            )
        return _plain(
            {
                "config": config or {},
                "manifolds": [ctx.summary() for ctx in self.contexts],
                "spectra": spectra,
                "checks": [c.to_dict() for c in self.checks],
                "details": [c.to_dict() for c in self.details],
                "errors": self.errors,
            }
        )

    def summary_lines(self) -> list[str]:
        return [f"{c.id:8s} {c.status:8s} {c.manifold}" for c in self.checks]


def _context(item, tol, count, thresholds, seed_label) -> ManifoldContext:
    if isinstance(item, ManifoldContext):
        return item
    if isinstance(item, IntrinsicMesh):
        return ManifoldContext(item, tol=tol, count=count, thresholds=thresholds, seed_label=seed_label)
    recipe = item if isinstance(item, MeshRecipe) else MeshRecipe.parse(str(item))
    return ManifoldContext.from_recipe(recipe, tol=tol, count=count, thresholds=thresholds, seed_label=seed_label)


def full_report(
    manifolds: Iterable = DEFAULT_SUITE,
    tol: float = 1e-8,
    count: int = 12,
    thresholds: Thresholds | None = None,
    seed_label: str = "",
) -> SuiteReport:
    """Every applicable check on every manifold, aggregated to one entry per id."""
    items = list(manifolds)
    if not items:
        return SuiteReport([])
    thresholds = thresholds or Thresholds()
    contexts, errors = [], []
    for item in items:
        try:
            contexts.append(_context(item, tol, count, thresholds, seed_label))
        except NUMERICAL_ERRORS as exc:
            errors.append(f"{item}: {type(exc).__name__}: {exc}")
    details = [r for ctx in contexts for r in run_checks(ctx)]
    try:
        details.extend(check_S3_signs(contexts))
    except NUMERICAL_ERRORS as exc:
        details.extend(TheoremReport(i, "error", {}, {}, "", [str(exc)]) for i in ("S3-CONF", "S3-PROJ"))
    return SuiteReport(aggregate(details), details, contexts, errors)
