"""Tag eigenforms as harmonic, Killing, conformal/projective Killing or iht."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import Basis, FieldVector
from .context import ManifoldContext

TAGS = ("harmonic", "killing", "conformal-killing", "projective-killing", "iht")


@dataclass(frozen=True)
class Classification:
    """Tags with the residuals and thresholds that produced them."""

    tags: frozenset
    residuals: dict
    thresholds: dict

    @property
    def kind(self) -> str:
        """Coarse label: killing, conformal-gradient, harmonic, iht or generic."""
        if "killing" in self.tags:
            return "killing"
        if "conformal-killing" in self.tags:
            return "conformal-gradient"
        if "harmonic" in self.tags:
            return "harmonic"
        if "iht" in self.tags:
            return "iht"
        return "generic"

    def to_dict(self) -> dict:
        return {
            "tags": sorted(self.tags),
            "kind": self.kind,
            "residuals": self.residuals,
            "thresholds": self.thresholds,
        }


@dataclass(frozen=True, eq=False)
class EigenPair:
    index: int
    value: float
    field: FieldVector
    residual: float
    cluster: int
    classification: Classification | None = None
    meta: dict = field(default_factory=dict)


def _weak_norm(ctx: ManifoldContext, r: np.ndarray) -> float:
    return float(np.linalg.norm(ctx.test_basis.T @ r))


def classify(omega: FieldVector, lam: float, ctx: ManifoldContext) -> Classification:
    """Residuals of the five defining equations, each relative to ``4 pi / area``.

    Operator residuals are weak: the residual vector is tested against the
    M-orthonormal low Yano modes of ``ctx``. The divergence enters through the
    exact quadratic form ``<delta w, delta w>``.
    """
    del lam  # the residuals are evaluated from the field itself
    if omega.basis is not Basis.VERTEX_TANGENT:
        raise ValueError("classify expects a vertex-tangent field")
    x = omega.coeffs
    norm = math.sqrt(float(x @ (ctx.yano.M @ x)))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"field must be normalized (norm {norm:.6g})")
    n, s = ctx.n, ctx.lam_scale
    Ky = ctx.yano.K @ x
    Gx = ctx.div_gram @ x
    div = math.sqrt(max(float(x @ Gx), 0.0) / s)
    iht = _weak_norm(ctx, Ky) / s
    res = {
        "harmonic": _weak_norm(ctx, ctx.hodge_vec.K @ x) / s,
        "iht": iht,
        "killing": max(iht, div),
        "conformal-killing": _weak_norm(ctx, Ky + (1.0 - 2.0 / n) * Gx) / s,
        "projective-killing": _weak_norm(ctx, Ky - 2.0 / (n + 1) * Gx) / s,
        "divergence": div,
    }
    th = ctx.thresholds.class_residual
    tags = frozenset(t for t in TAGS if res[t] <= th)
    return Classification(tags, res, {t: th for t in TAGS})


def classify_spectrum(ctx: ManifoldContext) -> list[EigenPair]:
    """Classify the low Yano spectrum of ``ctx``.

    Each cluster is first rotated to diagonalize the divergence Gram matrix,
    which separates divergence-free modes from gradients sharing the
    eigenvalue. Values are the Rayleigh quotients of the rotated vectors.
    """
    spec = ctx.yano_spectrum
    V = spec.vectors.copy()
    for members in spec.clusters:
        Vc = V[:, members]
        _, U = np.linalg.eigh(Vc.T @ (ctx.div_gram @ Vc))
        V[:, members] = Vc @ U
    out = []
    for i in range(len(spec)):
        x = V[:, i]
        x = x / math.sqrt(float(x @ (ctx.yano.M @ x)))
        fv = FieldVector(Basis.VERTEX_TANGENT, x, ctx.mesh)
        lam = ctx.yano.quadratic(x)
        out.append(EigenPair(i, lam, fv, float(spec.residuals[i]), spec.cluster_of(i), classify(fv, lam, ctx)))
    return out


def kernel_members(ctx: ManifoldContext, pairs: list[EigenPair]) -> list[EigenPair]:
    band = ctx.thresholds.kernel_band * ctx.lam_scale
    return [p for p in pairs if abs(p.value) <= band]


def killing_number(ctx: ManifoldContext, pairs: list[EigenPair] | None = None) -> int:
    """Kernel eigenforms of the Yano operator with vanishing divergence."""
    pairs = classify_spectrum(ctx) if pairs is None else pairs
    th = ctx.thresholds.class_residual
    return sum(1 for p in kernel_members(ctx, pairs) if p.classification.residuals["divergence"] <= th)
