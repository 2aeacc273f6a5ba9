"""Closed-form eigenvalue families on round spheres and flat tori."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class AnalyticEigenFamily:
    """One eigenspace of the Hodge and Yano Laplacians on a model space.

    ``ricci`` is the Ricci eigenvalue of the model, so that
    ``yano_eigenvalue == hodge_eigenvalue - 2 * ricci``.
    """

    model: str
    family: str
    hodge_eigenvalue: float
    yano_eigenvalue: float
    multiplicity: int
    divergence_ratio: float
    ricci: float = 0.0

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be positive")


def torus_oracle(n: int, k_max: int) -> list[tuple[float, int]]:
    """``(eigenvalue, multiplicity)`` of the 1-form Laplacian on the unit flat n-torus.

    Each Fourier mode ``k`` with ``|k_i| <= k_max`` contributes ``n`` form
    components at eigenvalue ``4 pi^2 |k|^2``. Ricci vanishes, so the Yano
    spectrum is identical.
    """
    if n not in (2, 3):
        raise ValueError("n must be 2 or 3")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    counts: dict[int, int] = {}
    for k in itertools.product(range(-k_max, k_max + 1), repeat=n):
        q = sum(c * c for c in k)
        counts[q] = counts.get(q, 0) + n
    return [(4.0 * math.pi**2 * q, counts[q]) for q in sorted(counts)]


def sphere_oracle(n: int, family: str) -> AnalyticEigenFamily:
    """Killing or conformal-gradient eigenspace on the unit round n-sphere."""
    if n < 2:
        raise ValueError("n must be at least 2")
    ric = n - 1
    if family == "killing":
        return AnalyticEigenFamily(f"S^{n}", family, 2.0 * ric, 0.0, n * (n + 1) // 2, 0.0, float(ric))
    if family == "conformal-gradient":
        hodge = n
        yano = hodge - 2 * ric
        if yano != conformal_formula(n, n):
            raise ArithmeticError("Weitzenboeck and conformal routes disagree")
        return AnalyticEigenFamily(f"S^{n}", family, float(hodge), float(yano), n + 1, float(n), float(ric))
    raise ValueError(f"unknown family {family!r}")


def conformal_formula(n: int, divergence_ratio) -> Fraction:
    """``-(1 - 2/n) * ratio`` in exact rational arithmetic."""
    return -(1 - Fraction(2, n)) * Fraction(divergence_ratio)


def projective_formula(n: int, divergence_ratio: float) -> float:
    """``2/(n+1) * ratio``; nonnegative for every nonnegative ratio."""
    return 2.0 * divergence_ratio / (n + 1)


def projective_sign_oracle(n: int) -> float:
    """Yano eigenvalue of the shipped projective family (Killing fields, zero divergence)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return projective_formula(n, 0.0)
