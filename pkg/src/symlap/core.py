"""Shared domain types: fields, operator pencils, inner-product spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu


class DimensionError(ValueError):
    pass


class Basis(str, Enum):
    P1 = "P1-function"
    FACE_FUNCTION = "face-function"
    EDGE = "whitney-edge"
    VERTEX_TANGENT = "vertex-tangent"
    FACE_SYMTENSOR = "face-symtensor"
    FACE_2FORM = "face-2form"


# tensor order carried by each basis (1/p! is folded into the mass matrix)
TENSOR_ORDER = {
    Basis.P1: 0,
    Basis.FACE_FUNCTION: 0,
    Basis.EDGE: 1,
    Basis.VERTEX_TANGENT: 1,
    Basis.FACE_SYMTENSOR: 2,
    Basis.FACE_2FORM: 2,
}


def basis_dimension(basis: Basis, mesh) -> int:
    basis = Basis(basis)
    if basis is Basis.P1:
        return mesh.n_vertices
    if basis is Basis.VERTEX_TANGENT:
        return 2 * mesh.n_vertices
    if basis is Basis.EDGE:
        return mesh.n_edges
    if basis is Basis.FACE_SYMTENSOR:
        return 3 * mesh.n_faces
    return mesh.n_faces


class ManifoldKind(str, Enum):
    TORUS = "analytic-torus"
    SPHERE = "analytic-sphere"
    MESH = "mesh"


@dataclass(frozen=True)
class ManifoldDescriptor:
    kind: ManifoldKind
    dimension: int
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", ManifoldKind(self.kind))
        if self.dimension < 2:
            raise ValueError("manifold dimension must be at least 2")
        if self.kind is ManifoldKind.MESH:
            mesh = self.metadata.get("mesh")
            if mesh is None:
                raise ValueError("mesh manifold needs a mesh handle")
            from .discretization.mesh import require_valid

            require_valid(mesh)
            if self.dimension != 2:
                raise ValueError("meshes are surfaces (n = 2)")
        elif self.kind is ManifoldKind.SPHERE and not self.metadata.get("radius", 1.0) > 0:
            raise ValueError("sphere radius must be positive")

    @classmethod
    def from_mesh(cls, mesh) -> "ManifoldDescriptor":
        return cls(ManifoldKind.MESH, 2, {"mesh": mesh})


@dataclass(frozen=True, eq=False)
class FieldVector:
    """Coefficients of a discrete field in a declared basis on a mesh."""

    basis: Basis
    coeffs: np.ndarray
    handle: Any

    def __post_init__(self):
        object.__setattr__(self, "basis", Basis(self.basis))
        c = np.asarray(self.coeffs, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if c.ndim != 1:
            raise DimensionError("field coefficients must be a flat array")
        n = basis_dimension(self.basis, self.handle)
        if len(c) != n:
            raise DimensionError(f"{self.basis.value} field needs {n} coefficients, got {len(c)}")
        if not np.all(np.isfinite(c)):
            raise ValueError("field has non-finite coefficients")

    def __len__(self):
        return len(self.coeffs)

    def with_coeffs(self, coeffs) -> "FieldVector":
        return FieldVector(self.basis, coeffs, self.handle)


def _is_diagonal(A) -> bool:
    A = sp.csr_matrix(A)
    return A.nnz == np.count_nonzero(A.diagonal()) and (A - sp.diags(A.diagonal())).nnz == 0


def is_positive_definite(M) -> bool:
    """Cholesky-style test: every pivot of a symmetric elimination is positive."""
    M = sp.csc_matrix(M)
    if _is_diagonal(M):
        return bool(np.all(M.diagonal() > 0))
    try:
        lu = splu(M, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options={"SymmetricMode": True})
    except RuntimeError:
        return False
    if not np.array_equal(lu.perm_r, lu.perm_c):
        return False
    return bool(np.all(lu.U.diagonal() > 0))


def symmetry_defect(A) -> float:
    A = sp.csr_matrix(A)
    scale = abs(A).max() if A.nnz else 0.0
    if scale == 0.0:
        return 0.0
    D = A - A.T
    return (abs(D).max() if D.nnz else 0.0) / scale


@dataclass(frozen=True, eq=False)
class OperatorPair:
    """Stiffness ``K`` and mass ``M`` of the pencil ``K x = lambda M x``."""

    K: sp.csr_matrix
    M: sp.csr_matrix
    basis: Basis
    label: str

    def __post_init__(self):
        K, M = sp.csr_matrix(self.K), sp.csr_matrix(self.M)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "basis", Basis(self.basis))
        if K.shape != M.shape or K.shape[0] != K.shape[1]:
            raise DimensionError(f"K {K.shape} and M {M.shape} must be equal square shapes")
        if symmetry_defect(K) > 1e-12:
            raise ValueError(f"{self.label}: stiffness is not symmetric")
        if symmetry_defect(M) > 1e-12:
            raise ValueError(f"{self.label}: mass is not symmetric")

    @property
    def dim(self) -> int:
        return self.K.shape[0]

    def mass_is_positive_definite(self) -> bool:
        return is_positive_definite(self.M)

    def quadratic(self, x) -> float:
        x = np.asarray(getattr(x, "coeffs", x))
        return float(x @ (self.K @ x))


def operator_norm_estimate(K, M, iterations: int = 8, seed: int = 0) -> float:
    """Power-iteration estimate of the largest |eigenvalue| of ``M^-1 K``."""
    K, M = sp.csr_matrix(K), sp.csc_matrix(M)
    if _is_diagonal(M):
        d = M.diagonal()
        solve = lambda y: y / d  # noqa: E731
    else:
        solve = splu(M).solve
    x = np.random.default_rng(seed).standard_normal(K.shape[0])
    est = 0.0
    for _ in range(iterations):
        y = solve(K @ x)
        nrm = math.sqrt(abs(y @ (M @ y)))
        if nrm == 0.0:
            return 0.0
        est = nrm / math.sqrt(abs(x @ (M @ x)))
        x = y / nrm
    return est


@dataclass(frozen=True, eq=False)
class InnerProductSpace:
    """Mass matrix of a field space; the 1/p! factor is already inside ``M``."""

    M: sp.csr_matrix
    order: int
    basis: Basis

    @property
    def symmetric_factor(self) -> float:
        return 1.0 / math.factorial(self.order)


def global_inner(a: FieldVector, b: FieldVector, space: InnerProductSpace) -> float:
    if a.basis != b.basis or a.basis != space.basis:
        raise DimensionError(f"basis mismatch: {a.basis.value}, {b.basis.value}, {space.basis.value}")
    if len(a) != space.M.shape[0] or len(b) != space.M.shape[0]:
        raise DimensionError("field and space dimensions differ")
    return float(a.coeffs @ (space.M @ b.coeffs))


def sharp(omega: FieldVector) -> FieldVector:
    """Vector field dual to a 1-form. Vertex frames are orthonormal, so the
    vertex-tangent coefficients carry over unchanged."""
    if omega.basis is Basis.VERTEX_TANGENT:
        return omega.with_coeffs(np.array(omega.coeffs))
    if omega.basis is Basis.EDGE:
        from .discretization.operators import resample

        return resample(omega, Basis.VERTEX_TANGENT)
    raise DimensionError(f"sharp is undefined on {omega.basis.value}")


def flat(xi: FieldVector, to: Basis = Basis.VERTEX_TANGENT) -> FieldVector:
    if xi.basis is not Basis.VERTEX_TANGENT:
        raise DimensionError(f"flat expects a vertex-tangent field, got {xi.basis.value}")
    to = Basis(to)
    if to is Basis.VERTEX_TANGENT:
        return xi.with_coeffs(np.array(xi.coeffs))
    if to is Basis.EDGE:
        from .discretization.operators import resample

        return resample(xi, Basis.EDGE)
    raise DimensionError(f"flat cannot produce {to.value}")


def pointwise_norms(phi: FieldVector) -> np.ndarray:
    """Plain metric contraction g(phi, phi) per vertex or face (no 1/p!)."""
    c = phi.coeffs
    if phi.basis is Basis.VERTEX_TANGENT:
        v = c.reshape(-1, 2)
        return np.einsum("ij,ij->i", v, v)
    if phi.basis is Basis.FACE_SYMTENSOR:
        s = c.reshape(-1, 3)
        return s[:, 0] ** 2 + 2.0 * s[:, 1] ** 2 + s[:, 2] ** 2
    if phi.basis in (Basis.P1, Basis.FACE_FUNCTION):
        return c**2
    raise DimensionError(f"pointwise norms are undefined on {phi.basis.value}")
