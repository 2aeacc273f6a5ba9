"""Vertex-tangent operators: Bochner, Ricci, Yano and Hodge Laplacians, symmetric gradient, resampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..core import Basis, DimensionError, FieldVector, InnerProductSpace, OperatorPair, is_positive_definite
from .connection import ConnectionData, build_connection
from .dec import AssemblyError, whitney_mass
from .mesh import IntrinsicMesh


@dataclass(frozen=True, eq=False)
class CurvatureField:
    K: np.ndarray
    area: np.ndarray
    defect: np.ndarray

    @property
    def r(self) -> float:
        """Magnitude of the largest (negative) Ricci eigenvalue; 0 unless K < 0 everywhere."""
        return max(0.0, -float(self.K.max()))

    @property
    def rho(self) -> float:
        """Smallest (positive) Ricci eigenvalue; 0 unless K > 0 everywhere."""
        return max(0.0, float(self.K.min()))

    @property
    def mean(self) -> float:
        return float(self.defect.sum() / self.area.sum())

    @property
    def oscillation(self) -> float:
        return float(self.K.max() - self.K.min()) / 2.0


def curvature(mesh: IntrinsicMesh) -> CurvatureField:
    return CurvatureField(mesh.angle_defects / mesh.vertex_areas, mesh.vertex_areas, mesh.angle_defects)


def _rot(a):
    c, s = np.cos(a), np.sin(a)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def vertex_mass(mesh: IntrinsicMesh) -> sp.csr_matrix:
    return sp.diags(np.repeat(mesh.vertex_areas, 2)).tocsr()


def face_mass(mesh: IntrinsicMesh) -> sp.csr_matrix:
    return sp.diags(mesh.face_areas).tocsr()


def symtensor_mass(mesh: IntrinsicMesh) -> sp.csr_matrix:
    """Mass of (xx, xy, yy) face tensors with the 1/2! factor folded in."""
    w = 0.5 * mesh.face_areas[:, None] * np.array([1.0, 2.0, 1.0])
    return sp.diags(w.ravel()).tocsr()


def vector_spaces(mesh: IntrinsicMesh) -> dict[Basis, InnerProductSpace]:
    return {
        Basis.VERTEX_TANGENT: InnerProductSpace(vertex_mass(mesh), 1, Basis.VERTEX_TANGENT),
        Basis.FACE_FUNCTION: InnerProductSpace(face_mass(mesh), 0, Basis.FACE_FUNCTION),
        Basis.FACE_SYMTENSOR: InnerProductSpace(symtensor_mass(mesh), 2, Basis.FACE_SYMTENSOR),
        Basis.P1: InnerProductSpace(sp.diags(mesh.vertex_areas).tocsr(), 0, Basis.P1),
    }


def jacobian_operator(mesh: IntrinsicMesh, conn: ConnectionData) -> sp.csr_matrix:
    """Map vertex-tangent coefficients to the constant Jacobian of the per-face
    affine interpolant, rows ``4f + 2a + b`` holding ``d xi^a / d x^b``."""
    F = mesh.n_faces
    G = mesh.barycentric_gradients
    R = _rot(conn.corner_rotation)  # (F, 3, 2, 2)
    rows, cols, vals = [], [], []
    f = np.arange(F)
    for k in range(3):
        v = mesh.faces[:, k]
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    rows.append(4 * f + 2 * a + b)
                    cols.append(2 * v + c)
                    vals.append(R[:, k, a, c] * G[:, k, b])
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(4 * F, 2 * mesh.n_vertices)
    )


def trace_operator(mesh: IntrinsicMesh, conn: ConnectionData) -> sp.csr_matrix:
    """Per-face divergence of the interpolant (trace of the Jacobian)."""
    J = jacobian_operator(mesh, conn)
    F = mesh.n_faces
    S = sp.csr_matrix(
        (np.ones(2 * F), (np.repeat(np.arange(F), 2), (4 * np.arange(F)[:, None] + np.array([0, 3])).ravel())),
        shape=(F, 4 * F),
    )
    return (S @ J).tocsr()


def symmetrizer(n_faces: int, scale: float = 1.0) -> sp.csr_matrix:
    """Map row-major 2x2 Jacobians to (xx, xy, yy) of ``scale * (J + J^T)``."""
    f = np.arange(n_faces)
    rows = np.concatenate([3 * f, 3 * f + 1, 3 * f + 1, 3 * f + 2])
    cols = np.concatenate([4 * f, 4 * f + 1, 4 * f + 2, 4 * f + 3])
    vals = scale * np.concatenate([np.full(n_faces, 2.0), np.ones(n_faces), np.ones(n_faces), np.full(n_faces, 2.0)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(3 * n_faces, 4 * n_faces))


def assemble_bochner(mesh: IntrinsicMesh, conn: ConnectionData | None = None) -> OperatorPair:
    """Connection Laplacian: the Dirichlet energy of the per-face affine interpolant
    with vertex vectors rotated into face frames (cotangent weights)."""
    conn = conn or build_connection(mesh)
    J = jacobian_operator(mesh, conn)
    W = sp.diags(np.repeat(mesh.face_areas, 4))
    K = (J.T @ W @ J).tocsr()
    return OperatorPair((K + K.T) * 0.5, vertex_mass(mesh), Basis.VERTEX_TANGENT, "bochner")


def assemble_ric_op(mesh: IntrinsicMesh, curv: CurvatureField | None = None) -> OperatorPair:
    curv = curv or curvature(mesh)
    K = sp.diags(np.repeat(curv.K * curv.area, 2))
    return OperatorPair(K, vertex_mass(mesh), Basis.VERTEX_TANGENT, "ric")


def assemble_yano(mesh: IntrinsicMesh, conn: ConnectionData | None = None) -> OperatorPair:
    """Bochner minus Ricci: the discrete Yano rough Laplacian on 1-forms."""
    conn = conn or build_connection(mesh)
    B, R = assemble_bochner(mesh, conn), assemble_ric_op(mesh)
    return OperatorPair(B.K - R.K, B.M, Basis.VERTEX_TANGENT, "yano")


def assemble_hodge_vec(mesh: IntrinsicMesh, conn: ConnectionData | None = None) -> OperatorPair:
    """Bochner plus Ricci: Hodge Laplacian on 1-forms in the vertex-tangent basis."""
    conn = conn or build_connection(mesh)
    B, R = assemble_bochner(mesh, conn), assemble_ric_op(mesh)
    return OperatorPair(B.K + R.K, B.M, Basis.VERTEX_TANGENT, "hodge_vec")


def divergence_gram(mesh: IntrinsicMesh, conn: ConnectionData) -> sp.csr_matrix:
    """Weak form of delta* delta: ``x^T G y = <delta x, delta y>``."""
    D = trace_operator(mesh, conn)
    return (D.T @ face_mass(mesh) @ D).tocsr()


def sym_gradient(
    mesh: IntrinsicMesh, conn: ConnectionData, xi: FieldVector, scale: float = 1.0
) -> tuple[FieldVector, FieldVector]:
    """Return ``(delta* omega, delta omega)`` per face.

    ``delta* omega = scale * (J + J^T)`` as (xx, xy, yy) and ``delta omega = -tr J``.
    """
    if xi.basis is not Basis.VERTEX_TANGENT:
        raise DimensionError("sym_gradient needs a vertex-tangent field")
    J = jacobian_operator(mesh, conn) @ xi.coeffs
    S = symmetrizer(mesh.n_faces, scale) @ J
    tr = J.reshape(-1, 4)[:, [0, 3]].sum(axis=1)
    return FieldVector(Basis.FACE_SYMTENSOR, S * 1.0, mesh), FieldVector(Basis.FACE_FUNCTION, -tr, mesh)


def divergence(mesh: IntrinsicMesh, conn: ConnectionData, xi: FieldVector) -> FieldVector:
    """Divergence of ``xi`` as a P1 function (lumped projection of the face values)."""
    _, delta = sym_gradient(mesh, conn, xi)
    w = mesh.corner_areas * (-delta.coeffs)[:, None]
    vals = np.bincount(mesh.faces.ravel(), weights=w.ravel(), minlength=mesh.n_vertices) / mesh.vertex_areas
    return FieldVector(Basis.P1, vals, mesh)


def quadratic_form_identity(
    mesh: IntrinsicMesh,
    omega: FieldVector,
    conn: ConnectionData | None = None,
    yano: OperatorPair | None = None,
    symgrad_scale: float = 1.0,
) -> tuple[float, float, float]:
    """Compare ``<Yano w, w>`` with ``<delta* w, delta* w> - <delta w, delta w>``.

    Returns ``(lhs, rhs, relative_gap)``.
    """
    conn = conn or build_connection(mesh)
    yano = yano or assemble_yano(mesh, conn)
    lhs = yano.quadratic(omega)
    S, d = sym_gradient(mesh, conn, omega, symgrad_scale)
    rhs = float(S.coeffs @ (symtensor_mass(mesh) @ S.coeffs)) - float(d.coeffs @ (face_mass(mesh) @ d.coeffs))
    gap = abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-300)
    return lhs, rhs, gap


def edge_sampling(mesh: IntrinsicMesh, conn: ConnectionData) -> sp.csr_matrix:
    """Exact edge integrals of the piecewise-linear field along each edge (E x 2V)."""
    phi = conn.halfedge_angle
    out_angle: dict[tuple[int, int], float] = {}
    F = mesh.faces
    for f in range(mesh.n_faces):
        for k in range(3):
            out_angle[(int(F[f, k]), int(F[f, (k + 1) % 3]))] = phi[f, k]
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    a_ij = np.array([out_angle[(a, b)] for a, b in mesh.edges.tolist()])
    a_ji = np.array([out_angle[(b, a)] for a, b in mesh.edges.tolist()])
    h = 0.5 * mesh.lengths
    E = mesh.n_edges
    e = np.arange(E)
    rows = np.concatenate([e, e, e, e])
    cols = np.concatenate([2 * i, 2 * i + 1, 2 * j, 2 * j + 1])
    vals = np.concatenate([h * np.cos(a_ij), h * np.sin(a_ij), -h * np.cos(a_ji), -h * np.sin(a_ji)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(E, 2 * mesh.n_vertices))


REGULARIZATION = 1e-5


class _Resampler:
    def __init__(self, mesh: IntrinsicMesh):
        self.conn = build_connection(mesh)
        self.P = edge_sampling(mesh, self.conn)
        self.M1 = whitney_mass(mesh)
        N = self.P.T @ self.M1 @ self.P
        # trapezoidal edge sampling annihilates checkerboard fields on some
        # grids; a small connection-Laplacian term picks the smoothest
        # least-squares solution and leaves parallel fields untouched
        B = assemble_bochner(mesh, self.conn).K
        eps = REGULARIZATION * N.diagonal().mean() / B.diagonal().mean()
        N = (N + eps * B).tocsc()
        if not is_positive_definite(N):
            raise AssemblyError("edge-to-vertex resampling is rank deficient")
        self.normal = splu(N)


_RESAMPLERS: dict[int, tuple[IntrinsicMesh, _Resampler]] = {}


def _resampler(mesh: IntrinsicMesh) -> _Resampler:
    hit = _RESAMPLERS.get(id(mesh))
    if hit is None or hit[0] is not mesh:
        if len(_RESAMPLERS) > 8:
            _RESAMPLERS.clear()
        hit = (mesh, _Resampler(mesh))
        _RESAMPLERS[id(mesh)] = hit
    return hit[1]


def resample(field: FieldVector, to: Basis) -> FieldVector:
    """Convert between whitney-edge and vertex-tangent representations."""
    to = Basis(to)
    mesh = field.handle
    if field.basis is to:
        return field.with_coeffs(np.array(field.coeffs))
    if {field.basis, to} != {Basis.EDGE, Basis.VERTEX_TANGENT}:
        raise DimensionError(f"cannot resample {field.basis.value} to {to.value}")
    r = _resampler(mesh)
    if to is Basis.EDGE:
        return FieldVector(Basis.EDGE, r.P @ field.coeffs, mesh)
    rhs = r.P.T @ (r.M1 @ field.coeffs)
    return FieldVector(Basis.VERTEX_TANGENT, r.normal.solve(rhs), mesh)
