"""Whitney/DEC complex on an intrinsic mesh: incidence, masses, Hodge Laplacian on 1-forms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..core import Basis, InnerProductSpace, OperatorPair, is_positive_definite
from .mesh import IntrinsicMesh


class AssemblyError(RuntimeError):
    pass


def incidence(mesh: IntrinsicMesh) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Integer coboundaries ``d0`` (E x V) and ``d1`` (F x E)."""
    E, V, F = mesh.n_edges, mesh.n_vertices, mesh.n_faces
    rows = np.repeat(np.arange(E), 2)
    cols = mesh.edges.ravel()
    vals = np.tile([-1, 1], E)
    d0 = sp.csr_matrix((vals, (rows, cols)), shape=(E, V), dtype=np.int64)
    idx, sign = mesh.face_edges
    d1 = sp.csr_matrix((sign.ravel(), (np.repeat(np.arange(F), 3), idx.ravel())), shape=(F, E), dtype=np.int64)
    return d0, d1


def whitney_mass(mesh: IntrinsicMesh) -> sp.csr_matrix:
    """Consistent mass matrix of lowest-order Whitney 1-forms."""
    G = mesh.barycentric_gradients
    A = mesh.face_areas
    GG = np.einsum("fka,fla->fkl", G, G)
    idx, sign = mesh.face_edges

    def I(x, y):  # integral of lambda_x lambda_y over the face
        return A * (2.0 if x == y else 1.0) / 12.0

    rows, cols, vals = [], [], []
    for k in range(3):
        a, b = k, (k + 1) % 3
        for l in range(3):
            c, d = l, (l + 1) % 3
            m = I(a, c) * GG[:, b, d] - I(a, d) * GG[:, b, c] - I(b, c) * GG[:, a, d] + I(b, d) * GG[:, a, c]
            rows.append(idx[:, k])
            cols.append(idx[:, l])
            vals.append(m * sign[:, k] * sign[:, l])
    E = mesh.n_edges
    M1 = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(E, E))
    return ((M1 + M1.T) * 0.5).tocsr()


@dataclass(frozen=True, eq=False)
class DECComplex:
    mesh: IntrinsicMesh
    d0: sp.csr_matrix
    d1: sp.csr_matrix
    M0: sp.csr_matrix
    M1: sp.csr_matrix
    M2: sp.csr_matrix
    hodge_L1: OperatorPair

    @property
    def spaces(self) -> dict[Basis, InnerProductSpace]:
        return {
            Basis.P1: InnerProductSpace(self.M0, 0, Basis.P1),
            Basis.EDGE: InnerProductSpace(self.M1, 1, Basis.EDGE),
            Basis.FACE_2FORM: InnerProductSpace(self.M2, 2, Basis.FACE_2FORM),
        }

    @cached_property
    def _potential_solver(self):
        # cotangent Laplacian with vertex 0 grounded
        L = (self.d0.T @ self.M1 @ self.d0).tocsc()
        return splu(L[1:, 1:].tocsc())

    @cached_property
    def _coexact_solver(self):
        # saddle system [[M1, d1^T], [d1, 0]] with one face multiplier grounded
        d1 = self.d1[1:].astype(float)
        S = sp.bmat([[self.M1, d1.T], [d1, None]]).tocsc()
        return splu(S)

    def exact_potential(self, omega: np.ndarray) -> np.ndarray:
        """``alpha`` minimising ``|omega - d0 alpha|`` in the M1 norm (alpha[0] = 0)."""
        rhs = self.d0.T @ (self.M1 @ omega)
        alpha = np.zeros(self.mesh.n_vertices)
        alpha[1:] = self._potential_solver.solve(rhs[1:])
        return alpha

    def exact_part(self, omega: np.ndarray) -> np.ndarray:
        return self.d0 @ self.exact_potential(omega)

    def coexact_part(self, omega: np.ndarray) -> np.ndarray:
        E = self.mesh.n_edges
        rhs = np.concatenate([np.zeros(E), self.d1[1:] @ omega])
        return self._coexact_solver.solve(rhs)[:E]

    def project_coclosed(self, omega: np.ndarray) -> np.ndarray:
        return omega - self.exact_part(omega)


def assemble_dec(mesh: IntrinsicMesh) -> DECComplex:
    d0, d1 = incidence(mesh)
    M0 = sp.diags(mesh.vertex_areas).tocsr()
    M1 = whitney_mass(mesh)
    M2 = sp.diags(1.0 / mesh.face_areas).tocsr()
    if not np.all(mesh.vertex_areas > 0) or not is_positive_definite(M1):
        raise AssemblyError("singular mass matrix")
    d0f, d1f = d0.astype(float), d1.astype(float)
    B = M1 @ d0f
    K = B @ sp.diags(1.0 / mesh.vertex_areas) @ B.T + d1f.T @ M2 @ d1f
    K = ((K + K.T) * 0.5).tocsr()
    op = OperatorPair(K, M1, Basis.EDGE, "hodge_L1")
    return DECComplex(mesh, d0, d1, M0, M1, M2, op)
