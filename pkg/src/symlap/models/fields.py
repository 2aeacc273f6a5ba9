"""Sample closed-form fields onto meshes (Killing rotations, gradients, parallel forms)."""

from __future__ import annotations

import numpy as np

from ..core import Basis, FieldVector
from ..discretization.connection import ConnectionData, build_connection
from ..discretization.mesh import IntrinsicMesh
from ..discretization.operators import resample
from .meshgen import torus_displacements


def vertex_normals(mesh: IntrinsicMesh) -> np.ndarray:
    P = mesh.positions
    if P is None:
        raise ValueError("mesh has no embedding")
    if mesh.meta.get("generator") == "icosphere":
        return P / np.linalg.norm(P, axis=1, keepdims=True)
    F = mesh.faces
    n = np.cross(P[F[:, 1]] - P[F[:, 0]], P[F[:, 2]] - P[F[:, 0]])
    N = np.zeros_like(P)
    for k in range(3):
        np.add.at(N, F[:, k], n)
    return N / np.linalg.norm(N, axis=1, keepdims=True)


def tangent_from_embedded(mesh: IntrinsicMesh, vectors: np.ndarray, conn: ConnectionData | None = None) -> FieldVector:
    """Express ambient vectors (one per vertex) in the intrinsic vertex frames.

    The ambient direction is located between the projected outgoing edges and
    its angle interpolated linearly onto the rescaled intrinsic angles.
    """
    conn = conn or build_connection(mesh)
    P = mesh.positions
    N = vertex_normals(mesh)
    F = mesh.faces
    vectors = np.asarray(vectors, dtype=float)
    out = np.zeros((mesh.n_vertices, 2))
    for v, ring in enumerate(mesh.vertex_rings):
        n = N[v]
        w = vectors[v] - (vectors[v] @ n) * n
        mag = np.linalg.norm(w)
        if mag == 0.0:
            continue
        f0, k0 = ring[0]
        e0 = P[F[f0, (k0 + 1) % 3]] - P[v]
        ex = e0 - (e0 @ n) * n
        ex /= np.linalg.norm(ex)
        ey = np.cross(n, ex)
        ext = [np.arctan2(d @ ey, d @ ex) for d in [P[F[f, (k + 1) % 3]] - P[v] for f, k in ring]]
        ext = np.unwrap(np.array(ext + [ext[0] + 2 * np.pi]))
        ext = ext - ext[0]
        intr = np.array([conn.halfedge_angle[f, k] for f, k in ring] + [2 * np.pi])
        beta = np.mod(np.arctan2(w @ ey, w @ ex), 2 * np.pi)
        ang = np.interp(beta, ext, intr)
        out[v] = mag * np.array([np.cos(ang), np.sin(ang)])
    return FieldVector(Basis.VERTEX_TANGENT, out.ravel(), mesh)


def rotation_field(mesh: IntrinsicMesh, axis=(0.0, 0.0, 1.0), conn=None) -> FieldVector:
    """Killing field ``axis x p`` of a round sphere, sampled at the vertices."""
    P = mesh.positions
    radius = np.linalg.norm(P, axis=1, keepdims=True)
    return tangent_from_embedded(mesh, np.cross(np.asarray(axis, float), P / radius) * radius, conn)


def gradient_field(mesh: IntrinsicMesh, values: np.ndarray, grad: np.ndarray, conn=None) -> FieldVector:
    """Tangent field from ambient gradients ``grad`` (tangential part is kept)."""
    del values
    return tangent_from_embedded(mesh, grad, conn)


def height_gradient(mesh: IntrinsicMesh, axis: int = 2, conn=None) -> FieldVector:
    """Gradient of the coordinate function ``x_axis`` restricted to a round sphere."""
    P = mesh.positions
    g = np.zeros_like(P)
    g[:, axis] = 1.0
    return tangent_from_embedded(mesh, g, conn)


def torus_parallel_form(mesh: IntrinsicMesh, direction=(1.0, 0.0)) -> FieldVector:
    """Constant 1-form on a flat torus grid, as a whitney-edge field (exact edge integrals)."""
    d = torus_displacements(mesh)
    return FieldVector(Basis.EDGE, d @ np.asarray(direction, float), mesh)


def torus_parallel_field(mesh: IntrinsicMesh, direction=(1.0, 0.0)) -> FieldVector:
    return resample(torus_parallel_form(mesh, direction), Basis.VERTEX_TANGENT)
