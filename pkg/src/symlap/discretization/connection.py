"""Discrete Levi-Civita connection on vertex tangent planes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import IntrinsicMesh


def wrap_angle(a):
    """Map angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a), 2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class ConnectionData:
    """Vertex frames and transports.

    ``halfedge_angle[f, k]`` is the direction of the halfedge from corner k to
    corner k+1 of face f, measured in the tangent frame of vertex ``faces[f, k]``
    after rescaling the total vertex angle to 2*pi. ``corner_rotation[f, k]``
    rotates that vertex frame into the planar frame of face f (aligned at the
    corner bisector). ``edge_transport[e]`` rotates vectors at ``edges[e, 1]``
    into the frame of ``edges[e, 0]``.
    """

    mesh: IntrinsicMesh
    angle_scale: np.ndarray
    halfedge_angle: np.ndarray
    corner_rotation: np.ndarray
    edge_transport: np.ndarray
    face_edge_direction: np.ndarray

    def transport(self, i: int, j: int) -> float:
        """Rotation angle carrying vectors at ``j`` to the frame of ``i``."""
        if i < j:
            return float(self.edge_transport[self.mesh.edge_index[(i, j)]])
        return -float(self.edge_transport[self.mesh.edge_index[(j, i)]])

    def vertex_holonomy(self) -> np.ndarray:
        """Rotation accumulated by face-to-face transport around each vertex, in (-pi, pi]."""
        alpha = self.face_edge_direction
        th = self.mesh.corner_angles
        hol = np.zeros(self.mesh.n_vertices)
        for v, ring in enumerate(self.mesh.vertex_rings):
            total = 0.0
            for idx, (f, k) in enumerate(ring):
                g, kk = ring[(idx + 1) % len(ring)]
                # shared edge v -> faces[f, k+2] is the second ray of corner (f, k)
                total += alpha[g, kk] - (alpha[f, k] + th[f, k])
            hol[v] = total
        return wrap_angle(hol)


def build_connection(mesh: IntrinsicMesh) -> ConnectionData:
    th = mesh.corner_angles
    scale = 2.0 * np.pi / mesh.angle_sums
    phi = np.zeros_like(th)
    for v, ring in enumerate(mesh.vertex_rings):
        acc = 0.0
        for f, k in ring:
            phi[f, k] = acc
            acc += scale[v] * th[f, k]

    P = mesh.face_layout
    alpha = np.empty_like(th)
    for k in range(3):
        d = P[:, (k + 1) % 3] - P[:, k]
        alpha[:, k] = np.arctan2(d[:, 1], d[:, 0])

    s = scale[mesh.faces]
    rotation = (alpha + 0.5 * th) - (phi + 0.5 * s * th)

    out_angle: dict[tuple[int, int], float] = {}
    F = mesh.faces
    for f in range(mesh.n_faces):
        for k in range(3):
            out_angle[(int(F[f, k]), int(F[f, (k + 1) % 3]))] = phi[f, k]
    transport = np.array([out_angle[(i, j)] + np.pi - out_angle[(j, i)] for i, j in mesh.edges.tolist()])
    return ConnectionData(mesh, scale, phi, wrap_angle(rotation), wrap_angle(transport), alpha)
