"""Intrinsic triangle meshes: combinatorics plus edge lengths."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np


class MeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class IntrinsicMesh:
    """Closed oriented triangle mesh given by faces and positive edge lengths.

    ``edges`` holds sorted vertex pairs ``(i, j)`` with ``i < j``; ``lengths``
    is aligned with it. Positions are optional and only used to sample
    embedded fields.
    """

    n_vertices: int
    faces: np.ndarray
    edges: np.ndarray
    lengths: np.ndarray
    positions: np.ndarray | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_faces(cls, n_vertices, faces, length_of, positions=None, meta=None):
        """Build a mesh from faces and a callable ``length_of(i, j)``."""
        faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        pairs = np.sort(np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]), axis=1)
        edges = np.unique(pairs, axis=0)
        lengths = np.array([length_of(int(i), int(j)) for i, j in edges], dtype=float)
        return cls(int(n_vertices), faces, edges, lengths, positions, dict(meta or {}))

    @classmethod
    def from_positions(cls, positions, faces, meta=None):
        positions = np.asarray(positions, dtype=float)
        return cls.from_faces(
            len(positions),
            faces,
            lambda i, j: float(np.linalg.norm(positions[i] - positions[j])),
            positions=positions,
            meta=meta,
        )

    # -- combinatorics -------------------------------------------------

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(int(i), int(j)): k for k, (i, j) in enumerate(self.edges)}

    @cached_property
    def face_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge id and sign for the local edge ``k -> k+1`` of every face."""
        idx = np.empty((self.n_faces, 3), dtype=np.int64)
        sign = np.empty((self.n_faces, 3), dtype=np.int64)
        lookup = self.edge_index
        for f, tri in enumerate(self.faces):
            for k in range(3):
                a, b = int(tri[k]), int(tri[(k + 1) % 3])
                key = (a, b) if a < b else (b, a)
                try:
                    idx[f, k] = lookup[key]
                except KeyError:  # pragma: no cover - from_faces always covers
                    raise MeshError(f"face {f} uses unknown edge {key}") from None
                sign[f, k] = 1 if a < b else -1
        return idx, sign

    @cached_property
    def face_lengths(self) -> np.ndarray:
        """``L[f, k]`` is the length of the edge from corner k to corner k+1."""
        idx, _ = self.face_edges
        return self.lengths[idx]

    # -- geometry ------------------------------------------------------

    @cached_property
    def corner_angles(self) -> np.ndarray:
        """Interior angle at every corner, from the law of cosines."""
        L = self.face_lengths
        # side opposite corner k is the edge k+1 -> k+2
        a = np.roll(L, -1, axis=1)
        b = L
        c = np.roll(L, 1, axis=1)
        cos = (b * b + c * c - a * a) / (2.0 * b * c)
        return np.arccos(np.clip(cos, -1.0, 1.0))

    @cached_property
    def face_areas(self) -> np.ndarray:
        # Kahan's stable Heron formula
        s = np.sort(self.face_lengths, axis=1)[:, ::-1]
        a, b, c = s[:, 0], s[:, 1], s[:, 2]
        prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
        return 0.25 * np.sqrt(np.clip(prod, 0.0, None))

    @cached_property
    def corner_areas(self) -> np.ndarray:
        """Share of each face owned by each corner, shape ``(F, 3)``.

        Circumcentric split for non-obtuse faces, barycentric thirds for
        obtuse ones. Rows sum to the face area and stay positive.
        """
        th = self.corner_angles
        L = self.face_lengths
        A = self.face_areas
        cot = 1.0 / np.tan(th)
        out = np.zeros_like(th)
        for k in range(3):
            # edge k -> k+1 sits opposite corner k+2
            share = L[:, k] ** 2 * cot[:, (k + 2) % 3] / 8.0
            out[:, k] += share
            out[:, (k + 1) % 3] += share
        bad = (th > 0.5 * np.pi).any(axis=1)
        out[bad] = A[bad, None] / 3.0
        return out

    @cached_property
    def vertex_areas(self) -> np.ndarray:
        """Lumped area per vertex (sum of its corner shares)."""
        return np.bincount(self.faces.ravel(), weights=self.corner_areas.ravel(), minlength=self.n_vertices)

    @cached_property
    def angle_sums(self) -> np.ndarray:
        return np.bincount(self.faces.ravel(), weights=self.corner_angles.ravel(), minlength=self.n_vertices)

    @cached_property
    def angle_defects(self) -> np.ndarray:
        return 2.0 * np.pi - self.angle_sums

    @cached_property
    def face_layout(self) -> np.ndarray:
        """Planar coordinates ``(F, 3, 2)`` of each face, edge 0->1 along +x, ccw."""
        L = self.face_lengths
        th = self.corner_angles
        P = np.zeros((self.n_faces, 3, 2))
        P[:, 1, 0] = L[:, 0]
        P[:, 2, 0] = L[:, 2] * np.cos(th[:, 0])
        P[:, 2, 1] = L[:, 2] * np.sin(th[:, 0])
        return P

    @cached_property
    def barycentric_gradients(self) -> np.ndarray:
        """Gradient of each hat function in the face layout, shape ``(F, 3, 2)``."""
        P = self.face_layout
        A2 = 2.0 * self.face_areas
        G = np.empty_like(P)
        for k in range(3):
            d = P[:, (k + 2) % 3] - P[:, (k + 1) % 3]
            G[:, k, 0] = -d[:, 1] / A2
            G[:, k, 1] = d[:, 0] / A2
        return G

    @cached_property
    def vertex_rings(self) -> list[list[tuple[int, int]]]:
        """Counter-clockwise list of corners ``(face, k)`` around each vertex.

        Requires a closed, consistently oriented manifold mesh.
        """
        out_corner: dict[tuple[int, int], tuple[int, int]] = {}
        first: list[tuple[int, int] | None] = [None] * self.n_vertices
        F = self.faces
        for f in range(self.n_faces):
            for k in range(3):
                v, w = int(F[f, k]), int(F[f, (k + 1) % 3])
                if (v, w) in out_corner:
                    raise MeshError(f"halfedge {v}->{w} appears twice (orientation or manifoldness)")
                out_corner[(v, w)] = (f, k)
                if first[v] is None:
                    first[v] = (f, k)
        rings = []
        for v in range(self.n_vertices):
            start = first[v]
            if start is None:
                raise MeshError(f"vertex {v} is isolated")
            ring = [start]
            f, k = start
            while True:
                nxt_to = int(F[f, (k + 2) % 3])
                try:
                    f, k = out_corner[(v, nxt_to)]
                except KeyError:
                    raise MeshError(f"vertex {v} has a boundary") from None
                if (f, k) == start:
                    break
                ring.append((f, k))
                if len(ring) > 3 * self.n_faces:  # pragma: no cover
                    raise MeshError(f"vertex {v} ring does not close")
            rings.append(ring)
        return rings

    def scaled(self, c: float) -> "IntrinsicMesh":
        """Same combinatorics with every length multiplied by ``c``."""
        pos = None if self.positions is None else self.positions * c
        meta = dict(self.meta)
        meta["scale"] = meta.get("scale", 1.0) * c
        return IntrinsicMesh(self.n_vertices, self.faces, self.edges, self.lengths * c, pos, meta)


def validate_mesh(mesh: IntrinsicMesh) -> list[dict[str, Any]]:
    """Return a list of violations; an empty list means the mesh is usable."""
    issues: list[dict[str, Any]] = []
    F = mesh.faces
    V = mesh.n_vertices
    if V < 3 or len(F) == 0:
        issues.append({"kind": "empty", "index": None, "detail": "mesh has no faces"})
        return issues
    if F.min() < 0 or F.max() >= V:
        issues.append({"kind": "index", "index": None, "detail": "face refers to missing vertex"})
        return issues
    for f, tri in enumerate(F):
        if len(set(tri.tolist())) < 3:
            issues.append({"kind": "degenerate-face", "index": f, "detail": "repeated vertex"})
    for e, l in enumerate(mesh.lengths):
        if not np.isfinite(l) or l <= 0:
            issues.append({"kind": "length", "index": e, "detail": f"non-positive length {l}"})

    halfedges: dict[tuple[int, int], int] = {}
    for f, tri in enumerate(F):
        for k in range(3):
            key = (int(tri[k]), int(tri[(k + 1) % 3]))
            halfedges[key] = halfedges.get(key, 0) + 1
    for e, (i, j) in enumerate(mesh.edges):
        fwd, bwd = halfedges.get((int(i), int(j)), 0), halfedges.get((int(j), int(i)), 0)
        if fwd + bwd == 1:
            issues.append({"kind": "non-closed", "index": e, "detail": f"boundary edge ({i}, {j})"})
        elif fwd + bwd > 2:
            issues.append({"kind": "non-manifold", "index": e, "detail": f"edge ({i}, {j}) in {fwd + bwd} faces"})
        elif fwd != 1 or bwd != 1:
            issues.append({"kind": "orientation", "index": e, "detail": f"edge ({i}, {j}) not oppositely oriented"})

    if np.all(mesh.lengths > 0):
        L = mesh.face_lengths
        for f in range(len(F)):
            a, b, c = L[f]
            if not (a < b + c and b < a + c and c < a + b):
                issues.append({"kind": "triangle-inequality", "index": f, "detail": f"lengths {a}, {b}, {c}"})

    if not any(i["kind"] in ("non-closed", "non-manifold", "orientation", "degenerate-face") for i in issues):
        try:
            rings = mesh.vertex_rings
        except MeshError as exc:
            issues.append({"kind": "non-manifold", "index": None, "detail": str(exc)})
        else:
            count = np.bincount(F.ravel(), minlength=V)
            for v, ring in enumerate(rings):
                if len(ring) != count[v]:
                    issues.append({"kind": "non-manifold", "index": v, "detail": "vertex link is not a single cycle"})
        if _components(mesh) > 1:
            issues.append({"kind": "disconnected", "index": None, "detail": "mesh has several components"})
    return issues


def _components(mesh: IntrinsicMesh) -> int:
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    A = coo_matrix((np.ones(len(i)), (i, j)), shape=(mesh.n_vertices, mesh.n_vertices))
    n, _ = connected_components(A, directed=False)
    return n


def require_valid(mesh: IntrinsicMesh) -> IntrinsicMesh:
    issues = validate_mesh(mesh)
    if issues:
        head = "; ".join(f"{i['kind']}@{i['index']}" for i in issues[:5])
        raise MeshError(f"invalid mesh ({len(issues)} issues): {head}")
    return mesh
