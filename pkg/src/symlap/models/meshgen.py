"""Intrinsic mesh generators: icosphere, periodic torus grid, genus-2 hyperbolic surface."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ..discretization.mesh import IntrinsicMesh, MeshError

MAX_EDGES = 200_000


@dataclass(frozen=True)
class MeshRecipe:
    """A named generator call; ``build()`` produces the mesh.

    Text form: ``icosphere:<level>[:<radius>]``, ``torus-grid:<m>`` and
    ``hyperbolic-genus2:<depth>[:<scale>]``.
    """

    generator: str
    level: int
    params: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "MeshRecipe":
        parts = text.strip().split(":")
        name = parts[0]
        if name not in ("icosphere", "torus-grid", "hyperbolic-genus2") or len(parts) < 2:
            raise ValueError(f"unknown mesh recipe {text!r}")
        try:
            level = int(parts[1])
            extra = [float(p) for p in parts[2:]]
        except ValueError:
            raise ValueError(f"malformed mesh recipe {text!r}") from None
        params = {}
        if name == "icosphere" and extra:
            params["radius"] = extra[0]
        if name == "hyperbolic-genus2" and extra:
            params["scale"] = extra[0]
        if name == "torus-grid" and extra:
            raise ValueError("torus-grid recipe takes only the grid size")
        return cls(name, level, params)

    def __str__(self) -> str:
        tail = "".join(f":{v:.17g}" for v in self.params.values())
        return f"{self.generator}:{self.level}{tail}"

    def build(self) -> IntrinsicMesh:
        if self.generator == "icosphere":
            return gen_icosphere(self.level, self.params.get("radius", 1.0))
        if self.generator == "torus-grid":
            return gen_torus_grid(self.level, self.params.get("lattice"))
        mesh = gen_hyperbolic_genus2(self.level)
        scale = self.params.get("scale", 1.0)
        if scale != 1.0:
            mesh = mesh.scaled(scale)
            mesh.meta["recipe"] = str(self)
        return mesh

    def coarser(self) -> "MeshRecipe | None":
        """Same recipe one refinement level down, if that level exists."""
        if self.generator == "icosphere":
            return None if self.level == 0 else MeshRecipe(self.generator, self.level - 1, self.params)
        if self.generator == "torus-grid":
            return None if self.level < 6 else MeshRecipe(self.generator, self.level // 2, self.params)
        return None if self.level <= 1 else MeshRecipe(self.generator, self.level - 1, self.params)


# -- icosphere -----------------------------------------------------------


def gen_icosphere(level: int, radius: float = 1.0) -> IntrinsicMesh:
    """Subdivided icosahedron with vertices on the sphere of the given radius."""
    if not 0 <= level <= 6:
        raise ValueError(f"icosphere level must be in [0, 6], got {level}")
    if not radius > 0:
        raise ValueError("radius must be positive")
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    pts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}

        def mid(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                p = pts[a] + pts[b]
                pts.append(p / np.linalg.norm(p))
                cache[key] = len(pts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    P = radius * np.array(pts)
    meta = {"generator": "icosphere", "level": level, "radius": radius, "recipe": str(MeshRecipe("icosphere", level, {"radius": radius} if radius != 1.0 else {}))}
    return IntrinsicMesh.from_positions(P, faces, meta=meta)


# -- flat torus ----------------------------------------------------------


def gen_torus_grid(m: int, lattice=None) -> IntrinsicMesh:
    """Periodic ``m x m`` grid on the torus spanned by the lattice columns.

    Each cell is split along its (0,0)-(1,1) diagonal.
    """
    if m < 3:
        raise ValueError("torus grid needs m >= 3")
    B = np.eye(2) if lattice is None else np.asarray(lattice, dtype=float).reshape(2, 2)
    det = float(np.linalg.det(B))
    if abs(det) <= 1e-12 * max(1.0, float(np.abs(B).max()) ** 2):
        raise ValueError("degenerate torus lattice")
    if 3 * m * m > MAX_EDGES:
        raise ValueError("torus grid too large")

    def vid(i, j):
        return (i % m) * m + (j % m)

    faces = []
    steps: dict[tuple[int, int], tuple[int, int]] = {}
    for i in range(m):
        for j in range(m):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris = [(a, b, c), (a, c, d)] if det > 0 else [(a, c, b), (a, d, c)]
            faces += tris
            steps[tuple(sorted((a, b)))] = (1, 0)
            steps[tuple(sorted((a, c)))] = (1, 1)
            steps[tuple(sorted((a, d)))] = (0, 1)

    def length_of(i, j):
        di, dj = steps[(i, j)]
        return float(np.linalg.norm(B @ np.array([di, dj], dtype=float)) / m)

    meta = {"generator": "torus-grid", "level": m, "lattice": B.tolist(), "recipe": f"torus-grid:{m}"}
    return IntrinsicMesh.from_faces(m * m, faces, length_of, meta=meta)


def torus_displacements(mesh: IntrinsicMesh) -> np.ndarray:
    """Lattice-plane displacement ``x_j - x_i`` of every edge ``(i, j)`` of a torus grid."""
    m = mesh.meta["level"]
    B = np.asarray(mesh.meta["lattice"], dtype=float)
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    gi = np.stack([i // m, i % m], axis=1)
    gj = np.stack([j // m, j % m], axis=1)
    d = (gj - gi + 1) % m - 1  # grid neighbours differ by -1, 0 or 1
    return (d @ B.T) / m


# -- genus-2 hyperbolic surface -------------------------------------------


def _to_origin(a: complex):
    return lambda z: (z - a) / (1 - a.conjugate() * z)


def _from_origin(a: complex):
    return lambda z: (z + a) / (1 + a.conjugate() * z)


def disk_distance(z: complex, w: complex) -> float:
    """Hyperbolic distance in the Poincare disk (curvature -1)."""
    return 2.0 * math.atanh(abs(z - w) / abs(1 - z.conjugate() * w))


def disk_midpoint(z: complex, w: complex) -> complex:
    """Midpoint of the geodesic segment from ``z`` to ``w``."""
    u = _to_origin(z)(w)
    r = abs(u)
    if r == 0.0:
        return z
    m = u / r * math.tanh(0.5 * math.atanh(r))
    return _from_origin(z)(m)


def disk_isometry(a: complex, b: complex, a2: complex, b2: complex):
    """Orientation-preserving disk isometry sending ``a -> a2`` and ``b -> b2``."""
    ta, ta2, back = _to_origin(a), _to_origin(a2), _from_origin(a2)
    w, w2 = ta(b), ta2(b2)
    if abs(abs(w) - abs(w2)) > 1e-12:
        raise ValueError("segments have different hyperbolic lengths")
    rot = w2 / w
    return lambda z: back(rot * ta(z))


def regular_octagon() -> list[complex]:
    """Corners of the regular octagon with interior angles pi/4, centred at 0."""
    R = math.acosh(1.0 / math.tan(math.pi / 8) ** 2)
    rho = math.tanh(R / 2.0)
    return [rho * cmath.exp(1j * (math.pi / 8 + k * math.pi / 4)) for k in range(8)]


# side k runs from corner k to corner k+1; (s, t) glues side s to side t reversed
_SIDE_PAIRS = ((0, 2), (1, 3), (4, 6), (5, 7))


def gen_hyperbolic_genus2(depth: int) -> IntrinsicMesh:
    """Genus-2 surface from the regular octagon with sides glued ``a b a^-1 b^-1 c d c^-1 d^-1``.

    The octagon is split into 16 triangles (centre, corner, side midpoint),
    refined ``depth`` times by geodesic midpoints, glued by the side-pairing
    isometries, and given hyperbolic edge lengths.
    """
    if not 1 <= depth <= 6:
        raise ValueError(f"hyperbolic depth must be in [1, 6], got {depth}")
    if 3 * 8 * 4**depth > MAX_EDGES:
        raise ValueError("hyperbolic mesh too large")
    corners = regular_octagon()
    pts: list[complex] = [0j] + corners
    mids = []
    for k in range(8):
        pts.append(disk_midpoint(corners[k], corners[(k + 1) % 8]))
        mids.append(len(pts) - 1)
    faces = []
    for k in range(8):
        faces += [(0, 1 + k, mids[k]), (0, mids[k], 1 + (k + 1) % 8)]
    # side membership of every point, carried through the refinement
    side_of: dict[int, set[int]] = {1 + k: {k, (k - 1) % 8} for k in range(8)}
    for k in range(8):
        side_of[mids[k]] = {k}

    for _ in range(depth):
        cache: dict[tuple[int, int], int] = {}

        def mid(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                pts.append(disk_midpoint(pts[a], pts[b]))
                cache[key] = len(pts) - 1
                shared = side_of.get(a, set()) & side_of.get(b, set())
                if shared:
                    side_of[cache[key]] = set(shared)
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new

    # lengths are computed before gluing, in the disk
    raw_len: dict[tuple[int, int], float] = {}
    for tri in faces:
        for k in range(3):
            a, b = tri[k], tri[(k + 1) % 3]
            key = (a, b) if a < b else (b, a)
            if key not in raw_len:
                raw_len[key] = disk_distance(pts[a], pts[b])

    parent = list(range(len(pts)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    on_side = {k: [p for p, s in side_of.items() if k in s] for k in range(8)}
    for s, t in _SIDE_PAIRS:
        g = disk_isometry(corners[s], corners[(s + 1) % 8], corners[(t + 1) % 8], corners[t])
        targets = on_side[t]
        tz = np.array([pts[q] for q in targets])
        for p in on_side[s]:
            z = g(pts[p])
            d = np.abs(tz - z)
            q = int(np.argmin(d))
            if d[q] > 1e-9:
                raise MeshError(f"side pairing failed to match point {p} (gap {d[q]:.2e})")
            ra, rb = find(p), find(targets[q])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    roots = sorted({find(p) for p in range(len(pts))})
    relabel = {r: i for i, r in enumerate(roots)}
    glued = [tuple(relabel[find(v)] for v in tri) for tri in faces]

    lengths: dict[tuple[int, int], float] = {}
    for (a, b), l in raw_len.items():
        i, j = relabel[find(a)], relabel[find(b)]
        key = (i, j) if i < j else (j, i)
        if key in lengths and abs(lengths[key] - l) > 1e-9 * max(1.0, l):
            raise MeshError(f"glued edge {key} has inconsistent lengths")
        lengths.setdefault(key, l)

    mesh = IntrinsicMesh.from_faces(
        len(roots),
        glued,
        lambda i, j: lengths[(i, j)],
        meta={"generator": "hyperbolic-genus2", "level": depth, "genus": 2, "recipe": f"hyperbolic-genus2:{depth}"},
    )
    if mesh.n_edges != 3 * mesh.n_faces // 2:
        raise MeshError("gluing produced a non-simplicial complex")
    return mesh
