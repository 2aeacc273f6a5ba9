"""Per-manifold cache of assembled operators and spectra used by the checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np

from ..core import ManifoldDescriptor
from ..discretization.connection import build_connection
from ..discretization.dec import assemble_dec
from ..discretization.mesh import IntrinsicMesh, require_valid
from ..discretization.operators import (
    assemble_bochner,
    assemble_hodge_vec,
    assemble_ric_op,
    assemble_yano,
    curvature,
    divergence_gram,
)
from ..models.meshgen import MeshRecipe
from ..spectral import coclosed_spectrum, eig_lowest, kernel_dimension

# finest resolution of each generator in the default suite; one level below
# it the equality tolerances are widened
DEFAULT_LEVELS = {"icosphere": 4, "torus-grid": 64, "hyperbolic-genus2": 4}


@dataclass(frozen=True)
class Thresholds:
    """Tolerances of the theorem suite.

    Eigenvalue-valued quantities are measured in units of ``4 pi / area``,
    which is 1 on the unit sphere and scales like curvature, so the
    thresholds below do not depend on the size of the surface.
    """

    kernel_band: float = 0.5
    class_residual: float = 0.05
    equality: float = 0.05
    coarse_equality: float = 0.1
    cluster_gap: float = 0.05
    lemma_gap: float = 0.05
    flat_lemma_gap: float = 1e-3
    orthogonality: float = 1e-8
    pointwise: float = 1e-12
    einstein: float = 0.05

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"threshold {name} must be positive")

    def as_dict(self) -> dict:
        return asdict(self)


class ManifoldContext:
    """Lazily assembled operators and spectra of one mesh."""

    def __init__(
        self,
        mesh: IntrinsicMesh,
        tol: float = 1e-8,
        count: int = 12,
        thresholds: Thresholds | None = None,
        name: str | None = None,
        seed_label: str = "",
    ):
        self.mesh = require_valid(mesh)
        self.tol = tol
        self.count = count
        self.thresholds = thresholds or Thresholds()
        self.name = name or mesh.meta.get("recipe", "mesh")
        self.seed_label = seed_label
        self.n = 2

    def _seed(self, label: str) -> str:
        return f"{self.seed_label}/{label}" if self.seed_label else label

    @classmethod
    def from_recipe(cls, recipe: str | MeshRecipe, **kwargs) -> "ManifoldContext":
        recipe = MeshRecipe.parse(recipe) if isinstance(recipe, str) else recipe
        return cls(recipe.build(), name=str(recipe), **kwargs)

    @cached_property
    def recipe(self) -> MeshRecipe | None:
        text = self.mesh.meta.get("recipe")
        try:
            return MeshRecipe.parse(text) if text else None
        except ValueError:
            return None

    @cached_property
    def descriptor(self) -> ManifoldDescriptor:
        return ManifoldDescriptor.from_mesh(self.mesh)

    @property
    def generator(self) -> str | None:
        return self.mesh.meta.get("generator")

    @cached_property
    def equality_tol(self) -> float:
        r = self.recipe
        if r is not None and r.generator in DEFAULT_LEVELS and r.level < DEFAULT_LEVELS[r.generator]:
            return self.thresholds.coarse_equality
        return self.thresholds.equality

    @cached_property
    def lam_scale(self) -> float:
        return 4.0 * math.pi / float(self.mesh.face_areas.sum())

    @cached_property
    def conn(self):
        return build_connection(self.mesh)

    @cached_property
    def curv(self):
        return curvature(self.mesh)

    @cached_property
    def dec(self):
        return assemble_dec(self.mesh)

    @cached_property
    def bochner(self):
        return assemble_bochner(self.mesh, self.conn)

    @cached_property
    def ric(self):
        return assemble_ric_op(self.mesh, self.curv)

    @cached_property
    def yano(self):
        return assemble_yano(self.mesh, self.conn)

    @cached_property
    def hodge_vec(self):
        return assemble_hodge_vec(self.mesh, self.conn)

    @cached_property
    def div_gram(self):
        return divergence_gram(self.mesh, self.conn)

    @property
    def cluster_gap(self) -> float:
        return self.thresholds.cluster_gap

    @cached_property
    def yano_spectrum(self):
        return eig_lowest(self.yano, self.count, self.tol, self._seed("yano"), gap_tol=self.cluster_gap)

    @cached_property
    def hodge_vec_spectrum(self):
        return eig_lowest(self.hodge_vec, self.count, self.tol, self._seed("hodge_vec"), gap_tol=self.cluster_gap)

    @cached_property
    def dec_spectrum(self):
        return eig_lowest(self.dec.hodge_L1, self.count, self.tol, self._seed("hodge_L1"), gap_tol=self.cluster_gap)

    @cached_property
    def coclosed(self):
        return coclosed_spectrum(self.dec, min(self.count, 8), self.tol, gap_tol=self.cluster_gap)

    @cached_property
    def b1(self) -> int:
        """First Betti number read off the DEC kernel."""
        return kernel_dimension(self.dec_spectrum, self.tol)

    @property
    def b1_topological(self) -> int:
        return 2 - self.mesh.euler_characteristic

    @property
    def test_basis(self) -> np.ndarray:
        """M-orthonormal low Yano modes used for weak residuals."""
        return self.yano_spectrum.vectors

    def smooth_fields(self, count: int = 20, modes: int = 30, seed: int = 0) -> np.ndarray:
        """Random combinations of the lowest Bochner modes (columns)."""
        spec = eig_lowest(self.bochner, modes, self.tol, seed_label=self._seed("smooth"))
        rng = np.random.default_rng(seed)
        return spec.vectors @ rng.standard_normal((spec.vectors.shape[1], count))

    def summary(self) -> dict:
        m = self.mesh
        return {
            "name": self.name,
            "kind": self.descriptor.kind.value,
            "dimension": self.n,
            "vertices": m.n_vertices,
            "edges": m.n_edges,
            "faces": m.n_faces,
            "euler_characteristic": m.euler_characteristic,
            "area": float(m.face_areas.sum()),
            "curvature_min": float(self.curv.K.min()),
            "curvature_max": float(self.curv.K.max()),
            "equality_tolerance": self.equality_tol,
        }
