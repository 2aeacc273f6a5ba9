"""Generalized symmetric eigensolver, clustering, Hodge decomposition, coclosed spectrum."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from .core import Basis, FieldVector, OperatorPair, operator_norm_estimate
from .discretization.dec import DECComplex

DENSE_LIMIT = 4000


class SolverError(RuntimeError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Eigenpairs ordered by |lambda| (or by lambda when ``signed``)."""

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    clusters: list[list[int]]
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    def cluster_of(self, i: int) -> int:
        for c, members in enumerate(self.clusters):
            if i in members:
                return c
        raise IndexError(i)

    def cluster_ids(self) -> np.ndarray:
        ids = np.empty(len(self.values), dtype=int)
        for c, members in enumerate(self.clusters):
            ids[members] = c
        return ids


def seed_from_label(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def cluster(values, gap_tol: float) -> list[list[int]]:
    """Greedy grouping of near-equal eigenvalues, returned as index lists.

    Neighbours in value order share a cluster when
    ``|l[i+1] - l[i]| <= gap_tol * max(1, |l[i]|)``.
    """
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        return []
    order = np.argsort(values, kind="stable")
    groups = [[int(order[0])]]
    for prev, cur in zip(order[:-1], order[1:]):
        if abs(values[cur] - values[prev]) <= gap_tol * max(1.0, abs(values[prev])):
            groups[-1].append(int(cur))
        else:
            groups.append([int(cur)])
    return [sorted(g) for g in groups]


def _mass_inverse(M: sp.spmatrix) -> Callable[[np.ndarray], np.ndarray]:
    M = sp.csc_matrix(M)
    D = M.diagonal()
    if (M - sp.diags(D)).nnz == 0:
        return lambda y: (y.T / D).T
    lu = splu(M)
    return lu.solve


def residual_norms(op: OperatorPair, values, vectors) -> np.ndarray:
    """``|K x - lambda M x|_{M^-1} / |x|_M`` for every column."""
    Minv = _mass_inverse(op.M)
    R = op.K @ vectors - (op.M @ vectors) * values
    num = np.sqrt(np.abs(np.einsum("ij,ij->j", R, Minv(R))))
    den = np.sqrt(np.abs(np.einsum("ij,ij->j", vectors, op.M @ vectors)))
    return num / den


def _fix_signs(V: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(V), axis=0)
    s = np.sign(V[idx, np.arange(V.shape[1])])
    s[s == 0] = 1.0
    return V * s


def _factorize(A: sp.csc_matrix):
    try:
        lu = splu(A)
    except RuntimeError:
        return None
    d = np.abs(lu.U.diagonal())
    if d.min() <= 1e-13 * d.max():
        return None
    return lu


def eig_lowest(
    op: OperatorPair,
    count: int,
    tol: float = 1e-8,
    seed_label: str | None = None,
    signed: bool = False,
    projector: Callable[[np.ndarray], np.ndarray] | None = None,
    gap_tol: float | None = None,
    dense_limit: int = DENSE_LIMIT,
) -> SpectrumResult:
    """The ``count`` eigenpairs of ``K x = lambda M x`` closest to zero.

    Shift-invert Lanczos (ARPACK) at shift 0, with the shift jittered by
    ``1e-6 * |K|`` when the factorization meets a zero pivot; a dense
    solve is used for small systems. ``projector`` restricts the search to
    an M-orthogonally complemented invariant subspace.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    n = op.dim
    label = seed_label or op.label
    norm = operator_norm_estimate(op.K, op.M)
    meta = {"label": label, "tol": tol, "norm_estimate": norm}
    if projector is None and n <= dense_limit:
        w, V = sla.eigh(op.K.toarray(), op.M.toarray())
        keep = np.argsort(np.abs(w), kind="stable")[: min(count, n)]
        values, vectors = w[keep], V[:, keep]
        meta.update(method="dense", shift=0.0, iterations=1)
    else:
        k = min(count, n - 2)
        K, M = op.K.tocsc(), op.M.tocsc()
        jitter = 1e-6 * norm
        lu, shift = None, 0.0
        for attempt, s in enumerate((0.0, -jitter, jitter, -2.0 * jitter)):
            lu = _factorize((K - s * M).tocsc())
            if lu is not None:
                shift = s
                break
        if lu is None:
            raise SolverError(f"{label}: factorization failed after 3 shift retries")
        solve = lu.solve if projector is None else (lambda y: projector(lu.solve(y)))
        OPinv = LinearOperator((n, n), matvec=solve, dtype=float)
        v0 = np.random.default_rng(seed_from_label(label)).standard_normal(n)
        if projector is not None:
            v0 = projector(v0)
        ncv = min(n, max(2 * k + 1, 24))
        try:
            w, V = eigsh(K, k=k, M=M, sigma=shift, which="LM", OPinv=OPinv, v0=v0, ncv=ncv,
                         tol=tol * 1e-3, maxiter=40 * k * n // ncv + 100)
        except ArpackNoConvergence as exc:
            raise SolverError(f"{label}: Lanczos did not converge", (exc.eigenvalues, exc.eigenvectors)) from None
        keep = np.argsort(np.abs(w), kind="stable")
        values, vectors = w[keep], V[:, keep]
        meta.update(method="shift-invert-lanczos", shift=shift, iterations=None, attempts=attempt + 1)
    if signed:
        order = np.argsort(values, kind="stable")
        values, vectors = values[order], vectors[:, order]
    vectors = _fix_signs(vectors)
    res = residual_norms(op, values, vectors)
    bound = tol * max(norm, 1.0)
    if np.any(res > bound):
        raise SolverError(f"{label}: residual {res.max():.2e} exceeds {bound:.2e}", (values, vectors))
    groups = cluster(values, 50.0 * tol if gap_tol is None else gap_tol)
    return SpectrumResult(values, vectors, res, groups, meta)


def m_orthogonality_defect(op: OperatorPair, spec: SpectrumResult, across_clusters: bool = True) -> float:
    """Largest |<x_i, x_j>_M| over pairs in distinct clusters (or all distinct pairs)."""
    G = spec.vectors.T @ (op.M @ spec.vectors)
    ids = spec.cluster_ids()
    mask = ids[:, None] != ids[None, :] if across_clusters else ~np.eye(len(ids), dtype=bool)
    return float(np.abs(G[mask]).max()) if mask.any() else 0.0


def kernel_dimension(spec: SpectrumResult, solver_tol: float | None = None) -> int:
    """Eigenvalues below ``1e-6`` times the first clearly nonzero one."""
    lam = np.sort(np.abs(spec.values))
    floor = max(1e-8 * spec.meta.get("norm_estimate", 1.0), 10.0 * (solver_tol or spec.meta.get("tol", 1e-8)))
    nonzero = lam[lam > floor]
    if len(nonzero) == 0:
        return len(lam)
    return int(np.sum(lam < 1e-6 * nonzero[0]))


# -- Hodge decomposition -------------------------------------------------


def hodge_decompose(dec: DECComplex, omega: FieldVector) -> tuple[FieldVector, FieldVector, FieldVector]:
    """Split a whitney-edge 1-form into exact, coexact and harmonic parts."""
    if omega.basis is not Basis.EDGE:
        raise ValueError("hodge_decompose needs a whitney-edge field")
    w = omega.coeffs
    exact = dec.exact_part(w)
    coexact = dec.coexact_part(w)
    harmonic = w - exact - coexact
    mk = lambda c: FieldVector(Basis.EDGE, c, omega.handle)  # noqa: E731
    return mk(exact), mk(coexact), mk(harmonic)


def harmonic_basis(dec: DECComplex, seed: int = 0) -> np.ndarray:
    """M1-orthonormal basis of discrete harmonic 1-forms (columns)."""
    mesh = dec.mesh
    b1 = 2 - mesh.euler_characteristic
    if b1 == 0:
        return np.zeros((mesh.n_edges, 0))
    rng = np.random.default_rng(seed)
    cols = []
    for _ in range(b1 + 2):
        w = rng.standard_normal(mesh.n_edges)
        cols.append(w - dec.exact_part(w) - dec.coexact_part(w))
    H = np.array(cols).T
    # M1-orthonormalize and keep the b1 dominant directions
    G = H.T @ (dec.M1 @ H)
    s, U = np.linalg.eigh(G)
    top = np.argsort(s)[::-1][:b1]
    B = H @ (U[:, top] / np.sqrt(s[top]))
    return _fix_signs(B)


def codifferential_norm(dec: DECComplex, omega: np.ndarray) -> float:
    """``|delta omega|`` in the lumped 0-form norm."""
    r = dec.d0.T @ (dec.M1 @ omega)
    return math.sqrt(float(r @ (r / dec.mesh.vertex_areas)))


def coclosed_spectrum(dec: DECComplex, count: int, tol: float = 1e-8, gap_tol: float | None = None) -> SpectrumResult:
    """Lowest eigenpairs of the Hodge Laplacian restricted to coclosed 1-forms."""
    spec = eig_lowest(
        dec.hodge_L1, count, tol, seed_label="coclosed", projector=dec.project_coclosed, gap_tol=gap_tol
    )
    M1 = dec.M1
    ratios = [
        codifferential_norm(dec, spec.vectors[:, i]) / math.sqrt(float(spec.vectors[:, i] @ (M1 @ spec.vectors[:, i])))
        for i in range(len(spec))
    ]
    spec.meta["codifferential_ratio"] = float(max(ratios)) if ratios else 0.0
    return spec
