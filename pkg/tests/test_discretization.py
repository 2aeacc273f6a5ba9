import math

import numpy as np
import pytest

from symlap.core import Basis, FieldVector, global_inner, pointwise_norms
from symlap.discretization.connection import build_connection, wrap_angle
from symlap.discretization.dec import assemble_dec, incidence
from symlap.discretization.mesh import IntrinsicMesh, MeshError, require_valid, validate_mesh
from symlap.discretization.operators import (
    assemble_bochner,
    assemble_hodge_vec,
    assemble_ric_op,
    assemble_yano,
    curvature,
    divergence,
    quadratic_form_identity,
    resample,
    sym_gradient,
    vector_spaces,
)
from symlap.models.fields import height_gradient, rotation_field, torus_parallel_field, torus_parallel_form
from symlap.models.meshgen import gen_icosphere
from symlap.spectral import eig_lowest, harmonic_basis, kernel_dimension

# -- mesh validation --------------------------------------------------------------


def test_icosphere_validates(ico2):
    assert validate_mesh(ico2) == []
    assert require_valid(ico2) is ico2


def test_degenerate_triangle_is_reported(ico2):
    idx, _ = ico2.face_edges
    e0, e1, e2 = idx[0]
    lengths = ico2.lengths.copy()
    lengths[e0] = lengths[e1] + lengths[e2]
    bad = IntrinsicMesh(ico2.n_vertices, ico2.faces, ico2.edges, lengths)
    issues = validate_mesh(bad)
    assert any(i["kind"] == "triangle-inequality" and i["index"] == 0 for i in issues)
    with pytest.raises(MeshError):
        require_valid(bad)


def test_boundary_edge_is_reported(ico2):
    open_mesh = IntrinsicMesh.from_positions(ico2.positions, ico2.faces[1:])
    kinds = {i["kind"] for i in validate_mesh(open_mesh)}
    assert "non-closed" in kinds


def test_flipped_face_is_reported(ico2):
    faces = ico2.faces.copy()
    faces[0] = faces[0, ::-1]
    kinds = {i["kind"] for i in validate_mesh(IntrinsicMesh.from_positions(ico2.positions, faces))}
    assert "orientation" in kinds


def test_disconnected_mesh_is_reported():
    a = gen_icosphere(0)
    faces = np.vstack([a.faces, a.faces + a.n_vertices])
    pos = np.vstack([a.positions, a.positions + 5.0])
    kinds = {i["kind"] for i in validate_mesh(IntrinsicMesh.from_positions(pos, faces))}
    assert kinds == {"disconnected"}


# -- curvature --------------------------------------------------------------------


def test_torus_curvature_is_exactly_zero(torus8):
    c = curvature(torus8)
    assert np.all(c.K == 0.0)
    assert c.r == 0.0 and c.rho == 0.0


def test_icosphere_curvature_range(ico4):
    c = curvature(ico4)
    assert c.K.min() >= 0.98 and c.K.max() <= 1.02
    assert c.rho == pytest.approx(1.0, abs=0.02)
    assert c.r == 0.0


def test_hyperbolic_curvature_range(hyp4):
    c = curvature(hyp4)
    assert c.K.min() >= -1.05 and c.K.max() <= -0.95
    assert c.rho == 0.0
    assert 0.95 <= c.r <= 1.05


@pytest.mark.parametrize("name", ["ico2", "torus8", "hyp2"])
def test_total_curvature_is_two_pi_chi(name, request):
    m = request.getfixturevalue(name)
    c = curvature(m)
    assert float(np.sum(c.K * c.area)) == pytest.approx(2 * math.pi * m.euler_characteristic, abs=1e-9)


# -- DEC complex ------------------------------------------------------------------


@pytest.mark.parametrize("name", ["ico2", "torus8", "hyp2"])
def test_coboundary_squares_to_zero_exactly(name, request):
    d0, d1 = incidence(request.getfixturevalue(name))
    assert d0.dtype.kind == "i" and d1.dtype.kind == "i"
    assert (d1 @ d0).count_nonzero() == 0


@pytest.mark.parametrize("name,b1", [("torus8", 2), ("ico2", 0), ("hyp2", 4)])
def test_dec_kernel_dimension_equals_betti(name, b1, request):
    m = request.getfixturevalue(name)
    dec = assemble_dec(m)
    spec = eig_lowest(dec.hodge_L1, 8, 1e-8, "hodge_L1")
    assert kernel_dimension(spec, 1e-8) == b1 == 2 - m.euler_characteristic


def test_dec_operators_are_symmetric(ico2):
    op = assemble_dec(ico2).hodge_L1
    assert abs(op.K - op.K.T).max() <= 1e-12 * abs(op.K).max()
    assert op.mass_is_positive_definite()


# -- connection -------------------------------------------------------------------


def test_flat_torus_holonomy_vanishes(torus8):
    assert np.allclose(build_connection(torus8).vertex_holonomy(), 0.0, atol=1e-12)


def test_icosahedron_holonomy_is_pi_over_three():
    m = gen_icosphere(0)
    hol = build_connection(m).vertex_holonomy()
    assert np.allclose(hol, math.pi / 3, atol=1e-12)


@pytest.mark.parametrize("name", ["ico3", "hyp2", "torus8"])
def test_holonomy_equals_angle_defect(name, request):
    m = request.getfixturevalue(name)
    hol = build_connection(m).vertex_holonomy()
    assert np.max(np.abs(wrap_angle(hol - m.angle_defects))) <= 1e-10


def test_transport_of_reversed_edge_is_inverse(ico2):
    conn = build_connection(ico2)
    for i, j in ico2.edges[:50].tolist():
        assert abs(wrap_angle(conn.transport(i, j) + conn.transport(j, i))) <= 1e-12


# -- vector operators ---------------------------------------------------------------


def test_operators_are_symmetric_with_definite_mass(hyp2):
    for op in (assemble_bochner(hyp2), assemble_ric_op(hyp2), assemble_yano(hyp2), assemble_hodge_vec(hyp2)):
        assert abs(op.K - op.K.T).max() <= 1e-12 * abs(op.K).max()
        assert op.mass_is_positive_definite()


def test_flat_torus_bochner_kernel_and_yano_equality(torus8):
    B, Y, R = assemble_bochner(torus8), assemble_yano(torus8), assemble_ric_op(torus8)
    assert R.K.count_nonzero() == 0
    assert (B.K != Y.K).nnz == 0
    spec = eig_lowest(B, 4, 1e-10, "bochner")
    assert kernel_dimension(spec, 1e-10) == 2


def test_bochner_lowest_on_sphere_and_semidefinite(ico4):
    B = assemble_bochner(ico4)
    spec = eig_lowest(B, 4, 1e-8, "bochner", signed=True)
    assert spec.values[0] == pytest.approx(1.0, rel=0.05)
    assert spec.values.min() >= -1e-10 * spec.meta["norm_estimate"]


def test_ricci_operator_on_sphere_and_hyperbolic(ico4, hyp4):
    sphere = assemble_ric_op(ico4)
    ratio = sphere.K.diagonal() / sphere.M.diagonal()
    assert ratio.min() >= 0.98 and ratio.max() <= 1.02
    hyperbolic = assemble_ric_op(hyp4)
    ratio = hyperbolic.K.diagonal() / hyperbolic.M.diagonal()
    assert ratio.min() >= -1.05 and ratio.max() <= -0.95


def test_yano_sphere_spectrum_gap(ctx_ico4):
    vals = np.sort(ctx_ico4.yano_spectrum.values)
    assert np.sum(np.abs(vals) <= 0.5) == 6
    assert np.all(vals[np.abs(vals) > 0.5] >= 3.5)


def test_yano_hyperbolic_lowest_is_two(ctx_hyp4):
    assert ctx_hyp4.yano_spectrum.values.min() == pytest.approx(2.0, rel=0.05)


def test_hodge_vec_torus_first_nonzero(ctx_torus64):
    vals = np.sort(ctx_torus64.hodge_vec_spectrum.values)
    assert np.all(np.abs(vals[:2]) <= 1e-8 * ctx_torus64.hodge_vec_spectrum.meta["norm_estimate"])
    assert vals[2] == pytest.approx(4 * math.pi**2, rel=0.02)
    dec_vals = np.sort(ctx_torus64.dec_spectrum.values)
    assert dec_vals[2] == pytest.approx(4 * math.pi**2, rel=0.02)


def test_hodge_vec_sphere_lowest(ctx_ico4):
    assert np.sort(ctx_ico4.hodge_vec_spectrum.values)[0] == pytest.approx(2.0, rel=0.02)


def test_backends_agree_and_improve_under_refinement(ico3, ico4):
    gaps = []
    for m in (ico3, ico4):
        hv = np.sort(eig_lowest(assemble_hodge_vec(m), 10, 1e-8, "hv").values)
        dl = np.sort(eig_lowest(assemble_dec(m).hodge_L1, 10, 1e-8, "dl").values)
        gaps.append(float(np.max(np.abs(hv - dl) / np.abs(dl))))
    assert gaps[1] <= 0.05
    assert gaps[1] < gaps[0]


# -- symmetric gradient ------------------------------------------------------------


def _traceless_norms(S):
    s = S.coeffs.reshape(-1, 3)
    half = 0.5 * (s[:, 0] + s[:, 2])
    return (s[:, 0] - half) ** 2 + 2 * s[:, 1] ** 2 + (s[:, 2] - half) ** 2, half


def test_killing_symmetric_gradient_is_small_and_converges(ico3, ico4):
    peaks, divs = [], []
    for m in (ico3, ico4):
        conn = build_connection(m)
        S, delta = sym_gradient(m, conn, rotation_field(m, conn=conn))
        peaks.append(pointwise_norms(S).max())
        divs.append(np.abs(delta.coeffs).max())
    assert peaks[1] <= 0.02
    assert peaks[1] < peaks[0] / 3.5
    assert divs[1] <= 0.01 and divs[1] < divs[0]


@pytest.mark.xfail(strict=True, reason="measured 1.29e-3 at level 4; the 5e-4 bound is first met at level 5")
def test_killing_symmetric_gradient_pointwise_bound_level_four(ico4):
    conn = build_connection(ico4)
    S, _ = sym_gradient(ico4, conn, rotation_field(ico4, conn=conn))
    assert pointwise_norms(S).max() <= 5e-4


@pytest.mark.slow
def test_killing_symmetric_gradient_pointwise_bound_level_five():
    m = gen_icosphere(5)
    conn = build_connection(m)
    S, _ = sym_gradient(m, conn, rotation_field(m, conn=conn))
    assert pointwise_norms(S).max() <= 5e-4


def test_conformal_gradient_trace_part(ico4):
    conn = build_connection(ico4)
    S, delta = sym_gradient(ico4, conn, height_gradient(ico4, conn=conn))
    z = ico4.positions[ico4.faces, 2].mean(axis=1)
    _, half = _traceless_norms(S)
    # Hess z = -z g on the unit sphere, so delta* dz = -2 z g and delta dz = 2 z
    assert np.max(np.abs(half + 2 * z)) <= 0.01
    assert np.max(np.abs(delta.coeffs - 2 * z)) <= 0.01


@pytest.mark.xfail(strict=True, reason="measured 1.37e-3 at level 4; the 5e-4 bound is first met at level 5")
def test_conformal_gradient_traceless_bound_level_four(ico4):
    conn = build_connection(ico4)
    S, _ = sym_gradient(ico4, conn, height_gradient(ico4, conn=conn))
    assert _traceless_norms(S)[0].max() <= 5e-4


@pytest.mark.slow
def test_conformal_gradient_traceless_bound_level_five():
    m = gen_icosphere(5)
    conn = build_connection(m)
    S, _ = sym_gradient(m, conn, height_gradient(m, conn=conn))
    assert _traceless_norms(S)[0].max() <= 5e-4


def test_pointwise_trace_inequality_on_random_fields(hyp2):
    conn = build_connection(hyp2)
    rng = np.random.default_rng(11)
    for _ in range(1000 // 50):
        for x in rng.standard_normal((50, 2 * hyp2.n_vertices)):
            S, d = sym_gradient(hyp2, conn, FieldVector(Basis.VERTEX_TANGENT, x, hyp2))
            sym = pointwise_norms(S)
            assert np.min(sym - 2 * d.coeffs**2) >= -1e-12 * sym.max()


def test_sym_gradient_rejects_edge_fields(torus8):
    with pytest.raises(Exception):
        sym_gradient(torus8, build_connection(torus8), torus_parallel_form(torus8))


def test_divergence_of_height_gradient(ico4):
    conn = build_connection(ico4)
    div = divergence(ico4, conn, height_gradient(ico4, conn=conn))
    assert np.max(np.abs(div.coeffs + 2 * ico4.positions[:, 2])) <= 0.02


# -- quadratic-form identity ---------------------------------------------------------


def test_quadratic_identity_for_killing_field(ico4):
    conn = build_connection(ico4)
    w = rotation_field(ico4, conn=conn)
    norm = global_inner(w, w, vector_spaces(ico4)[Basis.VERTEX_TANGENT])
    lhs, rhs, _ = quadratic_form_identity(ico4, w, conn)
    assert abs(lhs) <= 1e-3 * norm and abs(rhs) <= 1e-3 * norm


def test_quadratic_identity_for_hyperbolic_harmonic_form(ctx_hyp4):
    H = harmonic_basis(ctx_hyp4.dec)
    x = resample(FieldVector(Basis.EDGE, H[:, 0], ctx_hyp4.mesh), Basis.VERTEX_TANGENT)
    norm = global_inner(x, x, vector_spaces(ctx_hyp4.mesh)[Basis.VERTEX_TANGENT])
    lhs, rhs, gap = quadratic_form_identity(ctx_hyp4.mesh, x, ctx_hyp4.conn, ctx_hyp4.yano)
    assert lhs == pytest.approx(2 * norm, rel=0.05)
    assert rhs == pytest.approx(2 * norm, rel=0.05)
    assert gap <= 0.05


def test_quadratic_identity_gap_halves_under_refinement(ctx_ico3, ctx_ico4):
    from symlap.verify.theorems import lemma_gaps

    coarse, fine = lemma_gaps(ctx_ico3).max(), lemma_gaps(ctx_ico4).max()
    assert fine <= 0.05
    assert fine <= coarse / 2


# -- resampling ---------------------------------------------------------------------


def test_resample_zero_field(ico2):
    z = FieldVector(Basis.VERTEX_TANGENT, np.zeros(2 * ico2.n_vertices), ico2)
    e = resample(z, Basis.EDGE)
    assert not np.any(e.coeffs)
    assert not np.any(resample(e, Basis.VERTEX_TANGENT).coeffs)


@pytest.mark.parametrize("name", ["torus8", "torus64"])
def test_parallel_field_round_trip_exact(name, request):
    m = request.getfixturevalue(name)
    for direction in ((1.0, 0.0), (0.6, -0.8)):
        xi = torus_parallel_field(m, direction)
        back = resample(resample(xi, Basis.EDGE), Basis.VERTEX_TANGENT)
        assert np.max(np.abs(back.coeffs - xi.coeffs)) <= 1e-10
        assert np.allclose(pointwise_norms(back), 1.0, atol=1e-10)


def test_parallel_form_to_vertex_basis(torus8):
    xi = resample(torus_parallel_form(torus8, (0.0, 1.0)), Basis.VERTEX_TANGENT)
    assert np.allclose(pointwise_norms(xi), 1.0, atol=1e-10)


def test_smooth_field_round_trip(ctx_ico4):
    M = ctx_ico4.yano.M
    X = ctx_ico4.smooth_fields(10)
    for x in X.T:
        f = FieldVector(Basis.VERTEX_TANGENT, x, ctx_ico4.mesh)
        y = resample(resample(f, Basis.EDGE), Basis.VERTEX_TANGENT).coeffs
        assert math.sqrt((x - y) @ (M @ (x - y))) <= 0.05 * math.sqrt(x @ (M @ x))


def test_resampled_harmonic_forms_have_yano_quotient_two(ctx_hyp4):
    H = harmonic_basis(ctx_hyp4.dec)
    assert H.shape[1] == 4
    for h in H.T:
        x = resample(FieldVector(Basis.EDGE, h, ctx_hyp4.mesh), Basis.VERTEX_TANGENT).coeffs
        q = ctx_hyp4.yano.quadratic(x) / float(x @ (ctx_hyp4.yano.M @ x))
        assert q == pytest.approx(2.0, rel=0.05)


def test_resample_rejects_unsupported_bases(ico2):
    f = FieldVector(Basis.P1, np.zeros(ico2.n_vertices), ico2)
    with pytest.raises(Exception):
        resample(f, Basis.EDGE)
