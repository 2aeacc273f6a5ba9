import math

import numpy as np
import pytest

from symlap.core import Basis, FieldVector
from symlap.discretization.operators import resample
from symlap.models.fields import height_gradient, rotation_field
from symlap.spectral import harmonic_basis
from symlap.verify import (
    THEOREM_IDS,
    ManifoldContext,
    TheoremReport,
    Thresholds,
    check_corollary,
    check_lemma,
    check_S3_signs,
    check_T2,
    check_T3,
    check_T4,
    check_T5,
    check_T6,
    classify,
    classify_spectrum,
    full_report,
    killing_number,
)


def _normalized(ctx, fv):
    x = fv.coeffs
    return fv.with_coeffs(x / math.sqrt(float(x @ (ctx.yano.M @ x))))


def _by_id(reports):
    return {r.id: r for r in reports}


# -- classification ------------------------------------------------------------------


def test_rotation_field_carries_all_killing_tags(ctx_ico4):
    w = _normalized(ctx_ico4, rotation_field(ctx_ico4.mesh, conn=ctx_ico4.conn))
    c = classify(w, 0.0, ctx_ico4)
    assert {"killing", "iht", "conformal-killing", "projective-killing"} <= c.tags
    assert "harmonic" not in c.tags
    assert c.kind == "killing"


def test_conformal_gradient_is_not_killing(ctx_ico4):
    w = _normalized(ctx_ico4, height_gradient(ctx_ico4.mesh, conn=ctx_ico4.conn))
    c = classify(w, 0.0, ctx_ico4)
    assert {"iht", "conformal-killing"} <= c.tags
    assert "killing" not in c.tags and "projective-killing" not in c.tags
    assert c.residuals["divergence"] == pytest.approx(math.sqrt(2), rel=0.02)


def test_hyperbolic_harmonic_form_is_only_harmonic(ctx_hyp4):
    h = harmonic_basis(ctx_hyp4.dec)[:, 0]
    w = _normalized(ctx_hyp4, resample(FieldVector(Basis.EDGE, h, ctx_hyp4.mesh), Basis.VERTEX_TANGENT))
    assert classify(w, 2.0, ctx_hyp4).tags == frozenset({"harmonic"})


def test_classify_rejects_unnormalized_and_wrong_basis(ctx_ico4):
    w = rotation_field(ctx_ico4.mesh, conn=ctx_ico4.conn)
    with pytest.raises(ValueError):
        classify(w.with_coeffs(3.0 * w.coeffs), 0.0, ctx_ico4)
    edge = resample(_normalized(ctx_ico4, w), Basis.EDGE)
    with pytest.raises(ValueError):
        classify(edge, 0.0, ctx_ico4)


def test_spectrum_classification_splits_sphere_kernel(ctx_ico4):
    pairs = classify_spectrum(ctx_ico4)
    kinds = [p.classification.kind for p in pairs if abs(p.value) <= 0.5]
    assert sorted(kinds) == ["conformal-gradient"] * 3 + ["killing"] * 3
    for p in pairs:
        if "killing" in p.classification.tags:
            assert "iht" in p.classification.tags


def test_classification_is_reproducible(ctx_ico4):
    a = [p.classification.to_dict() for p in classify_spectrum(ctx_ico4)]
    b = [p.classification.to_dict() for p in classify_spectrum(ctx_ico4)]
    assert a == b
    for d in a:
        th = d["thresholds"]
        assert set(d["tags"]) == {t for t in th if d["residuals"][t] <= th[t]}


@pytest.mark.parametrize("fixture,expected", [("ctx_ico4", 3), ("ctx_torus64", 2), ("ctx_hyp4", 0)])
def test_killing_number(fixture, expected, request):
    ctx = request.getfixturevalue(fixture)
    assert killing_number(ctx) == expected <= 3


# -- individual checks ------------------------------------------------------------------


def test_lemma_passes_on_sphere_with_refinement(ctx_ico4, ctx_ico3):
    r = check_lemma(ctx_ico4, coarse=ctx_ico3)
    assert r.status == "pass"
    assert r.measured["max_gap"] < r.measured["coarse_max_gap"]


def test_lemma_on_flat_torus(ctx_torus64):
    r = check_lemma(ctx_torus64)
    assert r.status == "pass" and r.measured["max_gap"] <= 1e-3


def test_lemma_miscalibrated_sentinel_fails(ctx_ico4, ctx_ico3):
    assert check_lemma(ctx_ico4, symgrad_scale=0.5, coarse=ctx_ico3).status == "fail"


def test_spectrum_structure_on_hyperbolic(ctx_hyp4):
    r = _by_id(check_T2(ctx_hyp4))
    assert r["T2.1"].status == "pass"
    assert r["T2.1"].measured["lambda_min"] == pytest.approx(2.0, rel=0.05)
    assert r["T2.1"].measured["r"] == pytest.approx(1.0, abs=0.05)
    assert all(r[i].status == "pass" for i in ("T2.2", "T2.3", "EQ41"))


def test_spectrum_structure_on_sphere_skips_negative_part(ctx_ico4):
    r = _by_id(check_T2(ctx_ico4))
    assert r["T2.1"].status == "skipped"
    assert r["T2.2"].status == r["T2.3"].status == "pass"


def test_cross_cluster_orthogonality_on_torus(ctx_torus64):
    r = _by_id(check_T2(ctx_torus64))["T2.3"]
    assert r.status == "pass" and r.measured["cross_cluster_inner"] <= 1e-8


@pytest.mark.parametrize("fixture", ["ctx_ico4", "ctx_torus64", "ctx_hyp4"])
def test_nonnegativity_check(fixture, request):
    r = check_T3(request.getfixturevalue(fixture))
    assert r.status == "pass"
    assert r.measured["pointwise_min"] >= -1e-12


def test_einstein_branches(ctx_ico4, ctx_hyp4, ctx_torus64):
    sphere = _by_id(check_T4(ctx_ico4))
    assert sphere["T4.1"].status == "pass" and sphere["T4.2"].status == "skipped"
    assert sphere["T4.1"].measured["hodge_dimension"] == 6
    hyper = _by_id(check_T4(ctx_hyp4))
    assert hyper["T4.1"].status == "skipped" and hyper["T4.2"].status == "pass"
    assert hyper["T4.2"].measured["yano_cluster_dimension"] == 4
    flat = check_T4(ctx_torus64)
    assert [r.status for r in flat] == ["skipped", "skipped"]


def test_non_einstein_mesh_is_skipped(ctx_ico4):
    strict = ManifoldContext(ctx_ico4.mesh, thresholds=Thresholds(einstein=1e-6))
    assert [r.status for r in check_T4(strict)] == ["skipped", "skipped"]


def test_negative_curvature_bound(ctx_hyp4, ctx_ico4):
    r = check_T5(ctx_hyp4)
    assert r.status == "pass" and r.measured["equality"]
    assert r.measured["cluster_size"] == 4 == r.measured["b1"]
    assert check_T5(ctx_ico4).status == "skipped"


def test_negative_curvature_bound_scales_with_metric():
    ctx = ManifoldContext.from_recipe(f"hyperbolic-genus2:4:{math.sqrt(2)!r}")
    r = check_T5(ctx)
    assert r.status == "pass"
    assert r.measured["r"] == pytest.approx(0.5, rel=0.05)
    assert r.measured["lambda1"] == pytest.approx(1.0, rel=0.05)


def test_scale_covariance(ctx_hyp4):
    c = math.sqrt(2)
    scaled = ManifoldContext(ctx_hyp4.mesh.scaled(c))
    a, b = np.sort(ctx_hyp4.yano_spectrum.values), np.sort(scaled.yano_spectrum.values)
    assert np.allclose(b * c**2, a, rtol=1e-8)


def test_hyperbolic_band_multiplicity(ctx_hyp4, ctx_ico4):
    r = check_corollary(ctx_hyp4)
    assert r.status == "pass" and r.measured["multiplicity"] == 4 and r.measured["below_band"] == 0
    assert check_corollary(ctx_ico4).status == "skipped"


def test_hyperbolic_band_coarse_level_uses_wider_tolerance():
    ctx = ManifoldContext.from_recipe("hyperbolic-genus2:3")
    assert ctx.equality_tol == 0.1
    assert check_corollary(ctx).status == "pass"


def test_coclosed_bound_on_sphere(ctx_ico4, ctx_hyp4):
    r = check_T6(ctx_ico4)
    assert r.status == "pass" and r.measured["equality"]
    assert r.measured["mu1"] == pytest.approx(2.0, rel=0.02)
    assert r.measured["multiplicity"] == 3 == r.measured["killing_number"]
    assert check_T6(ctx_hyp4).status == "skipped"


def test_coclosed_bound_on_larger_sphere():
    r = check_T6(ManifoldContext.from_recipe("icosphere:4:2"))
    assert r.status == "pass"
    assert r.measured["rho"] == pytest.approx(0.25, rel=0.02)
    assert r.measured["mu1"] == pytest.approx(0.5, rel=0.02)


def test_sign_results(ctx_ico4):
    conf, proj = check_S3_signs([ctx_ico4])
    assert conf.status == "pass" and proj.status == "pass"
    assert len(conf.measured["mesh_conformal_lambdas"]) >= 6
    assert all(v <= 0.5 for v in conf.measured["mesh_conformal_lambdas"])


# -- reports ----------------------------------------------------------------------------


def test_report_validates_ids_and_statuses():
    with pytest.raises(ValueError):
        TheoremReport("T9", "pass")
    with pytest.raises(ValueError):
        TheoremReport("T3", "maybe")
    assert TheoremReport("T3", "skipped").ok


def test_empty_manifold_set_gives_empty_report():
    rep = full_report([])
    assert rep.checks == [] and rep.exit_code == 0


def test_torus_only_report(ctx_torus64):
    rep = full_report([ctx_torus64])
    status = {c.id: c.status for c in rep.checks}
    assert set(status) == set(THEOREM_IDS)
    for cid in ("T5", "T6", "COR", "T2.1", "T4.1", "T4.2"):
        assert status[cid] == "skipped"
    assert all(s in ("pass", "skipped") for s in status.values())
    assert rep.exit_code == 0
    doc = rep.document({"manifolds": ["torus-grid:64"]})
    assert set(doc) >= {"config", "manifolds", "spectra", "checks"}
    assert {"id", "status", "measured", "tolerance", "notes"} <= set(doc["checks"][0])


def test_solver_failure_is_reported_as_error_not_fail():
    rep = full_report(["torus-grid:8"], tol=1e-30)
    status = {c.id: c.status for c in rep.checks}
    assert status["T2.3"] == "error" and status["EQ41"] == "error"
    assert "fail" not in status.values()
    assert rep.exit_code == 2
