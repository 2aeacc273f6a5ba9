import json

import pytest
import scipy.io

from symlap.cli import RunConfig, run
from symlap.io import config_checksum, read_mesh, read_spectrum_csv
from symlap.verify import THEOREM_IDS, Thresholds


@pytest.fixture(scope="module")
def ico_mesh(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "ico.json"
    assert run(["gen", "icosphere:3", "-o", str(path)]) == 0
    return path


def test_gen_torus_64(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert run(["gen", "torus-grid:64", "-o", str(out)]) == 0
    assert read_mesh(out).n_vertices == 4096
    doc = json.loads(out.read_text())
    assert doc["vertices"] == 4096 and "provenance" in doc and len(doc["edge_lengths"]) == 12288
    assert "V=4096" in capsys.readouterr().out


def test_gen_rejects_bad_recipe(tmp_path, capsys):
    assert run(["gen", "dodecahedron:2", "-o", str(tmp_path / "x.json")]) == 2
    assert "dodecahedron" in capsys.readouterr().err


def test_unknown_subcommand_prints_usage(capsys):
    assert run(["frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_exits_two(capsys, ico_mesh, tmp_path):
    assert run(["spectrum", str(ico_mesh), "--bogus", "-o", str(tmp_path / "s.csv")]) == 2
    assert "usage" in capsys.readouterr().err


def test_missing_mesh_file(tmp_path, capsys):
    assert run(["spectrum", str(tmp_path / "missing.json"), "--op", "yano", "-o", str(tmp_path / "s.csv")]) == 2
    assert "missing.json" in capsys.readouterr().err


def test_malformed_mesh_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": 3, "triangles": [[0, 1, 2]], "edge_lengths": []}')
    assert run(["assemble", str(bad), "--op", "yano", "-o", str(tmp_path / "k.mtx")]) == 2


@pytest.mark.parametrize("op", ["yano", "hodge", "bochner", "ric"])
def test_assemble_writes_matrix_market(op, ico_mesh, tmp_path):
    out = tmp_path / f"{op}.mtx"
    assert run(["assemble", str(ico_mesh), "--op", op, "-o", str(out)]) == 0
    K = scipy.io.mmread(str(out))
    M = scipy.io.mmread(str(tmp_path / f"{op}.mass.mtx"))
    assert K.shape == M.shape
    assert "config" in out.read_text().splitlines()[1]


def test_spectrum_classify_round_trip_and_determinism(ico_mesh, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run(["spectrum", str(ico_mesh), "--op", "yano", "-k", "12", "-o", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    config, rows = read_spectrum_csv(a)
    assert len(rows) == 12 and config["count"] == 12
    assert f"config_checksum {config_checksum(config)}" in a.read_text()

    tags = tmp_path / "tags.json"
    assert run(["classify", str(ico_mesh), str(a), "-o", str(tags)]) == 0
    doc = json.loads(tags.read_text())
    kinds = sorted(e["kind"] for e in doc["eigenforms"] if abs(e["lambda"]) <= 0.5)
    assert kinds == ["conformal-gradient"] * 3 + ["killing"] * 3
    assert doc["killing_number"] == 3
    tags2 = tmp_path / "tags2.json"
    assert run(["classify", str(ico_mesh), str(a), "-o", str(tags2)]) == 0
    assert tags.read_bytes() == tags2.read_bytes()


def test_classify_rejects_foreign_spectrum(ico_mesh, tmp_path):
    other = tmp_path / "torus.json"
    assert run(["gen", "torus-grid:8", "-o", str(other)]) == 0
    spec = tmp_path / "s.csv"
    assert run(["spectrum", str(other), "-k", "6", "-o", str(spec)]) == 0
    assert run(["classify", str(ico_mesh), str(spec), "-o", str(tmp_path / "t.json")]) == 2
    hodge = tmp_path / "h.csv"
    assert run(["spectrum", str(ico_mesh), "--op", "hodge", "-k", "6", "-o", str(hodge)]) == 0
    assert run(["classify", str(ico_mesh), str(hodge), "-o", str(tmp_path / "t.json")]) == 2


def test_verify_small_suite_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        code = run(["verify", "--suite", "torus-grid:16", "icosphere:2", "-o", str(out)])
        assert code in (0, 1)
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["provenance"]["config_checksum"] == config_checksum(doc["config"])


def test_verify_default_suite(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert run(["verify", "--suite", "default", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [c["id"] for c in doc["checks"]] == list(THEOREM_IDS)
    assert all(c["status"] in ("pass", "skipped") for c in doc["checks"])
    assert len(capsys.readouterr().out.splitlines()) == 13


def test_verify_accepts_mesh_files(ico_mesh, tmp_path):
    out = tmp_path / "r.json"
    assert run(["verify", "--suite", str(ico_mesh), "-o", str(out)]) in (0, 1)
    assert json.loads(out.read_text())["manifolds"][0]["name"] == "ico.json"


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(tol=0.0)
    with pytest.raises(ValueError):
        RunConfig(count=0)
    with pytest.raises(ValueError):
        RunConfig(tol=0.1, thresholds=Thresholds(class_residual=0.05))
    assert RunConfig().as_dict()["thresholds"]["kernel_band"] == 0.5


def test_threshold_flags_reach_the_report(tmp_path):
    out = tmp_path / "r.json"
    run(["verify", "--suite", "icosphere:2", "--equality", "0.2", "-o", str(out)])
    assert json.loads(out.read_text())["config"]["thresholds"]["equality"] == 0.2
    assert run(["verify", "--suite", "icosphere:2", "--kernel-band", "1e-12", "-o", str(out)]) == 2
