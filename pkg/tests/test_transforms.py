import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from meshbench.shapes import blob, grid
from meshbench.transforms import (
    SYNTHETIC_CLASSES,
    CorrespondenceError,
    CorrespondenceMap,
    DatasetManifest,
    DecimationError,
    ManifestEntry,
    ManifestError,
    TransformConfig,
    TransformSpec,
    apply_transform,
    decimate,
    load_correspondence,
    load_manifest,
    parse_correspondence,
    save_correspondence,
)

NULL = blob(4)


@pytest.fixture(scope="module")
def big_null():
    return blob(5)


def test_scaling_version_3_doubles_exactly():
    mesh, corr = apply_transform(NULL, TransformSpec("scaling", 3, 0))
    assert np.array_equal(mesh.vertices, 2.0 * NULL.vertices)
    assert np.array_equal(corr.vertex, np.arange(NULL.n_vertices))


def test_noise_strength_5_std(big_null):
    mesh, _ = apply_transform(big_null, TransformSpec("noise", 5, 42))
    d = mesh.vertices - big_null.vertices
    assert big_null.n_vertices >= 10_000
    assert np.std(d) == pytest.approx(0.010 * big_null.diam, rel=0.05)


def test_noise_displacement_clipped():
    mesh, corr = apply_transform(NULL, TransformSpec("noise", 3, 1))
    sigma = 0.002 * 3 * NULL.diam
    d = np.linalg.norm(mesh.vertices - corr.points(NULL), axis=1)
    assert d.max() <= 3.5 * sigma + 1e-9


def test_sampling_strength_5_below_20_percent(big_null):
    mesh, corr = apply_transform(big_null, TransformSpec("sampling", 5, 0))
    assert mesh.n_vertices <= 2000
    # survivors keep their original positions
    assert np.array_equal(mesh.vertices, big_null.vertices[corr.vertex])


def test_shot_noise_moves_along_normals():
    out = apply_transform(NULL, TransformSpec("shot-noise", 2, 3))
    idx = np.array(out.meta["shot_vertices"])
    assert len(idx) == round(0.002 * 2 * NULL.n_vertices)
    d = out.mesh.vertices - NULL.vertices
    assert np.allclose(d[idx], 0.02 * NULL.diam * NULL.normals[idx])
    rest = np.setdiff1d(np.arange(NULL.n_vertices), idx)
    assert np.all(d[rest] == 0)


@pytest.mark.parametrize("cls", ["holes", "micro-holes", "partial"])
def test_removal_classes_inject_into_null(cls):
    mesh, corr = apply_transform(NULL, TransformSpec(cls, 3, 5))
    assert mesh.n_vertices < NULL.n_vertices
    assert len(np.unique(corr.vertex)) == mesh.n_vertices
    assert np.array_equal(mesh.vertices, NULL.vertices[corr.vertex])


def test_partial_fraction():
    mesh, _ = apply_transform(NULL, TransformSpec("partial", 2, 9))
    assert mesh.n_vertices / NULL.n_vertices == pytest.approx(0.75, abs=0.03)


def test_micro_holes_count():
    out = apply_transform(NULL, TransformSpec("micro-holes", 2, 0))
    assert len(out.meta["removed"]) == 40
    assert out.mesh.n_vertices == NULL.n_vertices - 40


def test_affine_determinant():
    out = apply_transform(NULL, TransformSpec("affine", 5, 11))
    assert np.linalg.det(np.array(out.meta["matrix"])) > 0.2


def test_scaling_then_normalization_recovers_null():
    for s in range(1, 6):
        mesh, _ = apply_transform(NULL, TransformSpec("scaling", s, 0))
        assert np.max(np.abs(mesh.normalized().vertices - NULL.normalized().vertices)) <= 1e-9


@pytest.mark.parametrize("cls", SYNTHETIC_CLASSES)
def test_reproducible(cls):
    a = apply_transform(NULL, TransformSpec(cls, 2, 123))
    b = apply_transform(NULL, TransformSpec(cls, 2, 123))
    assert np.array_equal(a.mesh.vertices, b.mesh.vertices)
    assert np.array_equal(a.mesh.faces, b.mesh.faces)
    assert np.array_equal(a.corr.vertex, b.corr.vertex)


def test_spec_validation():
    with pytest.raises(ValueError):
        TransformSpec("twirl", 1)
    with pytest.raises(ValueError):
        TransformSpec("noise", 6)
    with pytest.raises(ValueError):
        apply_transform(NULL, TransformSpec("external", 1))


def test_custom_config_changes_magnitude():
    cfg = TransformConfig(noise_sigma=0.0001)
    mesh, _ = apply_transform(NULL, TransformSpec("noise", 1, 0), cfg)
    assert np.std(mesh.vertices - NULL.vertices) < 0.0002 * NULL.diam


# -- decimation ------------------------------------------------------------------


def test_decimate_fraction_and_validity():
    out, old = decimate(NULL, 0.4)
    assert out.n_vertices == pytest.approx(0.4 * NULL.n_vertices, abs=2)
    assert np.array_equal(out.vertices, NULL.vertices[old])
    assert out.n_components == 1
    assert np.all(out.face_areas > 0)


def test_decimate_unreachable_reports_fraction():
    with pytest.raises(DecimationError) as err:
        decimate(grid(3), 0.01)
    assert 0 < err.value.achieved_fraction <= 1


# -- correspondence files ----------------------------------------------------------------


def test_identity_file():
    text = "".join(f"{i} {i}\n" for i in range(5))
    c = parse_correspondence(text, 5, 3, 5)
    assert np.array_equal(c.vertex, np.arange(5))


def test_out_of_range_vertex():
    text = "0 0\n1 5\n"
    with pytest.raises(CorrespondenceError, match="out of range"):
        parse_correspondence(text, 5, 3, 2)


def test_barycentric_line():
    text = "".join(f"{j} -1\n" for j in range(7)) + "7 12 0.2 0.3 0.5\n"
    c = parse_correspondence(text, 20, 30, 8)
    assert c.face[7] == 12
    assert np.allclose(c.bary[7], [0.2, 0.3, 0.5])
    assert not c.valid[:7].any()


@pytest.mark.parametrize(
    "text",
    ["0 0\n0 1\n", "0 0\n", "0 0\n1 x\n", "0 0\n1 2 3\n", "0 0\n1 1 0.5 0.6 0.1\n"],
    ids=["duplicate", "incomplete", "non-numeric", "wrong-arity", "bad-weights"],
)
def test_malformed_files(text):
    with pytest.raises(CorrespondenceError):
        parse_correspondence(text, 4, 4, 2)


def test_correspondence_round_trip(tmp_path):
    mesh, corr = apply_transform(NULL, TransformSpec("holes", 2, 1))
    p = tmp_path / "c.corr"
    save_correspondence(corr, p)
    back = load_correspondence(p, NULL, mesh)
    assert np.array_equal(back.vertex, corr.vertex)


@given(st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3))
def test_barycentric_points_inside_face(w):
    b = np.array(w) / np.sum(w)
    c = CorrespondenceMap(np.array([-1]), np.array([0]), b[None])
    p = c.points(NULL)[0]
    tri = NULL.vertices[NULL.faces[0]]
    assert np.allclose(p, b @ tri)
    assert c.nearest_vertex(NULL)[0] == NULL.faces[0, np.argmax(b)]


# -- manifests ------------------------------------------------------------------


def test_manifest_round_trip(tmp_path):
    for name in ("null.off", "noise-1.off", "noise-1.corr"):
        (tmp_path / name).write_text("")
    m = DatasetManifest("d", tmp_path / "null.off", [ManifestEntry("noise", 1, tmp_path / "noise-1.off", tmp_path / "noise-1.corr", 7)])
    m.save(tmp_path / "manifest.json")
    back = load_manifest(tmp_path / "manifest.json")
    assert back.entries[0].shape_id == "noise-1"
    assert back.entries[0].seed == 7
    assert back.completeness()["complete"] is False
    assert json.loads((tmp_path / "manifest.json").read_text())["null"] == "null.off"


def test_manifest_accepts_external_topology(tmp_path):
    for name in ("n.off", "t.off", "t.corr"):
        (tmp_path / name).write_text("")
    doc = {"null": "n.off", "entries": [{"class": "topology", "strength": 2, "mesh": "t.off", "corr": "t.corr"}]}
    (tmp_path / "m.json").write_text(json.dumps(doc))
    assert load_manifest(tmp_path / "m.json").entries[0].cls == "topology"


@pytest.mark.parametrize(
    "entry",
    [{"class": "warp", "strength": 1, "mesh": "n.off", "corr": "n.off"}, {"class": "noise", "strength": 9, "mesh": "n.off", "corr": "n.off"}],
)
def test_manifest_rejects_bad_entries(tmp_path, entry):
    (tmp_path / "n.off").write_text("")
    (tmp_path / "m.json").write_text(json.dumps({"null": "n.off", "entries": [entry]}))
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "m.json")


def test_manifest_missing_paths(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps({"null": "gone.off", "entries": []}))
    with pytest.raises(ManifestError, match="missing"):
        load_manifest(tmp_path / "m.json")
