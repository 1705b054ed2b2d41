import json

import numpy as np
import pytest

from meshbench.cli import MissingInputs, cmd_detect, cmd_eval, cmd_report, cmd_transform, main
from meshbench.config import CACHE_ENV, RunConfig
from meshbench.descriptors import DescriptorSet, load_descriptors, save_descriptors
from meshbench.mesh import save_off
from meshbench.shapes import blob
from meshbench.transforms import SYNTHETIC_CLASSES

CLASSES = ("noise", "scaling")
STRENGTHS = (1, 2)


@pytest.fixture(scope="module")
def null_path(tmp_path_factory):
    p = tmp_path_factory.mktemp("null") / "blob.off"
    save_off(blob(3), p)
    return p


@pytest.fixture
def dataset(tmp_path, null_path):
    cmd_transform(null_path, tmp_path / "data", CLASSES, STRENGTHS, seed=1)
    return tmp_path / "data" / "manifest.json"


def n_shapes():
    return 1 + len(CLASSES) * len(STRENGTHS)


def test_transform_all_classes_deterministic(tmp_path, null_path):
    a = cmd_transform(null_path, tmp_path / "a", seed=7)
    cmd_transform(null_path, tmp_path / "b", seed=7)
    assert len(a.entries) == 8 * 5
    assert {e.cls for e in a.entries} == set(SYNTHETIC_CLASSES)
    assert len(list((tmp_path / "a").glob("*-*.off"))) == 40
    assert len(list((tmp_path / "a").glob("*.corr"))) == 40
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name


def test_transform_unknown_class(tmp_path, null_path, capsys):
    with pytest.raises(ValueError, match="bogus"):
        cmd_transform(null_path, tmp_path, ["bogus"])
    assert main(["transform", str(null_path), "--out", str(tmp_path), "--classes", "isometry"]) == 2
    assert "isometry" in capsys.readouterr().err


def test_detect_outputs_and_warm_cache(tmp_path, dataset):
    cfg = RunConfig(manifest=str(dataset), detectors={"harris3d-ring1": {}, "mser-vw-hks": {}}, cache=str(tmp_path / "cache"), out=str(tmp_path / "out"))
    cold = cmd_detect(cfg)
    assert cold["failed"] == []
    assert cold["cache_misses"] == n_shapes() and cold["cache_hits"] == 0
    assert len(list((tmp_path / "out").glob("*.harris3d-ring1.feat"))) == n_shapes()
    assert len(list((tmp_path / "out").glob("*.mser-vw-hks.reg"))) == n_shapes()
    before = {p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()}
    warm = cmd_detect(cfg)
    assert warm["cache_hits"] == n_shapes() and warm["cache_misses"] == 0
    assert {p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()} == before


def test_cache_env_override(tmp_path, dataset, monkeypatch):
    env_cache = tmp_path / "env-cache"
    monkeypatch.setenv(CACHE_ENV, str(env_cache))
    cfg = RunConfig(manifest=str(dataset), detectors={"mser-vw-hks": {}}, cache=str(tmp_path / "unused"), out=str(tmp_path / "out"))
    cmd_detect(cfg)
    assert any(env_cache.iterdir())
    assert not (tmp_path / "unused").exists()


def test_corrupt_mesh_isolated(tmp_path, dataset, capsys):
    (dataset.parent / "noise-2.off").write_text("OFF\n3 1 0\n0 0 0\n")
    out = tmp_path / "out"
    code = main(["detect", "--manifest", str(dataset), "--out", str(out), "--cache", str(tmp_path / "c")])
    assert code == 1
    assert "noise-2" in capsys.readouterr().err
    assert len(list(out.glob("*.feat"))) == n_shapes() - 1


def test_eval_lists_all_missing_inputs(tmp_path, dataset, capsys):
    code = main(["eval", "--manifest", str(dataset), "--out", str(tmp_path / "out"), "--detectors", "harris3d-ring1", "mesh-scale-dog"])
    assert code == 2
    err = capsys.readouterr().err
    assert err.count(".feat") == 2 * n_shapes()
    cfg = RunConfig(manifest=str(dataset), out=str(tmp_path / "out"))
    with pytest.raises(MissingInputs):
        cmd_eval(cfg)


def test_null_only_self_evaluation(tmp_path, null_path):
    m = cmd_transform(null_path, tmp_path / "data", classes=(), seed=0)
    assert m.entries == []
    cfg = RunConfig(manifest=str(tmp_path / "data" / "manifest.json"), detectors={"harris3d-ring1": {}, "mser-vw-hks": {}}, descriptors={"spin-image": {}, "hks": {}}, describe_on="harris3d-ring1", cache=str(tmp_path / "c"), out=str(tmp_path / "out"))
    assert main(["detect", "--config", _write_cfg(tmp_path, cfg)]) == 0
    assert main(["describe", "--config", _write_cfg(tmp_path, cfg)]) == 0
    bundle = cmd_eval(cfg)
    assert bundle["failures"] == []
    for det in cfg.detectors:
        lines = (tmp_path / "out" / f"repeatability.{det}.csv").read_text().splitlines()
        assert lines[1].startswith("null,100.00,")
    assert bundle["descriptors"] == {"spin-image": {"null": 0.0}, "hks": {"null": 0.0}}
    assert "harris3d-ring1" in cmd_report(tmp_path / "out")


def _write_cfg(tmp_path, cfg):
    p = tmp_path / "run.json"
    p.write_text(cfg.to_json())
    return str(p)


def test_eval_descriptor_dim_mismatch_names_both(tmp_path, dataset, capsys):
    out = tmp_path / "out"
    cfg = RunConfig(manifest=str(dataset), descriptors={"spin-image": {}}, describe_on="harris3d-ring1", cache=str(tmp_path / "c"), out=str(out))
    cmd_detect(cfg)
    from meshbench.cli import cmd_describe

    cmd_describe(cfg)
    d = load_descriptors(out / "scaling-1.spin-image.desc")
    save_descriptors(DescriptorSet(np.zeros((len(d), 3)), d.vertices, d.kind), out / "scaling-1.spin-image.desc")
    with pytest.raises(ValueError, match="null.*scaling-1"):
        cmd_eval(cfg)
    assert main(["eval", "--config", _write_cfg(tmp_path, cfg)]) == 2
    assert "scaling-1" in capsys.readouterr().err


def test_eval_tables_and_json(tmp_path, dataset):
    out = tmp_path / "out"
    cfg = RunConfig(manifest=str(dataset), detectors={"harris3d-ring1": {}}, cache=str(tmp_path / "c"), out=str(out))
    cmd_detect(cfg)
    bundle = cmd_eval(cfg)
    table = bundle["detectors"]["harris3d-ring1"]["table"]
    assert set(table) == {"noise", "scaling", "Average"}
    raw = bundle["detectors"]["harris3d-ring1"]["raw"]["noise"]
    assert table["noise"]["le2"] == pytest.approx((raw["1"] + raw["2"]) / 2, abs=1e-12)
    assert table["scaling"]["s1"] == 100.0
    assert table["noise"]["le3"] is None
    header = (out / "curve.harris3d-ring1.csv").read_text().splitlines()[0]
    assert header == "class,rho,repeatability"
    assert json.loads((out / "report.json").read_text())["rho"] == pytest.approx(bundle["rho"])


def test_run_config_json_roundtrip_and_validation(tmp_path):
    cfg = RunConfig(manifest="m.json", descriptors={"hks": {"times": 8}}, eval={"rho": 0.5, "tau": [0.0, 1.0]})
    again = RunConfig.from_json(cfg.to_json())
    assert again == cfg
    assert again.eval.tau == (0.0, 1.0)
    with pytest.raises(ValueError, match="unknown RunConfig keys"):
        RunConfig.from_json('{"manifset": "x"}')
    with pytest.raises(ValueError):
        RunConfig(detectors={"nope": {}})
    with pytest.raises(ValueError):
        RunConfig(jobs=0)


def test_cli_flags_override_config(tmp_path, dataset):
    cfg = RunConfig(manifest=str(dataset), cache=str(tmp_path / "c"), out=str(tmp_path / "o1"))
    path = _write_cfg(tmp_path, cfg)
    assert main(["detect", "--config", path, "--out", str(tmp_path / "o2"), "--detectors", "meshdog-mean"]) == 0
    assert len(list((tmp_path / "o2").glob("*.meshdog-mean.feat"))) == n_shapes()
    assert not (tmp_path / "o1").exists()


def test_parallel_matches_serial(tmp_path, dataset):
    base = dict(manifest=str(dataset), detectors={"harris3d-ring1": {}}, cache=str(tmp_path / "c"))
    cmd_detect(RunConfig(out=str(tmp_path / "s"), jobs=1, **base))
    cmd_detect(RunConfig(out=str(tmp_path / "p"), jobs=2, **base))
    for f in sorted((tmp_path / "s").iterdir()):
        assert f.read_bytes() == (tmp_path / "p" / f.name).read_bytes()
