import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from fracheat.cli import main, run_command
from fracheat.config import config_digest, load_config


@pytest.fixture()
def tiny_config(tmp_path):
    cfg = tmp_path / "tiny.toml"
    cfg.write_text("""
[run]
seed = 77
output_dir = "%s"

[[generators]]
preset = "euclidean1"
n = 16

[fractional]
s_values = [0.5]

[time]
period = 1.0
samples = 8
""" % (tmp_path / "out"))
    return cfg


def _result_files(root: Path):
    return sorted(p for p in root.rglob("*") if p.is_file() and p.name != "manifest.json")


def test_config_digest_stable_and_sensitive(tiny_config):
    c1 = load_config(tiny_config)
    c2 = load_config(tiny_config)
    assert c1.digest == c2.digest
    other = dict(c1.data)
    other["run"] = dict(other["run"], seed=78)
    assert config_digest(other) != c1.digest


def test_config_validation(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[time]\nsamples = 12\n")
    with pytest.raises(ValueError):
        load_config(bad)
    bad.write_text("[fractional]\ns_values = [1.5]\n")
    with pytest.raises(ValueError):
        load_config(bad)


def test_spectrum_command_deterministic(tiny_config, tmp_path):
    cfg = load_config(tiny_config)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    e1 = run_command("spectrum", cfg, out1)
    e2 = run_command("spectrum", cfg, out2)
    assert e1.status == "pass" and e2.status == "pass"
    f1, f2 = _result_files(out1), _result_files(out2)
    assert [p.name for p in f1] == [p.name for p in f2]
    for a, b in zip(f1, f2):
        assert a.read_bytes() == b.read_bytes()
    csv = next(p for p in f1 if p.suffix == ".csv")
    lines = csv.read_text().strip().split("\n")
    assert lines[0] == "k,lambda"
    assert len(lines) == 17
    assert lines[1].split(",")[1] == "0.0"


def test_spectrum_cap_exceeded_fails_cleanly(tmp_path):
    cfg_path = tmp_path / "big.toml"
    cfg_path.write_text("""
[[generators]]
preset = "euclidean2"
n = 80
""")
    cfg = load_config(cfg_path)
    entry = run_command("spectrum", cfg, tmp_path / "out")
    assert entry.status == "fail"
    assert not any(p.suffix == ".csv" for p in _result_files(tmp_path / "out"))


def test_verify_identities_command(tiny_config, tmp_path):
    cfg = load_config(tiny_config)
    entry = run_command("verify-identities", cfg, tmp_path / "o")
    assert entry.status == "pass"
    rows = (tmp_path / "o" / "identities" / "identities.csv").read_text().splitlines()
    assert rows[0] == "identity,parameters,defect,tolerance,status"
    assert all(line.endswith("pass") for line in rows[1:])


def test_geometry_audit_deterministic(tmp_path):
    cfg = load_config(None)
    out1, out2 = tmp_path / "g1", tmp_path / "g2"
    e1 = run_command("geometry-audit", cfg, out1)
    e2 = run_command("geometry-audit", cfg, out2)
    assert e1.status == "pass" and e2.status == "pass"
    for a, b in zip(_result_files(out1), _result_files(out2)):
        assert a.read_bytes() == b.read_bytes()


def test_frac_apply_sidecar(tiny_config, tmp_path):
    cfg = load_config(tiny_config)
    entry = run_command("frac-apply", cfg, tmp_path / "fa")
    assert entry.status == "pass"
    side = json.loads((tmp_path / "fa" / "frac_apply" / "result.json").read_text())
    assert side["s"] == 0.5
    assert side["operator"] == "laplacian"
    assert "shape" in side and "digest" in side
    arr = np.load(tmp_path / "fa" / "frac_apply" / "result.npy")
    assert arr.shape == (16,)


def test_frac_apply_balakrishnan_route(tmp_path, tiny_config):
    cfg_path = tmp_path / "fb.toml"
    cfg_path.write_text("""
[[generators]]
preset = "euclidean1"
n = 16

[frac_apply]
operator = "heat"
route = "balakrishnan"
s = 0.25
seed = 3

[time]
samples = 8
""")
    cfg = load_config(cfg_path)
    entry = run_command("frac-apply", cfg, tmp_path / "fb")
    assert entry.status == "pass"
    side = json.loads((tmp_path / "fb" / "frac_apply" / "result.json").read_text())
    assert "t0=" in side["quadrature"]


def test_manifest_written(tiny_config, tmp_path):
    cfg = load_config(tiny_config)
    run_command("spectrum", cfg, tmp_path / "m")
    manifest = json.loads((tmp_path / "m" / "manifest.json").read_text())
    assert manifest["config_digest"] == cfg.digest
    assert manifest["seed"] == 77
    assert manifest["commands"][0]["status"] == "pass"
    assert all(Path(f).exists() for f in manifest["commands"][0]["files"])


def test_env_var_output_override(tiny_config, tmp_path, monkeypatch):
    monkeypatch.setenv("FRACHEAT_OUTPUT", str(tmp_path / "envout"))
    cfg = load_config(tiny_config)
    assert cfg.output_dir == tmp_path / "envout"


def test_main_exit_codes(tiny_config, tmp_path):
    assert main(["spectrum", "--config", str(tiny_config),
                 "--output", str(tmp_path / "cli")]) == 0
