"""Command-line interface: subcommand behaviour, exit codes, output files
with manifests, and byte-level determinism of repeated runs.

All invocations go through cli.main(argv) in-process; stdout/stderr are
captured with capsys.
"""

import json
import math

import numpy as np
import pytest

import helfrich_lab.cli as cli
from helfrich_lab import __version__
from helfrich_lab.meshio import read_mesh, write_mesh
from conftest import cube_mesh, icosphere


def run(capsys, *argv):
    rc = cli.main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def run_json(capsys, *argv):
    rc, out, err = run(capsys, *argv)
    assert rc == 0, err
    return json.loads(out)


@pytest.fixture
def sphere_file(tmp_path):
    path = tmp_path / "sphere.obj"
    write_mesh(icosphere(2), str(path))
    return str(path)


def test_classify_unique(capsys):
    report = run_json(capsys, "classify", "--c0", "1")
    assert report["verdict"] == "Unique"
    assert report["radii"] == [2.0]
    assert report["boundedness"] == "Plausible"
    assert report["literalTheoremAgrees"] is True
    # closed form at r=2, c0=1: 8pi*kc - 16pi*kc + 8pi*kc = 0
    assert report["energies"][0] == pytest.approx(0.0, abs=1e-12)


def test_classify_rejects_bad_params(capsys):
    rc, out, err = run(capsys, "classify", "--kc", "0")
    assert rc == 2
    assert "kc" in err


def test_classify_deterministic(capsys):
    rc1, out1, _ = run(capsys, "classify", "--c0", "0.7", "--p", "-0.3")
    rc2, out2, _ = run(capsys, "classify", "--c0", "0.7", "--p", "-0.3")
    assert rc1 == rc2 == 0
    assert out1 == out2


def test_no_subcommand_prints_help(capsys):
    rc, out, _ = run(capsys)
    assert rc == 2
    assert "subcommand" in out


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_icosphere_writes_mesh_and_manifest(capsys, tmp_path):
    out = tmp_path / "ico.obj"
    rc, _, err = run(capsys, "icosphere", "--subdiv", "2", "--out", str(out))
    assert rc == 0, err
    mesh = read_mesh(str(out))
    assert mesh.n_vertices == 162
    manifest = json.loads((tmp_path / "ico.obj.manifest.json").read_text())
    assert manifest["subcommand"] == "icosphere"
    assert manifest["version"] == __version__
    assert manifest["outputs"] == [str(out)]
    assert manifest["parameters"]["subdiv"] == 2
    assert "durationSeconds" in manifest


def test_icosphere_output_bytes_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.obj", tmp_path / "b.obj"
    assert run(capsys, "icosphere", "--subdiv", "3", "--out", str(a))[0] == 0
    assert run(capsys, "icosphere", "--subdiv", "3", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_energy_breakdown(capsys, sphere_file):
    report = run_json(capsys, "energy", "--mesh", sphere_file)
    br = report["breakdown"]
    assert br["bending"] == pytest.approx(8.0 * math.pi, rel=0.02)
    assert br["area"] == br["volume"] == br["topological"] == 0.0
    assert br["total"] == br["bending"]
    assert report["gradNorm"] > 0.0


def test_energy_missing_mesh(capsys, tmp_path):
    rc, _, err = run(capsys, "energy", "--mesh", str(tmp_path / "nope.obj"))
    assert rc == 3
    assert "not found" in err


def test_residual_norms(capsys, sphere_file):
    report = run_json(
        capsys, "residual", "--mesh", sphere_file, "--lambda", "1", "--p", "-1"
    )
    # At r=1 with these parameters the analytic residual is the constant -1.
    assert report["residual"]["sup"] == pytest.approx(1.0, rel=0.05)
    assert 0.0 < report["residual"]["l2"] <= report["residual"]["sup"] * 1.001


def test_flow_roundtrip(capsys, tmp_path):
    start = tmp_path / "start.obj"
    write_mesh(icosphere(2, radius=2.2), str(start))
    final = tmp_path / "final.ply"
    trace = tmp_path / "trace.csv"
    report = run_json(
        capsys,
        "flow",
        "--mesh", str(start),
        "--c0", "1",
        "--grad-tol", "6e-3",
        "--max-steps", "2000",
        "--out", str(final),
        "--trace", str(trace),
    )
    assert report["termination"] == "Converged"
    assert report["fittedRadius"] == pytest.approx(2.0, rel=0.01)
    assert report["matchedRadius"] == 2.0

    lines = trace.read_text().splitlines()
    assert lines[0] == "step,energy,gradNorm,maxAo2,fittedRadius,minH"
    assert len(lines) >= 3
    energies = [float(line.split(",")[1]) for line in lines[1:]]
    assert energies == sorted(energies, reverse=True)

    mesh = read_mesh(str(final))
    assert np.linalg.norm(mesh.vertices, axis=1).mean() == pytest.approx(2.0, rel=0.01)
    assert (tmp_path / "final.ply.manifest.json").exists()
    manifest = json.loads((tmp_path / "trace.csv.manifest.json").read_text())
    assert manifest["parameters"]["lambda"] == 0.0
    assert "lam" not in manifest["parameters"]
    assert manifest["inputs"] == [str(start)]
    assert sorted(manifest["outputs"]) == sorted([str(final), str(trace)])


def test_flow_rejects_bad_config(capsys, sphere_file):
    rc, _, err = run(capsys, "flow", "--mesh", sphere_file, "--max-steps", "0")
    assert rc == 2
    assert "max_steps" in err


def test_perturb_writes_spec_sidecar(capsys, tmp_path):
    out = tmp_path / "blob.obj"
    rc, _, err = run(
        capsys,
        "perturb",
        "--subdiv", "2",
        "--mode", "2,0,0.1",
        "--mode", "3,1,-0.05",
        "--out", str(out),
    )
    assert rc == 0, err
    assert read_mesh(str(out)).n_vertices == 162
    spec = json.loads((tmp_path / "blob.obj.spec.json").read_text())
    assert spec["modes"] == [
        {"l": 2, "m": 0, "amplitude": 0.1},
        {"l": 3, "m": 1, "amplitude": -0.05},
    ]
    assert (tmp_path / "blob.obj.spec.json.manifest.json").exists()


def test_perturb_rejects_malformed_mode(capsys, tmp_path):
    rc, _, err = run(
        capsys, "perturb", "--mode", "2,0", "--out", str(tmp_path / "x.obj")
    )
    assert rc == 2
    assert "l,m,amplitude" in err


def test_mildness_class_i(capsys, sphere_file):
    report = run_json(capsys, "mildness", "--mesh", sphere_file)
    assert report["matchedClass"] == "I"
    assert report["details"] == {}
    assert report["note"] is None


def test_certify_worked_example(capsys):
    report = run_json(
        capsys, "certify", "--c0", "2", "--lambda", "3", "--p", "-3", "--a0", "1"
    )
    assert report["kind"] == "PositiveLowerBound"
    assert report["h1Min"] == pytest.approx((4.0 - math.sqrt(12.0)) / 2.0, rel=1e-9)
    assert len(report["coefficients"]) == 11
    assert report["coefficients"][0] == [0.0, 1.0, -5.0, 3.0]


def test_certify_requires_a0(capsys):
    rc, _, err = run(capsys, "certify", "--c0", "2", "--lambda", "3", "--p", "-3")
    assert rc == 2
    assert "--a0" in err


def test_certify_gate_rejection_is_validation_error(capsys):
    rc, _, err = run(
        capsys, "certify", "--c0", "2", "--lambda", "3", "--p", "-2", "--a0", "1"
    )
    assert rc == 2
    assert "certificate requires p" in err


def test_mesh_info(capsys, tmp_path, sphere_file):
    report = run_json(capsys, "mesh-info", "--mesh", sphere_file)
    assert report["vertices"] == 162
    assert report["chi"] == 2
    assert report["sphereFit"]["radius"] == pytest.approx(1.0, rel=1e-3)

    cube_path = tmp_path / "cube.ply"
    write_mesh(cube_mesh(), str(cube_path))
    report = run_json(capsys, "mesh-info", "--mesh", str(cube_path))
    assert report["minFaceQuality"] == pytest.approx(math.sqrt(3.0) / 2.0, rel=1e-9)
    assert report["volume"] == pytest.approx(1.0, rel=1e-12)


def _write_grid(tmp_path, payload) -> str:
    path = tmp_path / "grid.json"
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return str(path)


def test_sweep_stdout(capsys, tmp_path):
    grid = _write_grid(tmp_path, {"c0": [0.0, 1.0], "p": [-1.0, 0.0]})
    rc, out, err = run(capsys, "sweep", "--grid", grid, "--lambda", "1")
    assert rc == 0, err
    lines = out.strip().splitlines()
    assert lines[0] == "c0,lambda,p,verdict,boundedness,r1,r2,E1,E2"
    assert len(lines) == 5
    # c0=1, lambda=1, p=0 row: 2u^2 - 3u = 0 gives u = 3/2, radius 2/3.
    row = dict(zip(lines[0].split(","), lines[4].split(",")))
    assert row["verdict"] == "Unique"
    assert float(row["r1"]) == pytest.approx(2.0 / 3.0, rel=1e-12)


def test_sweep_file_output_with_certificate(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("HELFRICH_LAB_THREADS", "2")
    grid = _write_grid(tmp_path, {"c0": [2.0]})
    out = tmp_path / "sweep.csv"
    rc, _, err = run(
        capsys,
        "sweep", "--grid", grid, "--lambda", "3", "--p", "-3", "--a0", "1",
        "--out", str(out),
    )
    assert rc == 0, err
    lines = out.read_text().strip().splitlines()
    assert lines[0].endswith("certificate,h1Min")
    assert "PositiveLowerBound" in lines[1]
    assert (tmp_path / "sweep.csv.manifest.json").exists()


def test_sweep_certificate_rejection_column(capsys, tmp_path):
    # c0 = 0 fails the certificate gate; the row records Rejected instead
    # of aborting the sweep.
    grid = _write_grid(tmp_path, {"c0": [0.0]})
    rc, out, _ = run(capsys, "sweep", "--grid", grid, "--a0", "1")
    assert rc == 0
    assert out.strip().splitlines()[1].endswith("Rejected,")


def test_sweep_rejects_unknown_axis(capsys, tmp_path):
    grid = _write_grid(tmp_path, {"kc": [1.0]})
    rc, _, err = run(capsys, "sweep", "--grid", grid)
    assert rc == 2
    assert "unknown sweep axis" in err


def test_sweep_rejects_malformed_grid(capsys, tmp_path):
    grid = _write_grid(tmp_path, "{not json")
    rc, _, err = run(capsys, "sweep", "--grid", grid)
    assert rc == 2
    assert "malformed grid file" in err


def test_sweep_missing_grid_file(capsys, tmp_path):
    rc, _, err = run(capsys, "sweep", "--grid", str(tmp_path / "none.json"))
    assert rc == 3


def test_thread_env_must_be_integer(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("HELFRICH_LAB_THREADS", "many")
    grid = _write_grid(tmp_path, {"c0": [0.0]})
    rc, _, err = run(capsys, "sweep", "--grid", grid)
    assert rc == 2
    assert "HELFRICH_LAB_THREADS" in err


def test_numerical_failure_exit_code(capsys, monkeypatch):
    # Exit code 4 is reserved for numerical failures; simulate one to pin
    # the diagnostic JSON contract.  build_parser reads the handler from the
    # module global, so patching it is enough.
    def boom(args):
        raise RuntimeError("grid self-check failed")

    monkeypatch.setattr(cli, "cmd_classify", boom)
    rc, out, _ = run(capsys, "classify")
    assert rc == 4
    report = json.loads(out)
    assert report["error"] == "RuntimeError"
    assert "self-check" in report["message"]
