"""Command line drive: exit codes, outputs, figures, determinism."""

import json

import pytest

from intflux.cli import main

COULOMB = {"kind": "coulomb", "charges": [{"pos": [0.0, 0.0, 0.0], "deg": 1}]}
LINEAR = {"kind": "linear",
          "matrix": [[0.3, 0.0, 0.0], [0.0, 0.1, 0.0], [0.0, 0.0, 0.2]]}


@pytest.fixture()
def coulomb_json(tmp_path):
    p = tmp_path / "field.json"
    p.write_text(json.dumps(COULOMB))
    return str(p)


def test_generate(tmp_path, coulomb_json):
    out = tmp_path / "gen"
    assert main(["--out", str(out), "generate", coulomb_json]) == 0
    assert (out / "field.json").exists()
    assert (out / "field.png").exists()


def test_fluxscan_pass_and_outputs(tmp_path, coulomb_json):
    out = tmp_path / "scan"
    rc = main(["--out", str(out), "fluxscan", coulomb_json,
               "--centers", "8", "--radii", "3"])
    assert rc == 0
    assert (out / "scan.csv").exists()
    assert (out / "scan_summary.json").exists()
    assert (out / "scan.png").exists()
    doc = json.loads((out / "scan_summary.json").read_text())
    assert doc["n_violations"] == 0


def test_fluxscan_fails_on_linear_field(tmp_path):
    p = tmp_path / "lin.json"
    p.write_text(json.dumps(LINEAR))
    rc = main(["--out", str(tmp_path / "o"), "fluxscan", str(p),
               "--centers", "6", "--radii", "2"])
    assert rc == 1


def test_malformed_input_exits_two(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"kind": "coulomb", "charges": [{"position": [0,0,0]}]}')
    rc = main(["--out", str(tmp_path / "o"), "fluxscan", str(p)])
    assert rc == 2


def test_missing_file_exits_two(tmp_path):
    rc = main(["--out", str(tmp_path / "o"), "fluxscan",
               str(tmp_path / "nope.json")])
    assert rc == 2


def test_no_plot_skips_figures(tmp_path, coulomb_json):
    out = tmp_path / "noplot"
    rc = main(["--out", str(out), "--no-plot", "fluxscan", coulomb_json,
               "--centers", "5", "--radii", "2"])
    assert rc == 0
    assert not list(out.glob("*.png"))


def test_reruns_are_byte_identical(tmp_path, coulomb_json):
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        main(["--out", str(out), "--no-plot", "fluxscan", coulomb_json,
              "--centers", "6", "--radii", "2"])
        outs.append(out)
    assert (outs[0] / "scan.csv").read_bytes() == (outs[1] / "scan.csv").read_bytes()
    assert (outs[0] / "scan_summary.json").read_bytes() == \
           (outs[1] / "scan_summary.json").read_bytes()


def test_decompose_outputs(tmp_path, coulomb_json):
    out = tmp_path / "dec"
    rc = main(["--out", str(out), "decompose", coulomb_json, "--eps", "0.25",
               "--n-samples", "16"])
    assert rc == 0
    doc = json.loads((out / "decomposition.json").read_text())
    assert doc["n_bad"] == 1
    assert sum(doc["degrees"]) == 1
    assert (out / "decompose.png").exists()


def test_regularize_outputs(tmp_path, coulomb_json):
    out = tmp_path / "reg"
    rc = main(["--out", str(out), "regularize", coulomb_json, "--eps", "0.25",
               "--n-f", "8", "--grid", "10", "--error-grid", "0"])
    assert rc == 0
    assert (out / "regularized.json").exists()
    assert (out / "regularized.bin").exists()
    doc = json.loads((out / "singularities.json").read_text())
    sings = doc["singularities"]
    assert len(sings) == 1 and sings[0]["deg"] == 1
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["gauge_d_residual_max"] < 1e-8


def test_connect_certificate(tmp_path):
    p = tmp_path / "sings.json"
    p.write_text(json.dumps([{"pos": [0.25, 0.0, 0.0], "deg": 1},
                             {"pos": [-0.25, 0.0, 0.0], "deg": -1}]))
    out = tmp_path / "con"
    rc = main(["--out", str(out), "connect", str(p)])
    assert rc == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["optimal"] is True
    assert cert["mass"] == 0.5
    assert cert["gap"] <= 1e-9
    assert (out / "connection_optimal.csv").exists()
    assert (out / "connect.png").exists()


def test_analyze_outputs(tmp_path, coulomb_json):
    out = tmp_path / "ana"
    rc = main(["--out", str(out), "analyze", coulomb_json,
               "--k-list", "1,2,4"])
    assert rc == 0
    assert (out / "analyze.csv").exists()
    assert (out / "analyze.png").exists()
