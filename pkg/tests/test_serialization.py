"""Round trips and byte determinism for the on-disk formats."""

import json

import numpy as np
import pytest

from intflux import (ConstantMap, CurrentSegment, Current1, HedgehogMap,
                     InvalidInput, LinearField, MollifiedCoulombField,
                     Singularity, coulomb_superposition, d_field,
                     integer_flux_scan, load_current, load_field,
                     load_singularities, sample_field, save_current,
                     save_field, save_scan, save_singularities)


def roundtrip(field, tmp_path, name):
    path = tmp_path / name
    save_field(field, str(path))
    return load_field(str(path))


def test_field_roundtrips_evaluate_identically(tmp_path):
    rng = np.random.default_rng(0)
    pts = rng.uniform(-0.4, 0.4, size=(25, 3))
    pts = pts[np.linalg.norm(pts - [0.05, 0.0, 0.0], axis=1) > 0.15]
    fields = [
        coulomb_superposition([((0.05, 0.0, 0.0), 1), ((0.0, -0.3, 0.1), -2)]),
        MollifiedCoulombField([((0.0, 0.0, 0.1), 2)], scale=0.03),
        LinearField(np.array([[1.0, 0.2, 0.0], [0.0, -0.5, 0.1], [0.3, 0.0, 2.0]])),
        d_field(HedgehogMap(center=(0.1, 0.0, 0.0))),
        d_field(ConstantMap((0.0, 1.0, 0.0))),
    ]
    for i, f in enumerate(fields):
        g = roundtrip(f, tmp_path, f"f{i}.json")
        assert type(g) is type(f)
        np.testing.assert_allclose(g.evaluate(pts), f.evaluate(pts),
                                   atol=1e-14)


def test_sampled_field_roundtrip_with_blob(tmp_path):
    base = coulomb_superposition([((0.0, 0.0, 0.0), 1)])
    sf = sample_field(base, (-0.5, -0.5, -0.5), 0.1, (11, 11, 11),
                      singularities=base.singularities())
    g = roundtrip(sf, tmp_path, "sampled.json")
    assert (tmp_path / "sampled.bin").exists()
    pts = np.array([[0.12, -0.07, 0.2], [0.31, 0.02, -0.4]])
    np.testing.assert_allclose(g.evaluate(pts), sf.evaluate(pts),
                               atol=1e-14)
    assert [(tuple(s.pos), s.degree) for s in g.singularities()] == \
           [(tuple(s.pos), s.degree) for s in sf.singularities()]


def test_save_is_byte_deterministic(tmp_path):
    f = coulomb_superposition([((0.1, 0.2, -0.3), -2)])
    save_field(f, str(tmp_path / "a.json"))
    save_field(f, str(tmp_path / "b.json"))
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_flux_unit_survives_roundtrip(tmp_path):
    from intflux import FieldConvention
    f = coulomb_superposition([((0.0, 0.0, 0.0), 1)],
                              convention=FieldConvention(flux_unit=2 * np.pi))
    g = roundtrip(f, tmp_path, "unit.json")
    assert g.flux_unit == f.flux_unit


def test_load_rejects_unknown_kind(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"kind": "vortex_sheet"}))
    with pytest.raises(InvalidInput):
        load_field(str(p))


def test_scan_csv_round(tmp_path):
    f = coulomb_superposition([((0.0, 0.0, 0.0), 1)])
    rep = integer_flux_scan(f, 5, 2)
    csv = tmp_path / "scan.csv"
    summary = tmp_path / "scan.json"
    save_scan(rep, str(csv), str(summary))
    rows = np.loadtxt(csv, delimiter=",", skiprows=1)
    assert rows.shape == rep.rows.shape
    np.testing.assert_allclose(rows, rep.rows, rtol=1e-15)
    doc = json.loads(summary.read_text())
    assert doc["n_violations"] == 0


def test_current_roundtrip(tmp_path):
    cur = Current1([CurrentSegment((0.5, 0.0, 0.0), (0.1, 0.0, 0.0), 2),
                    CurrentSegment((0.0, -0.2, 0.0), (0.0, 0.4, 0.0), 1)])
    p = tmp_path / "cur.json"
    save_current(cur, str(p))
    back = load_current(str(p))
    assert back.mass == cur.mass
    assert [(s.start, s.end, s.multiplicity) for s in back.segments] == \
           [(s.start, s.end, s.multiplicity) for s in cur.segments]


def test_singularities_roundtrip(tmp_path):
    sings = [Singularity((0.1, -0.2, 0.3), 2), Singularity((0.0, 0.0, 0.0), -1)]
    p = tmp_path / "sings.json"
    save_singularities(sings, str(p))
    back = load_singularities(str(p))
    assert [(tuple(s.pos), s.degree) for s in back] == \
           [(tuple(s.pos), s.degree) for s in sings]
