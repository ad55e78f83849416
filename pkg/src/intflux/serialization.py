"""Deterministic file formats: fields, scans, decompositions, currents.

JSON is written with sorted keys and no timestamps, floats via repr (shortest
round-trip), so identical inputs give byte-identical outputs.  Sampled field
data goes to a sidecar binary blob of little-endian float64 in x-fastest node
order (components contiguous per node), with origin/spacing/dims in the JSON
header.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from .connection import Current1, CurrentSegment, DualCertificate
from .errors import InvalidInput
from .fields import (ConstantBackground, ConstantMap, CoulombField, DField,
                     Field, FieldConvention, HedgehogMap, LinearField,
                     MollifiedCoulombField, SampledField, Singularity,
                     SwirlBackground, d_field)
from .flux import SCAN_COLUMNS, ScanReport


def save_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


_dump_json = save_json


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _charges_to_json(charges):
    return [{"pos": [float(v) for v in s.pos], "deg": int(s.degree)} for s in charges]


def _charges_from_json(rows):
    out = []
    for r in rows:
        out.append(Singularity(tuple(float(v) for v in r["pos"]), int(r["deg"])))
    return out


def save_field(field: Field, path: str) -> str:
    """Write a field description (and a .bin blob for sampled fields)."""
    doc = {"flux_unit": field.flux_unit}
    if isinstance(field, CoulombField):
        doc["kind"] = "coulomb"
        doc["charges"] = _charges_to_json(field.charges)
        bg = field.background
        if isinstance(bg, ConstantBackground):
            if np.any(bg.value != 0):
                doc["background"] = {"kind": "constant",
                                     "value": [float(v) for v in bg.value]}
        elif isinstance(bg, SwirlBackground):
            doc["background"] = {"kind": "swirl", "amplitude": float(bg.amplitude)}
        elif bg is not None:
            raise InvalidInput(f"cannot serialize background {type(bg).__name__}")
    elif isinstance(field, MollifiedCoulombField):
        doc["kind"] = "mollified_coulomb"
        doc["charges"] = _charges_to_json(field.charges)
        doc["scale"] = float(field.scale)
    elif isinstance(field, LinearField):
        doc["kind"] = "linear"
        doc["matrix"] = [[float(v) for v in row] for row in field.matrix]
    elif isinstance(field, DField):
        doc["kind"] = "dfield"
        m = field.map
        if isinstance(m, HedgehogMap):
            doc["map"] = {"kind": "hedgehog", "center": list(m.center),
                          "signs": list(m.signs)}
        else:
            doc["map"] = {"kind": "constant", "value": list(m.value)}
        doc["normalize"] = bool(field.normalize)
    elif isinstance(field, SampledField):
        doc["kind"] = "sampled"
        doc["origin"] = [float(v) for v in field.origin]
        doc["spacing"] = float(field.spacing)
        doc["dims"] = [int(d) for d in field.values.shape[:3]]
        blob = os.path.splitext(path)[0] + ".bin"
        # x-fastest node order with the 3 components contiguous per node
        field.values.transpose(2, 1, 0, 3).astype("<f8").tofile(blob)
        doc["data"] = os.path.basename(blob)
        doc["singularities"] = _charges_to_json(field.singularities())
    else:
        raise InvalidInput(f"cannot serialize field type {type(field).__name__}")
    _dump_json(doc, path)
    return path


def load_field(path: str) -> Field:
    doc = _load_json(path)
    kind = doc.get("kind")
    conv = FieldConvention(flux_unit=float(doc.get("flux_unit", 1.0)))
    if kind == "coulomb":
        bg = None
        bgdoc = doc.get("background")
        if bgdoc:
            if bgdoc["kind"] == "constant":
                bg = ConstantBackground(bgdoc["value"])
            elif bgdoc["kind"] == "swirl":
                bg = SwirlBackground(float(bgdoc["amplitude"]))
            else:
                raise InvalidInput(f"unknown background kind {bgdoc['kind']!r}")
        return CoulombField(_charges_from_json(doc["charges"]), background=bg,
                            convention=conv)
    if kind == "mollified_coulomb":
        return MollifiedCoulombField(_charges_from_json(doc["charges"]),
                                     scale=float(doc["scale"]), convention=conv)
    if kind == "linear":
        return LinearField(np.asarray(doc["matrix"], dtype=float), convention=conv)
    if kind == "dfield":
        mdoc = doc["map"]
        if mdoc["kind"] == "hedgehog":
            m = HedgehogMap(tuple(mdoc.get("center", (0.0, 0.0, 0.0))),
                            tuple(mdoc.get("signs", (1, 1, 1))))
        elif mdoc["kind"] == "constant":
            m = ConstantMap(tuple(mdoc["value"]))
        else:
            raise InvalidInput(f"unknown map kind {mdoc['kind']!r}")
        return d_field(m, normalize=bool(doc.get("normalize", True)),
                       convention=conv)
    if kind == "sampled":
        dims = tuple(int(d) for d in doc["dims"])
        blob = os.path.join(os.path.dirname(os.path.abspath(path)), doc["data"])
        raw = np.fromfile(blob, dtype="<f8")
        expect = dims[0] * dims[1] * dims[2] * 3
        if raw.size != expect:
            raise InvalidInput(
                f"blob {blob} holds {raw.size} floats, header implies {expect}")
        vals = raw.reshape(dims[2], dims[1], dims[0], 3).transpose(2, 1, 0, 3)
        sings = _charges_from_json(doc.get("singularities", []))
        return SampledField(doc["origin"], float(doc["spacing"]), vals,
                            singularities=sings, convention=conv)
    raise InvalidInput(f"unknown field kind {kind!r}")


# ----------------------------------------------------------------------
# scans
# ----------------------------------------------------------------------

def save_scan(report: ScanReport, csv_path: str, summary_path: str = None):
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SCAN_COLUMNS)
        for row in report.rows:
            out = [repr(float(v)) for v in row[:6]]
            out.append(str(int(row[6])))
            w.writerow(out)
    if summary_path:
        _dump_json(report.summary(), summary_path)
    return csv_path


# ----------------------------------------------------------------------
# decompositions
# ----------------------------------------------------------------------

def save_decomposition(choice, dec, path: str, seed: int = None):
    lat = dec.lattice
    doc = {
        "eps": lat.eps,
        "translation": [float(v) for v in lat.translation],
        "n_cubes": lat.n_sites,
        "n_bad": dec.n_bad,
        "flux_unit": dec.flux_unit,
        "sites": [[float(v) for v in s] for s in lat.sites],
        "fluxes": [None if not np.isfinite(f) else float(f) for f in dec.fluxes],
        "degrees": [int(d) for d in dec.degrees],
        "good": [bool(g) for g in dec.good],
        "bad_volume": dec.bad_volume,
    }
    if choice is not None:
        doc["selection"] = {"score": choice.score, "n_candidates": choice.n_candidates,
                            "n_surviving": choice.n_surviving,
                            "max_int_deviation": choice.max_int_deviation,
                            "seed": choice.seed}
    if seed is not None:
        doc["seed"] = int(seed)
    _dump_json(doc, path)
    return path


def save_sweep(sweep, path: str):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "a_x", "a_y", "a_z", "n_cubes", "n_bad", "volume"])
        for r in sweep.rows:
            w.writerow([repr(float(r["eps"]))] + [repr(float(v)) for v in r["a"]]
                       + [str(r["n_cubes"]), str(r["n_bad"]), repr(float(r["volume"]))])
    return path


# ----------------------------------------------------------------------
# currents and certificates
# ----------------------------------------------------------------------

def save_current(current: Current1, path: str):
    doc = {"mass": current.mass,
           "segments": [{"start": [float(v) for v in s.start],
                         "end": [float(v) for v in s.end],
                         "multiplicity": int(s.multiplicity)}
                        for s in current.segments]}
    _dump_json(doc, path)
    return path


def load_current(path: str) -> Current1:
    doc = _load_json(path)
    segs = [CurrentSegment(tuple(s["start"]), tuple(s["end"]), int(s["multiplicity"]))
            for s in doc["segments"]]
    return Current1(segs)


def save_current_csv(current: Current1, path: str):
    """One row per segment: endpoints and multiplicity (plot-ready polylines)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x0", "y0", "z0", "x1", "y1", "z1", "multiplicity"])
        for s in current.segments:
            w.writerow([repr(float(v)) for v in s.start]
                       + [repr(float(v)) for v in s.end] + [str(s.multiplicity)])
    return path


def save_certificate(cert: DualCertificate, mass: float, gap: float, ok: bool,
                     path: str):
    doc = {"dual_value": cert.value,
           "mass": float(mass),
           "gap": float(gap),
           "optimal": bool(ok),
           "positions": [[float(v) for v in p] for p in cert.positions],
           "degrees": [int(d) for d in cert.degrees],
           "potentials": [float(v) for v in cert.potentials]}
    _dump_json(doc, path)
    return path


def save_singularities(sings, path: str):
    _dump_json({"singularities": _charges_to_json(sings)}, path)
    return path


def load_singularities(path: str):
    doc = _load_json(path)
    rows = doc["singularities"] if isinstance(doc, dict) else doc
    return _charges_from_json(rows)


# ----------------------------------------------------------------------
# asymptotics tables
# ----------------------------------------------------------------------

def save_table(rows, path: str, columns=None):
    """Generic list-of-dicts to CSV with a fixed column order."""
    if not rows:
        columns = columns or []
    else:
        columns = columns or list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            out = []
            for c in columns:
                v = r.get(c, "")
                if isinstance(v, float):
                    out.append(repr(v))
                else:
                    out.append(str(v))
            w.writerow(out)
    return path
