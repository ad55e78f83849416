"""Command line driver.

Subcommands: generate, fluxscan, decompose, regularize, connect, analyze.
Global flags (--config/--seed/--out/--quadrature-n/--tol/--no-plot) may appear
before or after the subcommand; a JSON config file supplies the same settings
plus per-command parameters, with explicit flags taking precedence.

Exit codes: 0 the run's quantitative check passed, 1 it failed (violations,
uncovered translation search, uncertified connection, divergent norm), 2 the
input was malformed.  Reports are CSV/JSON, byte-identical for identical
config and seed; figures are rendered next to them unless --no-plot.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import serialization as ser
from .asymptotics import hoelder_bound_check, pairing_growth
from .connection import certify, dual_value, greedy_connection, optimal_connection
from .decomposition import bad_volume_sweep, decompose
from .errors import (CertificateInvalid, FieldDomainError, InvalidInput,
                     NonZeroTotalFlux, NormEstimateDiverged, NoValidTranslation,
                     QuadratureIllConditioned, SolverFailure)
from .fields import Singularity, sample_field
from .flux import integer_flux_scan
from .quadrature import QuadratureSpec
from .regularize import approximation_error, assemble

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_BADINPUT = 2

_DEFAULTS = {"seed": 0, "out": ".", "quadrature_n": 16, "tol": None, "plot": True}

# per-command keys a config file may carry
_CONFIG_KEYS = {"eps", "centers", "radii", "n_samples", "int_tol", "label_tol",
                "sweep", "sweep_samples", "n_f", "smooth_halfwidth", "delta",
                "grid", "error_grid", "k_list", "p", "exclusion_radii", "method"}


def _resolve_config(args) -> dict:
    cfg = dict(_DEFAULTS)
    path = getattr(args, "config", None)
    if path:
        with open(path) as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise InvalidInput("config file must hold a JSON object")
        unknown = set(doc) - set(_DEFAULTS) - _CONFIG_KEYS
        if unknown:
            raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
        cfg.update(doc)
    for key in ("seed", "out", "quadrature_n", "tol"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if getattr(args, "no_plot", False):
        cfg["plot"] = False
    cfg["seed"] = int(cfg["seed"])
    cfg["quadrature_n"] = int(cfg["quadrature_n"])
    return cfg


def _opt(args, cfg, name, default=None):
    """Effective value of a per-command option: flag, then config, then default."""
    v = getattr(args, name, None)
    if v is None:
        v = cfg.get(name, None)
    return default if v is None else v


def _parse_list(text, cast):
    try:
        vals = [cast(t) for t in str(text).replace(",", " ").split()]
    except ValueError as e:
        raise InvalidInput(f"bad list {text!r}: {e}")
    if not vals:
        raise InvalidInput(f"empty list {text!r}")
    return vals


def _outpath(cfg, name):
    os.makedirs(cfg["out"], exist_ok=True)
    return os.path.join(cfg["out"], name)


def _emit(path):
    print(f"wrote {path}")


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_generate(args, cfg) -> int:
    field = ser.load_field(args.spec)
    out = _outpath(cfg, "field.json")
    ser.save_field(field, out)
    _emit(out)
    sings = field.singularities()
    print(f"field kind {type(field).__name__}, {len(sings)} singularities, "
          f"flux unit {field.flux_unit:g}")
    if cfg["plot"]:
        from . import figures
        _emit(figures.field_slice_figure(field, _outpath(cfg, "field.png")))
    return EXIT_OK


def cmd_fluxscan(args, cfg) -> int:
    field = ser.load_field(args.field)
    tol = float(_opt(args, cfg, "tol", 1e-6))
    centers = int(_opt(args, cfg, "centers", 50))
    radii = int(_opt(args, cfg, "radii", 4))
    quad = QuadratureSpec(cfg["quadrature_n"], "gauss")
    report = integer_flux_scan(field, centers, radii, tol=tol, seed=cfg["seed"],
                               quad=quad)
    ser.save_scan(report, _outpath(cfg, "scan.csv"),
                  _outpath(cfg, "scan_summary.json"))
    _emit(_outpath(cfg, "scan.csv"))
    _emit(_outpath(cfg, "scan_summary.json"))
    if cfg["plot"]:
        from . import figures
        _emit(figures.scan_figure(report, _outpath(cfg, "scan.png")))
    ok = report.n_violations == 0
    print(f"{'PASS' if ok else 'FAIL'}: {report.n_violations} violations in "
          f"{report.n_samples - report.n_skipped} cubes "
          f"(max deviation {report.max_deviation:.3e}, tol {tol:g})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_decompose(args, cfg) -> int:
    field = ser.load_field(args.field)
    eps = _opt(args, cfg, "eps")
    if eps is None:
        raise InvalidInput("decompose needs --eps (or 'eps' in the config)")
    qn = cfg["quadrature_n"]
    choice, dec = decompose(
        field, float(eps),
        n_samples=int(_opt(args, cfg, "n_samples", 64)),
        seed=cfg["seed"],
        selection_quad=QuadratureSpec(min(qn, 12), "gauss"),
        quad=QuadratureSpec(qn, "gauss"),
        int_tol=float(_opt(args, cfg, "int_tol", 1e-5)),
        label_tol=float(_opt(args, cfg, "label_tol", 1e-6)))
    out = _outpath(cfg, "decomposition.json")
    ser.save_decomposition(choice, dec, out, seed=cfg["seed"])
    _emit(out)
    print(f"{dec.lattice.n_sites} cubes, {dec.n_bad} bad, "
          f"degree sum {dec.degree_sum()}, bad volume {dec.bad_volume:.6g}")
    if cfg["plot"]:
        from . import figures
        _emit(figures.decomposition_figure(dec, _outpath(cfg, "decompose.png")))
    sweep_spec = _opt(args, cfg, "sweep")
    if sweep_spec:
        eps_list = _parse_list(sweep_spec, float)
        sweep = bad_volume_sweep(field, eps_list, seed=cfg["seed"],
                                 n_samples=int(_opt(args, cfg, "sweep_samples", 16)))
        _emit(ser.save_sweep(sweep, _outpath(cfg, "sweep.csv")))
        if sweep.slope is not None:
            print(f"bad-volume slope {sweep.slope:.3f} over eps {eps_list}")
        else:
            print("bad-volume slope undefined (an eps had zero bad volume)")
        if cfg["plot"]:
            from . import figures
            _emit(figures.sweep_figure(sweep, _outpath(cfg, "sweep.png")))
    return EXIT_OK


def cmd_regularize(args, cfg) -> int:
    field = ser.load_field(args.field)
    eps = _opt(args, cfg, "eps")
    if eps is None:
        raise InvalidInput("regularize needs --eps (or 'eps' in the config)")
    qn = cfg["quadrature_n"]
    choice, dec = decompose(field, float(eps),
                            n_samples=int(_opt(args, cfg, "n_samples", 64)),
                            seed=cfg["seed"],
                            selection_quad=QuadratureSpec(min(qn, 12), "gauss"),
                            quad=QuadratureSpec(qn, "gauss"))
    reg = assemble(field, dec,
                   n_f=int(_opt(args, cfg, "n_f", 16)),
                   smooth_halfwidth=int(_opt(args, cfg, "smooth_halfwidth", 2)),
                   delta=float(_opt(args, cfg, "delta", 0.0)))
    grid = int(_opt(args, cfg, "grid", 61))
    spacing = 2.0 / (grid - 1)
    sampled = sample_field(reg, (-1.0, -1.0, -1.0), spacing, (grid, grid, grid),
                           singularities=reg.singularities())
    _emit(ser.save_field(sampled, _outpath(cfg, "regularized.json")))
    _emit(ser.save_singularities(reg.singularities(),
                                 _outpath(cfg, "singularities.json")))
    diag = dict(reg.diagnostics)
    err_grid = int(_opt(args, cfg, "error_grid", 48))
    if err_grid >= 8:
        diag["l1_error_vs_input"] = approximation_error(
            field, reg, n=err_grid, exclude_radius=0.05)
    diag["seed"] = cfg["seed"]
    diag["export_grid"] = grid
    _emit(ser.save_json(diag, _outpath(cfg, "diagnostics.json")))
    print(f"{dec.n_bad} bad cubes of {dec.lattice.n_sites}; "
          f"gauge residual {diag['gauge_d_residual_max']:.3e}, "
          f"harmonic residual {diag['laplace_residual_max']:.3e}")
    if "l1_error_vs_input" in diag:
        print(f"L1 error against input {diag['l1_error_vs_input']:.6g}")
    if cfg["plot"]:
        from . import figures
        _emit(figures.field_slice_figure(reg, _outpath(cfg, "regularize.png"),
                                         half=0.95))
    return EXIT_OK


def _load_singularities_any(path):
    """Accept a singularity list, a field description, or a decomposition."""
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, dict) and "singularities" in doc:
        return ser.load_singularities(path)
    if isinstance(doc, dict) and "kind" in doc:
        return ser.load_field(path).singularities()
    if isinstance(doc, dict) and "degrees" in doc and "sites" in doc:
        out = []
        for site, deg, good in zip(doc["sites"], doc["degrees"], doc["good"]):
            if not good and deg != 0:
                out.append(Singularity(tuple(site), int(deg)))
        return out
    if isinstance(doc, list):
        return ser.load_singularities(path)
    raise InvalidInput(f"{path} holds neither singularities, a field, "
                       "nor a decomposition")


def cmd_connect(args, cfg) -> int:
    sings = _load_singularities_any(args.input)
    tol = float(_opt(args, cfg, "tol", 1e-9))
    greedy = greedy_connection(sings)
    optimal = optimal_connection(sings)
    dual = dual_value(sings)
    ok, gap = certify(optimal, dual, tol=tol)
    _emit(ser.save_current(greedy, _outpath(cfg, "connection_greedy.json")))
    _emit(ser.save_current_csv(greedy, _outpath(cfg, "connection_greedy.csv")))
    _emit(ser.save_current(optimal, _outpath(cfg, "connection_optimal.json")))
    _emit(ser.save_current_csv(optimal, _outpath(cfg, "connection_optimal.csv")))
    _emit(ser.save_certificate(dual, optimal.mass, gap, ok,
                               _outpath(cfg, "certificate.json")))
    if cfg["plot"]:
        from . import figures
        _emit(figures.connection_figure(sings, optimal,
                                        _outpath(cfg, "connect.png")))
    print(f"greedy mass {greedy.mass:.9f}, optimal mass {optimal.mass:.9f}, "
          f"dual value {dual.value:.9f}, gap {gap:.3e}")
    print("CERTIFIED optimal" if ok else "NOT certified")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_analyze(args, cfg) -> int:
    field = ser.load_field(args.field)
    k_list = _parse_list(_opt(args, cfg, "k_list", "1,2,4,8"), int)
    p = _opt(args, cfg, "p")
    if p is not None:
        radii = tuple(_parse_list(_opt(args, cfg, "exclusion_radii",
                                       "0.1,0.05,0.025"), float))
        rows = hoelder_bound_check(field, float(p), k_list, radii=radii)
        columns = ["k", "pairing", "bound", "ratio"]
    else:
        rows = pairing_growth(field, k_list)
        columns = ["k", "pairing", "ratio"]
    _emit(ser.save_table(rows, _outpath(cfg, "analyze.csv"), columns=columns))
    if cfg["plot"]:
        from . import figures
        _emit(figures.asymptotics_figure(rows, _outpath(cfg, "analyze.png")))
    last = rows[-1]
    if p is not None:
        print(f"k = {last['k']}: pairing {last['pairing']:.6g} <= "
              f"bound {last['bound']:.6g} (ratio {last['ratio']:.4f})")
        if any(r["pairing"] > r["bound"] * (1 + 1e-9) for r in rows):
            print("FAIL: pairing exceeds the product bound")
            return EXIT_FAIL
    else:
        print(f"k = {last['k']}: pairing {last['pairing']:.6g}, "
              f"ratio to gradient norm {last['ratio']:.6g}")
    return EXIT_OK


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------

def _add_global_flags(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON config file")
    p.add_argument("--seed", type=int, default=d, help="RNG seed (default 0)")
    p.add_argument("--out", default=d, help="output directory (default .)")
    p.add_argument("--quadrature-n", dest="quadrature_n", type=int, default=d,
                   help="nodes per face edge for flux quadrature (default 16)")
    p.add_argument("--tol", type=float, default=d,
                   help="pass/fail tolerance (per-command default)")
    p.add_argument("--no-plot", dest="no_plot", action="store_true",
                   default=argparse.SUPPRESS if suppress else False,
                   help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intflux",
        description="integer-flux vector fields: scan, decompose, regularize, "
                    "connect, analyze")
    _add_global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="cmd", metavar="command")

    def new(name, fn, helptext):
        p = sub.add_parser(name, help=helptext)
        _add_global_flags(p, suppress=True)
        p.set_defaults(func=fn)
        return p

    p = new("generate", cmd_generate, "validate a field description and "
            "write the normalized form")
    p.add_argument("spec", help="field description JSON")

    p = new("fluxscan", cmd_fluxscan, "random-cube integer flux scan")
    p.add_argument("field", help="field description JSON")
    p.add_argument("--centers", type=int, default=None)
    p.add_argument("--radii", type=int, default=None,
                   help="cube sizes per center")

    p = new("decompose", cmd_decompose, "translated cubic decomposition "
            "and good/bad labels")
    p.add_argument("field")
    p.add_argument("--eps", type=float, default=None, help="cube side")
    p.add_argument("--n-samples", dest="n_samples", type=int, default=None,
                   help="candidate translations")
    p.add_argument("--int-tol", dest="int_tol", type=float, default=None)
    p.add_argument("--label-tol", dest="label_tol", type=float, default=None)
    p.add_argument("--sweep", default=None,
                   help="comma list of eps for the bad-volume sweep")
    p.add_argument("--sweep-samples", dest="sweep_samples", type=int,
                   default=None)

    p = new("regularize", cmd_regularize, "smooth divergence-free "
            "replacement away from quantized singularities")
    p.add_argument("field")
    p.add_argument("--eps", type=float, default=None, help="cube side")
    p.add_argument("--n-samples", dest="n_samples", type=int, default=None)
    p.add_argument("--n-f", dest="n_f", type=int, default=None,
                   help="face cells per edge")
    p.add_argument("--smooth-halfwidth", dest="smooth_halfwidth", type=int,
                   default=None)
    p.add_argument("--delta", type=float, default=None,
                   help="global mollification width (0 = off)")
    p.add_argument("--grid", type=int, default=None,
                   help="export grid nodes per axis")
    p.add_argument("--error-grid", dest="error_grid", type=int, default=None,
                   help="grid for the L1 error against the input (< 8 skips)")

    p = new("connect", cmd_connect, "minimal connection of quantized "
            "singularities with an optimality certificate")
    p.add_argument("input", help="singularity list, field, or decomposition JSON")

    p = new("analyze", cmd_analyze, "logarithmic pairing growth and "
            "Hoelder product bound")
    p.add_argument("field")
    p.add_argument("--k-list", dest="k_list", default=None,
                   help="comma list of integer scales")
    p.add_argument("--p", type=float, default=None,
                   help="integrability order for the product bound")
    p.add_argument("--exclusion-radii", dest="exclusion_radii", default=None,
                   help="comma list of shrinking exclusion radii")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "cmd", None) is None:
        parser.print_help()
        return EXIT_BADINPUT
    try:
        cfg = _resolve_config(args)
        return args.func(args, cfg)
    except (InvalidInput, FieldDomainError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_BADINPUT
    except (FileNotFoundError, IsADirectoryError, json.JSONDecodeError,
            KeyError) as e:
        print(f"input error: {e!r}", file=sys.stderr)
        return EXIT_BADINPUT
    except (NoValidTranslation, NonZeroTotalFlux, QuadratureIllConditioned,
            SolverFailure, CertificateInvalid, NormEstimateDiverged) as e:
        print(f"failure: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
