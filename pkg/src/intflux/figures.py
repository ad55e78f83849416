"""Report figures rendered next to the delimited outputs.

All functions take data already computed elsewhere and a target path, render
with the Agg backend, and return the path.  Nothing here recomputes physics;
keep the plots honest to whatever the CSV/JSON files contain.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def scan_figure(report, path):
    """Histogram of distance to the nearest integer flux plus radius scatter."""
    rows = report.rows
    ok = rows[:, 6] == 0.0
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.6))
    if ok.any():
        dev = rows[ok, 5]
        ax0.hist(np.log10(np.maximum(dev, 1e-16)), bins=40, color="tab:blue")
    ax0.set_xlabel("log10 distance to nearest integer")
    ax0.set_ylabel("count")
    ax0.set_title(f"{int(ok.sum())} cubes, {report.n_violations} violations")
    if ok.any():
        ax1.semilogy(rows[ok, 3], np.maximum(rows[ok, 5], 1e-16), ".", ms=3,
                     color="tab:blue")
    ax1.axhline(report.tol, color="tab:red", lw=1, label="tolerance")
    ax1.set_xlabel("cube side")
    ax1.set_ylabel("deviation")
    ax1.legend(loc="upper left", fontsize=8)
    return _save(fig, path)


def decomposition_figure(dec, path):
    """Cube sites projected to the xy-plane, bad cubes highlighted."""
    lat = dec.lattice
    fig, ax = plt.subplots(figsize=(5, 5))
    good = np.asarray(dec.good)
    ax.plot(lat.sites[good, 0], lat.sites[good, 1], ".", ms=2, color="0.7",
            label=f"good ({int(good.sum())})")
    bad = ~good
    if bad.any():
        ax.scatter(lat.sites[bad, 0], lat.sites[bad, 1], s=22, c="tab:red",
                   marker="s", label=f"bad ({int(bad.sum())})")
    th = np.linspace(0, 2 * np.pi, 200)
    ax.plot(np.cos(th), np.sin(th), "-", lw=0.8, color="k")
    ax.set_aspect("equal")
    ax.set_title(f"eps = {lat.eps:g}, a = ({lat.translation[0]:.3f}, "
                 f"{lat.translation[1]:.3f}, {lat.translation[2]:.3f})")
    ax.legend(loc="upper right", fontsize=8)
    return _save(fig, path)


def sweep_figure(sweep, path):
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    eps = np.array([r["eps"] for r in sweep.rows])
    vol = np.array([r["volume"] for r in sweep.rows])
    ax.loglog(eps, vol, "o-", color="tab:blue", label="bad volume")
    if sweep.slope is not None and np.all(vol > 0):
        ref = vol[0] * (eps / eps[0]) ** 3
        ax.loglog(eps, ref, "--", color="0.5", label="slope 3 reference")
        ax.set_title(f"fitted slope {sweep.slope:.3f}")
    ax.set_xlabel("eps")
    ax.set_ylabel("volume of bad cubes")
    ax.legend(fontsize=8)
    return _save(fig, path)


def field_slice_figure(field, path, z=0.0, half=0.97, n=120):
    """Magnitude heat map of the z = const slice with a sparse direction overlay."""
    xs = np.linspace(-half, half, n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([X, Y, np.full_like(X, z)], axis=-1).reshape(-1, 3)
    vals = field.evaluate(pts).reshape(n, n, 3)
    mag = np.linalg.norm(vals, axis=-1)
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    im = ax.imshow(np.log10(np.maximum(mag, 1e-12)).T, origin="lower",
                   extent=[-half, half, -half, half], cmap="viridis")
    fig.colorbar(im, ax=ax, label="log10 |X|")
    step = max(1, n // 16)
    sl = slice(step // 2, None, step)
    U, V = vals[sl, sl, 0], vals[sl, sl, 1]
    nn = np.sqrt(U**2 + V**2)
    nz = nn > 1e-12
    U = np.where(nz, U / np.maximum(nn, 1e-12), 0.0)
    V = np.where(nz, V / np.maximum(nn, 1e-12), 0.0)
    ax.quiver(X[sl, sl], Y[sl, sl], U, V, color="w", scale=28, width=0.003)
    ax.set_title(f"slice z = {z:g}")
    return _save(fig, path)


def connection_figure(sings, current, path, title="minimal connection"):
    """Charges and connection segments projected to the xy-plane."""
    fig, ax = plt.subplots(figsize=(5, 5))
    th = np.linspace(0, 2 * np.pi, 200)
    ax.plot(np.cos(th), np.sin(th), "-", lw=0.8, color="k")
    for s in current.segments:
        ax.plot([s.start[0], s.end[0]], [s.start[1], s.end[1]], "-",
                lw=1.0 + 0.8 * (s.multiplicity - 1), color="tab:green")
    for s in sings:
        if s.degree > 0:
            ax.plot(s.pos[0], s.pos[1], "^", ms=7, color="tab:red")
        else:
            ax.plot(s.pos[0], s.pos[1], "v", ms=7, color="tab:blue")
        ax.annotate(f"{s.degree:+d}", (s.pos[0], s.pos[1]),
                    textcoords="offset points", xytext=(5, 4), fontsize=8)
    ax.set_aspect("equal")
    ax.set_title(f"{title}, mass = {current.mass:.6f}")
    return _save(fig, path)


def asymptotics_figure(rows, path):
    """Pairing (and bound when present) against k, with the ratio alongside."""
    k = np.array([r["k"] for r in rows], dtype=float)
    pairing = np.array([r["pairing"] for r in rows], dtype=float)
    has_bound = rows and "bound" in rows[0]
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(8.6, 3.4))
    ax0.plot(k, pairing, "o-", color="tab:blue", label="pairing")
    if has_bound:
        bound = np.array([r["bound"] for r in rows], dtype=float)
        ax0.plot(k, bound, "s--", color="tab:orange", label="product bound")
    ax0.set_xlabel("k")
    ax0.legend(fontsize=8)
    ratio = np.array([r["ratio"] for r in rows], dtype=float)
    ax1.plot(k, ratio, "o-", color="tab:green")
    ax1.set_xlabel("k")
    ax1.set_ylabel("ratio")
    return _save(fig, path)
