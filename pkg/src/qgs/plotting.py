"""Static figures (SVG or PNG, chosen by file suffix) via the Agg backend."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "qgs"
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402


def _save(fig, path):
    # fixed metadata keeps SVG output byte-stable across runs
    meta = {"Date": None} if str(path).endswith(".svg") else {}
    fig.savefig(path, metadata=meta, bbox_inches="tight")
    plt.close(fig)


def plot_planar_packing(packing, path, labels: bool = True):
    z = np.asarray(packing.planar["z"])
    rad = np.asarray(packing.planar["r"])
    n = packing.n_original
    fig, ax = plt.subplots(figsize=(6, 6))
    for i, (c, r) in enumerate(zip(z, rad)):
        if not (np.isfinite(c) and np.isfinite(r)):
            continue
        aux = i >= n
        ax.add_patch(Circle((c.real, c.imag), r, fill=not aux, alpha=0.25 if not aux else 1.0,
                            ec="0.5" if aux else "C0", ls="--" if aux else "-", lw=0.8))
        if labels and not aux:
            ax.text(c.real, c.imag, packing.vertices[i], ha="center", va="center", fontsize=7, clip_on=True)
    for _, u, v in packing.graph.edges:
        a, b = z[packing.tri.index[u]], z[packing.tri.index[v]]
        if np.isfinite(a) and np.isfinite(b):
            ax.plot([a.real, b.real], [a.imag, b.imag], "k-", lw=0.5)
    ax.set_aspect("equal")
    # the outer triangle dwarfs the rest; frame the interior circles
    inner = [i for i in range(len(z)) if i not in set(packing.planar.get("outer", ()))
             and np.isfinite(z[i]) and np.isfinite(rad[i])]
    if inner:
        lo = min(z[i].real - rad[i] for i in inner), min(z[i].imag - rad[i] for i in inner)
        hi = max(z[i].real + rad[i] for i in inner), max(z[i].imag + rad[i] for i in inner)
        pad = 0.1 * max(hi[0] - lo[0], hi[1] - lo[1])
        ax.set_xlim(lo[0] - pad, hi[0] + pad)
        ax.set_ylim(lo[1] - pad, hi[1] + pad)
    else:
        ax.autoscale_view()
    ax.set_title("planar packing")
    _save(fig, path)


def _cap_boundary(p, r, n=120):
    """Boundary circle of a cap with unit center p and chord radius r."""
    th = 2 * math.asin(min(r / 2, 1.0))
    p = np.asarray(p, float)
    a = np.array([1.0, 0, 0]) if abs(p[0]) < 0.9 else np.array([0, 1.0, 0])
    u = np.cross(p, a)
    u /= np.linalg.norm(u)
    w = np.cross(p, u)
    t = np.linspace(0, 2 * math.pi, n)
    return (math.cos(th) * p[:, None] + math.sin(th) * (np.outer(u, np.cos(t)) + np.outer(w, np.sin(t)))).T


def plot_sphere_packing(packing, path, title: str = "sphere packing"):
    """Orthographic views from +z and -z; hidden arcs are dashed."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 5))
    n = packing.n_original
    for ax, sgn in zip(axes, (1, -1)):
        ax.add_patch(Circle((0, 0), 1, fill=False, ec="0.7"))
        for i in range(len(packing.r)):
            pts = _cap_boundary(packing.P[i], packing.r[i])
            x, y, depth = pts[:, 0], sgn * pts[:, 1], sgn * pts[:, 2]
            col = "C0" if i < n else "0.6"
            front = np.where(depth >= 0, 1.0, np.nan)
            ax.plot(x * front, y * front, "-", color=col, lw=0.8)
            back = np.where(depth < 0, 1.0, np.nan)
            ax.plot(x * back, y * back, ":", color=col, lw=0.5)
        ax.set_aspect("equal")
        ax.set_xlim(-1.05, 1.05)
        ax.set_ylim(-1.05, 1.05)
        ax.set_title("view from " + ("+z" if sgn > 0 else "-z"))
        ax.axis("off")
    fig.suptitle(title)
    _save(fig, path)


def plot_bound_ratios(reports, path, title: str = "implied constants"):
    """Measured ratio per row, grouped by bound id, with the exact constant as a line."""
    groups = {}
    for rep in reports:
        if rep.ratio is not None and math.isfinite(rep.ratio):
            groups.setdefault(rep.bound_id, []).append(rep)
    fig, ax = plt.subplots(figsize=(7, 4))
    for j, (bid, rows) in enumerate(sorted(groups.items())):
        xs = np.arange(len(rows))
        ax.plot(xs, [r.ratio for r in rows], "o", ms=3, color=f"C{j}", label=bid)
        if rows[0].constant is not None:
            ax.axhline(rows[0].constant, color=f"C{j}", lw=0.7, ls="--")
    ax.set_xlabel("row")
    ax.set_ylabel("ratio")
    ax.set_yscale("log")
    ax.set_title(title)
    if groups:
        ax.legend(fontsize=7)
    _save(fig, path)


def plot_tree_table(rows, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for j, prof in enumerate(("equilateral", "dyadic")):
        sel = [r for r in rows if r.profile == prof]
        ax.plot([r.h for r in sel], [r.ratio for r in sel], "o-", color=f"C{j}", label=prof)
    ax.axhline(1.0, color="k", lw=0.6)
    ax.set_yscale("log")
    ax.set_xlabel("h")
    ax.set_ylabel("planar bound / diameter bound")
    ax.legend()
    _save(fig, path)
