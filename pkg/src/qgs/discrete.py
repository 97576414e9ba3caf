"""Weighted combinatorial Laplacians: assembly, spectra, Rayleigh quotients and
the scalar spectral maps (subdivision and equilateral metric correspondence)."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

import numpy as np
import scipy.linalg

from .graphs import CombinatorialGraph, WeightedGraph, subdivide_combinatorial

log = logging.getLogger(__name__)

CLUSTER_RTOL = 1e-8


class SpectrumError(RuntimeError):
    pass


def cluster_multiplicities(values, rtol: float = CLUSTER_RTOL) -> list[int]:
    """Multiplicity of each value's cluster (consecutive gaps below rtol*max(1,|x|))."""
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        return []
    groups = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[i - 1] < rtol * max(1.0, abs(vals[i])):
            groups[-1].append(i)
        else:
            groups.append([i])
    mult = [0] * len(vals)
    for g in groups:
        for i in g:
            mult[i] = len(g)
    return mult


@dataclass
class Spectrum:
    """Nondecreasing eigenvalues (repeated by multiplicity) with provenance."""

    values: np.ndarray
    solver: str
    residual: float = 0.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.values) < -1e-12 * max(1.0, float(np.max(np.abs(self.values), initial=0.0)))):
            raise SpectrumError("spectrum is not sorted")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def lam(self, k: int) -> float:
        """k-th eigenvalue, 1-based like the literature."""
        return float(self.values[k - 1])

    @property
    def multiplicities(self) -> list[int]:
        return cluster_multiplicities(self.values)

    def distinct(self) -> list[tuple[float, int]]:
        out = []
        mult = self.multiplicities
        i = 0
        while i < len(self.values):
            out.append((float(np.mean(self.values[i:i + mult[i]])), mult[i]))
            i += mult[i]
        return out

    def to_dict(self) -> dict:
        return {"values": [float(x) for x in self.values], "multiplicities": self.multiplicities,
                "solver": self.solver, "residual": float(self.residual)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self, with_solver: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["k", "lambda"] + (["multiplicity", "solver"] if with_solver else [])
        w.writerow(header)
        for k, (x, mult) in enumerate(zip(self.values, self.multiplicities), start=1):
            row = [k, f"{x:.17g}"] + ([mult, self.solver] if with_solver else [])
            w.writerow(row)
        return buf.getvalue()


class LaplacianAssembly(NamedTuple):
    apply: Callable[[np.ndarray], np.ndarray]  # f -> L_{m,mu} f
    symmetric: np.ndarray  # M^{-1/2} K M^{-1/2}
    stiffness: np.ndarray
    mass: np.ndarray  # diagonal of M


def stiffness_matrix(G: WeightedGraph) -> np.ndarray:
    W = G.graph.adjacency_matrix(G.mu)
    return np.diag(W.sum(axis=1)) - W


def assemble_laplacian(G: WeightedGraph) -> LaplacianAssembly:
    K = stiffness_matrix(G)
    m = G.mass_vector()

    def apply(f):
        f = np.asarray(f)
        return (K @ f) / (m if f.ndim == 1 else m[:, None])

    s = 1.0 / np.sqrt(m)
    A = s[:, None] * K * s[None, :]
    A = 0.5 * (A + A.T)
    return LaplacianAssembly(apply, A, K, m)


def _eigh(A):
    try:
        return scipy.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise SpectrumError(f"dense symmetric eigensolver did not converge: {exc}") from exc


def eigenpairs(G: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and L_{m,mu}-eigenvectors (columns, l2_m-orthonormal)."""
    asm = assemble_laplacian(G)
    w, U = _eigh(asm.symmetric)
    V = U / np.sqrt(asm.mass)[:, None]
    return w, V


def eigenvalues(G: WeightedGraph) -> Spectrum:
    asm = assemble_laplacian(G)
    w, U = _eigh(asm.symmetric)
    V = U / np.sqrt(asm.mass)[:, None]
    R = asm.apply(V) - V * w[None, :]
    # residual measured in the symmetric frame, relative to ||A||
    Rs = R * np.sqrt(asm.mass)[:, None]
    scale = max(np.linalg.norm(asm.symmetric, 2), 1e-300)
    residual = float(np.max(np.linalg.norm(Rs, axis=0)) / scale)
    if residual > 1e-10:
        raise SpectrumError(f"eigenpair residual {residual:.3e} exceeds 1e-10")
    w = np.where(np.abs(w) < 1e-13 * scale, 0.0, w)
    return Spectrum(np.sort(w), "dense-symmetric", residual)


def normalized_laplacian(graph: CombinatorialGraph, omega: Mapping[str, float] | None = None) -> WeightedGraph:
    """Weighted graph with m(v) = omega-degree and mu = omega."""
    g = CombinatorialGraph(graph.vertices, graph.edges)
    if omega is None:
        omega = {e: 1.0 for e in g.edge_map}
    omega = {e: float(omega[e]) for e in g.edge_map}
    m = {v: sum(omega[e] for e in g.incidence[v]) for v in g.vertices}
    return WeightedGraph(g, m, omega)


@dataclass
class QuadraticFormValue:
    energy: float
    norm2: float
    mean: np.ndarray  # sum_v m(v) f(v)

    @property
    def quotient(self) -> float:
        return self.energy / self.norm2

    def mean_residual(self) -> float:
        return float(np.linalg.norm(self.mean))


def as_vertex_array(G: WeightedGraph, f) -> np.ndarray:
    if isinstance(f, Mapping):
        arr = np.array([np.atleast_1d(f[v]) for v in G.graph.vertices])
    else:
        arr = np.asarray(f)
        if arr.ndim == 1:
            arr = arr[:, None]
    if arr.shape[0] != G.graph.n_vertices:
        raise ValueError("test function has wrong length")
    return arr


def rayleigh_quotient(G: WeightedGraph, f) -> QuadraticFormValue:
    """q(f), ||f||^2 in l2_m and the weighted mean, for scalar or vector valued f."""
    F = as_vertex_array(G, f)
    idx = G.graph.index
    energy = 0.0
    for e, u, v in G.graph.edges:
        d = F[idx[u]] - F[idx[v]]
        energy += G.mu[e] * float(np.real(np.vdot(d, d)))
    m = G.mass_vector()
    norm2 = float(np.sum(m * np.sum(np.abs(F) ** 2, axis=1)))
    if norm2 <= 0:
        raise ValueError("test function has zero norm")
    mean = (m[:, None] * F).sum(axis=0)
    return QuadraticFormValue(energy, norm2, mean)


def _domain(x: float, lo: float, hi: float, what: str, hi_open: bool = False) -> float:
    tol = 1e-12
    if x < lo - tol or x > hi + tol or (hi_open and x >= hi):
        raise ValueError(f"{what}: argument {x!r} outside domain")
    return min(max(x, lo), hi)


def subdivision_spectrum_map(lam: float) -> float:
    """R(lam) = 4 lam - 2 lam^2 on [0, 2]."""
    lam = _domain(float(lam), 0.0, 2.0, "subdivision_spectrum_map")
    return 4.0 * lam - 2.0 * lam * lam


def von_below_transform(lam_norm: float) -> float:
    """arccos(1 - lam)^2 on [0, 2)."""
    lam = _domain(float(lam_norm), 0.0, 2.0, "von_below_transform", hi_open=True)
    return float(np.arccos(1.0 - lam) ** 2)


@dataclass
class SubdivisionPairing:
    parent: np.ndarray  # parent eigenvalues kept for comparison
    mapped: np.ndarray  # sorted R(lam') over the lower branch of the subdivision
    skipped_parent: list[float]
    skipped_child: list[float]

    @property
    def max_error(self) -> float:
        if len(self.parent) != len(self.mapped):
            return float("inf")
        if len(self.parent) == 0:
            return 0.0
        return float(np.max(np.abs(self.parent - self.mapped)))


def subdivision_pairing(graph: CombinatorialGraph, omega: Mapping[str, float] | None = None,
                        skip: float = 1e-6) -> SubdivisionPairing:
    """Compare the normalized spectrum of G with R applied to the lower half of its subdivision's."""
    G = normalized_laplacian(graph, omega)
    parent = eigenvalues(G).values
    child = eigenvalues(subdivide_combinatorial(G)).values
    lower = child[child <= 1.0 + skip]
    keep_child = lower[np.abs(lower - 1.0) >= skip]
    skipped_child = [float(x) for x in lower[np.abs(lower - 1.0) < skip]]
    # parent lam <-> lam' = 1 - sqrt(1 - lam/2)
    branch = 1.0 - np.sqrt(np.clip(1.0 - parent / 2.0, 0.0, None))
    keep_parent = parent[np.abs(branch - 1.0) >= skip]
    skipped_parent = [float(x) for x in parent[np.abs(branch - 1.0) < skip]]
    if skipped_child or skipped_parent:
        log.info("subdivision pairing skipped %d child / %d parent values near lam'=1",
                 len(skipped_child), len(skipped_parent))
    mapped = np.sort([subdivision_spectrum_map(x) for x in keep_child])
    return SubdivisionPairing(keep_parent, mapped, skipped_parent, skipped_child)
