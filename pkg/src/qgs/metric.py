"""Kirchhoff Laplacian spectra on compact metric graphs.

Two independent routes: a secular system T(k) whose kernel at k > 0 is the
eigenspace of lambda = k^2, and a conforming P1 finite element discretization
whose eigenvalues bound the true ones from above.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import minimize_scalar

from .discrete import Spectrum, SpectrumError, eigenvalues as discrete_eigenvalues, eigenpairs
from .graphs import MetricGraph, simplify_metric

log = logging.getLogger(__name__)

ROOT_TOL = 1e-8
MULT_TOL = 1e-7
AMBIGUOUS_TOL = 1e-5


class SecularError(SpectrumError):
    pass


# ---------------------------------------------------------------------------
# secular system
# ---------------------------------------------------------------------------
#
# On edge e (x from source to target) phi_e = a cos(kx) + b sin(kx) (1+s)/s with
# s = k*l_ref: the b-basis tends to x/l_ref as k -> 0, so T(0) has the constants
# as its only kernel and all entries stay O(1). Derivatives are scaled by
# l_ref/(1+s).

@dataclass(frozen=True)
class SecularSystem:
    graph: MetricGraph  # simple representation
    l_ref: float
    rows: np.ndarray
    cols: np.ndarray
    kind: np.ndarray  # 0: const, 1: cos(kl), 2: sin(kl)/h, 3: h sin(kl)
    edge: np.ndarray
    coef: np.ndarray
    size: int

    @classmethod
    def build(cls, G: MetricGraph) -> "SecularSystem":
        H = simplify_metric(G)
        g = H.graph
        eidx = {e: j for j, (e, _, _) in enumerate(g.edges)}
        # incidences per vertex: (edge index, at_source)
        inc = {v: [] for v in g.vertices}
        for e, u, v in g.edges:
            inc[u].append((eidx[e], True))
            inc[v].append((eidx[e], False))
        rows, cols, kind, edge, coef = [], [], [], [], []

        def put(r, c, kd, j, cf):
            rows.append(r); cols.append(c); kind.append(kd); edge.append(j); coef.append(cf)

        def value(r, j, at_source, sign):
            if at_source:
                put(r, 2 * j, 0, j, sign)
            else:
                put(r, 2 * j, 1, j, sign)
                put(r, 2 * j + 1, 2, j, sign)

        r = 0
        for v in g.vertices:
            items = inc[v]
            for other in items[1:]:
                value(r, *items[0], 1.0)
                value(r, *other, -1.0)
                r += 1
            for j, at_source in items:
                if at_source:
                    put(r, 2 * j + 1, 0, j, 1.0)
                else:
                    put(r, 2 * j, 3, j, 1.0)
                    put(r, 2 * j + 1, 1, j, -1.0)
            r += 1
        size = 2 * g.n_edges
        assert r == size
        l_ref = float(np.mean(list(H.lengths.values())))
        return cls(H, l_ref, np.array(rows), np.array(cols), np.array(kind), np.array(edge),
                   np.array(coef), size)

    def matrices(self, ks) -> np.ndarray:
        """Row-normalized T(k) for an array of k > 0, shape (N, n, n)."""
        ks = np.atleast_1d(np.asarray(ks, dtype=float))
        lens = np.array([self.graph.lengths[e] for e, _, _ in self.graph.graph.edges])
        s = ks * self.l_ref
        h = s / (1.0 + s)
        kl = ks[:, None] * lens[None, :]
        c, sn = np.cos(kl), np.sin(kl)
        with np.errstate(divide="ignore", invalid="ignore"):
            sin_over_h = np.where(ks[:, None] > 0, sn / h[:, None], lens[None, :] / self.l_ref)
        basis = np.stack([np.ones_like(c), c, sin_over_h, h[:, None] * sn], axis=1)
        vals = self.coef[None, :] * basis[:, self.kind, self.edge]
        T = np.zeros((len(ks), self.size, self.size))
        T[:, self.rows, self.cols] = vals
        norms = np.linalg.norm(T, axis=2, keepdims=True)
        return T / norms

    def singular_values(self, ks) -> np.ndarray:
        """Ascending singular values, shape (N, n)."""
        sv = np.linalg.svd(self.matrices(ks), compute_uv=False)
        return sv[:, ::-1]

    def sigma_min(self, k: float) -> float:
        return float(self.singular_values([k])[0, 0])


def secular_sigma_min(G: MetricGraph, k: float) -> float:
    """Smallest singular value of the row-normalized secular matrix at k >= 0."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return SecularSystem.build(G).sigma_min(k)


def dirichlet_ceiling(G: MetricGraph, count: int) -> float:
    """k with lambda_count(Delta) <= k^2 (decoupled Dirichlet edges bound the spectrum above)."""
    vals = []
    for l in G.lengths.values():
        vals.extend((j * math.pi / l) for j in range(1, count + 1))
    vals.sort()
    return vals[count - 1]


def _refine(system: SecularSystem, lo: float, hi: float) -> float:
    """Locate a zero of sigma_min in [lo, hi].

    Brent's bounded search stalls near sqrt(eps) relative accuracy on a V-shaped
    minimum, so finish with symmetric V fits: sigma ~ c|k - r| on both sides.
    """
    res = minimize_scalar(system.sigma_min, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-9 * max(1.0, hi), "maxiter": 500})
    k0 = float(res.x)
    s0 = system.sigma_min(k0)
    for rel in (1e-6, 1e-8, 1e-10):
        d = rel * max(1.0, k0)
        sm, sp_ = system.singular_values([k0 - d, k0 + d])[:, 0]
        if sm + sp_ <= 0:
            break
        r = k0 + d * (sm - sp_) / (sm + sp_)
        sr = system.sigma_min(r)
        if sr < s0:
            k0, s0 = r, sr
    return k0


def _bracket_zeros(system: SecularSystem, lo: float, hi: float, depth: int = 0) -> list:
    """Zeros of sigma_min in [lo, hi]. Two roots inside one grid cell show up as a
    single dip, so after each zero both remaining sides are searched again."""
    k0 = _refine(system, lo, hi)
    if system.sigma_min(k0) > ROOT_TOL:
        return []
    out = [k0]
    if depth >= 4:
        return out
    gap = 1e-6 * max(1.0, k0)
    for a, b in ((lo, k0 - gap), (k0 + gap, hi)):
        if b - a <= gap:
            continue
        for r in _bracket_zeros(system, a, b, depth + 1):
            # interior minimum only; the V fit may jump back onto k0 itself
            if a + 0.1 * gap < r < b - 0.1 * gap:
                out.append(r)
    return sorted(out)


def _scan_roots(system: SecularSystem, k_hi: float, step: float, need: int, chunk: int = 64,
                split: bool = False):
    """Scan sigma_min on the grid j*step upwards until ``need`` positive
    eigenvalues (with multiplicity) are found or k_hi is passed. With ``split``
    every dip is searched for further zeros on both sides of the first.

    Returns (roots, k_scanned) with roots as (k, multiplicity, singular values).
    """
    ks = [0.0]
    sig = [0.0]
    found = []
    total = 0
    checked = 1
    j = 1
    while True:
        block = step * np.arange(j, j + chunk)
        j += chunk
        ks.extend(block.tolist())
        sig.extend(system.singular_values(block)[:, 0].tolist())
        for i in range(checked, len(ks) - 1):
            if not (sig[i] <= sig[i - 1] and sig[i] <= sig[i + 1]):
                continue
            lo, hi = max(ks[i - 1], 1e-14), ks[i + 1]
            for k0 in (_bracket_zeros(system, lo, hi) if split else [_refine(system, lo, hi)]):
                if k0 < 0.25 * step:
                    continue  # flank of the k = 0 root
                sv = system.singular_values([k0])[0]
                if sv[0] > ROOT_TOL:
                    continue
                near = [q for q, f in enumerate(found) if abs(k0 - f[0]) <= 1e-9 * max(1.0, k0)]
                if near:
                    q = near[0]
                    if sv[0] >= found[q][2][0]:
                        continue
                    total -= found[q][1]
                    found.pop(q)
                mult = int(np.sum(sv <= MULT_TOL))
                if mult < len(sv) and sv[mult] < AMBIGUOUS_TOL:
                    raise SecularError(f"multiplicity ambiguous at k={k0:.15g}: singular values {sv[:mult + 2]}")
                found.append((k0, mult, sv))
                total += mult
            found.sort(key=lambda f: f[0])
        checked = len(ks) - 1
        if total >= need or ks[-1] > k_hi:
            return found, ks[-1]


def eigenvalues_secular(G: MetricGraph, count: int, tol: float = ROOT_TOL,
                        max_halvings: int = 5, check_fem: bool = True) -> Spectrum:
    """Lowest ``count`` eigenvalues of the Kirchhoff Laplacian with multiplicities.

    The grid step is min(pi/(8 l_max), pi/(4 L)); since lambda_2 >= pi^2/L^2 this
    resolves the rise of sigma_min away from the k = 0 root. Finite elements
    (h = l_min/16) bound every eigenvalue from above; a secular value above its
    FEM counterpart means a root was missed. The scan is then repeated with
    split dips (close pairs inside one grid cell), and after that at half the
    step. Without the FEM check dips are always split.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if count == 1:
        return Spectrum(np.zeros(1), "secular", 0.0)
    system = SecularSystem.build(G)
    H = system.graph
    L = H.total_length
    step = min(math.pi / (8 * H.l_max), math.pi / (4 * L))
    k_hi = dirichlet_ceiling(H, count) * (1 + 1e-9) + 1e-12
    fem = eigenvalues_fem(G, count, H.l_min / 16).values if check_fem else None
    weyl_tried = False
    problem = None
    split = not check_fem
    for attempt in range(max_halvings + 2):
        roots, k_scan = _scan_roots(system, k_hi, step, count - 1, split=split)
        values = [0.0]
        worst = 0.0
        for k0, mult, sv in roots:
            values.extend([k0 * k0] * mult)
            worst = max(worst, float(sv[0]))
        problem = None
        if len(values) < count:
            problem = f"window exhausted: {len(values)} of {count} below k={k_hi:.6g}"
        elif fem is not None:
            ahead = np.array(values[:count]) - fem[:count]
            bad = np.nonzero(ahead > 1e-9 * np.maximum(1.0, fem[:count]))[0]
            if bad.size:
                j = int(bad[0])
                problem = f"secular value {values[j]:.12g} above FEM bound {fem[j]:.12g} at k={j + 1}"
        if problem is None and not weyl_tried:
            expected = L * k_scan / math.pi
            slack = H.graph.n_vertices + H.betti
            if abs(len(values) - expected) > slack + 1:
                weyl_tried = True
                problem = f"Weyl plausibility: {len(values)} roots below {k_scan:.4g}, expected {expected:.1f} +- {slack}"
        if problem is None:
            return Spectrum(np.array(values[:count]), "secular", worst,
                            info={"step": step, "k_scanned": k_scan, "attempts": attempt + 1})
        if not split:
            log.info("secular rescan (%s); splitting dips", problem)
            split = True
            continue
        log.info("secular rescan (%s); halving step %.3g", problem, step)
        step /= 2
    raise SecularError(problem)


def is_equilateral(G: MetricGraph, rtol: float = 1e-12) -> bool:
    return G.is_simple and G.l_max <= G.l_min * (1 + rtol)


def eigenvalues_equilateral(G: MetricGraph, count: int) -> Spectrum:
    """Exact spectrum of a simple equilateral graph from its transition matrix.

    Off k*l in pi Z, lambda = k^2 is an eigenvalue iff cos(k l) is an eigenvalue
    of D^-1 A, with the same multiplicity. At k l = j pi the multiplicity is
    beta + 1 for even j, and for odd j beta + 1 on bipartite graphs, beta - 1
    otherwise.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not is_equilateral(G):
        raise SpectrumError("graph is not simple and equilateral")
    g = G.graph
    ell = G.l_min
    deg = np.array([g.degree(v) for v in g.vertices], dtype=float)
    A = g.adjacency_matrix()
    mu = np.linalg.eigvalsh(A / np.sqrt(np.outer(deg, deg)))
    inner = np.arccos(np.clip(mu[np.abs(np.abs(mu) - 1) > 1e-9], -1, 1))
    bipartite = bool(mu[0] < -1 + 1e-9)
    beta = G.betti
    out = [0.0]
    j = 0
    while len(out) < count:
        # one period (2 pi j, 2 pi (j+1)] of k l
        branch = [(2 * math.pi * j + t, 1) for t in inner]
        branch += [(2 * math.pi * (j + 1) - t, 1) for t in inner]
        branch.append((math.pi * (2 * j + 1), beta + 1 if bipartite else beta - 1))
        branch.append((2 * math.pi * (j + 1), beta + 1))
        for t, mult in sorted(branch):
            out.extend([(t / ell) ** 2] * max(mult, 0))
        j += 1
    return Spectrum(np.array(out[:count]), "equilateral", 0.0, info={"bipartite": bipartite})


def eigenvalues_metric(G: MetricGraph, count: int, **kw) -> Spectrum:
    """Exact route on simple equilateral graphs, the secular solver otherwise."""
    if is_equilateral(G):
        return eigenvalues_equilateral(G, count)
    return eigenvalues_secular(G, count, **kw)


# ---------------------------------------------------------------------------
# finite elements
# ---------------------------------------------------------------------------

def fem_matrices(G: MetricGraph, h: float):
    """P1 stiffness and consistent mass matrices on per-edge uniform meshes."""
    g = G.graph
    idx = dict(g.index)
    n = len(idx)
    I, J, Kv, Mv = [], [], [], []
    for e, u, v in g.edges:
        l = G.lengths[e]
        ne = max(1, int(math.ceil(l / h - 1e-9)))
        he = l / ne
        chain = [idx[u]] + list(range(n, n + ne - 1)) + [idx[v]]
        n += ne - 1
        a = np.array(chain[:-1])
        b = np.array(chain[1:])
        for (p, q, kk, mm) in ((a, a, 1 / he, he / 3), (b, b, 1 / he, he / 3),
                               (a, b, -1 / he, he / 6), (b, a, -1 / he, he / 6)):
            I.append(p); J.append(q)
            Kv.append(np.full(len(p), kk)); Mv.append(np.full(len(p), mm))
    I = np.concatenate(I); J = np.concatenate(J)
    K = sp.csr_matrix((np.concatenate(Kv), (I, J)), shape=(n, n))
    M = sp.csr_matrix((np.concatenate(Mv), (I, J)), shape=(n, n))
    return K, M


def eigenvalues_fem(G: MetricGraph, count: int, h: float | None = None) -> Spectrum:
    if h is None:
        h = G.l_min / 16
    if h > G.l_min / 4 * (1 + 1e-12):
        raise ValueError(f"mesh too coarse: h={h:.4g} > l_min/4={G.l_min / 4:.4g}")
    K, M = fem_matrices(G, h)
    n = K.shape[0]
    if count > n:
        raise ValueError("count exceeds number of finite element nodes")
    if n <= 600 or count >= n - 1:
        w = scipy.linalg.eigh(K.toarray(), M.toarray(), eigvals_only=True, subset_by_index=[0, count - 1])
    else:
        w = spla.eigsh(K.tocsc(), k=count, M=M.tocsc(), sigma=-1.0, which="LM",
                       return_eigenvectors=False, tol=0)
    w = np.sort(np.asarray(w))
    w[0] = max(w[0], 0.0) if abs(w[0]) < 1e-10 else w[0]
    return Spectrum(w, "fem", 0.0, info={"h": h, "nodes": n})


# ---------------------------------------------------------------------------
# trigonometric embedding and comparison
# ---------------------------------------------------------------------------

@dataclass
class TestFunctionEmbedding:
    __test__ = False  # not a pytest class

    graph: MetricGraph
    f: dict
    norm2: float
    energy: float
    edge_functions: dict[str, Callable[[np.ndarray], np.ndarray]] = field(repr=False)

    @property
    def quotient(self) -> float:
        return self.energy / self.norm2


def embed_test_function(G: MetricGraph, f: Mapping[str, complex]) -> TestFunctionEmbedding:
    """Edgewise phi_e(x) = mean + half-difference * cos(pi x / l_e) with closed-form norms."""
    norm2 = 0.0
    energy = 0.0
    funcs = {}
    for e, u, v in G.graph.edges:
        l = G.lengths[e]
        fi, ft = complex(f[u]), complex(f[v])
        norm2 += l / 8 * (3 * abs(ft) ** 2 + 2 * (ft * fi.conjugate()).real + 3 * abs(fi) ** 2)
        energy += math.pi ** 2 / (8 * l) * abs(ft - fi) ** 2

        def phi(x, fi=fi, ft=ft, l=l):
            return (fi + ft) / 2 + (fi - ft) / 2 * np.cos(np.pi * np.asarray(x) / l)

        funcs[e] = phi
    return TestFunctionEmbedding(G, dict(f), norm2, energy, funcs)


@dataclass
class ComparisonRow:
    k: int
    metric: float
    discrete: float
    ratio: float | None  # None when both are zero
    holds: bool
    sharp: bool


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    metric_spectrum: Spectrum
    discrete_spectrum: Spectrum

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.rows)

    @property
    def violations(self) -> list[ComparisonRow]:
        return [r for r in self.rows if not r.holds]


HALF_PI2 = math.pi ** 2 / 2


def compare_spectra(G: MetricGraph, k_max: int | None = None, slack: float = 1e-9) -> ComparisonReport:
    """lambda_k(Delta) against (pi^2/2) lambda_k(L_{m,mu}) with m = d_l, mu = 1/l."""
    H = simplify_metric(G)
    W = H.induced_weights()
    n = W.graph.n_vertices
    if k_max is None:
        k_max = n
    if k_max > n:
        raise ValueError(f"k_max={k_max} exceeds |V|={n} of the simple representation")
    disc = discrete_eigenvalues(W)
    met = eigenvalues_secular(H, k_max)
    rows = []
    for k in range(1, k_max + 1):
        a, b = met.lam(k), disc.lam(k)
        if abs(a) < 1e-12 and abs(b) < 1e-12:
            rows.append(ComparisonRow(k, a, b, None, True, False))
            continue
        ratio = a / b
        rows.append(ComparisonRow(k, a, b, ratio, a <= HALF_PI2 * b + slack,
                                  abs(ratio - HALF_PI2) <= 1e-8 * HALF_PI2))
    return ComparisonReport(rows, met, disc)
