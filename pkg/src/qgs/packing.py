"""Circle packings of planar graphs on the unit sphere and their Moebius balancing.

Pipeline: triangulate the embedded graph (auxiliary vertices for non-triangular
faces), solve for planar radii with three fixed boundary circles, lay the disks
out face by face, lift to S^2 by inverse stereographic projection, and finally
move the caps with f_alpha until the weighted centroid of the centers vanishes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import brentq, root

from .graphs import CombinatorialGraph, GraphError, PlanarEmbedding, check_vertex_weight_condition, WeightedGraph

log = logging.getLogger(__name__)

E3 = np.array([0.0, 0.0, 1.0])


class PackingError(RuntimeError):
    pass


class ConditionViolated(ValueError):
    pass


# ---------------------------------------------------------------------------
# caps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphericalCap:
    """Closed cap {z in S^2 : |z - p| <= r}; r is the Euclidean chord radius."""

    p: np.ndarray
    r: float

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        nrm = np.linalg.norm(p)
        if abs(nrm - 1) > 1e-9:
            raise ValueError(f"cap center must be a unit vector (|p| = {nrm})")
        object.__setattr__(self, "p", p / nrm)
        if not (0 <= self.r <= 2):
            raise ValueError(f"chord radius {self.r} outside [0, 2]")
        object.__setattr__(self, "r", float(self.r))

    @property
    def theta(self) -> float:
        """Angular radius."""
        return 2 * math.asin(min(1.0, self.r / 2))

    @property
    def area(self) -> float:
        return math.pi * self.r ** 2

    def contains(self, z, tol: float = 0.0) -> bool:
        return _angle(self.p, np.asarray(z, dtype=float)) <= self.theta + tol


def _angle(a, b):
    """Angle between unit vectors (rows), stable for small and large angles."""
    a = np.asarray(a)
    b = np.asarray(b)
    c = np.cross(a, b)
    return np.arctan2(np.linalg.norm(c, axis=-1), np.sum(a * b, axis=-1))


def theta_of(r):
    return 2 * np.arcsin(np.clip(np.asarray(r) / 2, 0, 1))


# ---------------------------------------------------------------------------
# triangulated augmentation
# ---------------------------------------------------------------------------

@dataclass
class Triangulation:
    vertices: list[str]  # original first, then auxiliary
    n_original: int
    triangles: np.ndarray  # (t, 3) vertex indices, counterclockwise
    added: list[tuple[str, str]]  # augmentation edges

    @property
    def index(self):
        return {v: i for i, v in enumerate(self.vertices)}

    def edges(self) -> np.ndarray:
        T = self.triangles
        pairs = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
        pairs = np.sort(pairs, axis=1)
        return np.unique(pairs, axis=0)

    def neighbors(self) -> list[set]:
        nb = [set() for _ in self.vertices]
        for a, b in self.edges():
            nb[a].add(b)
            nb[b].add(a)
        return nb


def triangulate(graph: CombinatorialGraph, embedding: PlanarEmbedding) -> Triangulation:
    """Triangulated augmentation of a genus 0 embedding.

    Faces bounded by a simple cycle of length >= 4 get one auxiliary vertex
    joined to every corner. Faces whose walk repeats a vertex (bridges, trees)
    get a ring: one auxiliary vertex per face side plus a central one, so no
    edge between original vertices is duplicated.
    """
    if embedding.genus != 0:
        raise GraphError("circle packing needs a genus 0 embedding")
    if embedding.faces is None:
        raise GraphError("circle packing needs face walks")
    embedding.validate(graph)
    if not embedding.is_oriented():
        raise GraphError("face walks must be consistently oriented")
    verts = list(graph.vertices)
    idx = {v: i for i, v in enumerate(verts)}
    tris = []
    added = []

    def aux(name):
        verts.append(name)
        idx[name] = len(verts) - 1
        return name

    if graph.n_vertices == 2:
        u, v = graph.vertices
        w = aux("+f0")
        added += [(u, w), (v, w)]
        tris = [(u, v, w), (v, u, w)]
    else:
        for fi, walk in enumerate(embedding.vertex_walks(graph)):
            k = len(walk)
            if k == 3 and len(set(walk)) == 3:
                tris.append(tuple(walk))
            elif len(set(walk)) == k:
                c = aux(f"+f{fi}")
                for i in range(k):
                    tris.append((walk[i], walk[(i + 1) % k], c))
                    added.append((walk[i], c))
            else:
                a = [aux(f"+f{fi}.{i}") for i in range(k)]
                c = aux(f"+f{fi}")
                for i in range(k):
                    j = (i + 1) % k
                    tris.append((walk[i], walk[j], a[i]))
                    tris.append((a[i], walk[j], a[j]))
                    tris.append((a[i], a[j], c))
                    added += [(walk[i], a[i]), (walk[j], a[i]), (a[i], a[j]), (a[i], c)]
    T = np.array([[idx[x] for x in t] for t in tris], dtype=int)
    tri = Triangulation(verts, graph.n_vertices, T, sorted(set(tuple(sorted(e)) for e in added)))
    _check_sphere(tri)
    return tri


def _check_sphere(tri: Triangulation):
    T = tri.triangles
    darts = {}
    for t in T:
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            if (a, b) in darts:
                raise GraphError("augmented complex is not an oriented surface")
            darts[(a, b)] = True
    for a, b in list(darts):
        if (b, a) not in darts:
            raise GraphError("augmented complex has a boundary")
    V, E, F = len(tri.vertices), len(darts) // 2, len(T)
    if V - E + F != 2:
        raise GraphError(f"augmented complex is not a sphere (V-E+F = {V - E + F})")


# ---------------------------------------------------------------------------
# planar radii and layout
# ---------------------------------------------------------------------------

def _corner_angles(T, r):
    """Angle at each corner of each triangle of tangent disks, shape (t, 3)."""
    ra, rb, rc = r[T[:, 0]], r[T[:, 1]], r[T[:, 2]]

    def ang(x, y, z):
        s = y * z / ((x + y) * (x + z))
        return 2 * np.arcsin(np.sqrt(np.clip(s, 0, 1)))

    return np.column_stack([ang(ra, rb, rc), ang(rb, rc, ra), ang(rc, ra, rb)])


def angle_sums(T, r, n):
    out = np.zeros(n)
    A = _corner_angles(T, r)
    for j in range(3):
        np.add.at(out, T[:, j], A[:, j])
    return out


def planar_radii(T: np.ndarray, n: int, boundary, tol: float = 1e-13, max_iter: int = 20000):
    """Radii with interior angle sums 2 pi and boundary radii fixed to 1.

    Uniform-neighbor relaxation, then Newton in log radii.
    """
    boundary = np.asarray(boundary)
    interior = np.setdiff1d(np.arange(n), boundary)
    r = np.ones(n)
    deg = np.zeros(n)
    for j in range(3):
        np.add.at(deg, T[:, j], 1)
    kk = deg[interior]
    delta = np.sin(np.pi / kk)
    err = np.inf
    for it in range(max_iter):
        s = angle_sums(T, r, n)[interior]
        err = np.max(np.abs(s - 2 * np.pi)) if len(interior) else 0.0
        if err < 1e-8:
            break
        beta = np.sin(s / (2 * kk))
        rhat = beta / (1 - beta) * r[interior]
        r[interior] = (1 - delta) / delta * rhat
    # Newton polish
    x = np.log(r[interior])

    def F(x):
        rr = r.copy()
        rr[interior] = np.exp(x)
        return angle_sums(T, rr, n)[interior] - 2 * np.pi

    for it in range(50):
        f = F(x)
        err = np.max(np.abs(f)) if len(f) else 0.0
        if err < tol:
            break
        h = 1e-7
        J = np.empty((len(x), len(x)))
        for j in range(len(x)):
            e = np.zeros(len(x))
            e[j] = h
            J[:, j] = (F(x + e) - F(x - e)) / (2 * h)
        x = x - np.linalg.solve(J, f)
    r[interior] = np.exp(x)
    if err > 1e-10:
        raise PackingError(f"radius iteration did not converge: max angle-sum error {err:.3e}")
    return r, float(err)


def layout(T: np.ndarray, r: np.ndarray, outer) -> np.ndarray:
    """Place tangent disks; the outer triangle is clockwise, all others counterclockwise."""
    n = len(r)
    z = np.full(n, np.nan + 0j)
    a, b, c = outer
    z[a] = 0
    z[b] = r[a] + r[b]
    ang = _corner_angles(np.array([[a, c, b]]), r)[0, 0]
    z[c] = z[a] + (r[a] + r[c]) * np.exp(-1j * ang)
    A = _corner_angles(T, r)
    placed = ~np.isnan(z)
    todo = list(range(len(T)))
    while todo:
        rest = []
        progress = False
        for t in todo:
            tri = T[t]
            known = placed[tri]
            if known.all():
                continue
            if known.sum() < 2:
                rest.append(t)
                continue
            # rotate so that the first two corners are placed
            for s in range(3):
                i, j, k = tri[s], tri[(s + 1) % 3], tri[(s + 2) % 3]
                if placed[i] and placed[j]:
                    d = z[j] - z[i]
                    z[k] = z[i] + (r[i] + r[k]) * d / abs(d) * np.exp(1j * A[t, s])
                    placed[k] = True
                    progress = True
                    break
        if not progress and rest:
            raise PackingError("layout could not reach every vertex")
        todo = rest
    return z


# ---------------------------------------------------------------------------
# stereographic projection and Moebius deformation
# ---------------------------------------------------------------------------

def stereographic_project(beta, y):
    """pi_beta: H_beta u {inf} -> S^2, y in the plane tangent at beta. ``y=None`` is infinity."""
    beta = np.asarray(beta, dtype=float)
    if y is None:
        return -beta
    y = np.asarray(y, dtype=float)
    off = np.sum((y - beta) * beta, axis=-1)
    if np.any(np.abs(off) > 1e-10 * np.maximum(1.0, np.linalg.norm(y, axis=-1))):
        raise ValueError("point is not in the tangent plane H_beta")
    u = beta + y
    return 4 * u / np.sum(u * u, axis=-1, keepdims=True) - beta


def stereographic_inverse(beta, z):
    """pi_beta^{-1}: S^2 minus {-beta} -> H_beta."""
    beta = np.asarray(beta, dtype=float)
    z = np.asarray(z, dtype=float)
    return 2 * (beta + z) / (1 + np.sum(z * beta, axis=-1, keepdims=True)) - beta


def dilation_map(beta, lam, z):
    """g_beta^lam = pi_beta o D_beta^lam o pi_beta^{-1} on points of S^2 (rows of z)."""
    beta = np.asarray(beta, dtype=float)
    y = stereographic_inverse(beta, z)
    u = 2 * beta + lam * (y - beta)  # beta + D(y)
    return 4 * u / np.sum(u * u, axis=-1, keepdims=True) - beta


def _frame(P):
    """Orthonormal u, v perpendicular to each row of P."""
    ax = np.eye(3)[np.argmin(np.abs(P), axis=1)]
    u = np.cross(P, ax)
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    v = np.cross(P, u)
    return u, v


def _boundary_points(P, r, t0):
    th = theta_of(r)
    u, v = _frame(P)
    ts = t0 + 2 * np.pi * np.arange(3) / 3
    c, s = np.cos(th)[:, None, None], np.sin(th)[:, None, None]
    dirs = u[:, None, :] * np.cos(ts)[None, :, None] + v[:, None, :] * np.sin(ts)[None, :, None]
    return P[:, None, :] * c + s * dirs  # (n, 3, 3)


def _cap_from_points(Q, inside):
    """Cap through the boundary points Q (n, 3, 3) containing the points ``inside``."""
    nrm = np.cross(Q[:, 1] - Q[:, 0], Q[:, 2] - Q[:, 0])
    size = np.linalg.norm(nrm, axis=1, keepdims=True)
    tiny = size[:, 0] == 0
    if np.any(tiny):  # cap shrunk below resolution: a point cap at the interior witness
        nrm[tiny] = inside[tiny]
        size[tiny] = np.linalg.norm(inside[tiny], axis=1, keepdims=True)
    nrm /= size
    d = np.einsum("ij,ij->i", nrm, Q[:, 0])
    d[tiny] = 1.0
    flip = np.einsum("ij,ij->i", nrm, inside) < d
    nrm[flip] *= -1
    d[flip] *= -1
    r = np.sqrt(np.clip(2 - 2 * d, 0, None))
    return nrm, r


def deform_caps(P, r, beta, lam):
    """Image caps under g_beta^lam (0 < lam), vectorized over rows."""
    P = np.asarray(P, dtype=float)
    r = np.asarray(r, dtype=float)
    beta = np.asarray(beta, dtype=float)
    B = _boundary_points(P, r, 0.1)
    bad = np.min(1 + B @ beta, axis=1) < 1e-9
    if np.any(bad):
        B[bad] = _boundary_points(P[bad], r[bad], 0.1 + np.pi / 3)
    # interior witness: the center, or a point at half the angular radius if the center is -beta
    inside = P.copy()
    near = 1 + P @ beta < 1e-9
    if np.any(near):
        u, _ = _frame(P[near])
        h = theta_of(r[near])[:, None] / 2
        inside[near] = P[near] * np.cos(h) + u * np.sin(h)
    Bi = dilation_map(beta, lam, B.reshape(-1, 3)).reshape(B.shape)
    Ii = dilation_map(beta, lam, inside)
    return _cap_from_points(Bi, Ii)


def _alpha_parts(alpha):
    alpha = np.asarray(alpha, dtype=float)
    a = float(np.linalg.norm(alpha))
    if a == 0:
        return None, 1.0
    return alpha / a, 1.0 - a


def mobius_deform(alpha, cap: SphericalCap) -> SphericalCap:
    """Image of a cap under f_alpha = g_{alpha/|alpha|}^{1-|alpha|}.

    At |alpha| = 1 only the limiting center is defined: alpha if -alpha is not
    in the cap, -alpha otherwise; it is returned as a cap of radius 0.
    """
    if cap.r >= 2 - 1e-9:
        raise ValueError("degenerate cap (r >= 2 - 1e-9)")
    beta, lam = _alpha_parts(alpha)
    if beta is None:
        return cap
    if lam < -1e-12:
        raise ValueError("alpha must lie in the closed unit ball")
    if lam <= 0:
        center = -beta if cap.contains(-beta) else beta
        return SphericalCap(center, 0.0)
    P, r = deform_caps(cap.p[None, :], np.array([cap.r]), beta, lam)
    return SphericalCap(P[0], float(r[0]))


def cap_distance(alpha, P, r):
    """max_{z in C} |alpha - z| for each cap (closed form)."""
    alpha = np.asarray(alpha, dtype=float)
    a = np.linalg.norm(alpha)
    if a == 0:
        return np.ones(len(r))
    phi = _angle(np.broadcast_to(alpha / a, P.shape), P)
    ang = np.minimum(np.pi, phi + theta_of(r))
    return np.sqrt(np.maximum(a * a + 1 - 2 * a * np.cos(ang), 0))


def smoothing_weights(alpha, P, r, delta):
    d = cap_distance(alpha, P, r)
    return np.where(d >= 2 - delta, (2 - d) / delta, 1.0)


# ---------------------------------------------------------------------------
# packings
# ---------------------------------------------------------------------------

@dataclass
class PackingResiduals:
    tangency: float  # max over original edges
    tangency_all: float  # including augmentation edges
    univalence: float  # min over non-adjacent pairs of (distance - theta_u - theta_v)
    area: float  # sum of pi r^2

    def ok(self, tol=1e-7, area_tol=1e-6) -> bool:
        return self.tangency_all <= tol and self.univalence >= -tol and self.area <= 4 * math.pi + area_tol

    def to_dict(self):
        return {"tangency": self.tangency, "tangency_all": self.tangency_all,
                "univalence_margin": self.univalence, "area": self.area}


@dataclass
class CirclePacking:
    graph: CombinatorialGraph
    tri: Triangulation
    P: np.ndarray  # (N, 3) centers, all vertices of the triangulation
    r: np.ndarray  # (N,) chord radii
    alpha: np.ndarray | None = None
    planar: dict | None = None  # pre-lift centers (complex) and radii
    info: dict = field(default_factory=dict)

    @property
    def vertices(self):
        return self.tri.vertices

    @property
    def n_original(self):
        return self.tri.n_original

    def cap(self, v: str) -> SphericalCap:
        i = self.tri.index[v]
        return SphericalCap(self.P[i], self.r[i])

    @property
    def caps(self) -> dict[str, SphericalCap]:
        return {v: SphericalCap(self.P[i], self.r[i]) for i, v in enumerate(self.tri.vertices)}

    def centers(self) -> np.ndarray:
        """Centers of the original vertices, in graph vertex order."""
        return self.P[: self.n_original]

    def residuals(self) -> PackingResiduals:
        th = theta_of(self.r)
        E = self.tri.edges()
        ang = _angle(self.P[E[:, 0]], self.P[E[:, 1]])
        res = np.abs(ang - th[E[:, 0]] - th[E[:, 1]])
        orig = (E[:, 0] < self.n_original) & (E[:, 1] < self.n_original)
        n = len(self.r)
        A = _angle(self.P[:, None, :], self.P[None, :, :])
        gap = A - th[:, None] - th[None, :]
        mask = ~np.eye(n, dtype=bool)
        mask[E[:, 0], E[:, 1]] = False
        mask[E[:, 1], E[:, 0]] = False
        univ = float(np.min(gap[mask])) if mask.any() else float("inf")
        return PackingResiduals(float(res[orig].max()) if orig.any() else 0.0, float(res.max()), univ,
                                float(np.sum(np.pi * self.r ** 2)))

    def deformed(self, alpha) -> "CirclePacking":
        beta, lam = _alpha_parts(alpha)
        if beta is None:
            P, r = self.P.copy(), self.r.copy()
        else:
            P, r = deform_caps(self.P, self.r, beta, lam)
        return CirclePacking(self.graph, self.tri, P, r, np.asarray(alpha, dtype=float), self.planar, dict(self.info))

    def to_dict(self) -> dict:
        caps = [{"vertex": v, "p": [float(x) for x in self.P[i]], "r": float(self.r[i]),
                 "auxiliary": i >= self.n_original} for i, v in enumerate(self.tri.vertices)]
        return {"caps": caps, "residuals": self.residuals().to_dict(),
                "alpha": None if self.alpha is None else [float(x) for x in self.alpha],
                "added_edges": [list(e) for e in self.tri.added]}


def _choose_outer(tri: Triangulation) -> tuple[int, int, int]:
    deg = np.zeros(len(tri.vertices))
    for j in range(3):
        np.add.at(deg, tri.triangles[:, j], 1)
    score = deg[tri.triangles].sum(axis=1)
    t = int(np.argmax(score))
    return tuple(int(x) for x in tri.triangles[t])


def pack_planar(graph: CombinatorialGraph, embedding: PlanarEmbedding, tol: float = 1e-13) -> CirclePacking:
    """Univalent packing on S^2 whose tangency graph contains ``graph``."""
    if graph.n_vertices < 2:
        raise GraphError("circle packing needs at least two vertices")
    tri = triangulate(graph, embedding)
    T = tri.triangles
    outer = _choose_outer(tri)
    # the outer face is removed; its three disks are the fixed boundary
    keep = ~np.all(np.sort(T, axis=1) == np.sort(outer), axis=1)
    keep[np.nonzero(~keep)[0][1:]] = True  # K_3 case: two faces share the corner set
    Tin = T[keep]
    n = len(tri.vertices)
    r2, err = planar_radii(Tin, n, list(outer), tol=tol)
    z = layout(Tin, r2, outer)
    # center the outer triangle at the origin and scale its circumcircle to radius 2
    a, b, c = outer
    center = (z[a] + z[b] + z[c]) / 3
    s = 2.0 / abs(z[a] - center)
    z = (z - center) * s
    r2 = r2 * s
    P, r = lift_disks(z, r2)
    pk = CirclePacking(graph, tri, P, r, None, {"z": z, "r": r2, "outer": outer},
                       {"angle_error": err})
    plan = planar_tangency(Tin, z, r2)
    pk.info["planar_tangency"] = plan
    res = pk.residuals()
    pk.info["residuals"] = res.to_dict()
    if not res.ok():
        raise PackingError(f"packing failed verification: {res.to_dict()}")
    return pk


def planar_tangency(T, z, r) -> float:
    E = np.unique(np.sort(np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]]), axis=1), axis=0)
    return float(np.max(np.abs(np.abs(z[E[:, 0]] - z[E[:, 1]]) - r[E[:, 0]] - r[E[:, 1]]) / (r[E[:, 0]] + r[E[:, 1]])))


def lift_disks(z, rad, beta=E3):
    """Lift planar disks (complex centers in the plane tangent at e3) to caps."""
    n = len(z)
    ts = 0.1 + 2 * np.pi * np.arange(3) / 3
    pts = z[:, None] + rad[:, None] * np.exp(1j * ts)[None, :]
    Y = np.stack([pts.real, pts.imag, np.ones_like(pts.real)], axis=-1)
    Q = stereographic_project(beta, Y.reshape(-1, 3)).reshape(n, 3, 3)
    C = stereographic_project(beta, np.column_stack([z.real, z.imag, np.ones(n)]))
    return _cap_from_points(Q, C)


def tetrahedral_packing() -> CirclePacking:
    """Four equal mutually tangent caps centered at a regular tetrahedron (K_4)."""
    from .generators import complete
    inst = complete(4)
    tri = triangulate(inst.graph, inst.embedding)
    V = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float) / math.sqrt(3)
    # match orientation of the triangulation: flip if the first face is clockwise seen from outside
    t = tri.triangles[0]
    if np.dot(np.cross(V[t[1]] - V[t[0]], V[t[2]] - V[t[0]]), V[t].sum(axis=0)) < 0:
        V[:, 0] *= -1
    theta = math.acos(-1 / 3) / 2
    r = np.full(4, 2 * math.sin(theta / 2))
    return CirclePacking(inst.graph, tri, V, r)


# ---------------------------------------------------------------------------
# balancing
# ---------------------------------------------------------------------------

@dataclass
class BalanceState:
    alpha: np.ndarray
    phi: np.ndarray  # unsmoothed residual sum m(v) p_v
    w: np.ndarray
    eps: float
    delta: float
    starts_tried: int = 0
    candidates: list = field(default_factory=list)

    @property
    def residual(self) -> float:
        return float(np.linalg.norm(self.phi))

    @property
    def all_weights_one(self) -> bool:
        return bool(np.all(self.w == 1.0))

    def to_dict(self):
        return {"alpha": self.alpha.tolist(), "phi": self.phi.tolist(), "residual": self.residual,
                "eps": self.eps, "delta": self.delta, "min_w": float(self.w.min()),
                "starts_tried": self.starts_tried}


def epsilon_parameter(graph: CombinatorialGraph, m: Mapping[str, float]) -> float:
    """min over singletons and intersecting pairs U of (m(V) - 2 m(U)) / (2 m(V))."""
    mV = sum(m[v] for v in graph.vertices)
    sets = [m[v] for v in graph.vertices] + [m[u] + m[v] for _, u, v in graph.edges]
    return min((mV - 2 * s) / (2 * mV) for s in sets)


X_MAX = 10.0  # |alpha| <= tanh(10), i.e. dilation factor >= 4e-9


def _x_to_alpha(x):
    s = float(np.linalg.norm(x))
    if s == 0:
        return None, 1.0, np.zeros(3)
    s_eff = min(s, X_MAX)
    lam = 2.0 / (math.exp(2 * s_eff) + 1)  # 1 - tanh(s) without cancellation
    beta = x / s
    return beta, lam, beta * (1 - lam)


def balance(packing: CirclePacking, m: Mapping[str, float], tol: float = 1e-6,
            delta0: float = 0.2, max_halvings: int = 8,
            require_condition: bool = True) -> tuple[np.ndarray, CirclePacking, BalanceState]:
    """Find alpha in the open ball with sum_v m(v) p(f_alpha(C_v)) = 0 over original vertices.

    Roots are sought for the smoothed map sum m w_v p_v (w_v from the cap
    distance with shell width delta) in the coordinates alpha = tanh(|x|) x/|x|;
    a root is accepted only if every w_v equals 1 there, which makes it a root
    of the unsmoothed map. Landing in the shell halves delta.
    """
    g = packing.graph
    n0 = packing.n_original
    P0, r0 = packing.P[:n0], packing.r[:n0]
    mv = np.array([m[v] for v in packing.vertices[:n0]])
    eps = epsilon_parameter(g, m)
    phi0 = mv @ P0
    if np.linalg.norm(phi0) <= tol:
        state = BalanceState(np.zeros(3), phi0, np.ones(n0), eps, delta0, 0, [[0.0, 0.0, 0.0]])
        out = packing.deformed(np.zeros(3))
        out.info["balance"] = state.to_dict()
        return np.zeros(3), out, state
    bad = check_vertex_weight_condition(WeightedGraph(g, dict(m), {e: 1.0 for e in g.edge_map}))
    if bad and require_condition:
        raise ConditionViolated(f"condition violated: 2(m(u)+m(v)) >= m(V) on edges {bad}")

    def centers(x):
        beta, lam, alpha = _x_to_alpha(x)
        if beta is None:
            return P0, r0, alpha
        P, r = deform_caps(P0, r0, beta, lam)
        return P, r, alpha

    starts = [np.zeros(3)] + [s * math.atanh(0.5) * e for e in np.eye(3) for s in (1, -1)]
    delta = delta0
    cands = []
    tried = 1
    # direct attempt: a root of the unsmoothed map, certified once delta is small
    # enough that every w_v equals 1 there
    x_seed = starts[0]
    e_c = -phi0 / np.linalg.norm(phi0)
    g_line = lambda t: float(e_c @ (mv @ centers(t * e_c)[0]))
    for t_hi in (0.5, 1.0, 2.0, 4.0, 8.0):
        if g_line(t_hi) > 0:
            x_seed = brentq(g_line, 0.0, t_hi, xtol=1e-12) * e_c
            break
    sol = root(lambda x: mv @ centers(x)[0], x_seed, method="hybr", options={"xtol": 1e-14})
    P, r, alpha = centers(sol.x)
    phi = mv @ P
    if np.linalg.norm(phi) <= tol and np.linalg.norm(sol.x) < X_MAX:
        for _ in range(max_halvings + 1):
            w = smoothing_weights(alpha, P0, r0, delta)
            if np.all(w == 1.0):
                cands.append((float(np.linalg.norm(alpha)), alpha, phi, w))
                break
            delta /= 2
        if not cands:
            delta = delta0
    for _ in range(0 if cands else max_halvings + 1):
        landed = False
        for x0 in starts:
            tried += 1

            def F(x):
                P, r, alpha = centers(x)
                w = smoothing_weights(alpha, P0, r0, delta)
                return (mv * w) @ P

            sol = root(F, x0, method="hybr", options={"xtol": 1e-14})
            P, r, alpha = centers(sol.x)
            w = smoothing_weights(alpha, P0, r0, delta)
            phi = mv @ P
            res = float(np.linalg.norm(phi))
            if res <= tol and np.all(w == 1.0):
                cands.append((float(np.linalg.norm(alpha)), alpha, phi, w))
                break
            if res <= tol or float(np.linalg.norm((mv * w) @ P)) <= tol:
                landed = landed or np.any(w < 1.0)
        if cands:
            break
        if not landed:
            log.info("balance: no root found with delta=%g, retrying with smaller shell", delta)
        delta /= 2
    if not cands:
        raise PackingError(f"no convergence: balancing failed after {tried} starts")
    cands.sort(key=lambda c: c[0])
    _, alpha, phi, w = cands[0]
    state = BalanceState(alpha, phi, w, eps, delta, tried, [c[1].tolist() for c in cands])
    out = packing.deformed(alpha)
    out.info["balance"] = state.to_dict()
    return alpha, out, state
