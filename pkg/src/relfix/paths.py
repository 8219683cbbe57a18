"""Rectifiable paths at polyline resolution and the orbit-metric reduction.

A path is a polyline traversed with uniform parameter spacing, so vertex
i of V sits at t = i / (V - 1).  Images of paths under a real map are
approximated by refining every segment into ``r`` pieces and mapping the
sample vertices; for affine maps this is exact.

The orbit reduction turns a path gamma0 from x0 to f(x0) into a finite
totally ordered instance on x0, f(x0), ..., f^N(x0) whose metric d0 sums
the lengths of the image paths f^t(gamma0) between two orbit indices.
"""

from dataclasses import dataclass
import heapq

import numpy as np

from .contraction import CheckResult
from .errors import DegenerateOrbit, EndpointMismatch, InvalidInput, NoPathKnown
from .expr import eval_map
from .space import (
    TAU_REL,
    FiniteInstance,
    FiniteSpace,
    Relation,
    SelfMapTable,
    norm,
)


@dataclass(frozen=True, eq=False)
class Polyline:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1:
            raise InvalidInput("a polyline needs at least one vertex")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("polyline has non-finite coordinates")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def at(self, t):
        v = self.vertices
        if len(v) == 1:
            return v[0].copy()
        s = t * (len(v) - 1)
        i = min(int(np.floor(s)), len(v) - 2)
        frac = s - i
        return v[i] + frac * (v[i + 1] - v[i])

    def refined(self, r):
        if r < 1:
            raise InvalidInput("refinement must be >= 1")
        v = self.vertices
        if len(v) == 1 or r == 1:
            return self
        pieces = [v[:1]]
        fr = np.arange(1, r + 1)[:, None] / r
        for a, b in zip(v[:-1], v[1:]):
            pieces.append(a + fr * (b - a))
        return Polyline(np.vstack(pieces))


def polyline_length(path, norm_kind="l2"):
    v = path.vertices
    return float(sum(norm(b - a, norm_kind) for a, b in zip(v[:-1], v[1:])))


def partition_length(path, partition, norm_kind="l2"):
    t = np.asarray(partition, dtype=float)
    if t.ndim != 1 or len(t) < 2 or t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
        raise InvalidInput("partition must increase strictly from 0 to 1")
    pts = [path.at(s) for s in t]
    return float(sum(norm(b - a, norm_kind) for a, b in zip(pts[:-1], pts[1:])))


def _map_vertices(fmap, vertices, times=1):
    out = np.array(vertices, dtype=float)
    for _ in range(times):
        out = np.array([eval_map(fmap, p) for p in out])
    return out


def image_polyline(fmap, path, refinement=1):
    return Polyline(_map_vertices(fmap, path.refined(refinement).vertices))


def check_path_contraction(fmap, path, k, refinement=1, tau_rel=TAU_REL):
    """l(f(gamma)) <= k l(gamma)  and  d(f(gamma(0)), f(gamma(1))) <= k l(gamma)."""
    length = polyline_length(path)
    image = image_polyline(fmap, path, refinement)
    image_length = polyline_length(image)
    endpoint = norm(image.end - image.start)
    bound = k * length
    slack = tau_rel * max(1.0, bound)
    length_ok = image_length <= bound + slack
    endpoint_ok = endpoint <= bound + slack
    details = {
        "length": length,
        "image_length": image_length,
        "endpoint_distance": endpoint,
        "k_length": bound,
        "length_ok": length_ok,
        "endpoint_ok": endpoint_ok,
    }
    ratio = image_length / length if length > 0 else None
    return CheckResult(length_ok and endpoint_ok, None, ratio, details)


def _check_endpoints(fmap, gamma0, tau_rel=TAU_REL):
    target = np.array(eval_map(fmap, gamma0.start))
    gap = norm(gamma0.end - target)
    if gap > tau_rel * max(1.0, norm(target)):
        raise EndpointMismatch(f"gamma0 ends {gap:.3g} away from f(gamma0(0))")


def image_lengths(gamma0, fmap, count, refinement=1):
    """Lengths l(f^t(gamma0)) for t = 0 .. count-1."""
    verts = gamma0.refined(refinement).vertices
    out = []
    for t in range(count):
        out.append(polyline_length(Polyline(verts)))
        verts = _map_vertices(fmap, verts)
    return out


def orbit_d0(gamma0, fmap, i, j, refinement=1):
    _check_endpoints(fmap, gamma0)
    if i < 0 or j < 0:
        raise InvalidInput("orbit indices must be non-negative")
    lo, hi = min(i, j), max(i, j)
    if lo == hi:
        return 0.0
    lengths = image_lengths(gamma0, fmap, hi, refinement)
    return float(sum(lengths[lo:hi]))


def orbit_tail_bound(gamma0_length, k, n):
    """k^n l(gamma0) / (1 - k): bounds d(f^m x0, f^n x0) for every m > n."""
    if not 0 < k < 1 or gamma0_length < 0 or n < 0:
        raise InvalidInput(f"orbit_tail_bound domain: l={gamma0_length}, k={k}, n={n}")
    return k**n * gamma0_length / (1 - k)


@dataclass(frozen=True, eq=False)
class OrbitInstanceBundle:
    instance: FiniteInstance
    points: np.ndarray
    ambient_dists: np.ndarray
    d0_dists: np.ndarray
    image_paths: tuple
    lengths: tuple
    requested_n: int

    @property
    def n_effective(self):
        return len(self.points) - 1


def build_orbit_instance(gamma0, fmap, N, epsilon, k, refinement=1):
    """Finite instance on the truncated orbit with the d0 metric.

    The last orbit point is absorbing.  If some image path has zero length
    the orbit has reached a fixed point there and is cut at that index.
    """
    if N < 1:
        raise InvalidInput("N must be >= 1")
    _check_endpoints(fmap, gamma0)
    verts = gamma0.refined(refinement).vertices
    paths, lengths = [], []
    for t in range(N):
        p = Polyline(verts)
        length = polyline_length(p)
        if length == 0.0:
            if norm(p.end - p.start) > 0.0:
                raise DegenerateOrbit(f"image path {t} has length {length} but distinct ends")
            break
        paths.append(p)
        lengths.append(length)
        verts = _map_vertices(fmap, verts)
    n_eff = len(lengths)
    if n_eff == 0:
        raise DegenerateOrbit("gamma0 has zero length: x0 is already fixed")
    points = np.array([paths[0].start] + [p.end for p in paths])
    # row-wise sums rather than prefix differences: tiny tail lengths would
    # cancel against the large head of a prefix sum
    size = n_eff + 1
    d0 = np.zeros((size, size))
    for i in range(size - 1):
        d0[i, i + 1:] = np.cumsum(lengths[i:])
    d0 = np.maximum(d0, d0.T)
    off = ~np.eye(len(points), dtype=bool)
    if np.any(d0[off] <= 0.0):
        raise DegenerateOrbit("orbit metric vanishes between distinct indices")
    diff = points[:, None, :] - points[None, :, :]
    ambient = np.sqrt(np.sum(diff * diff, axis=-1))
    labels = [f"f^{i}(x0)" for i in range(len(points))]
    inst = FiniteInstance(
        FiniteSpace(d0, labels=labels),
        Relation.total_index_order(len(points)),
        SelfMapTable([min(i + 1, n_eff) for i in range(len(points))]),
        0,
        epsilon,
        k,
    )
    return OrbitInstanceBundle(inst, points, ambient, d0, tuple(paths), tuple(lengths), N)


def path_metric_estimate(catalogue, x, y, tau_rel=TAU_REL):
    """Shortest route through a path catalogue: an upper estimate of the path metric.

    Catalogue entries are traversable both ways and are joined wherever
    their endpoints agree within ``tau_rel``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nodes = []

    def node_of(p):
        for idx, q in enumerate(nodes):
            if norm(p - q) <= tau_rel * max(1.0, norm(q)):
                return idx
        nodes.append(np.asarray(p, dtype=float))
        return len(nodes) - 1

    src, dst = node_of(x), node_of(y)
    if src == dst:
        return 0.0
    adj = {}
    for path in catalogue:
        a, b = node_of(path.start), node_of(path.end)
        w = polyline_length(path)
        adj.setdefault(a, []).append((b, w))
        adj.setdefault(b, []).append((a, w))
    best = {src: 0.0}
    heap = [(0.0, src)]
    while heap:
        dist, u = heapq.heappop(heap)
        if u == dst:
            return dist
        if dist > best.get(u, np.inf):
            continue
        for v, w in adj.get(u, ()):
            nd = dist + w
            if nd < best.get(v, np.inf):
                best[v] = nd
                heapq.heappush(heap, (nd, v))
    raise NoPathKnown("no catalogue route joins the two points")


def paths_from_json(obj):
    from .expr import RealMap

    try:
        gamma0 = Polyline(obj["gamma0"])
        fmap = RealMap.from_strings(obj["map"])
        return {
            "gamma0": gamma0,
            "map": fmap,
            "k": float(obj["k"]),
            "N": int(obj.get("N", 1)),
            "epsilon": float(obj["epsilon"]) if "epsilon" in obj else None,
            "refinement": int(obj.get("refinement", 1)),
        }
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed paths file: {exc!r}") from None
