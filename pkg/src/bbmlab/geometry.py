"""Bounded uniform domains and their quadrature grids.

The domain catalog is closed: open intervals, open boxes, open disks, and
simple polygons (all connected, all bounded).  Every shape answers strict
membership, exact boundary distance, and an enclosing radius R such that
the domain fits inside B(0, R/2).  Grids are midpoint-rule point clouds
with nonnegative cell weights; an empirical uniformity probe estimates the
cigar-condition constant on the grid graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree
from scipy.stats import qmc

__all__ = [
    "Interval",
    "Box",
    "Disk",
    "Polygon",
    "Domain",
    "QuadratureGrid",
    "contains",
    "contains_many",
    "boundary_distance",
    "enclosing_radius",
    "diameter",
    "measure",
    "bounding_box",
    "sample_quadrature",
    "estimate_uniformity",
    "uniformity_clauses",
]

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    """Open interval (a, b) on the line."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("interval requires a < b")

    @property
    def dimension(self) -> int:
        return 1


@dataclass(frozen=True)
class Box:
    """Open axis-aligned box prod_i (lo_i, hi_i), dimension 1..3."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi) or not 1 <= len(self.lo) <= 3:
            raise ValueError("box needs matching lo/hi of dimension 1..3")
        if not all(l < h for l, h in zip(self.lo, self.hi)):
            raise ValueError("box requires lo < hi componentwise")

    @property
    def dimension(self) -> int:
        return len(self.lo)


@dataclass(frozen=True)
class Disk:
    """Open disk in the plane."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        if len(self.center) != 2 or self.radius <= 0:
            raise ValueError("disk needs a 2-d center and positive radius")

    @property
    def dimension(self) -> int:
        return 2


@dataclass(frozen=True)
class Polygon:
    """Open simple polygon; vertices stored counter-clockwise."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if _shoelace(verts) < 0:
            verts = verts[::-1]
        object.__setattr__(self, "vertices", verts)

    @property
    def dimension(self) -> int:
        return 2


Domain = Union[Interval, Box, Disk, Polygon]


def _shoelace(verts) -> float:
    v = np.asarray(verts, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _check_dim(domain: Domain, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape[-1] != domain.dimension:
        raise ValueError(
            f"point of dimension {x.shape[-1]} on a "
            f"{domain.dimension}-d domain"
        )
    return x


def contains(domain: Domain, x) -> bool:
    """Strict membership test (boundary points count as outside)."""
    x = _check_dim(domain, x)
    return bool(contains_many(domain, x.reshape(1, -1))[0])


def contains_many(domain: Domain, pts: np.ndarray) -> np.ndarray:
    """Vectorized strict membership for an (N, n) array of points."""
    pts = np.asarray(pts, dtype=float)
    if isinstance(domain, Interval):
        x = pts[:, 0]
        return (x > domain.a) & (x < domain.b)
    if isinstance(domain, Box):
        lo = np.asarray(domain.lo)
        hi = np.asarray(domain.hi)
        return np.all((pts > lo) & (pts < hi), axis=1)
    if isinstance(domain, Disk):
        d = pts - np.asarray(domain.center)
        return np.einsum("ij,ij->i", d, d) < domain.radius**2
    if isinstance(domain, Polygon):
        return _polygon_contains(domain, pts)
    raise TypeError(f"unknown domain {type(domain)!r}")


def _polygon_edges(poly: Polygon):
    v = np.asarray(poly.vertices, dtype=float)
    return v, np.roll(v, -1, axis=0)


def _segment_distance(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # distance from each point to each segment [a_k, b_k]; (N, K)
    ab = b - a  # (K, 2)
    ap = pts[:, None, :] - a[None, :, :]  # (N, K, 2)
    denom = np.einsum("kj,kj->k", ab, ab)
    t = np.clip(np.einsum("nkj,kj->nk", ap, ab) / denom, 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d = pts[:, None, :] - proj
    return np.sqrt(np.einsum("nkj,nkj->nk", d, d))


def _polygon_contains(poly: Polygon, pts: np.ndarray) -> np.ndarray:
    a, b = _polygon_edges(poly)
    # points within _EDGE_TOL of an edge are treated as outside (open set)
    near_edge = _segment_distance(pts, a, b).min(axis=1) <= _EDGE_TOL
    # even-odd ray crossing, ray going in +x
    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    ya, yb = a[:, 1][None, :], b[:, 1][None, :]
    xa, xb = a[:, 0][None, :], b[:, 0][None, :]
    straddle = (ya <= y) != (yb <= y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = xa + (y - ya) * (xb - xa) / (yb - ya)
    hits = straddle & (xcross > x)
    inside = np.sum(hits, axis=1) % 2 == 1
    return inside & ~near_edge


def boundary_distance(domain: Domain, x) -> float:
    """Distance from an interior point to the boundary of the domain."""
    x = _check_dim(domain, x)
    if not contains(domain, x):
        raise ValueError(f"point {x.tolist()} is not inside the domain")
    return float(_boundary_distance_many(domain, x.reshape(1, -1))[0])


def _boundary_distance_many(domain: Domain, pts: np.ndarray) -> np.ndarray:
    if isinstance(domain, Interval):
        x = pts[:, 0]
        return np.minimum(x - domain.a, domain.b - x)
    if isinstance(domain, Box):
        lo = np.asarray(domain.lo)
        hi = np.asarray(domain.hi)
        return np.minimum(pts - lo, hi - pts).min(axis=1)
    if isinstance(domain, Disk):
        d = pts - np.asarray(domain.center)
        return domain.radius - np.sqrt(np.einsum("ij,ij->i", d, d))
    if isinstance(domain, Polygon):
        a, b = _polygon_edges(domain)
        return _segment_distance(pts, a, b).min(axis=1)
    raise TypeError(f"unknown domain {type(domain)!r}")


def enclosing_radius(domain: Domain) -> float:
    """Smallest R such that the domain sits inside the ball B(0, R/2)."""
    if isinstance(domain, Interval):
        return 2.0 * max(abs(domain.a), abs(domain.b))
    if isinstance(domain, Box):
        corners = np.array(
            np.meshgrid(*[(l, h) for l, h in zip(domain.lo, domain.hi)],
                        indexing="ij")
        ).reshape(domain.dimension, -1).T
        return 2.0 * float(np.linalg.norm(corners, axis=1).max())
    if isinstance(domain, Disk):
        return 2.0 * (float(np.linalg.norm(domain.center)) + domain.radius)
    if isinstance(domain, Polygon):
        v = np.asarray(domain.vertices)
        return 2.0 * float(np.linalg.norm(v, axis=1).max())
    raise TypeError(f"unknown domain {type(domain)!r}")


def diameter(domain: Domain) -> float:
    if isinstance(domain, Interval):
        return domain.b - domain.a
    if isinstance(domain, Box):
        return float(np.linalg.norm(np.asarray(domain.hi) - np.asarray(domain.lo)))
    if isinstance(domain, Disk):
        return 2.0 * domain.radius
    if isinstance(domain, Polygon):
        v = np.asarray(domain.vertices)
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt(np.einsum("ijk,ijk->ij", d, d)).max())
    raise TypeError(f"unknown domain {type(domain)!r}")


def measure(domain: Domain) -> float:
    """Lebesgue measure of the domain (exact per shape)."""
    if isinstance(domain, Interval):
        return domain.b - domain.a
    if isinstance(domain, Box):
        return float(np.prod(np.asarray(domain.hi) - np.asarray(domain.lo)))
    if isinstance(domain, Disk):
        return math.pi * domain.radius**2
    if isinstance(domain, Polygon):
        return abs(_shoelace(domain.vertices))
    raise TypeError(f"unknown domain {type(domain)!r}")


def bounding_box(domain: Domain):
    """Axis-aligned closed bounding box as (lo, hi) arrays."""
    if isinstance(domain, Interval):
        return np.array([domain.a]), np.array([domain.b])
    if isinstance(domain, Box):
        return np.asarray(domain.lo, float), np.asarray(domain.hi, float)
    if isinstance(domain, Disk):
        c = np.asarray(domain.center, float)
        return c - domain.radius, c + domain.radius
    if isinstance(domain, Polygon):
        v = np.asarray(domain.vertices, float)
        return v.min(axis=0), v.max(axis=0)
    raise TypeError(f"unknown domain {type(domain)!r}")


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Point cloud with cell weights over a domain.

    Attributes
    ----------
    points : (N, n) array of interior points
    weights : (N,) array of nonnegative cell measures
    h : characteristic spacing of the underlying lattice
    axes : per-axis (coords, weights) tuples for tensor grids, else None;
        mixed-norm engines require this structure
    domain : the domain the grid discretizes, when known
    """

    points: np.ndarray
    weights: np.ndarray
    h: float
    axes: Optional[tuple] = None
    domain: Optional["Domain"] = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        if pts.shape[0] != w.shape[0]:
            raise ValueError("points and weights must have equal length")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


def _axis_cells(lo: float, hi: float, h: float):
    """Midpoints and widths of cells of size h laid from lo; the last cell
    is clipped at hi so the widths sum to hi - lo exactly."""
    m = int(math.ceil((hi - lo) / h - 1e-12))
    edges = lo + h * np.arange(m + 1)
    edges[-1] = hi
    mids = 0.5 * (edges[:-1] + edges[1:])
    widths = np.diff(edges)
    return mids, widths


def sample_quadrature(domain: Domain, h: float,
                      scheme: str = "tensor-midpoint") -> QuadratureGrid:
    """Build a quadrature grid whose weight sum converges to |domain|.

    tensor-midpoint: per-axis midpoint cells; boxes/intervals clip the last
    cell so the weight sum is exact, disks/polygons keep full h^n cells
    whose centers pass the membership test (first-order boundary error).
    quasi-random: Halton points in the bounding box, constant weight
    |box|/N, points outside the domain discarded.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if h > diameter(domain):
        raise ValueError("h exceeds the domain diameter")
    lo, hi = bounding_box(domain)
    n = domain.dimension
    if scheme == "tensor-midpoint":
        if isinstance(domain, (Interval, Box)):
            axes = tuple(_axis_cells(lo[i], hi[i], h) for i in range(n))
            mesh = np.meshgrid(*[a[0] for a in axes], indexing="ij")
            pts = np.stack([m.ravel() for m in mesh], axis=-1)
            wmesh = np.meshgrid(*[a[1] for a in axes], indexing="ij")
            w = np.ones(pts.shape[0])
            for wm in wmesh:
                w = w * wm.ravel()
            return QuadratureGrid(pts, w, h, axes=axes, domain=domain)
        coords = [lo[i] + h * (np.arange(int(math.ceil((hi[i] - lo[i]) / h))) + 0.5)
                  for i in range(n)]
        mesh = np.meshgrid(*coords, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        keep = contains_many(domain, pts)
        pts = pts[keep]
        if len(pts) == 0:
            raise ValueError("no cell centers fall inside the domain; "
                             "decrease h")
        return QuadratureGrid(pts, np.full(pts.shape[0], h**n), h, domain=domain)
    if scheme == "quasi-random":
        box_vol = float(np.prod(hi - lo))
        total = max(8, int(round(box_vol / h**n)))
        sampler = qmc.Halton(d=n, scramble=False)
        raw = lo + sampler.random(total) * (hi - lo)
        keep = contains_many(domain, raw)
        pts = raw[keep]
        if len(pts) == 0:
            raise ValueError("no sample points fall inside the domain; "
                             "decrease h")
        return QuadratureGrid(pts, np.full(pts.shape[0], box_vol / total), h,
                              domain=domain)
    raise ValueError(f"unknown scheme {scheme!r}")


def _grid_graph(domain: Domain, h: float):
    """Interior lattice nodes plus the 3^n-1 neighbour adjacency.

    Nodes closer than h/2 to the boundary are dropped: their cells are not
    resolved at spacing h and would feed sub-resolution boundary distances
    into the cigar clause.  Edges are weighted by the quasihyperbolic
    length (Euclidean length divided by the boundary distance, trapezoid
    rule), whose geodesics are the canonical curves witnessing uniformity;
    plain Euclidean shortest paths hug the boundary and make the estimate
    collapse as the grid refines.  Both clauses are still evaluated with
    Euclidean geometry along the selected path.
    """
    grid = sample_quadrature(domain, h, "tensor-midpoint")
    pts = grid.points
    bdist = _boundary_distance_many(domain, pts)
    keep = bdist >= h / 2.0
    pts, bdist = pts[keep], bdist[keep]
    lo, _ = bounding_box(domain)
    n = domain.dimension
    idx = np.round((pts - lo) / h - 0.5).astype(np.int64)
    key = {tuple(row): i for i, row in enumerate(idx)}
    offsets = [off for off in np.ndindex(*([3] * n))
               if any(o != 1 for o in off)]
    rows, cols, vals = [], [], []
    for off in offsets:
        shift = np.asarray(off) - 1
        for i, row in enumerate(idx):
            j = key.get(tuple(row + shift))
            if j is not None and j > i:
                d = float(np.linalg.norm(pts[i] - pts[j]))
                qh = d * 0.5 * (1.0 / bdist[i] + 1.0 / bdist[j])
                rows.append(i)
                cols.append(j)
                vals.append(qh)
    adj = sparse.csr_matrix(
        (vals + vals, (rows + cols, cols + rows)), shape=(len(pts), len(pts))
    )
    return pts, adj


def uniformity_clauses(domain: Domain, pts: np.ndarray, adj,
                       i: int, j: int):
    """Length and cigar clause values for the shortest grid path i -> j.

    Returns (length_clause, cigar_clause); the cigar clause is +inf when
    the path has no interior node.  Raises if the grid graph does not
    connect the endpoints.
    """
    dist, pred = csgraph.dijkstra(adj, indices=i, return_predecessors=True)
    if not np.isfinite(dist[j]):
        raise RuntimeError(
            "grid graph disconnected between sample points; "
            "resolution too coarse"
        )
    path = [j]
    while path[-1] != i:
        path.append(int(pred[path[-1]]))
    path = path[::-1]
    x, y = pts[i], pts[j]
    sep = float(np.linalg.norm(x - y))
    hops = np.diff(pts[path], axis=0)
    euclid_length = float(np.sum(np.linalg.norm(hops, axis=1)))
    length_clause = sep / euclid_length
    interior = path[1:-1]
    if not interior:
        return length_clause, math.inf
    z = pts[interior]
    dz = _boundary_distance_many(domain, z)
    dx = np.linalg.norm(z - x, axis=1)
    dy = np.linalg.norm(z - y, axis=1)
    cigar = float(np.min(dz * sep / (dx * dy)))
    return length_clause, cigar


def estimate_uniformity(domain: Domain, trials: int, grid_h: float,
                        seed: int = 0) -> float:
    """Empirical lower estimate of the cigar-condition constant.

    Random interior pairs are snapped to the grid graph; the shortest path
    between them is scored by the worse of the length clause |x-y|/len(path)
    and the cigar clause min_z dist(z, boundary)|x-y| / (|x-z||y-z|).  The
    infimum over trials, clamped into (0, 1], is a lower estimate of the
    best admissible constant at this resolution.  For a fixed seed the
    trial stream is a deterministic prefix sequence, so more trials can
    only lower the estimate.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    pts, adj = _grid_graph(domain, grid_h)
    tree = cKDTree(pts)
    lo, hi = bounding_box(domain)
    rng = np.random.default_rng(seed)
    best = math.inf
    done = 0
    while done < trials:
        raw = lo + rng.random((2, domain.dimension)) * (hi - lo)
        if not contains_many(domain, raw).all():
            continue
        i, j = tree.query(raw)[1]
        if i == j:
            continue
        length_clause, cigar = uniformity_clauses(domain, pts, adj, int(i), int(j))
        best = min(best, length_clause, cigar)
        done += 1
    return float(min(best, 1.0))
