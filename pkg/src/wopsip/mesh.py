"""Structured anisotropic triangulations of the unit square.

Three families of tensor-product grids are supported, each cell being cut
along its lower-left to upper-right diagonal:

* ``uniform``: ``x_i = i/n`` in both directions,
* ``graded``:  ``x1_i = i/n`` and ``x2_i = (i/n)**2``,
* ``cosine``:  ``x_i = (1 - cos(i*pi/n))/2`` in both directions.

Besides topology, every mesh carries the per-element anisotropic geometry
(longest-edge labelling, directional lengths ``h1 >= h2``, unit directions
``r1, r2`` and the semi-regularity parameter ``H_T``).
"""
from dataclasses import dataclass

import numpy as np

from .quadrature import signed_area

FAMILIES = ("uniform", "graded", "cosine")

# relative tolerance used to decide that two edge lengths tie
_TIE = 1e-12


class MeshError(ValueError):
    """Invalid or non-conforming triangulation."""


class GeometryError(ValueError):
    """Degenerate element geometry."""


@dataclass(frozen=True)
class Condition1:
    """Labelled vertices of a triangle: ``p2 p3`` is a longest edge and
    ``h1 = |p1 - p2| >= h2 = |p1 - p3|``."""

    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    h1: float
    h2: float
    r1: np.ndarray
    r2: np.ndarray


@dataclass(frozen=True)
class ElementGeometry:
    """Per-element geometric quantities, stored as arrays over elements.

    ``labels[t]`` holds the local vertex numbers of ``(p1, p2, p3)``;
    ``ell[t, k]`` is ``2|T| / |F_k|`` for the local edge ``F_k`` opposite
    local vertex ``k``.
    """

    hT: np.ndarray
    area: np.ndarray
    labels: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    HT: np.ndarray
    ell: np.ndarray

    def __len__(self):
        return len(self.hT)

    def __getitem__(self, t):
        return ElementGeometry(*(getattr(self, f)[t] for f in self.__dataclass_fields__))


@dataclass(frozen=True)
class Mesh2D:
    """Conforming triangulation with edge topology and element geometry.

    Edges are numbered globally; ``edge_vertices`` holds sorted endpoint
    pairs, ``edge_elements`` the adjacent elements (``-1`` marks a missing
    neighbour on the boundary).  ``element_edges[t, k]`` is the edge opposite
    local vertex ``k`` and ``element_signs[t, k]`` is ``+1`` when the global
    edge normal points out of ``t``.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edge_vertices: np.ndarray
    edge_elements: np.ndarray
    boundary: np.ndarray
    element_edges: np.ndarray
    element_signs: np.ndarray
    geometry: ElementGeometry
    family: str = ""
    n: int = 0

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_elements(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edge_vertices)

    @property
    def h(self):
        """Global mesh size, the largest element diameter."""
        return float(self.geometry.hT.max())

    @property
    def coords(self):
        """Element vertex coordinates, shape ``(n_elements, 3, 2)``."""
        return self.vertices[self.triangles]

    @property
    def area(self):
        return self.geometry.area

    @property
    def edge_length(self):
        a, b = self.vertices[self.edge_vertices].transpose(1, 0, 2)
        return np.linalg.norm(b - a, axis=1)

    @property
    def edge_midpoints(self):
        return self.vertices[self.edge_vertices].mean(axis=1)

    @property
    def edge_normals(self):
        """Fixed unit normal of every edge: the tangent from the smaller to
        the larger endpoint index, rotated by +90 degrees."""
        a, b = self.vertices[self.edge_vertices].transpose(1, 0, 2)
        t = b - a
        n = np.stack([-t[:, 1], t[:, 0]], axis=1)
        return n / np.linalg.norm(n, axis=1)[:, None]

    @property
    def boundary_edges(self):
        return np.flatnonzero(self.boundary)

    @property
    def interior_edges(self):
        return np.flatnonzero(~self.boundary)

    def boundary_owner(self):
        """For each boundary edge, the owning element and its local index."""
        edges = self.boundary_edges
        t = self.edge_elements[edges, 0]
        k = np.argmax(self.element_edges[t] == edges[:, None], axis=1)
        return edges, t, k


def grid_points(family, n):
    """Grid coordinates ``(x1, x2)`` of a structured family."""
    if family not in FAMILIES:
        raise ValueError(f"unknown mesh family {family!r}; expected one of {FAMILIES}")
    s = np.arange(n + 1) / n
    if family == "uniform":
        return s, s.copy()
    if family == "graded":
        return s, s ** 2
    c = 0.5 * (1.0 - np.cos(np.pi * s))
    c[0], c[-1] = 0.0, 1.0
    return c, c.copy()


def generate_structured(family, n):
    """Triangulate the unit square with an ``n x n`` structured grid.

    Returns a :class:`Mesh2D` with ``(n+1)**2`` vertices and ``2 n**2``
    counterclockwise triangles.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    x1, x2 = grid_points(family, n)
    X1, X2 = np.meshgrid(x1, x2)
    vertices = np.column_stack([X1.ravel(), X2.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i, j = i.ravel(), j.ravel()
    ll = j * (n + 1) + i
    lr = ll + 1
    ul = ll + n + 1
    ur = ul + 1
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([ll, lr, ur])
    triangles[1::2] = np.column_stack([ll, ur, ul])
    return build_mesh(vertices, triangles, family=family, n=n)


def build_mesh(vertices, triangles, family="", n=0):
    """Assemble a :class:`Mesh2D` from raw arrays."""
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    topo = build_topology(vertices, triangles)
    geometry = compute_geometry(vertices[triangles], triangles)
    return Mesh2D(vertices, triangles, *topo, geometry, family=family, n=n)


def build_topology(vertices, triangles):
    """Edge numbering and element-to-edge connectivity.

    Returns ``(edge_vertices, edge_elements, boundary, element_edges,
    element_signs)``; see :class:`Mesh2D`.  Raises :class:`MeshError` on
    repeated or overlapping elements, edges shared by more than two elements
    and hanging nodes.
    """
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    nt = len(triangles)
    if triangles.ndim != 2 or triangles.shape[1] != 3:
        raise MeshError("triangles must have shape (n, 3)")
    if triangles.min(initial=0) < 0 or triangles.max(initial=-1) >= len(vertices):
        raise MeshError("vertex index out of range")
    if np.any((triangles[:, 0] == triangles[:, 1]) | (triangles[:, 1] == triangles[:, 2])
              | (triangles[:, 0] == triangles[:, 2])):
        raise MeshError("triangle with repeated vertex")
    area = signed_area(vertices[triangles])
    if np.any(area <= 0.0):
        raise GeometryError("triangles must be counterclockwise with positive area")
    if len(np.unique(np.sort(triangles, axis=1), axis=0)) != nt:
        raise MeshError("duplicate triangle")

    # local edge k is opposite local vertex k, traversed v[k+1] -> v[k+2]
    start = triangles[:, [1, 2, 0]]
    end = triangles[:, [2, 0, 1]]
    pairs = np.stack([np.minimum(start, end), np.maximum(start, end)], axis=-1).reshape(-1, 2)
    edge_vertices, inverse, counts = np.unique(pairs, axis=0, return_inverse=True,
                                               return_counts=True)
    inverse = inverse.ravel()
    if np.any(counts > 2):
        raise MeshError("edge shared by more than two triangles")
    element_edges = inverse.reshape(nt, 3)
    # traversing min -> max means the outward normal is minus the global one
    element_signs = np.where(start < end, -1, 1).reshape(nt, 3)

    ne = len(edge_vertices)
    edge_elements = -np.ones((ne, 2), dtype=np.int64)
    owner = np.repeat(np.arange(nt), 3)
    order = np.argsort(inverse, kind="stable")
    sorted_edges = inverse[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = sorted_edges[1:] != sorted_edges[:-1]
    edge_elements[sorted_edges[first], 0] = owner[order[first]]
    edge_elements[sorted_edges[~first], 1] = owner[order[~first]]

    signs = element_signs.ravel()
    interior = counts == 2
    sign_sum = np.zeros(ne)
    np.add.at(sign_sum, inverse, signs)
    if np.any(sign_sum[interior] != 0):
        raise MeshError("overlapping triangles: inconsistent orientation across an edge")

    boundary = counts == 1
    _check_hanging_nodes(vertices, edge_vertices[boundary])
    return edge_vertices, edge_elements, boundary, element_edges, element_signs


def _check_hanging_nodes(vertices, edges):
    a = vertices[edges[:, 0]]
    b = vertices[edges[:, 1]]
    t = b - a
    length2 = np.einsum("ij,ij->i", t, t)
    for k in range(len(edges)):
        d = vertices - a[k]
        s = d @ t[k] / length2[k]
        cross = d[:, 0] * t[k, 1] - d[:, 1] * t[k, 0]
        on = (np.abs(cross) <= 1e-12 * length2[k]) & (s > 1e-12) & (s < 1 - 1e-12)
        if np.any(on):
            raise MeshError(f"hanging node {np.flatnonzero(on)[0]} on edge {tuple(edges[k])}")


def _labels(coords, ids):
    """Local indices of (p1, p2, p3) for a batch of triangles."""
    nt = len(coords)
    k = np.arange(3)
    a = coords[:, (k + 1) % 3]
    b = coords[:, (k + 2) % 3]
    lengths = np.linalg.norm(b - a, axis=2)
    lmax = lengths.max(axis=1, keepdims=True)
    eligible = lengths >= lmax * (1.0 - _TIE)
    ia = ids[:, (k + 1) % 3]
    ib = ids[:, (k + 2) % 3]
    big = ids.max(initial=0) + 1
    key = np.minimum(ia, ib) * big + np.maximum(ia, ib)
    key = np.where(eligible, key, np.iinfo(np.int64).max)
    p1 = np.argmin(key, axis=1)
    q = (p1 + 1) % 3
    r = (p1 + 2) % 3
    rows = np.arange(nt)
    dq = np.linalg.norm(coords[rows, q] - coords[rows, p1], axis=1)
    dr = np.linalg.norm(coords[rows, r] - coords[rows, p1], axis=1)
    tie = np.abs(dq - dr) <= _TIE * np.maximum(dq, dr)
    q_first = np.where(tie, ids[rows, q] < ids[rows, r], dq > dr)
    p2 = np.where(q_first, q, r)
    p3 = np.where(q_first, r, q)
    return np.column_stack([p1, p2, p3])


def compute_geometry(coords, ids=None):
    """Vectorised :class:`ElementGeometry` for ``(nt, 3, 2)`` coordinates.

    ``ids`` are global vertex numbers used for deterministic tie-breaking;
    local numbering is used when omitted.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 2:
        coords = coords[None]
    nt = len(coords)
    ids = np.tile(np.arange(3), (nt, 1)) if ids is None else np.asarray(ids).reshape(nt, 3)
    area = np.abs(signed_area(coords))
    k = np.arange(3)
    lengths = np.linalg.norm(coords[:, (k + 2) % 3] - coords[:, (k + 1) % 3], axis=2)
    hT = lengths.max(axis=1)
    if np.any(area <= 1e-14 * hT ** 2):
        raise GeometryError("zero-area triangle")
    labels = _labels(coords, ids)
    rows = np.arange(nt)[:, None]
    p = coords[rows, labels]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    h1 = np.linalg.norm(d1, axis=1)
    h2 = np.linalg.norm(d2, axis=1)
    HT = h1 * h2 / area * hT
    ell = 2.0 * area[:, None] / lengths
    return ElementGeometry(hT, area, labels, h1, h2, d1 / h1[:, None], d2 / h2[:, None],
                           HT, ell)


def classify_condition1(coords):
    """Label the vertices of one triangle so that ``p2 p3`` is a longest
    edge and ``|p1 - p2| >= |p1 - p3|``."""
    coords = np.asarray(coords, dtype=float)
    g = compute_geometry(coords)
    p = coords[g.labels[0]]
    return Condition1(p[0], p[1], p[2], float(g.h1[0]), float(g.h2[0]),
                      g.r1[0], g.r2[0])


def element_geometry(coords):
    """:class:`ElementGeometry` of a single triangle (arrays of length one)."""
    return compute_geometry(coords)


def element_angles(coords):
    """Interior angles in degrees, shape ``(nt, 3)``."""
    coords = np.asarray(coords, dtype=float)
    k = np.arange(3)
    u = coords[:, (k + 1) % 3] - coords[:, k]
    v = coords[:, (k + 2) % 3] - coords[:, k]
    cos = np.einsum("tkd,tkd->tk", u, v) / (np.linalg.norm(u, axis=2) * np.linalg.norm(v, axis=2))
    return np.degrees(np.arccos(np.clip(cos, -1.0, 1.0)))


def semi_regularity_report(mesh):
    """``(max H_T/h_T, max interior angle in degrees, max aspect ratio)``.

    The aspect ratio of an element is ``h_T`` over its smallest height
    ``2|T|/h_T``.
    """
    g = mesh.geometry
    ratio = float(np.max(g.HT / g.hT))
    angle = float(element_angles(mesh.coords).max())
    aspect = float(np.max(g.hT ** 2 / (2.0 * g.area)))
    return ratio, angle, aspect
