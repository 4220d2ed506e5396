"""Lowest-order Crouzeix-Raviart, piecewise-constant and Raviart-Thomas spaces.

Degrees of freedom
------------------
* CR: one value per edge, the mean of the function over that edge.  Vector
  fields store component ``i`` in the block ``[i*n_edges, (i+1)*n_edges)``.
* P0 (element): one value per element.  P0 (face): one value per boundary
  edge, in the order of :attr:`Mesh2D.boundary_edges`.
* RT0: one value per edge, the flux through the edge along the fixed global
  edge normal (:attr:`Mesh2D.edge_normals`).

On an element the CR basis function attached to the edge opposite vertex
``i`` is ``1 - 2*lambda_i`` and the RT0 basis function is
``sigma_i (x - p_i) / (2|T|)``.
"""
from dataclasses import dataclass

import numpy as np

from .quadrature import (EDGE_POINTS, EDGE_WEIGHTS, edge_mean, integrate_triangle,
                         signed_area, triangle_rule)

SPACES = ("cr", "cr2", "p0", "p0face", "rt0")


def n_dofs(mesh, space):
    """Dimension of ``space`` on ``mesh``."""
    return {
        "cr": mesh.n_edges,
        "cr2": 2 * mesh.n_edges,
        "p0": mesh.n_elements,
        "p0face": int(mesh.boundary.sum()),
        "rt0": mesh.n_edges,
    }[space]


@dataclass(frozen=True)
class DiscreteFunction:
    """Coefficient array tagged with the space it lives in."""

    mesh: object
    space: str
    coefficients: np.ndarray

    def __post_init__(self):
        if self.space not in SPACES:
            raise ValueError(f"unknown space {self.space!r}")
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != (n_dofs(self.mesh, self.space),):
            raise ValueError(f"{self.space} needs {n_dofs(self.mesh, self.space)} "
                             f"coefficients, got {c.shape}")
        object.__setattr__(self, "coefficients", c)

    def component(self, i):
        """Scalar CR function of component ``i`` of a vector CR function."""
        if self.space != "cr2":
            raise ValueError("component() needs a vector CR function")
        ne = self.mesh.n_edges
        return DiscreteFunction(self.mesh, "cr", self.coefficients[i * ne:(i + 1) * ne])

    def local(self):
        """Coefficients gathered per element, ``(nt, 3)`` or ``(nt, 3, 2)``."""
        if self.space in ("cr", "rt0"):
            return self.coefficients[self.mesh.element_edges]
        if self.space == "cr2":
            ne = self.mesh.n_edges
            c = self.coefficients.reshape(2, ne).T
            return c[self.mesh.element_edges]
        raise ValueError(f"local() not defined for {self.space}")


# --- local bases ------------------------------------------------------------

def barycentric_gradients(coords):
    """Gradients of the barycentric coordinates, shape ``(..., 3, 2)``."""
    coords = np.asarray(coords, dtype=float)
    k = np.arange(3)
    e = coords[..., (k + 2) % 3, :] - coords[..., (k + 1) % 3, :]
    area2 = (e[..., 0, 0] * e[..., 1, 1] - e[..., 0, 1] * e[..., 1, 0])
    # grad lambda_k is the inward normal of the opposite edge over its height
    return np.stack([-e[..., 1], e[..., 0]], axis=-1) / area2[..., None, None]


def barycentric(coords, x):
    """Barycentric coordinates of points ``x`` (shape ``(m, 2)``) in one
    triangle, shape ``(m, 3)``."""
    coords = np.asarray(coords, dtype=float)
    g = barycentric_gradients(coords)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    lam = np.einsum("kd,mkd->mk", g, x[:, None, :] - coords[[1, 2, 0]][None])
    return lam


@dataclass(frozen=True)
class CRBasis:
    """Local CR basis on one triangle."""

    coords: np.ndarray
    gradients: np.ndarray

    def __call__(self, x):
        """Values of the three basis functions at points ``x``, ``(m, 3)``."""
        return 1.0 - 2.0 * barycentric(self.coords, x)


def cr_local_basis(coords):
    coords = np.asarray(coords, dtype=float)
    return CRBasis(coords, -2.0 * barycentric_gradients(coords))


def cr_gradients(mesh):
    """Constant gradients of all local CR basis functions, ``(nt, 3, 2)``."""
    return -2.0 * barycentric_gradients(mesh.coords)


@dataclass(frozen=True)
class RTBasis:
    """Local RT0 basis on one triangle with orientation signs ``signs``."""

    coords: np.ndarray
    signs: np.ndarray
    area: float

    def __call__(self, x):
        """Values at points ``x``, shape ``(m, 3, 2)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d = x[:, None, :] - self.coords[None]
        return self.signs[None, :, None] * d / (2.0 * self.area)

    @property
    def divergence(self):
        return self.signs / self.area


def rt_local_basis(coords, signs=(1, 1, 1)):
    coords = np.asarray(coords, dtype=float)
    return RTBasis(coords, np.asarray(signs, dtype=float), float(abs(signed_area(coords))))


# --- projections ------------------------------------------------------------

def project_p0_element(coords, f):
    """Mean of ``f`` over one triangle."""
    return integrate_triangle(coords, f) / abs(signed_area(coords))


def project_p0_face(a, b, f):
    """Mean of ``f`` over the segment ``a b``."""
    return edge_mean(a, b, f)


def element_means(mesh, f):
    """Elementwise means of a scalar callback over the whole mesh."""
    points, weights = triangle_rule(mesh.coords)
    return np.einsum("tq,tq->t", weights, f(points)) / mesh.area


def edge_quadrature(mesh, edges=None):
    """Quadrature points ``(ne, 3, 2)`` and unit-sum weights on edges."""
    ev = mesh.edge_vertices if edges is None else mesh.edge_vertices[edges]
    a = mesh.vertices[ev[:, 0]]
    b = mesh.vertices[ev[:, 1]]
    t = EDGE_POINTS[:, None]
    points = a[:, None, :] * (1.0 - t) + b[:, None, :] * t
    return points, EDGE_WEIGHTS


def edge_means(mesh, f, edges=None):
    """Means of ``f`` over edges; vector callbacks give ``(ne, 2)``."""
    points, w = edge_quadrature(mesh, edges)
    return np.tensordot(f(points), w, axes=(1, 0))


def p0_projection(mesh, f):
    """Elementwise L2 projection of a scalar field as a P0 function."""
    return DiscreteFunction(mesh, "p0", element_means(mesh, f))


# --- interpolation ----------------------------------------------------------

def interpolate_cr(mesh, f):
    """CR interpolant: edge means of ``f`` (scalar or vector field)."""
    points, w = edge_quadrature(mesh)
    values = f(points)
    if getattr(f, "rank", 0) == 1 or values.ndim == 3:
        means = np.einsum("eqi,q->ie", values, w)
        return DiscreteFunction(mesh, "cr2", means.ravel())
    return DiscreteFunction(mesh, "cr", values @ w)


def interpolate_rt(mesh, v):
    """RT0 interpolant: fluxes of ``v`` through every edge."""
    points, w = edge_quadrature(mesh)
    means = np.einsum("eqi,q->ei", v(points), w)
    flux = mesh.edge_length * np.einsum("ei,ei->e", means, mesh.edge_normals)
    return DiscreteFunction(mesh, "rt0", flux)


def interpolate_rt0_from_cr(mesh, vh, zero_boundary=True):
    """Elementwise RT0 interpolation of a vector CR function.

    Interior fluxes are ``|F| mean_F(v_h) . n_F``, single-valued because CR
    edge means are shared.  With ``zero_boundary`` the boundary fluxes are
    set to zero so the result has vanishing normal trace on the boundary;
    otherwise they are interpolated like the interior ones.
    """
    if vh.space != "cr2":
        raise ValueError("expected a vector CR function")
    return DiscreteFunction(mesh, "rt0", cr_to_rt0_matrix(mesh, zero_boundary) @ vh.coefficients)


def cr_to_rt0_matrix(mesh, zero_boundary=True):
    """Sparse matrix of :func:`interpolate_rt0_from_cr`, ``(ne, 2 ne)``."""
    import scipy.sparse as sp

    ne = mesh.n_edges
    edges = mesh.interior_edges if zero_boundary else np.arange(ne)
    scale = mesh.edge_length[edges][:, None] * mesh.edge_normals[edges]
    rows = np.concatenate([edges, edges])
    cols = np.concatenate([edges, edges + ne])
    return sp.csr_matrix((scale.T.ravel(), (rows, cols)), shape=(ne, 2 * ne))


# --- evaluation -------------------------------------------------------------

def _check_point(mesh, element, x, tol=1e-10):
    lam = barycentric(mesh.coords[element], x)
    if np.any(lam < -tol):
        raise LookupError(f"point {np.asarray(x).tolist()} not in element {element}")
    return lam


def evaluate(uh, element, x):
    """Value of a discrete function at points ``x`` inside ``element``."""
    mesh = uh.mesh
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if uh.space == "p0":
        _check_point(mesh, element, x)
        return np.full(len(x), uh.coefficients[element])
    if uh.space in ("cr", "cr2"):
        lam = _check_point(mesh, element, x)
        theta = 1.0 - 2.0 * lam
        return theta @ uh.local()[element]
    if uh.space == "rt0":
        _check_point(mesh, element, x)
        b = rt_local_basis(mesh.coords[element], mesh.element_signs[element])
        return np.einsum("mkd,k->md", b(x), uh.local()[element])
    raise ValueError(f"cannot evaluate {uh.space} pointwise")


def broken_gradient(uh, element=None):
    """Constant elementwise gradient of a CR function.

    Returns ``(2,)`` (scalar, single element), ``(2, 2)`` (vector, rows are
    components) or the stacked arrays over all elements if ``element`` is
    omitted.
    """
    if uh.space not in ("cr", "cr2"):
        raise ValueError("broken gradient needs a CR function")
    mesh = uh.mesh
    if element is None:
        g = cr_gradients(mesh)
        c = uh.local()
    else:
        g = cr_gradients(mesh)[element]
        c = uh.local()[element]
    if uh.space == "cr":
        return np.einsum("...k,...kd->...d", c, g)
    return np.einsum("...ki,...kd->...id", c, g)


def broken_divergence(vh):
    """Elementwise divergence of a vector CR or an RT0 function."""
    mesh = vh.mesh
    if vh.space == "cr2":
        return np.trace(broken_gradient(vh), axis1=1, axis2=2)
    if vh.space == "rt0":
        return np.einsum("tk,tk->t", mesh.element_signs, vh.local()) / mesh.area
    raise ValueError(f"no divergence for {vh.space}")


def rt_values(vh, points):
    """RT0 function at per-element points ``(nt, q, 2)``, returns ``(nt, q, 2)``."""
    mesh = vh.mesh
    coords = mesh.coords
    c = vh.local() * mesh.element_signs / (2.0 * mesh.area[:, None])
    d = points[:, :, None, :] - coords[:, None, :, :]
    return np.einsum("tk,tqkd->tqd", c, d)


def cr_values(uh, points):
    """CR function at per-element points ``(nt, q, 2)``.

    Returns ``(nt, q)`` for scalar and ``(nt, q, 2)`` for vector functions.
    """
    mesh = uh.mesh
    coords = mesh.coords
    g = barycentric_gradients(coords)
    lam = np.einsum("tkd,tqkd->tqk", g, points[:, :, None, :] - coords[:, [1, 2, 0]][:, None])
    theta = 1.0 - 2.0 * lam
    c = uh.local()
    if uh.space == "cr":
        return np.einsum("tqk,tk->tq", theta, c)
    return np.einsum("tqk,tki->tqi", theta, c)
