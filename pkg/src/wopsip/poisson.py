"""Weakly over-penalised Nitsche scheme for the Poisson problem.

Find ``u_h`` in the CR space with

    (grad_h u_h, grad_h v_h) + sum_F kappa_F <mean_F u_h, mean_F v_h>_F
        = (f, v_h) + sum_F kappa_F <mean_F g, mean_F v_h>_F

for all CR ``v_h``, where ``F`` runs over boundary edges and
``kappa_F = h**(-2) / ell_{T,F}`` with the global mesh size ``h``.
Boundary values enter only through edge means; no dof is constrained.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fespace import DiscreteFunction, barycentric_gradients, cr_gradients, edge_means
from .fields import AnalyticField, FieldError
from .linalg import SolveReport, assemble, cg
from .quadrature import triangle_rule


def penalty_weights(mesh, beta=1.0):
    """``kappa_{F(beta)} |F|`` for every boundary edge, in the order of
    ``mesh.boundary_edges``."""
    edges, t, k = mesh.boundary_owner()
    ell = mesh.geometry.ell[t, k]
    kappa = mesh.h ** (-2.0 * beta) / ell
    return kappa * mesh.edge_length[edges]


def stiffness_matrix(mesh):
    """Broken CR stiffness ``(grad_h u, grad_h v)`` over edge dofs."""
    g = cr_gradients(mesh)
    local = mesh.area[:, None, None] * np.einsum("tid,tjd->tij", g, g)
    dofs = mesh.element_edges
    rows = np.repeat(dofs, 3, axis=1)
    cols = np.tile(dofs, (1, 3))
    return assemble(rows, cols, local.reshape(-1, 9), mesh.n_edges)


def penalty_matrix(mesh, beta=1.0):
    """Diagonal boundary penalty ``sum_F kappa_F |F| mean_F u mean_F v``."""
    edges = mesh.boundary_edges
    return assemble(edges, edges, penalty_weights(mesh, beta), mesh.n_edges)


def load_vector(mesh, f):
    """``(f, theta_F)`` for every CR basis function."""
    points, weights = triangle_rule(mesh.coords)
    coords = mesh.coords
    g = barycentric_gradients(coords)
    lam = np.einsum("tkd,tqkd->tqk", g, points[:, :, None, :] - coords[:, [1, 2, 0]][:, None])
    theta = 1.0 - 2.0 * lam
    local = np.einsum("tq,tq,tqk->tk", weights, f(points), theta)
    return np.bincount(mesh.element_edges.ravel(), local.ravel(), minlength=mesh.n_edges)


def boundary_load(mesh, g, beta=1.0):
    """``sum_F kappa_F <mean_F g, mean_F v>_F`` as a vector over edge dofs."""
    edges = mesh.boundary_edges
    out = np.zeros(mesh.n_edges)
    out[edges] = penalty_weights(mesh, beta) * edge_means(mesh, g, edges)
    return out


@dataclass(frozen=True)
class PoissonProblem:
    mesh: object
    f: AnalyticField
    g: AnalyticField
    exact: Optional[AnalyticField] = None


def manufacture_poisson_rhs(u):
    """Right-hand side ``f = -Laplace(u)`` and boundary data ``g = u``."""
    if u.laplacian is None:
        raise FieldError("manufactured data needs the Laplacian of the exact solution")
    f = AnalyticField(lambda x: -u.lap(x), name=f"-lap({u.name})")
    return f, u


def poisson_problem(mesh, u):
    """Problem whose exact solution is the field ``u``."""
    f, g = manufacture_poisson_rhs(u)
    return PoissonProblem(mesh, f, g, exact=u)


def assemble_poisson(problem, beta=1.0):
    """System matrix and right-hand side of the scheme.

    ``beta`` is the penalty exponent (the scheme uses 1; other values are
    exposed for mutation checks)."""
    mesh = problem.mesh
    A = stiffness_matrix(mesh) + penalty_matrix(mesh, beta)
    b = load_vector(mesh, problem.f) + boundary_load(mesh, problem.g, beta)
    return A, b


def solve_poisson(problem, tol=1e-12, maxit=None, beta=1.0):
    """Assemble and solve with unpreconditioned CG.

    Returns ``(u_h, SolveReport)``.
    """
    A, b = assemble_poisson(problem, beta)
    x, report = cg(A, b, tol=tol, maxit=maxit)
    return DiscreteFunction(problem.mesh, "cr", x), report
