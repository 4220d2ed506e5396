"""Pressure-robust Nitsche scheme for the Stokes problem.

Velocity in the vector CR space, pressure elementwise constant with zero
mean.  The velocity block is ``nu * (K + eta * P)`` per component (``K`` the
broken stiffness, ``P`` the boundary mean penalty), the coupling is
``B(v, q) = -(div_h v, q)``.  In the ``robust`` variant the body force is
tested against the RT0 interpolant of the test function; the ``plain``
variant tests it against the CR function itself.

``rt_boundary`` picks how boundary edges enter that interpolant.  With
``"zero"`` their fluxes are dropped, which gives an H(div)-conforming field
with vanishing normal trace.  ``"interpolate"`` (default) keeps the flux of
the CR trace on each boundary edge, so ``div I_RT v = div_h v`` holds on
every element and a gradient force with zero boundary trace is absorbed
by the pressure.  Zeroing breaks that on boundary elements.  They differ only on elements touching
the boundary.
"""
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .fespace import DiscreteFunction, cr_gradients, cr_to_rt0_matrix, edge_means
from .fields import AnalyticField, FieldError, from_sympy
from .linalg import SolveReport, SparseSym, solve_saddle
from .poisson import load_vector, penalty_matrix, penalty_weights, stiffness_matrix
from .quadrature import triangle_rule

VARIANTS = ("robust", "plain")
RT_BOUNDARY = ("interpolate", "zero")


@dataclass(frozen=True)
class StokesProblem:
    mesh: object
    nu: float
    eta: float
    f: AnalyticField
    g: AnalyticField
    exact_u: Optional[AnalyticField] = None
    exact_p: Optional[AnalyticField] = None
    variant: str = "robust"
    rt_boundary: str = "interpolate"

    def __post_init__(self):
        if not 0.0 < self.nu:
            raise ValueError("viscosity must be positive")
        if not self.eta > 0.0:
            raise ValueError("penalty scale must be positive")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.rt_boundary not in RT_BOUNDARY:
            raise ValueError(f"rt_boundary must be one of {RT_BOUNDARY}")


@dataclass(frozen=True)
class StokesSolution:
    u: DiscreteFunction
    p: DiscreteFunction
    report: SolveReport


@dataclass(frozen=True)
class StokesSystem:
    M: SparseSym
    B: sp.csr_matrix
    rhs: np.ndarray
    penalty_rhs: np.ndarray
    force_rhs: np.ndarray


def boundary_flux_defect(mesh, g):
    """``int_{boundary} g . n ds`` by edge quadrature (must vanish)."""
    edges, t, k = mesh.boundary_owner()
    normals = mesh.edge_normals[edges] * mesh.element_signs[t, k][:, None]
    means = edge_means(mesh, g, edges)
    return float(np.sum(mesh.edge_length[edges] * np.einsum("ei,ei->e", means, normals)))


def divergence_matrix(mesh):
    """``B[t, dof] = -|T| d/dx_i theta`` so that ``(B v)_t = -int_T div v``."""
    g = cr_gradients(mesh)
    nt, ne = mesh.n_elements, mesh.n_edges
    rows = np.repeat(np.arange(nt), 6)
    cols = np.concatenate([mesh.element_edges, mesh.element_edges + ne], axis=1).ravel()
    vals = -mesh.area[:, None] * np.concatenate([g[:, :, 0], g[:, :, 1]], axis=1)
    return sp.csr_matrix((vals.ravel(), (rows, cols)), shape=(nt, 2 * ne))


def velocity_matrix(mesh, nu, eta):
    """``nu * (K + eta P)`` on both velocity components."""
    block = (stiffness_matrix(mesh) + penalty_matrix(mesh) * eta).csr * nu
    return SparseSym(sp.block_diag([block, block], format="csr"))


def rt_force_vector(mesh, f, zero_boundary=False):
    """``(f, I_h0 v)`` as a vector over vector CR dofs.

    Per element and local edge ``k`` this integrates ``f . sigma_k (x - p_k)
    / (2|T|)``; the element contributions are summed into edge fluxes and
    pulled back through the CR -> RT0 map.
    """
    points, weights = triangle_rule(mesh.coords)
    fx = f(points)
    d = points[:, :, None, :] - mesh.coords[:, None, :, :]
    local = np.einsum("tq,tqd,tqkd->tk", weights, fx, d)
    local *= mesh.element_signs / (2.0 * mesh.area[:, None])
    flux_load = np.bincount(mesh.element_edges.ravel(), local.ravel(), minlength=mesh.n_edges)
    return cr_to_rt0_matrix(mesh, zero_boundary).T @ flux_load


def plain_force_vector(mesh, f):
    """``(f_i, v_i)`` for both components."""
    return np.concatenate([load_vector(mesh, lambda x, i=i: f(x)[..., i]) for i in range(2)])


def penalty_load(mesh, g, nu, eta):
    """``nu eta sum_F kappa_F <mean g_i, mean v_i>_F`` for both components."""
    edges = mesh.boundary_edges
    w = nu * eta * penalty_weights(mesh)
    means = edge_means(mesh, g, edges)
    out = np.zeros((2, mesh.n_edges))
    out[:, edges] = (w[:, None] * means).T
    return out.ravel()


def assemble_stokes(problem):
    """Block system ``(M, B, rhs)`` of the scheme."""
    mesh = problem.mesh
    M = velocity_matrix(mesh, problem.nu, problem.eta)
    B = divergence_matrix(mesh)
    if problem.variant == "robust":
        force = rt_force_vector(mesh, problem.f, problem.rt_boundary == "zero")
    else:
        force = plain_force_vector(mesh, problem.f)
    pen = penalty_load(mesh, problem.g, problem.nu, problem.eta)
    return StokesSystem(M, B, force + pen, pen, force)


def solve_stokes(problem, tol=1e-10, inner="direct", inner_tol=1e-12, check_data=True):
    """Assemble and solve; the pressure has zero area-weighted mean."""
    mesh = problem.mesh
    if check_data:
        defect = boundary_flux_defect(mesh, problem.g)
        scale = max(1.0, float(np.abs(edge_means(mesh, problem.g, mesh.boundary_edges)).max()))
        if abs(defect) > 1e-10 * scale:
            raise ValueError(f"boundary data has nonzero net flux {defect:.3e}")
    system = assemble_stokes(problem)
    u, p, report = solve_saddle(system.M, system.B, system.rhs, areas=mesh.area, tol=tol,
                                inner=inner, inner_tol=inner_tol)
    return StokesSolution(DiscreteFunction(mesh, "cr2", u), DiscreteFunction(mesh, "p0", p),
                          report)


def manufacture_stokes_rhs(u, p, nu):
    """Body force ``f = -nu Laplace(u) + grad(p)`` and boundary data ``g = u``."""
    if u.laplacian is None or p.gradient is None:
        raise FieldError("manufactured Stokes data needs Laplace(u) and grad(p)")
    f = AnalyticField(lambda x: -nu * u.lap(x) + p.grad(x), rank=1, name="f")
    return f, u


def example_fields(name):
    """Exact ``(u, p)`` of the two benchmark examples."""
    key = name.lower().replace(" ", "").replace("_", "")
    if key == "example1":
        u = from_sympy(("sin(pi*x1)*cos(pi*x2)", "-cos(pi*x1)*sin(pi*x2)"), name="u1")
        p = from_sympy("sin(pi*x1)*cos(pi*x2)", name="p1")
        return u, p
    if key == "example2":
        u = from_sympy(("-(x2 - 1/2)", "x1 - 1/2"), name="u2")
        p = from_sympy("100000*(1 - x2)**3 - 100000/4", name="p2")
        return u, p
    raise KeyError(f"unknown example {name!r}")


def example_catalog(name, mesh=None, nu=1.0, eta=1.0, variant="robust",
                    rt_boundary="interpolate"):
    """:class:`StokesProblem` for ``Example1`` or ``Example2``.

    Without a mesh this returns a template that must be completed with
    :func:`dataclasses.replace`.
    """
    u, p = example_fields(name)
    f, g = manufacture_stokes_rhs(u, p, nu)
    return StokesProblem(mesh, nu, eta, f, g, exact_u=u, exact_p=p, variant=variant,
                         rt_boundary=rt_boundary)


def with_mesh(problem, mesh):
    return replace(problem, mesh=mesh)
