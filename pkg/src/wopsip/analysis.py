"""Norms, relative errors, convergence rates and structural diagnostics."""
import csv
import io
import math
from dataclasses import dataclass, field, fields as dc_fields
from typing import Optional

import numpy as np

from .fespace import (DiscreteFunction, broken_gradient, broken_divergence, cr_values,
                      edge_means, interpolate_rt, rt_values)
from .poisson import penalty_weights
from .quadrature import triangle_rule


# --- norms -----------------------------------------------------------------

def _scalar_parts(uh, exact):
    """Yield (exact scalar field or None, scalar CR function or None)."""
    if uh is not None and uh.space == "cr2":
        for i in range(2):
            yield (exact.component(i) if exact is not None else None), uh.component(i)
    elif uh is None and exact is not None and exact.rank == 1:
        for i in range(2):
            yield exact.component(i), None
    else:
        yield exact, uh


def norm_broken_h1(uh=None, exact=None, mesh=None):
    """``|u - u_h|_{H^1(T_h)}``; either argument may be omitted (zero)."""
    mesh = uh.mesh if uh is not None else mesh
    points, weights = triangle_rule(mesh.coords)
    total = 0.0
    for u, v in _scalar_parts(uh, exact):
        diff = np.zeros(points.shape)
        if u is not None:
            diff = diff + u.grad(points)
        if v is not None:
            diff = diff - broken_gradient(v)[:, None, :]
        total += float(np.einsum("tq,tqd,tqd->", weights, diff, diff))
    return math.sqrt(total)


def norm_l2(uh=None, exact=None, mesh=None):
    """``||u - u_h||_{L^2}`` for CR (scalar/vector) or P0 functions."""
    mesh = uh.mesh if uh is not None else mesh
    points, weights = triangle_rule(mesh.coords)
    diff = 0.0
    if exact is not None:
        diff = diff + exact(points)
    if uh is not None:
        if uh.space == "p0":
            diff = diff - uh.coefficients[:, None]
        elif uh.space == "rt0":
            diff = diff - rt_values(uh, points)
        else:
            diff = diff - cr_values(uh, points)
    diff = np.asarray(diff)
    if diff.ndim == 3:
        return math.sqrt(float(np.einsum("tq,tqd,tqd->", weights, diff, diff)))
    return math.sqrt(float(np.einsum("tq,tq,tq->", weights, diff, diff)))


def seminorm_penalty(uh=None, beta=1.0, exact=None, mesh=None):
    """``(sum_F kappa_{F(beta)} ||mean_F (u - u_h)||^2_{L^2(F)})^{1/2}``."""
    mesh = uh.mesh if uh is not None else mesh
    edges = mesh.boundary_edges
    w = penalty_weights(mesh, beta)
    total = 0.0
    for u, v in _scalar_parts(uh, exact):
        mean = np.zeros(len(edges))
        if u is not None:
            mean = mean + edge_means(mesh, u, edges)
        if v is not None:
            mean = mean - v.coefficients[edges]
        total += float(w @ mean ** 2)
    return math.sqrt(total)


def norm_11(uh=None, exact=None, mesh=None, beta=1.0):
    """``|u - u_h|_{1,beta}`` for scalar functions (the energy norm)."""
    return math.hypot(norm_broken_h1(uh, exact, mesh), seminorm_penalty(uh, beta, exact, mesh))


def norm_W(uh=None, exact=None, mesh=None):
    """``|u - u_h|_W = (sum_i |u_i - u_{h,i}|_{1,1}^2)^{1/2}`` for vectors."""
    return math.hypot(norm_broken_h1(uh, exact, mesh), seminorm_penalty(uh, 1.0, exact, mesh))


# --- error tables ----------------------------------------------------------

@dataclass
class ErrorRecord:
    """One row of a convergence table."""

    n: int
    h: float
    err_energy: float
    err_l2: float
    err_pressure: Optional[float] = None
    rate_energy: Optional[float] = None
    rate_l2: Optional[float] = None
    rate_pressure: Optional[float] = None
    flag: str = ""


HEADER = ["N", "h", "Err(W)", "r", "Err(L2)", "r", "Err(Q)", "r"]


def relative_errors(mesh, uh, exact_u, ph=None, exact_p=None):
    """Relative energy, L2 and pressure errors of a discrete solution.

    The energy error is ``|u - u_h|_{1,1}`` (scalar) or ``|u - u_h|_W``
    (vector) divided by the broken H1 seminorm of ``u``.  The exact solution
    has no boundary-mean penalty part of its own: that part scales like
    ``h**-1.5`` for nonzero boundary data and would swamp the ratio.
    Denominators use the same quadrature as the numerators.
    """
    def ratio(num, den):
        if den == 0.0:
            raise ZeroDivisionError("exact solution has zero norm")
        return num / den

    e_w = ratio(norm_W(uh, exact_u), norm_broken_h1(None, exact_u, mesh))
    e_l2 = ratio(norm_l2(uh, exact_u), norm_l2(None, exact_u, mesh))
    e_p = None
    if ph is not None and exact_p is not None:
        e_p = ratio(norm_l2(ph, exact_p), norm_l2(None, exact_p, mesh))
    return ErrorRecord(mesh.n, mesh.h, e_w, e_l2, e_p)


def convergence_rate(e_coarse, e_fine):
    """``log2(e_N / e_2N)``; raises ``ValueError`` for non-positive errors."""
    if not (e_coarse > 0 and e_fine > 0):
        raise ValueError("convergence rate needs positive errors")
    # difference of logs keeps r(a, b) == -r(b, a) exactly
    return (math.log(e_coarse) - math.log(e_fine)) / math.log(2.0)


def fill_rates(records):
    """Set rate columns between consecutive rows whose ``n`` doubles."""
    for prev, cur in zip(records, records[1:]):
        if cur.n != 2 * prev.n:
            continue
        for name in ("energy", "l2", "pressure"):
            a = getattr(prev, f"err_{name}")
            b = getattr(cur, f"err_{name}")
            if a is not None and b is not None and a > 0 and b > 0:
                setattr(cur, f"rate_{name}", convergence_rate(a, b))
    return records


def _fmt(x, spec):
    return "" if x is None else format(x, spec)


def _row(rec):
    return [str(rec.n), _fmt(rec.h, ".2e"), _fmt(rec.err_energy, ".5e"),
            _fmt(rec.rate_energy, ".2f"), _fmt(rec.err_l2, ".5e"), _fmt(rec.rate_l2, ".2f"),
            _fmt(rec.err_pressure, ".5e"), _fmt(rec.rate_pressure, ".2f")]


def to_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for rec in records:
        w.writerow(_row(rec))
    return buf.getvalue()


def from_csv(text):
    """Parse :func:`to_csv` output back into records."""
    rows = list(csv.reader(io.StringIO(text)))
    if rows[0] != HEADER:
        raise ValueError("unexpected CSV header")

    def num(s):
        return float(s) if s else None

    out = []
    for r in rows[1:]:
        out.append(ErrorRecord(int(r[0]), float(r[1]), float(r[2]), float(r[4]), num(r[6]),
                               num(r[3]), num(r[5]), num(r[7])))
    return out


def to_markdown(records, title=None):
    lines = [] if title is None else [f"**{title}**", ""]
    lines.append("| " + " | ".join(HEADER) + " |")
    lines.append("|" + "---|" * len(HEADER))
    for rec in records:
        cells = _row(rec)
        if rec.flag:
            cells[0] += f" ({rec.flag})"
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


# --- structural diagnostics ------------------------------------------------

def lemma1_residual(mesh, w, psi):
    """Defect of the RT/CR duality identity

        int (I^RT w . grad_h psi + div(I^RT w) psi) = sum_F int_F (w.n) mean_F psi

    for a vector field ``w`` and a scalar CR function ``psi``.
    """
    rt = interpolate_rt(mesh, w)
    points, weights = triangle_rule(mesh.coords)
    grad = broken_gradient(psi)
    lhs = float(np.einsum("tq,tqd,td->", weights, rt_values(rt, points), grad))
    lhs += float(np.einsum("tq,t,tq->", weights, broken_divergence(rt), cr_values(psi, points)))
    edges, t, k = mesh.boundary_owner()
    normals = mesh.edge_normals[edges] * mesh.element_signs[t, k][:, None]
    flux = mesh.edge_length[edges] * np.einsum("ei,ei->e", edge_means(mesh, w, edges), normals)
    rhs = float(flux @ psi.coefficients[edges])
    return abs(lhs - rhs)


def anisotropic_bound(mesh, u):
    """Terms of the a priori energy bound for a scalar solution ``u``.

    Returns a dict with ``directional`` = ``(sum_i sum_T h_i^2
    ||d(grad u)/d r_i||^2_{L2(T)})^{1/2}``, ``laplacian`` = ``h ||Lap u||``,
    ``boundary`` = ``h |u|_1 + h^{3/2} |u|_1^{1/2} ||Lap u||^{1/2}`` and their
    ``total``.  Second derivatives come from ``u.hess`` (finite differences
    of the gradient when no exact Hessian is attached).
    """
    g = mesh.geometry
    points, weights = triangle_rule(mesh.coords)
    H = u.hess(points)
    total = 0.0
    for hi, ri in ((g.h1, g.r1), (g.h2, g.r2)):
        d = np.einsum("tqjk,tk->tqj", H, ri)
        total += float(np.sum(hi ** 2 * np.einsum("tq,tqj,tqj->t", weights, d, d)))
    h = mesh.h
    lap = u.lap(points)
    lap_norm = math.sqrt(float(np.einsum("tq,tq,tq->", weights, lap, lap)))
    grad = u.grad(points)
    h1 = math.sqrt(float(np.einsum("tq,tqd,tqd->", weights, grad, grad)))
    terms = {
        "directional": math.sqrt(total),
        "laplacian": h * lap_norm,
        "boundary": h * h1 + h ** 1.5 * math.sqrt(h1 * lap_norm),
    }
    terms["total"] = sum(terms.values())
    return terms


# --- dense spectral oracles (small meshes only) ----------------------------

def _zero_mean_basis(areas):
    """Orthonormal basis of ``{q : areas . q = 0}``."""
    q, _ = np.linalg.qr(np.column_stack([areas, np.eye(len(areas))[:, :-1]]))
    return q[:, 1:]


def inf_sup_constant(mesh):
    """Smallest ``sup_v B(v, q) / (|v|_W ||q||)`` over zero-mean pressures.

    Computed densely as the square root of the smallest eigenvalue of
    ``Z^T B W^{-1} B^T Z`` against the pressure mass ``Z^T diag|T| Z``.
    Meant for meshes with at most a few hundred elements.
    """
    from scipy.linalg import eigh
    from .stokes import divergence_matrix, velocity_matrix

    W = velocity_matrix(mesh, 1.0, 1.0).toarray()
    B = divergence_matrix(mesh).toarray()
    Z = _zero_mean_basis(mesh.area)
    S = Z.T @ B @ np.linalg.solve(W, B.T) @ Z
    Mp = Z.T @ np.diag(mesh.area) @ Z
    lam = eigh(S, Mp, eigvals_only=True)
    return math.sqrt(max(lam[0], 0.0))


def poincare_ratio(mesh):
    """``max ||psi|| / |psi|_{1,0}`` over scalar CR functions.

    The CR mass matrix is diagonal (``sum |T|/3`` per edge), so this is the
    inverse square root of the smallest generalized eigenvalue of the
    ``beta = 0`` energy matrix, found by shift-invert Lanczos.
    """
    import scipy.sparse as sp
    from scipy.sparse.linalg import eigsh
    from .poisson import penalty_matrix, stiffness_matrix

    A = (stiffness_matrix(mesh) + penalty_matrix(mesh, 0.0)).csr
    mass = np.bincount(mesh.element_edges.ravel(), np.repeat(mesh.area / 3.0, 3),
                       minlength=mesh.n_edges)
    lam = eigsh(A.tocsc(), k=1, M=sp.diags(mass).tocsc(), sigma=0.0, which="LM",
                return_eigenvectors=False)
    return 1.0 / math.sqrt(lam[0])
