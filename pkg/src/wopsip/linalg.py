"""Sparse symmetric storage, plain conjugate gradients and a Schur-complement
(Uzawa-CG) driver for the Stokes saddle-point system."""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


@dataclass
class SolveReport:
    iterations: int
    residual: float
    converged: bool
    history: list = field(default_factory=list, repr=False)
    inner_iterations: int = 0


class SparseSym:
    """Symmetric matrix in compressed-row storage.

    Thin wrapper over :class:`scipy.sparse.csr_matrix` with duplicates summed
    and column indices sorted, so that matrix-vector products use a fixed
    summation order.
    """

    def __init__(self, matrix):
        m = sp.csr_matrix(matrix, dtype=float)
        m.sum_duplicates()
        m.sort_indices()
        if m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        self.csr = m

    @property
    def shape(self):
        return self.csr.shape

    @property
    def n(self):
        return self.csr.shape[0]

    @property
    def indptr(self):
        return self.csr.indptr

    @property
    def indices(self):
        return self.csr.indices

    @property
    def data(self):
        return self.csr.data

    def __matmul__(self, x):
        return self.csr @ x

    def toarray(self):
        return self.csr.toarray()

    def quadratic_form(self, v):
        return float(v @ (self.csr @ v))

    def is_symmetric(self, tol=1e-12):
        diff = abs(self.csr - self.csr.T)
        return diff.max() <= tol * max(abs(self.csr).max(), 1.0) if diff.nnz else True

    def __add__(self, other):
        return SparseSym(self.csr + other.csr)

    def __mul__(self, c):
        return SparseSym(self.csr * c)

    __rmul__ = __mul__


def assemble(rows, cols, vals, n):
    """Build an ``n x n`` :class:`SparseSym` from triplets; duplicates add."""
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    vals = np.asarray(vals, dtype=float).ravel()
    if len(rows) and (rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n):
        raise IndexError("triplet index out of range")
    return SparseSym(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))


def cg(A, b, tol=1e-12, maxit=None, x0=None):
    """Unpreconditioned conjugate gradients.

    Stops when ``||b - A x|| <= tol * ||b||`` (recomputed residual) or after
    ``maxit`` iterations (default ``50 * n``).  Returns ``(x, SolveReport)``.
    """
    op = A.csr if isinstance(A, SparseSym) else A
    b = np.asarray(b, dtype=float)
    n = len(b)
    maxit = 50 * n if maxit is None else maxit
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True, [0.0])
    r = b - op @ x
    p = r.copy()
    rr = r @ r
    history = [np.sqrt(rr) / bnorm]
    it = 0
    while history[-1] > tol and it < maxit:
        Ap = op @ p
        pAp = p @ Ap
        if pAp <= 0.0:
            break
        alpha = rr / pAp
        x += alpha * p
        r -= alpha * Ap
        rr_new = r @ r
        p = r + (rr_new / rr) * p
        rr = rr_new
        it += 1
        history.append(np.sqrt(rr) / bnorm)
        if history[-1] <= tol:
            # guard against drift of the recursive residual
            r = b - op @ x
            rr = r @ r
            history[-1] = np.sqrt(rr) / bnorm
            p = r.copy() if history[-1] > tol else p
    res = float(np.linalg.norm(b - op @ x) / bnorm)
    return x, SolveReport(it, res, res <= tol, history)


def project_zero_mean(p, areas):
    """Subtract the area-weighted mean of an elementwise-constant field."""
    p = np.asarray(p, dtype=float)
    areas = np.asarray(areas, dtype=float)
    return p - (areas @ p) / areas.sum()


def _inner_solver(A, kind, tol):
    if kind == "direct":
        solve = spla.factorized(sp.csc_matrix(A.csr))
        return lambda rhs: (solve(rhs), 0)
    if kind == "cg":
        def solve(rhs):
            x, rep = cg(A, rhs, tol=tol)
            if not rep.converged:
                raise RuntimeError(f"inner CG stalled at residual {rep.residual:.2e}")
            return x, rep.iterations
        return solve
    raise ValueError(f"unknown inner solver {kind!r}")


def solve_saddle(A, B, f, g=None, areas=None, tol=1e-10, inner="direct",
                 inner_tol=None, maxit=None):
    """Solve ``[[A, B^T], [B, 0]] [u, p] = [f, g]`` with ``p`` zero-mean.

    The pressure is found by conjugate gradients on the Schur complement
    ``S = B A^{-1} B^T`` restricted to the complement of ``areas`` (the
    area-weighted zero-mean subspace); the constraint is therefore imposed
    only against zero-mean test pressures.  Each application of ``S`` solves
    with ``A`` either by a sparse factorisation (``inner="direct"``) or by
    CG at ``inner_tol`` (``inner="cg"``, default ``tol / 10``).

    Returns ``(u, p, SolveReport)``.
    """
    f = np.asarray(f, dtype=float)
    m = B.shape[0]
    g = np.zeros(m) if g is None else np.asarray(g, dtype=float)
    if m == 0:
        u, rep = cg(A, f, tol=tol)
        return u, np.zeros(0), rep
    areas = np.ones(m) if areas is None else np.asarray(areas, dtype=float)
    a_unit = areas / np.linalg.norm(areas)

    def proj(q):
        return q - (a_unit @ q) * a_unit

    solve_A, inner_its = _inner_solver(A, inner, tol / 10 if inner_tol is None else inner_tol), [0]

    def apply_A_inv(rhs):
        x, its = solve_A(rhs)
        inner_its[0] += its
        return x

    Bt = B.T.tocsr()
    u0 = apply_A_inv(f)
    rhs = proj(B @ u0 - g)

    def schur(q):
        return proj(B @ apply_A_inv(Bt @ proj(q)))

    S = spla.LinearOperator((m, m), matvec=schur, dtype=float)
    p, rep = cg(S, rhs, tol=tol, maxit=maxit if maxit is not None else 50 * m)
    p = project_zero_mean(proj(p), areas)
    u = apply_A_inv(f - Bt @ p)
    rep.inner_iterations = inner_its[0]
    return u, p, rep
