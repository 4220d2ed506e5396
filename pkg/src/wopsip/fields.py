"""Analytic scalar and vector fields used as data and exact solutions."""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class FieldError(ValueError):
    """Raised when a field lacks a callback an operation needs."""


@dataclass(frozen=True)
class AnalyticField:
    """Bundle of callbacks describing a smooth field on the plane.

    Every callback takes points of shape ``(..., 2)``.  For a scalar field
    ``value`` returns ``(...)``, ``gradient`` returns ``(..., 2)`` and
    ``laplacian`` returns ``(...)``.  For a vector field (``rank=1``) the
    shapes gain a leading component axis after the point axes:
    ``value -> (..., 2)``, ``gradient -> (..., 2, 2)`` with
    ``gradient[..., i, j] = d u_i / d x_j``, ``laplacian -> (..., 2)``.
    ``hessian`` is optional and returns ``(..., 2, 2)`` (scalar) or
    ``(..., 2, 2, 2)`` (vector).
    """

    value: Callable
    gradient: Optional[Callable] = None
    laplacian: Optional[Callable] = None
    hessian: Optional[Callable] = None
    rank: int = 0
    name: str = ""

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    def grad(self, x):
        if self.gradient is None:
            raise FieldError(f"field {self.name or '?'} has no gradient")
        return self.gradient(np.asarray(x, dtype=float))

    def lap(self, x):
        if self.laplacian is None:
            raise FieldError(f"field {self.name or '?'} has no Laplacian")
        return self.laplacian(np.asarray(x, dtype=float))

    def hess(self, x, step=1e-5):
        """Second derivatives, by central differences of the gradient if no
        exact Hessian was supplied."""
        x = np.asarray(x, dtype=float)
        if self.hessian is not None:
            return self.hessian(x)
        cols = []
        for j in range(2):
            e = np.zeros(2)
            e[j] = step * max(1.0, float(np.max(np.abs(x), initial=0.0)))
            cols.append((self.grad(x + e) - self.grad(x - e)) / (2 * e[j]))
        return np.stack(cols, axis=-1)

    def component(self, i):
        """Scalar field of component ``i`` of a vector field."""
        if self.rank != 1:
            raise FieldError("component() needs a vector field")
        grad = lap = hess = None
        if self.gradient is not None:
            grad = lambda x: self.gradient(x)[..., i, :]  # noqa: E731
        if self.laplacian is not None:
            lap = lambda x: self.laplacian(x)[..., i]  # noqa: E731
        if self.hessian is not None:
            hess = lambda x: self.hessian(x)[..., i, :, :]  # noqa: E731
        return AnalyticField(lambda x: self.value(x)[..., i], grad, lap, hess,
                             rank=0, name=f"{self.name}[{i}]")

    def scaled(self, factor):
        """The field multiplied by a constant."""
        def wrap(fn):
            return None if fn is None else (lambda x: factor * fn(x))
        return AnalyticField(wrap(self.value), wrap(self.gradient),
                             wrap(self.laplacian), wrap(self.hessian),
                             rank=self.rank, name=f"{factor}*{self.name}")


def constant(c, name="const"):
    """Constant scalar (``c`` a number) or vector (``c`` of length 2) field."""
    c = np.asarray(c, dtype=float)
    if c.ndim == 0:
        return AnalyticField(
            lambda x: np.full(np.shape(x)[:-1], float(c)),
            lambda x: np.zeros(np.shape(x)),
            lambda x: np.zeros(np.shape(x)[:-1]),
            lambda x: np.zeros(np.shape(x)[:-1] + (2, 2)),
            name=name)
    return AnalyticField(
        lambda x: np.broadcast_to(c, np.shape(x)).copy(),
        lambda x: np.zeros(np.shape(x)[:-1] + (2, 2)),
        lambda x: np.zeros(np.shape(x)),
        lambda x: np.zeros(np.shape(x)[:-1] + (2, 2, 2)),
        rank=1, name=name)


def affine(a0, a):
    """Scalar field ``a0 + a . x``."""
    a = np.asarray(a, dtype=float)
    return AnalyticField(
        lambda x: a0 + x @ a,
        lambda x: np.broadcast_to(a, np.shape(x)).copy(),
        lambda x: np.zeros(np.shape(x)[:-1]),
        lambda x: np.zeros(np.shape(x)[:-1] + (2, 2)),
        name="affine")


def from_sympy(expr, name=""):
    """Build a field from a sympy expression in ``x1, x2``.

    ``expr`` may be a scalar expression or a length-2 sequence of
    expressions (vector field).  Derivatives are taken symbolically.
    """
    import sympy as sp

    x1, x2 = sp.symbols("x1 x2")
    X = (x1, x2)

    def lam(e):
        f = sp.lambdify(X, e, "numpy")
        return lambda x: np.broadcast_to(
            np.asarray(f(x[..., 0], x[..., 1]), dtype=float), np.shape(x)[:-1]
        ).copy()

    def stack(fns, axis_shape):
        def g(x):
            out = [fn(x) for fn in fns]
            return np.stack(out, axis=-1).reshape(np.shape(x)[:-1] + axis_shape)
        return g

    if isinstance(expr, (list, tuple)):
        comps = [sp.sympify(e) for e in expr]
        value = stack([lam(e) for e in comps], (2,))
        grad = stack([lam(sp.diff(e, v)) for e in comps for v in X], (2, 2))
        lap = stack([lam(sp.diff(e, x1, 2) + sp.diff(e, x2, 2)) for e in comps], (2,))
        hess = stack([lam(sp.diff(e, a, b)) for e in comps for a in X for b in X],
                     (2, 2, 2))
        return AnalyticField(value, grad, lap, hess, rank=1, name=name)
    e = sp.sympify(expr)
    return AnalyticField(
        lam(e),
        stack([lam(sp.diff(e, v)) for v in X], (2,)),
        lam(sp.diff(e, x1, 2) + sp.diff(e, x2, 2)),
        stack([lam(sp.diff(e, a, b)) for a in X for b in X], (2, 2)),
        name=name)


def check_gradient(field, points, step=1e-6, rtol=1e-5):
    """Compare ``field.gradient`` against central differences of ``value``.

    Returns the largest relative discrepancy; raises :class:`FieldError`
    if it exceeds ``rtol``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    exact = field.grad(points)
    cols = []
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        cols.append((field(points + e) - field(points - e)) / (2 * step))
    fd = np.stack(cols, axis=-1)
    scale = max(np.max(np.abs(exact)), 1.0)
    err = float(np.max(np.abs(fd - exact)) / scale)
    if err > rtol:
        raise FieldError(f"gradient of {field.name or '?'} inconsistent ({err:.2e})")
    return err
