"""Fixed quadrature rules on triangles and edges.

Both rules are exact for polynomials of total degree five: the 7-point
symmetric rule on triangles and the 3-point Gauss-Legendre rule on segments.
All assembly and error evaluation in the package goes through these two
rules so that results are reproducible to the last digit.
"""
import numpy as np

_S15 = np.sqrt(15.0)
_A1 = (6.0 - _S15) / 21.0
_A2 = (6.0 + _S15) / 21.0
_W1 = (155.0 - _S15) / 1200.0
_W2 = (155.0 + _S15) / 1200.0

#: Barycentric coordinates of the 7-point rule, shape (7, 3).
TRIANGLE_POINTS = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A1, _A1, 1 - 2 * _A1],
    [_A1, 1 - 2 * _A1, _A1],
    [1 - 2 * _A1, _A1, _A1],
    [_A2, _A2, 1 - 2 * _A2],
    [_A2, 1 - 2 * _A2, _A2],
    [1 - 2 * _A2, _A2, _A2],
])
#: Weights normalised to sum to one.
TRIANGLE_WEIGHTS = np.array([9 / 40, _W1, _W1, _W1, _W2, _W2, _W2])

_gl_x, _gl_w = np.polynomial.legendre.leggauss(3)
#: Gauss points on [0, 1].
EDGE_POINTS = 0.5 * (_gl_x + 1.0)
#: Gauss weights on [0, 1], summing to one.
EDGE_WEIGHTS = 0.5 * _gl_w

TRIANGLE_DEGREE = 5
EDGE_DEGREE = 5


def signed_area(coords):
    """Signed area of triangles given as ``(..., 3, 2)`` vertex arrays."""
    coords = np.asarray(coords, dtype=float)
    e1 = coords[..., 1, :] - coords[..., 0, :]
    e2 = coords[..., 2, :] - coords[..., 0, :]
    return 0.5 * (e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0])


def triangle_rule(coords):
    """Physical quadrature points and weights for a batch of triangles.

    Parameters
    ----------
    coords : array_like, shape (..., 3, 2)
        Vertex coordinates.

    Returns
    -------
    points : ndarray, shape (..., 7, 2)
    weights : ndarray, shape (..., 7)
        Weights already multiplied by the triangle area.
    """
    coords = np.asarray(coords, dtype=float)
    points = np.einsum("qk,...kd->...qd", TRIANGLE_POINTS, coords)
    area = np.abs(signed_area(coords))
    weights = area[..., None] * TRIANGLE_WEIGHTS
    return points, weights


def edge_rule(a, b):
    """Physical quadrature points and weights on segments ``a -> b``.

    ``a`` and ``b`` have shape ``(..., 2)``; the returned points have shape
    ``(..., 3, 2)`` and the weights ``(..., 3)`` include the segment length.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = EDGE_POINTS[:, None]
    points = a[..., None, :] * (1.0 - t) + b[..., None, :] * t
    length = np.linalg.norm(b - a, axis=-1)
    weights = length[..., None] * EDGE_WEIGHTS
    return points, weights


def integrate_triangle(coords, f):
    """Integrate ``f`` over one triangle.

    ``f`` receives an ``(m, 2)`` array of points and must return ``m`` values
    (or ``(m, k)`` for vector-valued integrands).
    """
    coords = np.asarray(coords, dtype=float)
    if abs(signed_area(coords)) == 0.0:
        raise ValueError("degenerate triangle")
    points, weights = triangle_rule(coords)
    values = np.asarray(f(points), dtype=float)
    return np.tensordot(weights, values, axes=(0, 0))


def integrate_edge(a, b, f):
    """Integrate ``f`` over the segment from ``a`` to ``b``."""
    points, weights = edge_rule(a, b)
    if weights.sum() == 0.0:
        raise ValueError("zero-length edge")
    values = np.asarray(f(points), dtype=float)
    return np.tensordot(weights, values, axes=(0, 0))


def edge_mean(a, b, f):
    """Mean value of ``f`` over the segment from ``a`` to ``b``."""
    length = np.linalg.norm(np.asarray(b, float) - np.asarray(a, float))
    return integrate_edge(a, b, f) / length
