import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from wopsip.analysis import ErrorRecord, convergence_rate, fill_rates, from_csv, norm_11, to_csv
from wopsip.experiment import ExperimentConfig
from wopsip.fespace import DiscreteFunction, interpolate_cr
from wopsip.fields import affine
from wopsip.linalg import project_zero_mean
from wopsip.mesh import FAMILIES, compute_geometry, generate_structured
from wopsip.poisson import assemble_poisson, poisson_problem
from wopsip.quadrature import integrate_triangle

coord = st.floats(-3, 3, allow_nan=False)
point = st.tuples(coord, coord)


def _triangle(pts):
    T = np.array(pts, dtype=float)
    det = np.linalg.det(np.array([T[1] - T[0], T[2] - T[0]]))
    scale = max(np.ptp(T[:, 0]), np.ptp(T[:, 1]), 1e-300)
    assume(abs(det) > 1e-3 * scale ** 2)
    return T if det > 0 else T[[0, 2, 1]]


@settings(max_examples=60, deadline=None)
@given(st.tuples(point, point, point))
def test_condition1_inequalities(pts):
    g = compute_geometry(_triangle(pts))
    assert g.h2[0] <= g.h1[0] * (1 + 1e-12)
    assert g.h1[0] <= g.hT[0] * (1 + 1e-12)
    assert g.hT[0] < 2 * g.h1[0]
    assert abs(np.linalg.norm(g.r1[0]) - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.tuples(point, point, point), st.floats(0, 2 * math.pi), point)
def test_HT_rigid_motion_invariant(pts, angle, shift):
    T = _triangle(pts)
    c, s = math.cos(angle), math.sin(angle)
    moved = T @ np.array([[c, s], [-s, c]]) + np.array(shift)
    a, b = compute_geometry(T).HT[0], compute_geometry(moved).HT[0]
    assert abs(a - b) <= 1e-9 * a


@settings(max_examples=40, deadline=None)
@given(st.tuples(point, point, point),
       st.lists(st.floats(-2, 2, allow_nan=False), min_size=21, max_size=21))
def test_quadrature_additive_under_refinement(pts, coef):
    # a degree-5 polynomial integrates exactly on the triangle and on its
    # four midpoint children, so both totals agree
    T = _triangle(pts)
    powers = [(i, j) for i in range(6) for j in range(6 - i)]

    def f(x):
        return sum(c * x[..., 0] ** i * x[..., 1] ** j for c, (i, j) in zip(coef, powers))

    a, b, c = T
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    kids = [np.array(k) for k in ([a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca])]
    whole = integrate_triangle(T, f)
    parts = sum(integrate_triangle(k, f) for k in kids)
    assert abs(whole - parts) <= 1e-11 * max(1.0, abs(whole), 30 ** 5 * np.abs(coef).max())


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(FAMILIES), st.integers(1, 12))
def test_area_tiles_unit_square(family, n):
    assert abs(generate_structured(family, n).area.sum() - 1.0) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-12, 1e6), st.floats(1e-12, 1e6))
def test_rate_antisymmetric(a, b):
    assert convergence_rate(a, b) == -convergence_rate(b, a)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=20),
       st.lists(st.floats(1e-3, 1.0), min_size=20, max_size=20))
def test_zero_mean_projection_idempotent(p, areas):
    areas = np.array(areas[:len(p)])
    q = project_zero_mean(p, areas)
    assert abs(areas @ q) <= 1e-9 * (1 + np.abs(p).max())
    np.testing.assert_allclose(project_zero_mean(q, areas), q, atol=1e-9 * (1 + np.abs(p).max()))


MESH = generate_structured("cosine", 4)
A_POISSON, _ = assemble_poisson(poisson_problem(MESH, affine(0.0, [1.0, 0.0])))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=MESH.n_edges,
                max_size=MESH.n_edges))
def test_coercivity_identity(c):
    v = DiscreteFunction(MESH, "cr", np.array(c))
    ref = norm_11(v) ** 2
    assume(ref > 1e-6)
    assert abs(A_POISSON.quadratic_form(v.coefficients) - ref) <= 1e-12 * ref


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_cr_interpolation_exact_for_affine(a0, a1, a2):
    u = affine(a0, [a1, a2])
    uh = interpolate_cr(MESH, u)
    np.testing.assert_allclose(uh.coefficients, u(MESH.edge_midpoints), atol=1e-12)


positive = st.floats(1e-9, 1e3)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(positive, positive, positive, st.booleans()), min_size=1, max_size=5))
def test_csv_round_trip(rows):
    recs = [ErrorRecord(8 * 2 ** k, 1.0 / 2 ** k, e, l, q if has_q else None)
            for k, (e, l, q, has_q) in enumerate(rows)]
    text = to_csv(fill_rates(recs))
    back = from_csv(text)
    assert to_csv(back) == text
    for a, b in zip(recs, back):
        assert abs(a.err_energy - b.err_energy) <= 5e-6 * a.err_energy


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(FAMILIES), st.integers(1, 4), st.integers(1, 3),
       st.floats(1e-6, 1.0), st.floats(1e-3, 1e6), st.sampled_from(["csv", "markdown"]))
def test_config_round_trip(family, n0, levels, nu, eta, fmt):
    cfg = ExperimentConfig(mesh=family, n=[n0 * 2 ** k for k in range(levels)], nu=nu, eta=eta,
                           format=fmt).validate()
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
