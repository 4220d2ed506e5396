import math

import numpy as np
import pytest

from wopsip import analysis as an
from wopsip.fespace import DiscreteFunction, interpolate_cr
from wopsip.fields import affine, constant, from_sympy
from wopsip.mesh import generate_structured
from wopsip.stokes import example_catalog, solve_stokes


def test_h1_of_affine_interpolant_is_zero():
    m = generate_structured("graded", 4)
    u = affine(1.0, [0.5, -3.0])
    assert an.norm_broken_h1(interpolate_cr(m, u), u) < 1e-12
    assert an.norm_l2(interpolate_cr(m, u), u) < 1e-13


def test_constant_discrete_gives_exact_seminorm():
    m = generate_structured("uniform", 4)
    u = from_sympy("sin(pi*x1)*sin(pi*x2)")
    uh = DiscreteFunction(m, "cr", np.full(m.n_edges, 7.0))
    # |u|_{H1}^2 = pi^2 / 2 on the unit square; the 7-point rule is close
    assert an.norm_broken_h1(uh, u) == pytest.approx(math.pi / math.sqrt(2), rel=2e-3)
    assert an.norm_broken_h1(uh, u) == pytest.approx(an.norm_broken_h1(None, u, m), abs=1e-14)


def test_broken_h1_against_elementwise_loop(rng):
    m = generate_structured("cosine", 3)
    vh = DiscreteFunction(m, "cr", rng.standard_normal(m.n_edges))
    total = 0.0
    for t in range(m.n_elements):
        # gradient of the local affine function through the three edge midpoints
        mids = m.edge_midpoints[m.element_edges[t]]
        coef = np.linalg.solve(np.column_stack([np.ones(3), mids]), vh.coefficients[m.element_edges[t]])
        total += m.area[t] * coef[1:] @ coef[1:]
    assert an.norm_broken_h1(vh) == pytest.approx(math.sqrt(total), rel=1e-12)


def test_penalty_seminorm_closed_forms():
    # n = 1: h = sqrt 2, legs of length 1 with ell = 1, kappa = 1/2 per leg
    m = generate_structured("uniform", 1)
    one = DiscreteFunction(m, "cr", np.ones(m.n_edges))
    assert an.seminorm_penalty(one) == pytest.approx(math.sqrt(2.0))
    assert an.seminorm_penalty(one, beta=0.0) == pytest.approx(2.0)
    assert an.seminorm_penalty(DiscreteFunction(m, "cr", np.zeros(5))) == 0.0
    m2 = generate_structured("uniform", 2)
    v = DiscreteFunction(m2, "cr", np.random.default_rng(0).standard_normal(m2.n_edges))
    assert an.seminorm_penalty(v, 0.0) <= an.seminorm_penalty(v, 1.0)


def test_vector_norms_recompose(rng):
    m = generate_structured("uniform", 3)
    c = rng.standard_normal(2 * m.n_edges)
    vh = DiscreteFunction(m, "cr2", c)
    parts = [an.norm_11(vh.component(i)) for i in range(2)]
    assert an.norm_W(vh) == pytest.approx(math.hypot(*parts), rel=1e-13)
    only_first = DiscreteFunction(m, "cr2", np.concatenate([c[:m.n_edges], np.zeros(m.n_edges)]))
    assert an.norm_W(only_first) == pytest.approx(parts[0], rel=1e-13)
    assert an.norm_W(DiscreteFunction(m, "cr2", np.zeros(2 * m.n_edges))) == 0.0


def test_convergence_rate():
    assert an.convergence_rate(0.4, 0.1) == pytest.approx(2.0)
    assert an.convergence_rate(1.0, 1.0) == 0.0
    assert round(an.convergence_rate(4.71422e-3, 2.35001e-3), 2) == 1.00
    with pytest.raises(ValueError):
        an.convergence_rate(0.0, 1.0)


def test_fill_rates_skips_non_doubling():
    rows = [an.ErrorRecord(8, 0.1, 1.0, 1.0), an.ErrorRecord(16, 0.05, 0.5, 0.25),
            an.ErrorRecord(48, 0.02, 0.1, 0.01)]
    an.fill_rates(rows)
    assert rows[1].rate_energy == pytest.approx(1.0) and rows[1].rate_l2 == pytest.approx(2.0)
    assert rows[2].rate_energy is None and rows[0].rate_energy is None


def test_relative_errors_zero_for_exact_affine_solution():
    m = generate_structured("graded", 4)
    u = affine(0.0, [1.0, 2.0])
    rec = an.relative_errors(m, interpolate_cr(m, u), u)
    assert rec.err_energy < 1e-12 and rec.err_l2 < 1e-13 and rec.err_pressure is None
    with pytest.raises(ZeroDivisionError):
        an.relative_errors(m, interpolate_cr(m, u), constant(0.0))


def test_relative_errors_scale_invariant():
    m = generate_structured("uniform", 8)
    sol = solve_stokes(example_catalog("example1", m))
    prob = example_catalog("example1", m)
    base = an.relative_errors(m, sol.u, prob.exact_u, sol.p, prob.exact_p)
    lam = 37.5
    scaled = an.relative_errors(
        m, DiscreteFunction(m, "cr2", lam * sol.u.coefficients), prob.exact_u.scaled(lam),
        DiscreteFunction(m, "p0", lam * sol.p.coefficients), prob.exact_p.scaled(lam))
    for a, b in ((base.err_energy, scaled.err_energy), (base.err_l2, scaled.err_l2),
                 (base.err_pressure, scaled.err_pressure)):
        assert abs(a - b) <= 1e-13 * a


def test_csv_round_trip_and_header():
    rows = an.fill_rates([an.ErrorRecord(16, 8.838835e-2, 0.1207071234, 8.942853e-3, 0.1012641),
                          an.ErrorRecord(32, 4.419417e-2, 0.0594532, 2.22712e-3, 4.934659e-2)])
    text = an.to_csv(rows)
    assert text.splitlines()[0] == "N,h,Err(W),r,Err(L2),r,Err(Q),r"
    assert "1.20707e-01" in text
    back = an.from_csv(text)
    assert an.to_csv(back) == text
    assert back[1].rate_energy == pytest.approx(1.02)
    md = an.to_markdown(rows, title="t")
    assert md.count("\n| ") == 3 and "| 32 | 4.42e-02 |" in md
    with pytest.raises(ValueError):
        an.from_csv("a,b\n1,2\n")


def test_duality_residual_exact_for_low_degree(rng):
    m = generate_structured("cosine", 6)
    psi = DiscreteFunction(m, "cr", rng.standard_normal(m.n_edges))
    assert an.lemma1_residual(m, constant([2.0, -1.0]), psi) <= 1e-12
    w = from_sympy(("x1**2 - x1*x2", "3*x2**2 + x1"))
    assert an.lemma1_residual(m, w, psi) <= 1e-11


def test_duality_residual_smooth_field(rng):
    # RT fluxes and the boundary term share one edge rule, so even a
    # transcendental w leaves only roundoff
    w = from_sympy(("pi*cos(pi*x1)*sin(pi*x2)", "pi*sin(pi*x1)*cos(pi*x2)"))
    vals = []
    for n in (4, 8, 16):
        m = generate_structured("uniform", n)
        psi = interpolate_cr(m, from_sympy("exp(x1)*x2"))
        vals.append(an.lemma1_residual(m, w, psi))
    assert max(vals) <= 1e-12


def test_anisotropic_bound_terms():
    m = generate_structured("graded", 8)
    assert an.anisotropic_bound(m, affine(1.0, [1.0, 1.0]))["directional"] == pytest.approx(0.0, abs=1e-12)
    # u = x1^2 on one cell: d(grad u)/dr = (2 r_x, 0), so the term is
    # sum_T sum_i h_i^2 (2 r_i,x)^2 |T|
    one = generate_structured("uniform", 1)
    g = one.geometry
    expected = np.sum(g.area * ((2 * g.h1 * g.r1[:, 0]) ** 2 + (2 * g.h2 * g.r2[:, 0]) ** 2))
    got = an.anisotropic_bound(one, from_sympy("x1**2"))["directional"]
    assert got == pytest.approx(math.sqrt(expected), rel=1e-12)


def test_anisotropic_bound_decays_linearly():
    u = from_sympy("sin(pi*x1)*cos(pi*x2)")
    b = [an.anisotropic_bound(generate_structured("graded", n), u)["total"] for n in (16, 32, 64)]
    rates = np.log2(np.array(b[:-1]) / b[1:])
    np.testing.assert_allclose(rates, 1.0, atol=0.1)


def test_discrete_poincare_ratio_bounded():
    vals = [an.poincare_ratio(generate_structured("uniform", n)) for n in (8, 16, 32)]
    assert (max(vals) - min(vals)) / max(vals) < 0.2
    assert min(vals) > 1 / (math.pi * math.sqrt(2))


def test_inf_sup_positive_and_monotone():
    vals = [an.inf_sup_constant(generate_structured("uniform", n)) for n in (2, 4, 8, 16)]
    assert all(v > 0.5 for v in vals)
    assert vals == sorted(vals, reverse=True)
