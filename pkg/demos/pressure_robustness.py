# Adding a gradient to the body force: robust vs plain right-hand side.
#
# For phi vanishing on the boundary the robust scheme returns the same
# velocity (the pressure takes the whole gradient), the plain one does not,
# and the damage grows like 1/nu.  phi = x1^2 + x2 does not vanish on the
# boundary and leaks into both.
from dataclasses import replace

import numpy as np

from wopsip.fields import AnalyticField, from_sympy
from wopsip.mesh import generate_structured
from wopsip.stokes import example_catalog, solve_stokes

mesh = generate_structured("uniform", 8)
potentials = {
    "x1(1-x1)(2x1-1)x2(1-x2)": "x1*(1-x1)*(2*x1-1)*x2*(1-x2)",
    "sin(2 pi x1) sin(pi x2)": "sin(2*pi*x1)*sin(pi*x2)",
    "x1^2 + x2": "x1**2 + x2",
}


def velocity_change(prob, phi, variant):
    kicked = replace(prob, f=AnalyticField(lambda x: prob.f(x) + phi.grad(x), rank=1))
    a = solve_stokes(replace(prob, variant=variant), tol=1e-12).u.coefficients
    b = solve_stokes(replace(kicked, variant=variant), tol=1e-12).u.coefficients
    return np.linalg.norm(a - b) / np.linalg.norm(a)


print(f"{'phi':28s} {'nu':>7s} {'robust':>10s} {'plain':>10s}")
for label, expr in potentials.items():
    phi = from_sympy(expr)
    for nu in (1.0, 1e-3, 1e-5):
        prob = example_catalog("example1", mesh, nu=nu, eta=1e5)
        r, p = (velocity_change(prob, phi, v) for v in ("robust", "plain"))
        print(f"{label:28s} {nu:7.0e} {r:10.2e} {p:10.2e}")
