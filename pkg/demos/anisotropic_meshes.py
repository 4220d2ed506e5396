# The three mesh families: aspect ratio grows under refinement on the
# graded and cosine meshes while max H_T/h_T stays put, and the scalar
# scheme keeps its rates on all of them.
import numpy as np

from wopsip import analysis
from wopsip.experiment import format_mesh_report, run_mesh_report
from wopsip.fields import from_sympy
from wopsip.mesh import FAMILIES, generate_structured
from wopsip.poisson import poisson_problem, solve_poisson

for fam in FAMILIES:
    print(f"## {fam}")
    print(format_mesh_report(run_mesh_report(fam, [8, 16, 32, 64, 128]), "markdown"))

u = from_sympy("cos(pi*x1)*cos(pi*x2)")
ns = [8, 16, 32, 64]
for fam in FAMILIES:
    errs = []
    for n in ns:
        mesh = generate_structured(fam, n)
        uh, _ = solve_poisson(poisson_problem(mesh, u))
        rec = analysis.relative_errors(mesh, uh, u)
        errs.append((rec.err_energy, rec.err_l2))
    e, l2 = np.array(errs).T
    slope = lambda v: -np.polyfit(np.log(ns), np.log(v), 1)[0]  # noqa: E731
    print(f"{fam:8s} energy slope {slope(e):.3f}  L2 slope {slope(l2):.3f}")
