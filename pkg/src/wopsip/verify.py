"""Self-check suite run by ``wopsip verify``.

Every check is a small deterministic computation with a hard threshold.
``run_verify`` never raises on a failed property; it collects the measured
values so the caller can print them and choose an exit code.
"""
import math
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis
from .experiment import ExperimentConfig, run_convergence
from .fespace import (DiscreteFunction, broken_divergence, element_means, interpolate_rt)
from .fields import from_sympy
from .mesh import FAMILIES, compute_geometry, generate_structured
from .poisson import assemble_poisson, poisson_problem
from .quadrature import integrate_triangle
from .stokes import velocity_matrix
from .vtk import export_vtk, read_vtk


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        self.passed = bool(self.passed)


def _slope(ns, errs):
    return -np.polyfit(np.log(ns), np.log(errs), 1)[0]


def check_mesh():
    worst_area, worst_ineq = 0.0, 0.0
    for fam in FAMILIES:
        for n in (4, 8, 16):
            m = generate_structured(fam, n)
            worst_area = max(worst_area, abs(m.area.sum() - 1.0))
            g = m.geometry
            ok = (g.h2 <= g.h1 + 1e-14) & (g.h1 <= g.hT + 1e-14) & (g.hT < 2 * g.h1)
            worst_ineq = max(worst_ineq, float(np.sum(~ok)))
    ratio = generate_structured("uniform", 8).geometry
    dev = float(np.abs(ratio.HT / ratio.hT - 2.0).max())
    passed = worst_area < 1e-12 and worst_ineq == 0 and dev < 1e-12
    return CheckResult("mesh geometry", passed,
                       f"|sum|T|-1|={worst_area:.1e}, bad elements={worst_ineq:.0f}, "
                       f"uniform H/h dev={dev:.1e}")


def check_rigid_motion(rng):
    T = rng.random((3, 2))
    if np.linalg.det(np.array([T[1] - T[0], T[2] - T[0]])) < 0:
        T = T[[0, 2, 1]]
    c, s = math.cos(0.7), math.sin(0.7)
    moved = T @ np.array([[c, s], [-s, c]]) + np.array([3.0, -1.5])
    a = compute_geometry(T[None]).HT[0]
    b = compute_geometry(moved[None]).HT[0]
    return CheckResult("H_T rigid-motion invariance", abs(a - b) <= 1e-12 * a,
                       f"H_T={a:.6g}, moved={b:.6g}")


def check_quadrature():
    T = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    worst = 0.0
    for i in range(6):
        for j in range(6 - i):
            exact = math.factorial(i) * math.factorial(j) / math.factorial(i + j + 2)
            got = integrate_triangle(T, lambda x: x[..., 0] ** i * x[..., 1] ** j)
            worst = max(worst, abs(got - exact))
    return CheckResult("triangle rule degree 5", worst < 1e-15, f"max error {worst:.1e}")


def check_poisson_coercivity(rng, beta=1.0):
    """Assembled form against ``|v|_{1,1}^2`` computed elementwise."""
    m = generate_structured("graded", 8)
    u = from_sympy("x1*x2")
    A, _ = assemble_poisson(poisson_problem(m, u), beta=beta)
    worst = 0.0
    for _ in range(100):
        v = DiscreteFunction(m, "cr", rng.standard_normal(m.n_edges))
        ref = analysis.norm_11(v) ** 2
        worst = max(worst, abs(A.quadratic_form(v.coefficients) - ref) / ref)
    return CheckResult("Poisson coercivity identity", worst <= 1e-12, f"max rel dev {worst:.1e}")


def check_stokes_coercivity(rng):
    m = generate_structured("cosine", 8)
    worst, margin = 0.0, np.inf
    for nu, eta in ((1.0, 1.0), (1e-5, 1e5), (1e-5, 1.0), (3.0, 0.2)):
        M = velocity_matrix(m, nu, eta)
        for _ in range(25):
            v = DiscreteFunction(m, "cr2", rng.standard_normal(2 * m.n_edges))
            h1 = analysis.norm_broken_h1(v) ** 2
            pen = analysis.seminorm_penalty(v) ** 2
            ref = nu * h1 + nu * eta * pen
            worst = max(worst, abs(M.quadratic_form(v.coefficients) - ref) / ref)
            margin = min(margin, ref / (nu * min(1.0, eta) * (h1 + pen)))
    return CheckResult("Stokes coercivity identity", worst <= 1e-12 and margin >= 1 - 1e-12,
                       f"max rel dev {worst:.1e}, min ratio to lower bound {margin:.3f}")


def check_duality(rng):
    m = generate_structured("graded", 8)
    w = from_sympy(("1 + x1*x2 - 3*x2**2", "x1**2 - 2*x1 + x2"))
    worst = 0.0
    for _ in range(10):
        psi = DiscreteFunction(m, "cr", rng.standard_normal(m.n_edges))
        worst = max(worst, analysis.lemma1_residual(m, w, psi))
    return CheckResult("RT/CR duality residual", worst <= 1e-11, f"max residual {worst:.1e}")


def check_commuting():
    m = generate_structured("cosine", 8)
    w = from_sympy(("x1**2*x2 - x2", "x1*x2**2 + x1"))

    def div(x):
        g = w.grad(x)
        return g[..., 0, 0] + g[..., 1, 1]

    dev = float(np.abs(broken_divergence(interpolate_rt(m, w)) - element_means(m, div)).max())
    return CheckResult("div I_RT = Pi_0 div", dev <= 1e-12, f"max dev {dev:.1e}")


def check_poisson_rates():
    ns = [8, 16, 32]
    out = []
    for fam in ("uniform", "graded"):
        cfg = ExperimentConfig(equation="poisson", mesh=fam, n=ns, example="example1",
                               format="csv")
        rows = run_convergence(cfg)
        se = _slope(ns, [r.err_energy for r in rows])
        sl = _slope(ns, [r.err_l2 for r in rows])
        out.append(CheckResult(f"Poisson rates ({fam})", 0.85 <= se <= 1.15 and 1.8 <= sl <= 2.2,
                               f"energy slope {se:.3f}, L2 slope {sl:.3f}"))
    return out


def check_poincare():
    vals = [analysis.poincare_ratio(generate_structured("uniform", n)) for n in (8, 16, 32)]
    var = (max(vals) - min(vals)) / max(vals)
    return CheckResult("discrete Poincare ratio bounded", var < 0.2,
                       "ratios " + ", ".join(f"{v:.4f}" for v in vals) + f", variation {var:.1%}")


def check_round_trips():
    rows = analysis.fill_rates([analysis.ErrorRecord(16, 0.0884, 0.120707, 8.9e-3, 0.101),
                                analysis.ErrorRecord(32, 0.0442, 0.0594532, 2.2e-3, 0.049)])
    back = analysis.from_csv(analysis.to_csv(rows))
    csv_ok = analysis.to_csv(back) == analysis.to_csv(rows)
    cfg = ExperimentConfig(equation="poisson", n=[8, 16], nu=0.5)
    cfg_ok = ExperimentConfig.from_json(cfg.to_json()) == cfg
    m = generate_structured("graded", 4)
    with tempfile.TemporaryDirectory() as tmp:
        path = export_vtk(m, Path(tmp) / "m.vtk", cell_data={"ratio": m.geometry.HT / m.geometry.hT})
        data = read_vtk(path)
    vtk_ok = len(data["points"]) == len(m.vertices) and "ratio" in data["cell_data"]
    r = analysis.convergence_rate(0.4, 0.1) + analysis.convergence_rate(0.1, 0.4)
    return CheckResult("serialisation round trips", csv_ok and cfg_ok and vtk_ok and r == 0,
                       f"csv={csv_ok}, config={cfg_ok}, vtk={vtk_ok}, rate antisymmetry={r}")


def run_verify(seed=0, beta=1.0):
    """Run every check; returns a list of :class:`CheckResult`.

    ``beta`` is passed to the Poisson assembly only, so a value other than 1
    must make the coercivity check fail (a mutation sanity test).
    """
    rng = np.random.default_rng(seed)
    results = [check_mesh(), check_rigid_motion(rng), check_quadrature(),
               check_poisson_coercivity(rng, beta), check_stokes_coercivity(rng),
               check_duality(rng), check_commuting()]
    results += check_poisson_rates()
    results += [check_poincare(), check_round_trips()]
    return results
