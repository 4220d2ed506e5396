# Stokes convergence on uniform and anisotropic meshes.
#
# Solves the sine-cosine flow for a few (nu, eta) pairs and prints
# relative errors with observed rates.  A small penalty scale together with
# a small viscosity shows the locking-type behaviour: the velocity error
# blows up by ~1/nu while the pressure stays accurate.
#
#   python3 demos/stokes_convergence.py [max_n]
import sys

from wopsip.experiment import ExperimentConfig, format_table, run_convergence

max_n = int(sys.argv[1]) if len(sys.argv) > 1 else 64
ns = [n for n in (8, 16, 32, 64, 128) if n <= max_n]

cases = [
    ("uniform", 1.0, 1.0),
    ("uniform", 1e-5, 1e5),
    ("uniform", 1e-5, 1.0),   # under-penalised
    ("graded", 1.0, 1.0),
]
for mesh, nu, eta in cases:
    cfg = ExperimentConfig(equation="stokes", mesh=mesh, n=ns, nu=nu, eta=eta)
    rows = run_convergence(cfg)
    print(format_table(rows, "markdown", f"{mesh}, nu={nu:g}, eta={eta:g}"))
