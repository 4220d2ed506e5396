"""Weakly over-penalised Nitsche schemes on anisotropic triangular meshes."""
from .fields import AnalyticField, from_sympy
from .mesh import Mesh2D, generate_structured, semi_regularity_report
from .poisson import PoissonProblem, assemble_poisson, poisson_problem, solve_poisson
from .stokes import StokesProblem, assemble_stokes, example_catalog, solve_stokes

__all__ = [
    "AnalyticField", "from_sympy", "Mesh2D", "generate_structured", "semi_regularity_report",
    "PoissonProblem", "assemble_poisson", "poisson_problem", "solve_poisson",
    "StokesProblem", "assemble_stokes", "example_catalog", "solve_stokes",
]
