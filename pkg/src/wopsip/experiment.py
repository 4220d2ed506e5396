"""Convergence sweeps and mesh reports driven by a plain config object."""
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .analysis import ErrorRecord, fill_rates, relative_errors, to_csv, to_markdown
from .fields import from_sympy
from .mesh import FAMILIES, generate_structured, semi_regularity_report
from .poisson import poisson_problem, solve_poisson
from .stokes import RT_BOUNDARY, VARIANTS, example_catalog, solve_stokes, with_mesh

EQUATIONS = ("poisson", "stokes")
FORMATS = ("csv", "markdown")
EXAMPLES = ("example1", "example2")
LARGE_N = 128

# exact solutions for the scalar problem, as sympy strings
POISSON_FIELDS = {
    "sin-product": "sin(pi*x1)*sin(pi*x2)",
    "cos-product": "cos(pi*x1)*cos(pi*x2)",
    "example1": "sin(pi*x1)*cos(pi*x2)",
    "quadratic": "x1*(1 - x1)",
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    equation: str = "stokes"
    mesh: str = "uniform"
    n: list = field(default_factory=lambda: [16, 32, 64, 128])
    nu: float = 1.0
    eta: float = 1.0
    example: str = "example1"
    field: Optional[str] = None
    variant: str = "robust"
    rt_boundary: str = "interpolate"
    tol: float = 1e-10
    format: str = "markdown"
    out: Optional[str] = None
    large: bool = False

    def validate(self):
        def choice(name, allowed):
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")

        choice("equation", EQUATIONS)
        choice("mesh", FAMILIES)
        choice("variant", VARIANTS)
        choice("rt_boundary", RT_BOUNDARY)
        choice("format", FORMATS)
        if self.equation == "stokes":
            choice("example", EXAMPLES)
        elif self.field is None and self.example not in POISSON_FIELDS:
            raise ConfigError(f"poisson example must be one of {tuple(POISSON_FIELDS)} "
                              f"or a custom --field expression")
        ns = list(self.n)
        if not ns or any(not isinstance(k, int) or k < 1 for k in ns):
            raise ConfigError("n must be a non-empty list of positive integers")
        for k in ns[1:]:
            ratio = k / ns[0]
            if k <= ns[0] or ratio != 2 ** round(math.log2(ratio)):
                raise ConfigError("n list must increase by powers of two from its first entry")
        if any(a >= b for a, b in zip(ns, ns[1:])):
            raise ConfigError("n list must be strictly increasing")
        if max(ns) > LARGE_N and not self.large:
            raise ConfigError(f"n > {LARGE_N} is slow; pass the large-run opt-in to allow it")
        if not (self.nu > 0 and self.eta > 0 and self.tol > 0):
            raise ConfigError("nu, eta and tol must be positive")
        return self

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def poisson_exact(config):
    expr = config.field if config.field is not None else POISSON_FIELDS[config.example]
    return from_sympy(expr, name=config.field or config.example)


def _failed(mesh, flag):
    nan = float("nan")
    return ErrorRecord(mesh.n, mesh.h, nan, nan, nan, flag=flag)


def run_single(config, n):
    """Solve one configuration on one mesh; returns ``(ErrorRecord, solution)``."""
    mesh = generate_structured(config.mesh, n)
    if config.equation == "poisson":
        u = poisson_exact(config)
        try:
            uh, report = solve_poisson(poisson_problem(mesh, u), tol=min(config.tol, 1e-10))
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            return _failed(mesh, f"failed: {exc}"), None
        rec = relative_errors(mesh, uh, u)
        solution = uh
    else:
        template = example_catalog(config.example, nu=config.nu, eta=config.eta,
                                   variant=config.variant, rt_boundary=config.rt_boundary)
        problem = with_mesh(template, mesh)
        try:
            sol = solve_stokes(problem, tol=config.tol)
        except (ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
            return _failed(mesh, f"failed: {exc}"), None
        rec = relative_errors(mesh, sol.u, problem.exact_u, sol.p, problem.exact_p)
        report = sol.report
        solution = sol
    if not report.converged:
        rec.flag = "not converged"
    return rec, solution


def run_convergence(config):
    """Run the sweep described by ``config``; returns the list of rows."""
    config.validate()
    records = [run_single(config, n)[0] for n in config.n]
    return fill_rates(records)


def format_table(records, fmt, title=None):
    return to_csv(records) if fmt == "csv" else to_markdown(records, title)


@dataclass
class MeshReportRow:
    n: int
    h: float
    max_ratio: float
    max_angle: float
    max_aspect: float


def run_mesh_report(family, ns):
    rows = []
    for n in ns:
        mesh = generate_structured(family, n)
        rows.append(MeshReportRow(n, mesh.h, *semi_regularity_report(mesh)))
    return rows


def format_mesh_report(rows, fmt):
    head = ["N", "h", "max H_T/h_T", "max angle", "max aspect"]
    body = [[str(r.n), f"{r.h:.5e}", f"{r.max_ratio:.6f}", f"{r.max_angle:.4f}",
             f"{r.max_aspect:.5e}"] for r in rows]
    if fmt == "csv":
        return "\n".join(",".join(line) for line in [head] + body) + "\n"
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    lines += ["| " + " | ".join(line) + " |" for line in body]
    return "\n".join(lines) + "\n"


def merged_config(base, overrides):
    """``base`` with every non-None entry of ``overrides`` applied."""
    return replace(base, **{k: v for k, v in overrides.items() if v is not None})
