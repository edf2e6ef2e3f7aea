"""Batch driver for the convergence, sinc and geometry studies.

`run_convergence` reproduces the main experiment: for each fractional
power and refinement level it assembles the surface FEM system, applies
the sinc-quadrature inverse and measures L2/H1 errors against the
truncated zonal reference, then fits decay exponents against the number
of degrees of freedom.  Failures abort only their own (s, level) cell;
completed cells are still reported.

CSV schema (one file per s): ``level,dofs,h,l2_error,h1_error,
l2_slope,h1_slope`` with segment slopes attached to the finer row.  A
JSON mirror carries the config, per-cell diagnostics and run metadata.
Identical configs produce byte-identical CSV files (fixed DoF
numbering, fixed summation orders, shortest round-trip float
formatting).
"""

import json
import os
import subprocess
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .export import export_solution  # re-exported: part of the driver surface
from .fem import FeSpace, assemble_load_sigma, assemble_mass, assemble_stiffness
from .lifts import make_lift, sigma_sup_deviation
from .mesh import build_initial_sphere_mesh, mesh_quality, refine_uniform
from .norms import errors_from_samples, fit_rates, surface_samples
from .sinc import SincRule, apply_fractional_inverse
from .solvers import CgShiftSolver, ShiftedFamily
from .sphere import SphereData, ZonalSolutions

__all__ = [
    "StudyConfig",
    "run_convergence",
    "run_sinc_study",
    "run_sigma_study",
    "export_solution",
    "thread_count",
]


def thread_count():
    """Worker threads for the node solves (env FRACSURF_THREADS)."""
    raw = os.environ.get("FRACSURF_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _fmt(x):
    return repr(float(x))


@dataclass(frozen=True)
class StudyConfig:
    """Configuration of one study run; JSON round-trippable."""

    s_values: tuple = (0.3, 0.5, 0.7)
    k: float = 0.15
    mesh_kind: str = "cube"
    levels: tuple = (2, 3, 4, 5)
    lift_kind: str = "sdf"
    data: str = "step"
    quad_assembly: int = 4
    quad_diagnostics: int = 6
    solver: str = "direct"
    out_dir: str = ""
    trunc: int = 10000
    k_values: tuple = (0.6, 0.45, 0.3)
    k_ref: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "s_values", tuple(float(s) for s in self.s_values))
        object.__setattr__(self, "levels", tuple(int(x) for x in self.levels))
        object.__setattr__(self, "k_values", tuple(float(x) for x in self.k_values))
        for s in self.s_values:
            if not 0.0 < s < 1.0:
                raise ValueError(f"fractional power must be in (0, 1), got {s}")
        if self.k <= 0.0:
            raise ValueError("quadrature spacing must be positive")
        if not self.levels or any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("levels must be a nonempty increasing sequence")
        if self.mesh_kind not in ("cube", "ico"):
            raise ValueError(f"unknown mesh kind {self.mesh_kind!r}")
        SphereData(self.data)  # validates the data spec
        _parse_solver(self.solver)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        raw = json.loads(text)
        for key in ("s_values", "levels", "k_values"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)


def _parse_solver(spec):
    if spec == "direct":
        return ("direct", None)
    if spec.startswith("cg:"):
        tol = float(spec.split(":", 1)[1])
        if tol <= 0.0:
            raise ValueError("cg tolerance must be positive")
        return ("cg", tol)
    if spec == "cg":
        return ("cg", 1e-10)
    raise ValueError(f"unknown solver spec {spec!r}")


def _make_shift_solver(spec, mass, stiffness):
    kind, tol = _parse_solver(spec)
    if kind == "direct":
        return ShiftedFamily(mass, stiffness)
    return CgShiftSolver(mass, stiffness, tol=tol)


def build_mesh_chain(mesh_kind, lift, max_level):
    """Initial mesh plus uniform refinements up to ``max_level``."""
    chain = [build_initial_sphere_mesh(mesh_kind)]
    for _ in range(max_level):
        chain.append(refine_uniform(chain[-1], lift))
    return chain


def _git_hash():
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True,
            text=True,
            cwd=os.path.dirname(os.path.abspath(__file__)),
            timeout=5,
        )
        return out.stdout.strip() or "unknown"
    except OSError:
        return "unknown"


@dataclass
class StudyResult:
    """Tables plus failure records of one study run."""

    config: StudyConfig
    tables: dict  # str(key) -> list of row dicts
    failures: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.failures


def run_convergence(config):
    """Mesh-refinement study of the fractional solver for each s.

    Returns a :class:`StudyResult` whose tables map ``s`` to rows
    ``{level, dofs, h, l2_error, h1_error, l2_slope, h1_slope,
    zero_mean, load_norm, seconds}``.
    """
    t_start = time.perf_counter()
    lift = make_lift(config.lift_kind)
    data = SphereData(config.data)
    solutions = ZonalSolutions(data, config.s_values, config.trunc)
    chain = build_mesh_chain(config.mesh_kind, lift, max(config.levels))
    workers = thread_count()

    tables = {s: [] for s in config.s_values}
    failures = []
    for level in config.levels:
        mesh = chain[level]
        try:
            space = FeSpace(mesh)
            mass = assemble_mass(space, config.quad_assembly)
            stiffness = assemble_stiffness(space, config.quad_assembly)
            load = assemble_load_sigma(space, lift, data.values, config.quad_assembly)
            shift_solver = _make_shift_solver(config.solver, mass, stiffness)
            samples = surface_samples(mesh, lift, config.quad_diagnostics)
            vals, grads = solutions.eval(samples.lifted.reshape(-1, 3))
            quality = mesh_quality(mesh)
        except Exception as exc:  # abort the whole level
            for s in config.s_values:
                failures.append({"s": s, "level": level, "reason": str(exc)})
            continue
        ones = np.ones(space.n_dofs)
        for i, s in enumerate(config.s_values):
            t_cell = time.perf_counter()
            try:
                rule = SincRule.create(s, config.k)
                coeffs = apply_fractional_inverse(
                    rule, mass, stiffness, load, solver=shift_solver, workers=workers
                )
                l2, h1 = errors_from_samples(samples, coeffs, vals[i], grads[i])
            except Exception as exc:
                failures.append({"s": s, "level": level, "reason": str(exc)})
                continue
            tables[s].append(
                {
                    "level": level,
                    "dofs": space.n_dofs,
                    "h": quality.h,
                    "l2_error": l2,
                    "h1_error": h1,
                    "zero_mean": abs(float(ones @ (mass @ coeffs))),
                    "load_norm": float(np.linalg.norm(load)),
                    "solves": rule.n_terms,
                    "seconds": time.perf_counter() - t_cell,
                }
            )

    for s, rows in tables.items():
        if not rows:
            continue
        if len(rows) >= 2:
            dofs = [r["dofs"] for r in rows]
            l2_slopes, _ = fit_rates(dofs, [r["l2_error"] for r in rows])
            h1_slopes, _ = fit_rates(dofs, [r["h1_error"] for r in rows])
        else:
            l2_slopes = h1_slopes = []
        rows[0]["l2_slope"] = rows[0]["h1_slope"] = None
        for row, sl2, sh1 in zip(rows[1:], l2_slopes, h1_slopes):
            row["l2_slope"] = float(sl2)
            row["h1_slope"] = float(sh1)
        # completed-cell monotonicity: refining must not increase the L2
        # error once the power is at least 1/2
        if s >= 0.5:
            errs = [row["l2_error"] for row in rows]
            if any(b >= a for a, b in zip(errs, errs[1:])):
                failures.append(
                    {"s": s, "level": None, "reason": "non-monotone L2 errors"}
                )

    result = StudyResult(
        config=config,
        tables=tables,
        failures=failures,
        metadata={
            "git": _git_hash(),
            "kernel_backend": kernels.BACKEND,
            "elapsed_seconds": time.perf_counter() - t_start,
        },
    )
    if config.out_dir:
        _emit_convergence(result)
    return result


_CSV_COLUMNS = ("level", "dofs", "h", "l2_error", "h1_error", "l2_slope", "h1_slope")


def _emit_convergence(result):
    os.makedirs(result.config.out_dir, exist_ok=True)
    for s, rows in result.tables.items():
        path = os.path.join(result.config.out_dir, f"convergence_s{s}.csv")
        with open(path, "w") as handle:
            handle.write(",".join(_CSV_COLUMNS) + "\n")
            for row in rows:
                cells = []
                for col in _CSV_COLUMNS:
                    val = row.get(col)
                    if val is None:
                        cells.append("")
                    elif col in ("level", "dofs"):
                        cells.append(str(int(val)))
                    else:
                        cells.append(_fmt(val))
                handle.write(",".join(cells) + "\n")
    _write_json(result, os.path.join(result.config.out_dir, "convergence.json"))


def _write_json(result, path):
    payload = {
        "config": asdict(result.config),
        "tables": {str(key): rows for key, rows in result.tables.items()},
        "failures": result.failures,
        "metadata": result.metadata,
    }
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, default=float)


def loglog_slope(x, y):
    """Least-squares slope of log y against log x."""
    coeffs = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(coeffs[0])


def run_sinc_study(config):
    """Spacing-refinement study at a fixed level against a fine reference.

    Uses the first entry of ``config.levels`` and the first entry of
    ``config.s_values``; errors are M-norm distances to the solution
    with spacing ``config.k_ref``.  Non-monotone errors are recorded as
    a failure (the expected decay is exponential in 1/k).
    """
    t_start = time.perf_counter()
    if min(config.k_values) <= config.k_ref:
        raise ValueError("reference spacing must be below every studied spacing")
    level = config.levels[0]
    s = config.s_values[0]
    lift = make_lift(config.lift_kind)
    data = SphereData(config.data)
    mesh = build_mesh_chain(config.mesh_kind, lift, level)[level]
    space = FeSpace(mesh)
    mass = assemble_mass(space, config.quad_assembly)
    stiffness = assemble_stiffness(space, config.quad_assembly)
    load = assemble_load_sigma(space, lift, data.values, config.quad_assembly)
    shift_solver = _make_shift_solver(config.solver, mass, stiffness)
    workers = thread_count()

    reference = apply_fractional_inverse(
        SincRule.create(s, config.k_ref), mass, stiffness, load,
        solver=shift_solver, workers=workers,
    )
    rows = []
    for k in config.k_values:
        coeffs = apply_fractional_inverse(
            SincRule.create(s, k), mass, stiffness, load,
            solver=shift_solver, workers=workers,
        )
        diff = coeffs - reference
        err = float(np.sqrt(diff @ (mass @ diff)))
        rows.append({"k": k, "error": err, "inv_k": 1.0 / k})

    failures = []
    errs = [row["error"] for row in rows]
    order = np.argsort([row["k"] for row in rows])[::-1]  # decreasing k
    ordered = [errs[i] for i in order]
    if any(b >= a for a, b in zip(ordered, ordered[1:])):
        failures.append({"s": s, "level": level, "reason": "non-monotone sinc errors"})
    slope = float(
        np.polyfit([row["inv_k"] for row in rows], np.log(errs), 1)[0]
    )
    result = StudyResult(
        config=config,
        tables={"sinc": rows},
        failures=failures,
        metadata={
            "slope_vs_inv_k": slope,
            "level": level,
            "s": s,
            "git": _git_hash(),
            "elapsed_seconds": time.perf_counter() - t_start,
        },
    )
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        path = os.path.join(config.out_dir, "sinc_study.csv")
        with open(path, "w") as handle:
            handle.write("k,error\n")
            for row in rows:
                handle.write(f"{_fmt(row['k'])},{_fmt(row['error'])}\n")
        _write_json(result, os.path.join(config.out_dir, "sinc_study.json"))
    return result


def run_sigma_study(config):
    """Decay of max |sigma - 1| per level for both lift kinds.

    The mesh chain is built with the configured lift; sigma deviations
    are then sampled for the orthogonal and the six-patch lift on the
    same meshes at the diagnostics quadrature order.
    """
    t_start = time.perf_counter()
    lift = make_lift(config.lift_kind)
    chain = build_mesh_chain(config.mesh_kind, lift, max(config.levels))
    signed = make_lift("sdf")
    generic = make_lift("generic")
    rows = []
    for level in config.levels:
        mesh = chain[level]
        quality = mesh_quality(mesh)
        rows.append(
            {
                "level": level,
                "dofs": mesh.n_vertices,
                "h": quality.h,
                "sigma_dev_signed": sigma_sup_deviation(signed, mesh, config.quad_diagnostics),
                "sigma_dev_generic": sigma_sup_deviation(generic, mesh, config.quad_diagnostics),
            }
        )
    dofs = [row["dofs"] for row in rows]
    metadata = {
        "slope_signed": loglog_slope(dofs, [r["sigma_dev_signed"] for r in rows]),
        "slope_generic": loglog_slope(dofs, [r["sigma_dev_generic"] for r in rows]),
        "git": _git_hash(),
        "elapsed_seconds": time.perf_counter() - t_start,
    }
    result = StudyResult(config=config, tables={"sigma": rows}, metadata=metadata)
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        path = os.path.join(config.out_dir, "sigma_study.csv")
        with open(path, "w") as handle:
            handle.write("level,dofs,h,sigma_dev_signed,sigma_dev_generic\n")
            for row in rows:
                handle.write(
                    f"{row['level']},{row['dofs']},{_fmt(row['h'])},"
                    f"{_fmt(row['sigma_dev_signed'])},{_fmt(row['sigma_dev_generic'])}\n"
                )
        _write_json(result, os.path.join(config.out_dir, "sigma_study.json"))
    return result


def run_solve(config, out_path=None):
    """Single solve at the last configured level; exports VTK + trace.

    Returns ``(mesh, coeffs)`` of the computed solution for the first
    configured power.
    """
    level = config.levels[-1]
    s = config.s_values[0]
    lift = make_lift(config.lift_kind)
    data = SphereData(config.data)
    mesh = build_mesh_chain(config.mesh_kind, lift, level)[level]
    space = FeSpace(mesh)
    mass = assemble_mass(space, config.quad_assembly)
    stiffness = assemble_stiffness(space, config.quad_assembly)
    load = assemble_load_sigma(space, lift, data.values, config.quad_assembly)
    shift_solver = _make_shift_solver(config.solver, mass, stiffness)
    coeffs = apply_fractional_inverse(
        SincRule.create(s, config.k), mass, stiffness, load,
        solver=shift_solver, workers=thread_count(),
    )
    if out_path is None and config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        out_path = os.path.join(config.out_dir, f"solution_s{s}_level{level}.vtk")
    if out_path:
        export_solution(mesh, coeffs, out_path)
    return mesh, coeffs
