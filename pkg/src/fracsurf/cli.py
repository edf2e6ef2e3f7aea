"""Command line driver.

Subcommands: ``converge`` (mesh-refinement study), ``sinc-study``
(quadrature-spacing study), ``sigma-study`` (geometry approximation
study) and ``solve`` (single solve with VTK/trace export).

Exit codes: 0 on full success, 2 when some (s, level) cells failed but
the run completed, 1 on configuration errors.  The environment variable
``FRACSURF_THREADS`` sets the number of worker threads for the shifted
solves.
"""

import argparse
import sys

from .harness import (
    StudyConfig,
    run_convergence,
    run_sigma_study,
    run_sinc_study,
    run_solve,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SystemExit(self._config_error(message))

    @staticmethod
    def _config_error(message):
        print(f"error: {message}", file=sys.stderr)
        return 1


def _levels(text):
    if ".." in text:
        first, last = text.split("..", 1)
        return tuple(range(int(first), int(last) + 1))
    return tuple(int(x) for x in text.split(","))


def _floats(text):
    return tuple(float(x) for x in text.split(","))


def _add_common(sub):
    sub.add_argument("--s", type=_floats, default=(0.3, 0.5, 0.7),
                     help="fractional powers, comma separated")
    sub.add_argument("--k", type=_floats, default=(0.15,),
                     help="sinc spacing (list only for sinc-study)")
    sub.add_argument("--levels", type=_levels, default=(2, 3, 4, 5),
                     help="refinement levels, A..B or comma list")
    sub.add_argument("--mesh", choices=("cube", "ico"), default="cube")
    sub.add_argument("--lift", choices=("sdf", "generic"), default="sdf")
    sub.add_argument("--data", default="step", help="step or mode:<j>")
    sub.add_argument("--quad", type=int, default=6,
                     help="diagnostics quadrature order (points per direction)")
    sub.add_argument("--solver", default="direct", help="direct or cg:<tol>")
    sub.add_argument("--out", default="", help="output directory")
    sub.add_argument("--trunc", type=int, default=10000,
                     help="modes kept in the zonal reference series")


def _build_config(args, k_values=()):
    return StudyConfig(
        s_values=args.s,
        k=args.k[0],
        mesh_kind=args.mesh,
        levels=args.levels,
        lift_kind=args.lift,
        data=args.data,
        quad_assembly=4,
        quad_diagnostics=args.quad,
        solver=args.solver,
        out_dir=args.out,
        trunc=args.trunc,
        k_values=k_values or args.k,
        k_ref=getattr(args, "k_ref", 0.05),
    )


def main(argv=None):
    parser = _Parser(prog="fracsurf", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    conv = subs.add_parser("converge", help="mesh-refinement convergence study")
    _add_common(conv)

    sinc = subs.add_parser("sinc-study", help="quadrature spacing study")
    _add_common(sinc)
    sinc.add_argument("--k-ref", dest="k_ref", type=float, default=0.05,
                      help="reference spacing (below every studied k)")

    sigma = subs.add_parser("sigma-study", help="geometry approximation study")
    _add_common(sigma)

    solve = subs.add_parser("solve", help="single solve with VTK export")
    _add_common(solve)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1

    try:
        if args.command == "sinc-study":
            config = _build_config(args, k_values=args.k)
        else:
            config = _build_config(args)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.command == "converge":
        result = run_convergence(config)
        for s, rows in result.tables.items():
            for row in rows:
                print(
                    f"s={s} level={row['level']} dofs={row['dofs']} "
                    f"l2={row['l2_error']:.6e} h1={row['h1_error']:.6e}"
                )
            if rows and rows[-1]["l2_slope"] is not None:
                print(
                    f"s={s} last-segment slopes: "
                    f"l2={rows[-1]['l2_slope']:.3f} h1={rows[-1]['h1_slope']:.3f}"
                )
    elif args.command == "sinc-study":
        result = run_sinc_study(config)
        for row in result.tables["sinc"]:
            print(f"k={row['k']} error={row['error']:.6e}")
        print(f"slope of log(error) vs 1/k: {result.metadata['slope_vs_inv_k']:.3f}")
    elif args.command == "sigma-study":
        result = run_sigma_study(config)
        for row in result.tables["sigma"]:
            print(
                f"level={row['level']} dofs={row['dofs']} "
                f"signed={row['sigma_dev_signed']:.6e} "
                f"generic={row['sigma_dev_generic']:.6e}"
            )
        print(
            f"slopes vs dofs: signed={result.metadata['slope_signed']:.3f} "
            f"generic={result.metadata['slope_generic']:.3f}"
        )
    else:  # solve
        mesh, coeffs = run_solve(config)
        print(f"solved: {mesh.n_vertices} dofs, |U|_max = {abs(coeffs).max():.6e}")
        return 0

    for failure in result.failures:
        print(
            f"FAILED cell s={failure['s']} level={failure['level']}: "
            f"{failure['reason']}",
            file=sys.stderr,
        )
    return 0 if result.ok else 2


if __name__ == "__main__":
    sys.exit(main())
