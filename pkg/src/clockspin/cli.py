"""Command-line interface.

Exit codes: 0 success, 2 invalid argument, 3 resource limit,
4 a solver finished without reaching its tolerance (output still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from math import log, pi

import numpy as np

from .energy import energy_report
from .errors import InvalidArgumentError, ResourceLimitError
from .flat_metric import flat_distance
from .harness import (
    RegimeSweepSpec,
    build_construction,
    jacobian_equivalence_check,
    render_field,
    run_sweep,
)
from .lattice import ClockParams, load_field, project_clock, save_field
from .minimization import (
    RenormalizedInput,
    core_energy_solve,
    m_tilde_solve,
    renormalized_energy,
)
from .solver_limits import RELAX_MAX_SWEEPS, RELAX_TOL
from .vorticity import (
    VortexMeasure,
    triangle_vorticity,
    vorticity_measure,
    vorticity_measure_centered,
)

TWO_PI = 2.0 * pi


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="ascii") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgumentError(f"cannot read JSON from {path}: {exc}") from exc


def _cmd_make_field(args) -> int:
    spec = _load_json(args.spec)
    eps = args.eps if args.eps is not None else spec.get("eps")
    if eps is None:
        raise InvalidArgumentError("eps must come from --eps or the spec file")
    n = args.N if args.N is not None else spec.get("N")
    clock = ClockParams(int(n)) if n else None
    u = build_construction(spec, float(eps), clock)
    if args.project:
        if clock is None:
            raise InvalidArgumentError("--project needs a clock N")
        u = project_clock(u, clock)
    save_field(u, args.out)
    return 0


def _cmd_energy(args) -> int:
    u = load_field(args.field)
    _emit(energy_report(u).to_json(), args.out)
    return 0


def _cmd_vorticity(args) -> int:
    u = load_field(args.field)
    if args.variant == "centered":
        mu = vorticity_measure_centered(u)
    elif args.variant == "triangle":
        mu = triangle_vorticity(u)
    else:
        mu = vorticity_measure(u)
    _emit(mu.to_json(), args.out)
    return 0


def _cmd_flat_dist(args) -> int:
    mu = VortexMeasure.from_json(_load_json(args.a))
    nu = VortexMeasure.from_json(_load_json(args.b))
    _emit(flat_distance(mu, nu).to_json(), args.out)
    return 0


def _cmd_core_energy(args) -> int:
    center = tuple(float(v) for v in args.center.split(","))
    if args.eps_list:
        return _core_energy_sequence(args, center)
    if args.eps is None:
        raise InvalidArgumentError("provide --eps or --eps-list")
    gamma, res = core_energy_solve(
        args.eps, args.r, center, tol=args.tol, max_sweeps=args.max_sweeps
    )
    _emit(
        {
            "eps": args.eps,
            "r": args.r,
            "center": list(center),
            "gamma": gamma,
            "g": gamma - TWO_PI * log(args.r / args.eps),
            "sweeps": res.iterations,
            "residual": res.residual,
            "converged": res.converged,
        },
        args.out,
    )
    return 0 if res.converged else 4


def _core_energy_sequence(args, center) -> int:
    eps_list = sorted((float(v) for v in args.eps_list.split(",")), reverse=True)
    lines = ["eps,gamma,g"]
    all_converged = True
    gs = []
    for eps in eps_list:
        gamma, res = core_energy_solve(
            eps, args.r, center, tol=args.tol, max_sweeps=args.max_sweeps
        )
        all_converged &= res.converged
        gs.append(gamma - TWO_PI * log(args.r / eps))
        lines.append(f"{eps!r},{gamma!r},{gs[-1]!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        print(text, end="")
    if args.out_fig:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 3.6))
        ax.semilogx(eps_list, gs, "o-")
        ax.set_xlabel(r"$\varepsilon$")
        ax.set_ylabel(r"core energy minus $2\pi\log(r/\varepsilon)$")
        ax.invert_xaxis()
        fig.tight_layout()
        fig.savefig(args.out_fig, dpi=150)
        plt.close(fig)
    return 0 if all_converged else 4


def _cmd_renorm(args) -> int:
    mu = VortexMeasure.from_json(_load_json(args.measure))
    etas = [float(v) for v in args.eta_list.split(",")]
    w = renormalized_energy(mu, args.fd_h)
    m = mu.total_variation()
    lines = ["eta,m_tilde,m_tilde_minus_log,renormalized_energy"]
    shifted = []
    all_converged = True
    for eta in etas:
        res = m_tilde_solve(
            RenormalizedInput(mu, eta, args.grid_h),
            tol=args.tol,
            max_sweeps=args.max_sweeps,
        )
        all_converged &= res.converged
        shifted.append(res.value - TWO_PI * m * abs(log(eta)))
        lines.append(f"{eta!r},{res.value!r},{shifted[-1]!r},{w!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        print(text, end="")
    if args.out_fig:
        _plot_renorm(etas, shifted, w, args.out_fig)
    return 0 if all_converged else 4


def _plot_renorm(etas, shifted, w, path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.plot(etas, shifted, "o-", label=r"$\tilde m(\eta) - 2\pi M|\log\eta|$")
    ax.axhline(w, color="tab:red", ls="--", label="renormalized energy")
    ax.set_xlabel(r"$\eta$")
    ax.invert_xaxis()
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _cmd_regime_sweep(args) -> int:
    from .harness import SweepRow

    spec = RegimeSweepSpec.from_json(_load_json(args.config))
    if args.out_csv:
        spec.out_csv = args.out_csv
    if args.out_fig:
        spec.out_fig = args.out_fig
    if args.allow_fine:
        spec.allow_fine = True
    rows = run_sweep(spec)
    if not spec.out_csv:
        print("\n".join([SweepRow.HEADER] + [r.csv() for r in rows]))
    return 0


def _cmd_jacobian_check(args) -> int:
    u = load_field(args.field)
    cx, cy, r1, r2 = (float(v) for v in args.cone.split(","))
    if not 0 < r1 < r2:
        raise InvalidArgumentError("cone radii must satisfy 0 < r1 < r2")

    def phi(p):
        rho = np.hypot(p[0] - cx, p[1] - cy)
        return float(np.clip((r2 - rho) / (r2 - r1), 0.0, 1.0))

    mu_pair, jac_pair = jacobian_equivalence_check(u, phi)
    _emit(
        {
            "mu_pairing": mu_pair,
            "jacobian_pairing": jac_pair,
            "difference": mu_pair - jac_pair,
        },
        args.out,
    )
    return 0


def _cmd_render(args) -> int:
    u = load_field(args.field)
    measure = None
    if args.measure:
        measure = VortexMeasure.from_json(_load_json(args.measure))
    elif args.mark_vortices:
        measure = vorticity_measure(u)
    render_field(u, args.out, measure)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="clockspin",
        description="Lattice spin fields on the circle: energies, vortices, "
        "flat metric, core and renormalized energies.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("make-field", help="build a construction and save it")
    q.add_argument("spec", help="construction spec JSON")
    q.add_argument("out", help="output field file")
    q.add_argument("--eps", type=float)
    q.add_argument("--N", type=int)
    q.add_argument("--project", action="store_true",
                   help="project a circle-valued construction onto the clock")
    q.set_defaults(func=_cmd_make_field)

    q = sub.add_parser("energy", help="energy report of a field file")
    q.add_argument("field")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_energy)

    q = sub.add_parser("vorticity", help="vortex measure of a field file")
    q.add_argument("field")
    q.add_argument("--variant", choices=["corner", "centered", "triangle"],
                   default="corner")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_vorticity)

    q = sub.add_parser("flat-dist", help="flat distance between two measures")
    q.add_argument("a")
    q.add_argument("b")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_flat_dist)

    q = sub.add_parser("core-energy", help="vortex core energy in a ball")
    q.add_argument("--eps", type=float)
    q.add_argument("--eps-list",
                   help="decreasing eps values: emit the CSV of (eps, gamma, g)")
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--center", default="0,0")
    q.add_argument("--tol", type=float, default=RELAX_TOL)
    q.add_argument("--max-sweeps", type=int, default=RELAX_MAX_SWEEPS)
    q.add_argument("--out")
    q.add_argument("--out-fig", help="plot g against eps (with --eps-list)")
    q.set_defaults(func=_cmd_core_energy)

    q = sub.add_parser("renorm", help="excised-ball minima and renormalized energy")
    q.add_argument("--measure", required=True)
    q.add_argument("--eta-list", required=True)
    q.add_argument("--grid-h", type=float, default=1 / 128,
                   help="lattice step of the discrete minimization")
    q.add_argument("--fd-h", type=float, default=1 / 256,
                   help="finite-difference step of the harmonic solve")
    q.add_argument("--tol", type=float, default=1e-8)
    q.add_argument("--max-sweeps", type=int, default=RELAX_MAX_SWEEPS)
    q.add_argument("--out")
    q.add_argument("--out-fig", help="plot the shifted minima against eta")
    q.set_defaults(func=_cmd_renorm)

    q = sub.add_parser("regime-sweep", help="run a scaling-regime sweep")
    q.add_argument("config", help="sweep config JSON")
    q.add_argument("--out-csv")
    q.add_argument("--out-fig")
    q.add_argument("--allow-fine", action="store_true",
                   help="permit eps below the desk-scale floor of 2^-9")
    q.set_defaults(func=_cmd_regime_sweep)

    q = sub.add_parser("jacobian-check",
                       help="compare winding and Jacobian pairings")
    q.add_argument("field")
    q.add_argument("--cone", default="0,0,0.25,0.5",
                   help="cx,cy,r1,r2 of the conical test function")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_jacobian_check)

    q = sub.add_parser("render", help="render a field to SVG")
    q.add_argument("field")
    q.add_argument("out")
    q.add_argument("--measure", help="overlay a vortex measure JSON")
    q.add_argument("--mark-vortices", action="store_true",
                   help="overlay the field's own vortex measure")
    q.set_defaults(func=_cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
