"""
Command-line front end.

    gdmkit check GDM.json [--oracle]
    gdmkit oracle   --model M --electrons N [--epsilon X] [--states S]
    gdmkit solve    --model M --electrons N --epsilon X --lambda-steps K --states S [--oracle]
    gdmkit propagate --model M --electrons N --epsilon X --dt X --t-final X [--schedule NAME|JOB.json]
    gdmkit sudden   --model M --electrons N --epsilon X --dt X --t-final X
    gdmkit thermalize --model M --electrons N --dt X --t-final X

Exit status: 0 success, 1 a rule violation or negative representability
verdict, 2 invalid input, 3 resource or convergence failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .continuation import (
    AMBIGUITY,
    CROSSING_RESOLUTION,
    DEFAULT_CANDIDATES,
    MAX_DEPTH,
    ground_state_search,
    scan_curves,
)
from .dynamics import (
    NucleiState,
    Schedule,
    eigenprojection,
    fidelity_report,
    propagate_coupled,
    propagate_gdm,
    sudden_density,
)
from .errors import (
    BasisTagError,
    DegeneracyError,
    DomainError,
    GridResolutionError,
    ResourceLimitError,
    StructureError,
)
from .gdm import PHYSICAL_TOL, check_nrep, gdm_from_ci
from .model import load_model
from .oracle import fci_solve

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
        return value

    return parse


def _non_negative(text):
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative value, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gdmkit", description="Geminal density matrix toolkit for 1-D lattice models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, electrons=True):
        p.add_argument("--model", required=True, type=Path, help="model JSON file")
        if electrons:
            p.add_argument("--electrons", required=True, type=_positive(int), help="electron count N")
        p.add_argument("--seed", type=int, default=None, help="override the model's perturbation seed")
        p.add_argument("--out", type=Path, default=Path("gdmkit-out"), help="output directory")

    p = sub.add_parser("check", help="run the N-representability rule suite on a GDM or CI vector file")
    p.add_argument("gdm", type=Path, help="GDM JSON (or CI vector JSON, converted first)")
    p.add_argument("--oracle", action="store_true", help="also run the PSD, Pauli and generability cross-checks")
    p.add_argument("--out", type=Path, default=None, help="optional directory for report.json")

    p = sub.add_parser("oracle", help="full CI eigenpairs")
    common(p)
    p.add_argument("--epsilon", type=_non_negative, default=0.0)
    p.add_argument("--lam", type=_non_negative, default=1.0, help="interaction strength (default 1)")
    p.add_argument("--states", type=_positive(int), default=1)

    p = sub.add_parser("solve", help="scan eigencurves and search initial configurations")
    common(p)
    p.add_argument("--epsilon", type=_positive(float), default=0.05)
    p.add_argument("--lambda-steps", type=_positive(int), default=100, help="grid intervals on [0, 1]")
    p.add_argument("--states", type=_positive(int), default=None, help="curves counted as scanned (default: all)")
    p.add_argument("--candidates", type=_positive(int), default=DEFAULT_CANDIDATES)
    p.add_argument("--oracle", action="store_true", help="compare every candidate with FCI")

    for name, text in (("propagate", "GDM propagation under a ramp or sudden schedule"), ("sudden", "sudden switch-on density analysis")):
        p = sub.add_parser(name, help=text)
        common(p)
        p.add_argument("--epsilon", type=_non_negative, default=0.05)
        p.add_argument("--dt", type=_positive(float), default=0.05)
        p.add_argument("--t-final", type=_non_negative, default=100.0)
        p.add_argument("--stride", type=_positive(int), default=1)
        if name == "propagate":
            p.add_argument("--schedule", default="ramp", help="ramp, sudden, constant, or a job JSON file")
            p.add_argument("--oracle", action="store_true", help="report deviation from FCI propagation")

    p = sub.add_parser("thermalize", help="coupled electron-nuclei run")
    common(p)
    p.add_argument("--epsilon", type=_non_negative, default=0.0)
    p.add_argument("--dt", type=_positive(float), default=0.05)
    p.add_argument("--t-final", type=_non_negative, default=100.0)
    p.add_argument("--stride", type=_positive(int), default=1)
    return parser


def _model(args):
    if not args.model.is_file():
        raise DomainError(f"model file {args.model} does not exist")
    model = load_model(args.model)
    return model if args.seed is None else model.with_seed(args.seed)


def _inputs(args) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "argv"}


def cmd_check(args) -> int:
    if not args.gdm.is_file():
        raise DomainError(f"GDM file {args.gdm} does not exist")
    data = io.read_json(args.gdm)
    D = gdm_from_ci(io.civector_from_dict(data)) if "coefficients" in data else io.gdm_from_dict(data)
    report = check_nrep(D, oracle=args.oracle)
    for line in report.lines():
        print(line)
    print("PASS" if report.passed else "FAIL: " + ", ".join(r.name for r in report.failed()))
    if args.out is not None:
        path = io.write_json(args.out / "report.json", report.to_dict())
        io.write_manifest(args.out, "check", _inputs(args), [path], {"rule": PHYSICAL_TOL}, argv=args.argv)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_oracle(args) -> int:
    model = _model(args)
    pairs = fci_solve(model, args.electrons, args.epsilon, args.lam, k=args.states)
    rows = [(i + 1, E) for i, (E, _) in enumerate(pairs)]
    for i, E in rows:
        print(f"{i:4d}  {E:.12f}")
    out = [
        io.write_csv(args.out / "eigenpairs.csv", ["index", "energy"], rows, integer_columns=(0,)),
        io.save_civector(args.out / "ground_civector.json", pairs[0][1]),
    ]
    io.write_manifest(args.out, "oracle", _inputs(args), out, seed=model.perturbation_seed, argv=args.argv)
    return EXIT_OK


def cmd_solve(args) -> int:
    model = _model(args)
    lambdas = np.linspace(0.0, 1.0, args.lambda_steps + 1)
    curves = scan_curves(model, args.electrons, args.epsilon, lambdas, args.states)
    result = ground_state_search(curves, limit=args.candidates, oracle=args.oracle)
    seed = model.perturbation_seed
    try:
        best = result.ground
    except DomainError:
        best = None
    rows = []
    for rank, s in enumerate(result.ranked, start=1):
        dev = s.fci.deviation if s.fci else float("nan")
        rows.append((rank, s.final_energy, int(s.representable), dev, " ".join(map(str, s.initial_configuration))))
    out = [io.write_curves(args.out / "curves.csv", curves)]
    solution = (best or result.ranked[0]).to_dict(seed)
    solution["lowest_block"] = result.lowest_block.to_dict(seed)
    solution["skipped_candidates"] = [list(a) for a in result.skipped]
    out.append(io.write_json(args.out / "solution.json", solution))
    path = args.out / "candidates.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("rank,final_energy,representable,deviation,configuration\n")
        for rank, E, rep, dev, conf in rows:
            fh.write(f"{rank},{E:{io.FLOAT_FORMAT}},{rep},{dev:{io.FLOAT_FORMAT}},{conf}\n")
    out.append(path)
    io.write_manifest(args.out, "solve", _inputs(args), out, {"tracking_margin": AMBIGUITY, "refinement_depth": MAX_DEPTH, "crossing_resolution": CROSSING_RESOLUTION}, seed, argv=args.argv)
    if best is None:
        print("no representable candidate", file=sys.stderr)
        return EXIT_VIOLATION
    print(f"ground configuration {best.initial_configuration}: E = {best.final_energy:.12f}")
    if best.fci is not None:
        print(f"FCI {best.fci.fci_energy:.12f}  deviation {best.fci.deviation:+.3e}")
    lb = result.lowest_block
    print(f"lowest {len(lb.occupied_curves)} curves at lam=1 {lb.occupied_curves}: representable={lb.representable}")
    return EXIT_OK


def _schedule(args) -> Schedule:
    name = args.schedule
    if name == "ramp":
        return Schedule.ramp(0.0, max(args.t_final, args.dt), args.epsilon, args.dt, args.t_final)
    if name == "sudden":
        return Schedule.sudden(0.0, args.epsilon, args.dt, args.t_final)
    if name == "constant":
        return Schedule.constant(args.epsilon, 1.0, args.dt, args.t_final)
    path = Path(name)
    if not path.is_file():
        raise DomainError(f"unknown schedule {name!r}: expected ramp, sudden, constant or a job JSON file")
    job = io.read_json(path)
    job.setdefault("dt", args.dt)
    job.setdefault("t_final", args.t_final)
    return Schedule.from_job(job, args.epsilon)


def cmd_propagate(args) -> int:
    model = _model(args)
    schedule = _schedule(args)
    N = args.electrons
    D0 = eigenprojection(model, N, schedule.eps(0.0), tuple(range(1, N + 1)))
    traj = propagate_gdm(D0, model, N, schedule, stride=args.stride)
    out = [io.write_trajectory(args.out / "trajectory.csv", traj), io.save_gdm(args.out / "final_gdm.json", traj.final)]
    if args.oracle:
        rep = fidelity_report(model, N, schedule, stride=args.stride)
        out.append(io.write_json(args.out / "fidelity.json", {k: v for k, v in rep.items() if not isinstance(v, np.ndarray)}))
        print(f"max density deviation from FCI {rep['max_density_deviation']:.3e}, energy {rep['max_energy_deviation']:.3e}")
    io.write_manifest(args.out, "propagate", _inputs(args), out, {"conservation": 1e-9}, model.perturbation_seed, argv=args.argv)
    print(f"{len(traj.times)} samples, final energy {traj.energies[-1]:.12f}")
    return EXIT_OK


def cmd_sudden(args) -> int:
    model = _model(args)
    N = args.electrons
    D0 = eigenprojection(model, N, args.epsilon, tuple(range(1, N + 1)))
    t_grid = np.arange(0.0, args.t_final + 0.5 * args.dt, args.dt)[:: args.stride]
    res = sudden_density(D0, model, N, t_grid, args.epsilon)
    K = model.K
    out = [
        io.write_csv(args.out / "density.csv", ["t"] + [f"rho_{k}" for k in range(1, K + 1)], np.column_stack([res.times, res.density])),
        io.write_csv(
            args.out / "density_stats.csv",
            ["orbital", "mean", "variance", "variance_coherent", "empirical_mean", "empirical_variance"],
            np.column_stack([np.arange(1, K + 1), res.mean, res.variance, res.variance_coherent, res.empirical_mean(), res.empirical_variance()]),
            integer_columns=(0,),
        ),
    ]
    io.write_manifest(args.out, "sudden", _inputs(args), out, {"degeneracy": 1e-8}, model.perturbation_seed, argv=args.argv)
    print(f"{len(res.times)} samples; max |mean - empirical mean| = {np.abs(res.mean - res.empirical_mean()).max():.3e}")
    return EXIT_OK


def cmd_thermalize(args) -> int:
    model = _model(args)
    N = args.electrons
    D0 = eigenprojection(model, N, args.epsilon, tuple(range(1, N + 1)))
    steps = int(round(args.t_final / args.dt))
    traj = propagate_coupled(D0, NucleiState.from_model(model), model, N, args.dt, steps, eps=args.epsilon, stride=args.stride)
    out = [io.write_trajectory(args.out / "trajectory.csv", traj)]
    io.write_manifest(args.out, "thermalize", _inputs(args), out, {"force_crosscheck": 1e-10}, model.perturbation_seed, argv=args.argv)
    drift = np.abs(traj.extra["e_total"] - traj.extra["e_total"][0]).max()
    print(f"{len(traj.times)} samples, total-energy drift {drift:.3e}")
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "oracle": cmd_oracle,
    "solve": cmd_solve,
    "propagate": cmd_propagate,
    "sudden": cmd_sudden,
    "thermalize": cmd_thermalize,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    args.argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return COMMANDS[args.command](args)
    except (ResourceLimitError, GridResolutionError, DegeneracyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DomainError, BasisTagError, StructureError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
