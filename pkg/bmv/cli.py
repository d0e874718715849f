"""CLI entry point for the bmv measure tool."""

import argparse
import json
import os
import sys
from typing import Optional

from rich.console import Console
from rich.markup import escape

from bmv.config_manager import TOLERANCES, ConfigurationManager, RunConfig
from bmv.errors import EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_OK, BMVError, ParameterError
from bmv.measure_service import MeasureService
from bmv.utils import (
    parse_assignment,
    parse_random_size,
    render_coefficients,
    render_measure,
    render_report,
    setup_logging,
)

COMMANDS = ["density", "verify", "poly", "atoms", "config"]


def _random_size(text: str) -> int:
    try:
        return parse_random_size(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    inputs = common.add_argument_group("input")
    inputs.add_argument("--matrix-a", metavar="FILE", help="Hermitian A as matrix JSON")
    inputs.add_argument("--matrix-b", metavar="FILE", help="Hermitian B as matrix JSON")
    inputs.add_argument(
        "--random", type=_random_size, metavar="N", help="seeded random instance (N or n=N)"
    )
    inputs.add_argument("--seed", type=int, help="seed for --random")

    numerics = common.add_argument_group("numerics")
    numerics.add_argument("--eps-split", type=float, help="splitting step for repeated eigenvalues of B")
    numerics.add_argument("--nodes", type=int, help="initial number of contour nodes (power of two)")
    numerics.add_argument("--max-nodes", type=int, help="largest number of contour nodes")
    numerics.add_argument("--points", type=int, help="density samples per interval")
    numerics.add_argument("--precision", choices=["auto", "double", "mp"], help="arithmetic for the density sums")
    numerics.add_argument("--workers", type=int, help="threads for the eigenvalue sweep")
    numerics.add_argument(
        "--tol",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="override a tolerance, e.g. tau_laplace=1e-7 (repeatable)",
    )

    output = common.add_argument_group("output")
    output.add_argument("--original", action="store_true", help="report locations for the unshifted B")
    output.add_argument("--json", action="store_true", help="write JSON instead of CSV")
    output.add_argument("--out", metavar="PATH", help="output file (format from suffix)")
    output.add_argument("--out-dir", metavar="DIR", help="directory for default output files")
    output.add_argument(
        "--dump-contour", metavar="PATH", help="write the tracked branches as CSV (density)"
    )
    output.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="bmv",
        description="Representing measures of Tr exp(A - tB) for Hermitian pairs",
    )
    subparsers = parser.add_subparsers(dest="command")

    subparsers.add_parser("density", parents=[common], help="Compute atoms and density")
    subparsers.add_parser("verify", parents=[common], help="Check the Laplace representation")

    poly_parser = subparsers.add_parser(
        "poly", parents=[common], help="Coefficients of Tr (A + tB)^p"
    )
    poly_parser.add_argument("--p", type=int, required=True, help="power p (1..20)")
    poly_parser.add_argument(
        "--psd", action="store_true", help="with --random, draw B positive semidefinite"
    )

    subparsers.add_parser("atoms", parents=[common], help="Atoms only, no contour work")

    config_parser = subparsers.add_parser(
        "config", parents=[common], help="Show the effective configuration"
    )
    config_parser.add_argument("--write", metavar="PATH", help="save it as JSON")
    return parser


def _tolerances(items: list) -> dict:
    overrides = {}
    for item in items:
        try:
            name, value = parse_assignment(item)
            number = float(value)
        except ValueError as exc:
            raise ParameterError(f"--tol: {exc}") from exc
        if not name.startswith("tau_"):
            name = f"tau_{name}"
        if name not in TOLERANCES:
            raise ParameterError(f"--tol: unknown tolerance {name!r}")
        overrides[name] = number
    return overrides


def resolve_config(args: argparse.Namespace, manager: ConfigurationManager) -> RunConfig:
    """Defaults < $BMV_CONFIG file < command-line flags."""
    return manager.load(
        eps_split=args.eps_split,
        n_nodes_initial=args.nodes,
        n_nodes_max=args.max_nodes,
        points_per_interval=args.points,
        precision=args.precision,
        workers=args.workers,
        seed=args.seed,
        out_dir=args.out_dir,
        coordinates="original" if args.original else None,
        **_tolerances(args.tol),
    )


def _load_pair(args, service: MeasureService, config: RunConfig, psd: bool = False):
    return service.load_pair(
        args.matrix_a,
        args.matrix_b,
        args.random,
        config.seed,
        psd=psd,
        tol=config.tau_hermitian,
    )


def _export(args, service, payload, config: RunConfig, default_name: str) -> None:
    if args.out:
        service.export(payload, None, args.out, config)
    elif args.json:
        service.export(payload, "json", os.path.join(config.out_dir, f"{default_name}.json"), config)
    else:
        service.export(payload, "csv", config.out_dir, config)


def cmd_density(args, service: MeasureService, config: RunConfig, console: Console) -> int:
    pair = _load_pair(args, service, config)
    measure = service.density(pair, config)
    _export(args, service, measure, config, "measure")
    if args.dump_contour:
        service.dump_contour(measure, args.dump_contour)
    render_measure(measure, console)
    return EXIT_OK


def cmd_atoms(args, service: MeasureService, config: RunConfig, console: Console) -> int:
    pair = _load_pair(args, service, config)
    measure = service.atoms(pair, config)
    if args.out or args.json:
        _export(args, service, measure, config, "measure")
    render_measure(measure, console)
    return EXIT_OK


def cmd_verify(args, service: MeasureService, config: RunConfig, console: Console) -> int:
    pair = _load_pair(args, service, config)
    report = service.verify(pair, config)
    if args.out:
        service.export(report, None, args.out, config)
    elif args.json:
        service.export(report, "json", os.path.join(config.out_dir, "report.json"), config)
    render_report(report, console)
    return EXIT_OK if report.all_passed else EXIT_CHECK_FAILED


def cmd_poly(args, service: MeasureService, config: RunConfig, console: Console) -> int:
    pair = _load_pair(args, service, config, psd=args.psd)
    result = service.poly(pair, args.p, config)
    if args.out:
        service.export(result, None, args.out, config)
    elif args.json:
        service.export(result, "json", os.path.join(config.out_dir, "coefficients.json"), config)
    render_coefficients(result, console)
    return EXIT_OK if result.nonnegative else EXIT_CHECK_FAILED


def cmd_config(args, manager: ConfigurationManager, config: RunConfig, console: Console) -> int:
    if args.write:
        path = manager.write_config(config, args.write)
        console.print(f"Configuration written to: {escape(path)}")
    else:
        console.print(json.dumps(config.to_dict(), indent=4), markup=False, highlight=False)
    return EXIT_OK


def main(argv: Optional[list] = None) -> int:
    """Main CLI entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(sys.argv[1:] if argv is None else argv)
    if args.command not in COMMANDS:
        parser.print_help()
        return EXIT_INPUT

    err_console = Console(stderr=True)
    console = Console()
    setup_logging(args.verbose, err_console)

    try:
        manager = ConfigurationManager()
        config = resolve_config(args, manager)
        if args.command == "config":
            return cmd_config(args, manager, config, console)

        service = MeasureService(manager, err_console)
        handlers = {
            "density": cmd_density,
            "verify": cmd_verify,
            "poly": cmd_poly,
            "atoms": cmd_atoms,
        }
        return handlers[args.command](args, service, config, console)
    except BMVError as exc:
        err_console.print(f"[red]error:[/red] {escape(str(exc))}")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
